// Hierarchical row-decoder model.
//
// A local row address is sliced into predecoder fields (least significant
// field first).  Each predecoder drives one-hot select lines that are
// latched; a normal activation latches exactly one value per field.  When a
// precharge is interrupted early, the latches keep their charge, so a second
// activation adds its field values to the ones already latched.  The final
// wordline drive is the Cartesian product of the latched values of every
// field: two activations that differ in k fields drive 2^k wordlines at
// once, which is how 2/4/8/16/32-row simultaneous activation arises.
#pragma once

#include <vector>

#include "pudsim/profile.hpp"
#include "pudsim/rng.hpp"

namespace pudsim {

struct AddressParts {
  int subarray = 0;
  int local = 0;  // row index within the subarray's decoder window
};

// Field value per predecoder stage, least significant field first.
using FieldValues = std::vector<int>;

// Latched select values per predecoder stage (sorted, unique).
struct LatchState {
  std::vector<std::vector<int>> fields;

  bool empty() const { return fields.empty(); }
  // Number of wordlines the current latch contents drive.
  long long drive_count() const {
    if (fields.empty()) return 0;
    long long n = 1;
    for (const auto& f : fields) n *= static_cast<long long>(f.size());
    return n;
  }
};

AddressParts split_address(const DeviceProfile& p, int row);
int join_address(const DeviceProfile& p, const AddressParts& parts);

// Slice a local row address into predecoder field values.
FieldValues predecode(const DeviceProfile& p, int local);
// Reassemble a local row address from field values.
int compose_local(const DeviceProfile& p, const FieldValues& fields);

// Latch state after a single activation.
LatchState latch_single(const DeviceProfile& p, int local);
// Merge another activation into an existing latch state (interrupted
// precharge).  Field values already present are kept once.
void latch_merge(LatchState& latch, const FieldValues& fields);

// All local rows driven by the latch state, ascending.  Rows outside the
// populated part of the subarray (>= rows_per_subarray) do not exist and
// are omitted.
std::vector<int> expand_activation(const DeviceProfile& p, const LatchState& latch);

// Convenience: local rows driven when activating `local_b` right after an
// interrupted precharge of `local_a`.
std::vector<int> union_rows(const DeviceProfile& p, int local_a, int local_b);

struct ApaPair {
  int first_row = 0;   // absolute address of the first activation
  int second_row = 0;  // absolute address of the second activation
};

// Find a pair of rows in `subarray` whose union drives exactly `n_rows`
// wordlines, all within the populated region.  n_rows must be a power of
// two between 1 and 2^(field count).  Throws PlanError when no such pair
// exists.  The choice among valid pairs is uniform given the rng.
ApaPair find_pair_for_count(const DeviceProfile& p, int subarray, int n_rows, Rng& rng);

}  // namespace pudsim
