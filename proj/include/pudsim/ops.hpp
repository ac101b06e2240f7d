// In-DRAM operations built from timing-violating command sequences:
//
//  - frac_init: set rows to the precharge midpoint so they contribute no
//    differential charge (neutral rows for padding an activation set).
//  - row_clone: copy one row onto another via ACT -> early PRE -> ACT in
//    the same subarray.
//  - multi_row_copy: copy one row onto the rest of a simultaneous
//    activation set (full-tRAS first activation, then a union ACT).
//  - maj_x: bitwise X-input majority by storing each operand in
//    floor(N/X) rows of an N-row activation set, padding the remainder
//    with neutral rows, and firing a short-t1 union so the sense
//    amplifiers resolve the charge mixture.
#pragma once

#include <cstdint>
#include <vector>

#include "pudsim/bank.hpp"
#include "pudsim/decoder.hpp"
#include "pudsim/profile.hpp"
#include "pudsim/rng.hpp"

namespace pudsim {

// Assignment of operands to the rows of an N-row activation set.
struct ReplicationPlan {
  int x = 0;               // operand count
  int n_rows = 0;          // activation-set size
  int copies = 0;          // rows per operand = floor(n_rows / x)
  ApaPair pair;            // activation pair that drives the set
  std::vector<int> rows;            // absolute rows, ascending
  std::vector<int> operand_of_row;  // operand index per row, -1 = neutral
};

// Choose an activation pair with exactly `n_rows` rows in `subarray` and
// assign operands round-robin; the last n_rows - x*copies rows are neutral.
// Throws PlanError when n_rows < x or the count is not reachable.
ReplicationPlan plan_replication(const DeviceProfile& p, int subarray, int x, int n_rows,
                                 Rng& rng);

// Timing knobs for an ACT -> PRE -> ACT sequence.
struct ApaTiming {
  double t1_ns = 1.5;
  double t2_ns = 3.0;
};

struct OpResult {
  std::vector<std::uint8_t> values;
  std::vector<std::uint8_t> reliable;
};

// Neutral-charge initialization of whole rows.
void frac_init(BankState& state, const std::vector<int>& rows);

// Execute the majority sequence over an already-populated activation set:
// operands must have been written to the plan's rows beforehand.  Returns
// the sense outcome per column.  The result is also written back to every
// driven row by the closing precharge.
OpResult maj_x_execute(BankState& state, const ReplicationPlan& plan, const ApaTiming& timing,
                       Rng& rng);

// Convenience wrapper: writes operand data (round-robin per plan), fills
// neutral rows, executes the sequence.  `operand_bits[i]` holds operand
// i's value per column.  `jitter_sigma` applies write-level jitter (used
// for non-repeating data patterns).
OpResult maj_x(BankState& state, const ReplicationPlan& plan,
               const std::vector<std::vector<std::uint8_t>>& operand_bits,
               const ApaTiming& timing, double jitter_sigma, Rng& rng);

struct CopyResult {
  bool cross_subarray = false;  // the two rows use different sense amplifiers
};

// ACT src (t1) -> PRE (t2) -> ACT dst -> PRE.  With nominal consecutive
// timing (t2 between the union threshold and tRP) this copies src onto
// dst when both rows share a subarray; across a boundary the second
// activation replaces the first and nothing is copied.
CopyResult row_clone(BankState& state, int src_row, int dst_row, const ApaTiming& timing,
                     Rng& rng);

// ACT pair.first (t1, nominally a full tRAS) -> PRE (t2, within the union
// threshold) -> ACT pair.second -> PRE: the latched sense amplifiers
// drive pair.first's data onto every row of the union.
void multi_row_copy(BankState& state, const ApaPair& pair, const ApaTiming& timing, Rng& rng);

// Read a row at nominal timing: ACT (tRAS), RD, PRE.
ReadResult read_row(BankState& state, int row, Rng& rng);

// Fraction of columns whose value matched `expected` and sensed reliably
// in every trial.
double success_rate(const std::vector<OpResult>& trials,
                    const std::vector<std::uint8_t>& expected);

}  // namespace pudsim
