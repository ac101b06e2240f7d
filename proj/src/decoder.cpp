// Hierarchical row-decoder model: address slicing, latch union, expansion.
#include "pudsim/decoder.hpp"

#include <algorithm>
#include <sstream>

#include "pudsim/errors.hpp"

namespace pudsim {

AddressParts split_address(const DeviceProfile& p, int row) {
  if (row < 0 || row >= p.rows_per_bank) {
    std::ostringstream msg;
    msg << "row " << row << " outside bank (0.." << p.rows_per_bank - 1 << ")";
    throw PlanError(msg.str());
  }
  const AddressParts parts{row / p.rows_per_subarray, row % p.rows_per_subarray};
  if (parts.subarray >= p.subarray_count()) {
    std::ostringstream msg;
    msg << "row " << row << " lies in the partial tail behind the last complete subarray";
    throw PlanError(msg.str());
  }
  return parts;
}

int join_address(const DeviceProfile& p, const AddressParts& parts) {
  return parts.subarray * p.rows_per_subarray + parts.local;
}

FieldValues predecode(const DeviceProfile& p, int local) {
  if (local < 0 || local >= p.decoder_window_rows) {
    std::ostringstream msg;
    msg << "local row " << local << " outside decoder window (0.." << p.decoder_window_rows - 1
        << ")";
    throw PlanError(msg.str());
  }
  FieldValues fields;
  fields.reserve(p.predecode_field_bits.size());
  int rest = local;
  for (int bits : p.predecode_field_bits) {
    fields.push_back(rest & ((1 << bits) - 1));
    rest >>= bits;
  }
  return fields;
}

int compose_local(const DeviceProfile& p, const FieldValues& fields) {
  if (fields.size() != p.predecode_field_bits.size()) {
    throw PlanError("field count does not match the decoder");
  }
  int local = 0;
  int shift = 0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    local |= fields[i] << shift;
    shift += p.predecode_field_bits[i];
  }
  return local;
}

LatchState latch_single(const DeviceProfile& p, int local) {
  LatchState latch;
  for (int v : predecode(p, local)) latch.fields.push_back({v});
  return latch;
}

void latch_merge(LatchState& latch, const FieldValues& fields) {
  if (latch.fields.size() != fields.size()) {
    throw PlanError("latch merge across incompatible decoders");
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    auto& vals = latch.fields[i];
    if (std::find(vals.begin(), vals.end(), fields[i]) == vals.end()) {
      vals.push_back(fields[i]);
      std::sort(vals.begin(), vals.end());
    }
  }
}

std::vector<int> expand_activation(const DeviceProfile& p, const LatchState& latch) {
  std::vector<int> rows;
  if (latch.empty()) return rows;
  rows.reserve(static_cast<std::size_t>(latch.drive_count()));
  // Cartesian product over the latched values of every field.
  FieldValues current(latch.fields.size(), 0);
  std::vector<std::size_t> index(latch.fields.size(), 0);
  for (;;) {
    for (std::size_t i = 0; i < latch.fields.size(); ++i) {
      current[i] = latch.fields[i][index[i]];
    }
    const int local = compose_local(p, current);
    if (local < p.rows_per_subarray) rows.push_back(local);
    // Advance the mixed-radix counter.
    std::size_t i = 0;
    for (; i < index.size(); ++i) {
      if (++index[i] < latch.fields[i].size()) break;
      index[i] = 0;
    }
    if (i == index.size()) break;
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::vector<int> union_rows(const DeviceProfile& p, int local_a, int local_b) {
  LatchState latch = latch_single(p, local_a);
  latch_merge(latch, predecode(p, local_b));
  return expand_activation(p, latch);
}

ApaPair find_pair_for_count(const DeviceProfile& p, int subarray, int n_rows, Rng& rng) {
  if (subarray < 0 || subarray >= p.subarray_count()) {
    throw PlanError("subarray index out of range");
  }
  const int field_count = static_cast<int>(p.predecode_field_bits.size());
  int k = -1;  // number of fields that must differ: n_rows == 2^k
  for (int cand = 0; cand <= field_count; ++cand) {
    if ((1 << cand) == n_rows) {
      k = cand;
      break;
    }
  }
  if (k < 0) {
    std::ostringstream msg;
    msg << "activation count " << n_rows << " not reachable (supported: powers of two up to "
        << (1 << field_count) << ")";
    throw PlanError(msg.str());
  }
  // Only single-bit fields can contribute a factor of exactly 2 per field;
  // wider fields contribute exactly 2 as well (two latched values), so any
  // k distinct fields work.  Rejection-sample a base row and k fields until
  // the expansion stays inside the populated region.
  const int base_addr = subarray * p.rows_per_subarray;
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const int base = static_cast<int>(rng.below(static_cast<std::uint64_t>(p.rows_per_subarray)));
    FieldValues fields = predecode(p, base);
    // Choose k distinct fields to flip.
    std::vector<int> chosen;
    while (static_cast<int>(chosen.size()) < k) {
      const int f = static_cast<int>(rng.below(static_cast<std::uint64_t>(field_count)));
      if (std::find(chosen.begin(), chosen.end(), f) == chosen.end()) chosen.push_back(f);
    }
    FieldValues alt = fields;
    for (int f : chosen) {
      const int size = 1 << p.predecode_field_bits[f];
      int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(size - 1)));
      if (v >= fields[f]) ++v;  // any value except the base one
      alt[f] = v;
    }
    const int second = compose_local(p, alt);
    if (second >= p.rows_per_subarray) continue;
    const auto rows = union_rows(p, base, second);
    if (static_cast<int>(rows.size()) != n_rows) continue;  // expansion clipped
    return ApaPair{base_addr + base, base_addr + second};
  }
  std::ostringstream msg;
  msg << "no activation pair with " << n_rows << " rows found in subarray " << subarray;
  throw PlanError(msg.str());
}

}  // namespace pudsim
