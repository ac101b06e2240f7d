// In-DRAM operation builders and result scoring.
#include "pudsim/ops.hpp"

#include <algorithm>
#include <sstream>

#include "pudsim/errors.hpp"

namespace pudsim {

ReplicationPlan plan_replication(const DeviceProfile& p, int subarray, int x, int n_rows,
                                 Rng& rng) {
  if (x < 1) throw PlanError("operand count must be at least 1");
  if (n_rows < x) {
    std::ostringstream msg;
    msg << "activation set of " << n_rows << " rows cannot hold " << x << " operands";
    throw PlanError(msg.str());
  }
  ReplicationPlan plan;
  plan.x = x;
  plan.n_rows = n_rows;
  plan.copies = n_rows / x;
  plan.pair = find_pair_for_count(p, subarray, n_rows, rng);

  const AddressParts first = split_address(p, plan.pair.first_row);
  const AddressParts second = split_address(p, plan.pair.second_row);
  LatchState latch = latch_single(p, first.local);
  latch_merge(latch, predecode(p, second.local));
  const std::vector<int> locals = expand_activation(p, latch);
  const int base = subarray * p.rows_per_subarray;
  plan.rows.reserve(locals.size());
  for (int local : locals) plan.rows.push_back(base + local);

  // Round-robin operand assignment; the remainder rows stay neutral.  The
  // first activated row must carry a real operand only if every row does,
  // so neutral rows are taken from the end of the set.
  plan.operand_of_row.assign(plan.rows.size(), -1);
  const int assigned = plan.copies * x;
  for (int i = 0; i < assigned; ++i) plan.operand_of_row[i] = i % x;
  return plan;
}

void frac_init(BankState& state, const std::vector<int>& rows) {
  for (int row : rows) state.set_row_fraction(row, 0.5);
}

OpResult maj_x_execute(BankState& state, const ReplicationPlan& plan, const ApaTiming& timing,
                       Rng& rng) {
  const TimingParams& t = state.profile().timing;
  const Command seq[] = {
      act(plan.pair.first_row, timing.t1_ns),
      pre(timing.t2_ns),
      act(plan.pair.second_row, t.tras_ns),
      pre(t.trp_ns),
  };
  state.execute_sequence(seq, rng);
  OpResult result;
  result.values = state.sa_values();
  result.reliable = state.sa_reliable();
  return result;
}

OpResult maj_x(BankState& state, const ReplicationPlan& plan,
               const std::vector<std::vector<std::uint8_t>>& operand_bits,
               const ApaTiming& timing, double jitter_sigma, Rng& rng) {
  if (static_cast<int>(operand_bits.size()) != plan.x) {
    throw PlanError("operand count does not match the plan");
  }
  std::vector<int> neutral;
  for (std::size_t i = 0; i < plan.rows.size(); ++i) {
    const int op = plan.operand_of_row[i];
    if (op < 0) {
      neutral.push_back(plan.rows[i]);
    } else {
      state.write_row(plan.rows[i], operand_bits[op], jitter_sigma, rng);
    }
  }
  frac_init(state, neutral);
  return maj_x_execute(state, plan, timing, rng);
}

CopyResult row_clone(BankState& state, int src_row, int dst_row, const ApaTiming& timing,
                     Rng& rng) {
  const DeviceProfile& p = state.profile();
  const TimingParams& t = p.timing;
  CopyResult result;
  result.cross_subarray =
      split_address(p, src_row).subarray != split_address(p, dst_row).subarray;
  const Command seq[] = {
      act(src_row, timing.t1_ns),
      pre(timing.t2_ns),
      act(dst_row, t.tras_ns),
      pre(t.trp_ns),
  };
  state.execute_sequence(seq, rng);
  return result;
}

void multi_row_copy(BankState& state, const ApaPair& pair, const ApaTiming& timing, Rng& rng) {
  const TimingParams& t = state.profile().timing;
  const Command seq[] = {
      act(pair.first_row, timing.t1_ns),
      pre(timing.t2_ns),
      act(pair.second_row, t.tras_ns),
      pre(t.trp_ns),
  };
  state.execute_sequence(seq, rng);
}

ReadResult read_row(BankState& state, int row, Rng& rng) {
  const TimingParams& t = state.profile().timing;
  const Command seq[] = {
      act(row, t.tras_ns),
      rd(t.command_granularity_ns),
      pre(t.trp_ns),
  };
  TraceResult trace = state.execute_sequence(seq, rng);
  return std::move(trace.reads.front());
}

double success_rate(const std::vector<OpResult>& trials,
                    const std::vector<std::uint8_t>& expected) {
  if (trials.empty()) throw Error("success_rate: no trials");
  const std::size_t cols = expected.size();
  std::size_t good = 0;
  for (std::size_t c = 0; c < cols; ++c) {
    bool ok = true;
    for (const OpResult& trial : trials) {
      if (trial.values.size() != cols || trial.reliable.size() != cols) {
        throw Error("success_rate: trial width mismatch");
      }
      if (!trial.reliable[c] || trial.values[c] != expected[c]) {
        ok = false;
        break;
      }
    }
    if (ok) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(cols);
}

}  // namespace pudsim
