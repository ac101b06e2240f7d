// Kernel lowering, functional interpretation, throughput model, and the
// bulk-destruction calculator.
#include "pudsim/casestudies.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pudsim {

namespace {

// Incremental program builder with single-assignment virtual rows.
class Builder {
 public:
  explicit Builder(Kernel kernel, int width) {
    prog_.kernel = kernel;
    prog_.width = width;
  }

  int alloc() { return prog_.row_count++; }

  int input_row() { return alloc(); }

  int literal(int bit) {
    ProgramStep step;
    step.is_maj = false;
    step.src = -1;
    step.literal = bit;
    step.out = alloc();
    prog_.steps.push_back(step);
    return step.out;
  }

  int zero() {
    if (zero_ < 0) zero_ = literal(0);
    return zero_;
  }

  int one() {
    if (one_ < 0) one_ = literal(1);
    return one_;
  }

  int host_not(int src) {
    ProgramStep step;
    step.is_maj = false;
    step.src = src;
    step.complement = true;
    step.out = alloc();
    prog_.steps.push_back(step);
    return step.out;
  }

  int maj(std::vector<int> inputs) {
    if (inputs.size() % 2 == 0) throw PlanError("majority fan-in must be odd");
    ProgramStep step;
    step.is_maj = true;
    step.inputs = std::move(inputs);
    step.out = alloc();
    prog_.steps.push_back(step);
    return step.out;
  }

  int maj3(int a, int b, int c) { return maj({a, b, c}); }

  PudProgram take() { return std::move(prog_); }

 private:
  PudProgram prog_;
  int zero_ = -1;
  int one_ = -1;
};

struct AdderBit {
  int sum = -1;
  int cout = -1;
  int ncout = -1;
};

// One full adder; `ncin` must be the complement of `cin` (used by the
// 3-input-only lowering, where it chains from the previous bit).
AdderBit full_adder(Builder& b, int a, int x, int cin, int ncin,
                    const LoweringOptions& opts) {
  AdderBit r;
  r.cout = b.maj3(a, x, cin);
  r.ncout = b.host_not(r.cout);
  if (opts.forced_sum_x >= 9) {
    r.sum = b.maj({a, a, x, x, cin, cin, r.ncout, r.ncout, r.ncout});
  } else if (opts.max_x >= 5) {
    r.sum = b.maj({a, x, cin, r.ncout, r.ncout});
  } else {
    const int t = b.maj3(a, x, ncin);
    r.sum = b.maj3(r.ncout, t, cin);
  }
  return r;
}

struct AdderResult {
  std::vector<int> sums;
  int cout = -1;
  int ncout = -1;
};

AdderResult ripple_add(Builder& b, const std::vector<int>& a, const std::vector<int>& x,
                       int cin, int ncin, const LoweringOptions& opts) {
  if (a.size() != x.size()) throw PlanError("adder operand widths differ");
  AdderResult r;
  int carry = cin;
  int ncarry = ncin;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const AdderBit bit = full_adder(b, a[i], x[i], carry, ncarry, opts);
    r.sums.push_back(bit.sum);
    carry = bit.cout;
    ncarry = bit.ncout;
  }
  r.cout = carry;
  r.ncout = ncarry;
  return r;
}

std::vector<int> alloc_inputs(Builder& b, int width) {
  std::vector<int> rows;
  rows.reserve(width);
  for (int i = 0; i < width; ++i) rows.push_back(b.input_row());
  return rows;
}

}  // namespace

Kernel kernel_from_name(const std::string& name) {
  for (Kernel k : all_kernels()) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown kernel \"" + name +
                    "\" (expected and/or/xor/add/sub/mul/div)");
}

const char* to_string(Kernel k) {
  switch (k) {
    case Kernel::kAnd: return "and";
    case Kernel::kOr: return "or";
    case Kernel::kXor: return "xor";
    case Kernel::kAdd: return "add";
    case Kernel::kSub: return "sub";
    case Kernel::kMul: return "mul";
    case Kernel::kDiv: return "div";
  }
  return "?";
}

const std::vector<Kernel>& all_kernels() {
  static const std::vector<Kernel> kernels = {Kernel::kAnd, Kernel::kOr,  Kernel::kXor,
                                              Kernel::kAdd, Kernel::kSub, Kernel::kMul,
                                              Kernel::kDiv};
  return kernels;
}

int PudProgram::maj_step_count() const {
  int n = 0;
  for (const ProgramStep& s : steps) n += s.is_maj ? 1 : 0;
  return n;
}

int PudProgram::host_step_count() const {
  return static_cast<int>(steps.size()) - maj_step_count();
}

std::map<int, int> PudProgram::maj_histogram() const {
  std::map<int, int> hist;
  for (const ProgramStep& s : steps) {
    if (s.is_maj) ++hist[static_cast<int>(s.inputs.size())];
  }
  return hist;
}

PudProgram lower_kernel(Kernel kernel, int width, const LoweringOptions& options) {
  if (width < 1 || width > 32) throw PlanError("kernel width must be in 1..32");
  if (options.max_x < 3) throw PlanError("lowering needs at least 3-input majority");
  if (options.forced_sum_x >= 9 && options.max_x < 9) {
    throw PlanError("forcing 9-input sums requires max_x >= 9");
  }
  Builder b(kernel, width);
  std::vector<int> a = alloc_inputs(b, width);
  std::vector<int> x = alloc_inputs(b, width);
  PudProgram prog;

  switch (kernel) {
    case Kernel::kAnd: {
      const int zero = b.zero();
      std::vector<int> out;
      for (int i = 0; i < width; ++i) out.push_back(b.maj3(a[i], x[i], zero));
      prog = b.take();
      prog.out_rows = out;
      break;
    }
    case Kernel::kOr: {
      const int one = b.one();
      std::vector<int> out;
      for (int i = 0; i < width; ++i) out.push_back(b.maj3(a[i], x[i], one));
      prog = b.take();
      prog.out_rows = out;
      break;
    }
    case Kernel::kXor: {
      // XOR(a, x) is the sum output of a full adder with carry-in 0.
      const int zero = b.zero();
      const int one = b.one();
      std::vector<int> out;
      for (int i = 0; i < width; ++i) {
        out.push_back(full_adder(b, a[i], x[i], zero, one, options).sum);
      }
      prog = b.take();
      prog.out_rows = out;
      break;
    }
    case Kernel::kAdd: {
      const AdderResult r = ripple_add(b, a, x, b.zero(), b.one(), options);
      prog = b.take();
      prog.out_rows = r.sums;
      prog.out_rows.push_back(r.cout);
      break;
    }
    case Kernel::kSub: {
      std::vector<int> nx;
      for (int i = 0; i < width; ++i) nx.push_back(b.host_not(x[i]));
      const AdderResult r = ripple_add(b, a, nx, b.one(), b.zero(), options);
      prog = b.take();
      prog.out_rows = r.sums;
      break;
    }
    case Kernel::kMul: {
      // Shift-and-add: acc starts as zeros; adding the i-th partial product
      // touches acc bits [i, i+width], and the carry lands on a zero bit.
      const int zero = b.zero();
      const int one = b.one();
      std::vector<int> acc(2 * width, zero);
      for (int i = 0; i < width; ++i) {
        std::vector<int> pp;
        for (int j = 0; j < width; ++j) pp.push_back(b.maj3(a[j], x[i], zero));
        std::vector<int> slice(acc.begin() + i, acc.begin() + i + width);
        const AdderResult r = ripple_add(b, slice, pp, zero, one, options);
        for (int j = 0; j < width; ++j) acc[i + j] = r.sums[j];
        acc[i + width] = r.cout;
      }
      prog = b.take();
      prog.out_rows = acc;
      break;
    }
    case Kernel::kDiv: {
      // Restoring division: per iteration, shift the remainder, subtract
      // the divisor over width+1 bits, keep the difference when it is
      // non-negative (carry-out = quotient bit).
      const int zero = b.zero();
      const int one = b.one();
      std::vector<int> nx;  // complement of the divisor, computed once
      for (int i = 0; i < width; ++i) nx.push_back(b.host_not(x[i]));
      nx.push_back(one);  // complement of the zero-extension bit
      std::vector<int> rem(width, zero);
      std::vector<int> quotient(width, zero);
      for (int i = width - 1; i >= 0; --i) {
        std::vector<int> shifted;  // width+1 bits: remainder << 1 | a[i]
        shifted.push_back(a[i]);
        for (int j = 0; j < width; ++j) shifted.push_back(rem[j]);
        const AdderResult diff = ripple_add(b, shifted, nx, one, zero, options);
        const int q = diff.cout;  // carry-out means shifted >= divisor
        const int nq = b.host_not(q);
        quotient[i] = q;
        for (int j = 0; j < width; ++j) {
          const int keep_new = b.maj3(q, diff.sums[j], zero);
          const int keep_old = b.maj3(nq, shifted[j], zero);
          rem[j] = b.maj3(keep_new, keep_old, one);
        }
      }
      prog = b.take();
      prog.out_rows = quotient;
      break;
    }
  }

  prog.a_rows = a;
  prog.b_rows = x;
  return prog;
}

std::vector<std::uint64_t> run_program(const PudProgram& program,
                                       const std::vector<std::uint64_t>& a_values,
                                       const std::vector<std::uint64_t>& b_values) {
  if (a_values.size() != b_values.size()) throw PlanError("operand lane counts differ");
  const std::size_t lanes = a_values.size();
  std::vector<std::vector<std::uint8_t>> rows(program.row_count,
                                              std::vector<std::uint8_t>(lanes, 0));
  for (int i = 0; i < program.width; ++i) {
    for (std::size_t l = 0; l < lanes; ++l) {
      rows[program.a_rows[i]][l] = (a_values[l] >> i) & 1;
      rows[program.b_rows[i]][l] = (b_values[l] >> i) & 1;
    }
  }
  for (const ProgramStep& step : program.steps) {
    auto& out = rows[step.out];
    if (step.is_maj) {
      const int threshold = static_cast<int>(step.inputs.size() / 2) + 1;
      for (std::size_t l = 0; l < lanes; ++l) {
        int ones = 0;
        for (int in : step.inputs) ones += rows[in][l];
        out[l] = ones >= threshold ? 1 : 0;
      }
    } else if (step.src < 0) {
      std::fill(out.begin(), out.end(), static_cast<std::uint8_t>(step.literal));
    } else {
      const auto& src = rows[step.src];
      for (std::size_t l = 0; l < lanes; ++l) {
        out[l] = step.complement ? (src[l] ? 0 : 1) : src[l];
      }
    }
  }
  std::vector<std::uint64_t> result(lanes, 0);
  for (std::size_t i = 0; i < program.out_rows.size(); ++i) {
    const auto& row = rows[program.out_rows[i]];
    for (std::size_t l = 0; l < lanes; ++l) {
      result[l] |= static_cast<std::uint64_t>(row[l]) << i;
    }
  }
  return result;
}

std::uint64_t kernel_reference(Kernel kernel, int width, std::uint64_t a, std::uint64_t b) {
  const std::uint64_t mask = width >= 64 ? ~0ull : ((1ull << width) - 1);
  a &= mask;
  b &= mask;
  switch (kernel) {
    case Kernel::kAnd: return a & b;
    case Kernel::kOr: return a | b;
    case Kernel::kXor: return a ^ b;
    case Kernel::kAdd: return a + b;  // width+1 output bits
    case Kernel::kSub: return (a - b) & mask;
    case Kernel::kMul: return a * b;  // 2*width output bits
    case Kernel::kDiv: return b == 0 ? mask : a / b;
  }
  return 0;
}

const std::map<std::pair<int, int>, double>& reference_success_table() {
  static const std::map<std::pair<int, int>, double> table = {
      {{3, 4}, 0.7568},  {{3, 32}, 0.9900}, {{5, 32}, 0.7964},
      {{7, 32}, 0.3387}, {{9, 32}, 0.0591},
  };
  return table;
}

KernelCost estimate_cost(const PudProgram& program, const CostParams& params) {
  KernelCost cost;
  const LatencyTable& lat = params.latency;
  for (const ProgramStep& step : program.steps) {
    if (!step.is_maj) {
      cost.latency_ns += lat.host_write_ns;
      ++cost.host_steps;
      continue;
    }
    const int x = static_cast<int>(step.inputs.size());
    const int n = params.n_rows;
    if (x > n) {
      std::ostringstream msg;
      msg << "program uses " << x << "-input majority but the activation set has " << n
          << " rows";
      throw ConfigError(msg.str());
    }
    const int copies = n / x;
    const int neutral = n - copies * x;
    double step_ns = x * (copies > 1 ? lat.multi_row_copy_ns : lat.row_clone_ns);
    step_ns += neutral * lat.frac_ns;
    step_ns += lat.maj_apa_ns;
    const auto it = params.success.find({x, n});
    if (it == params.success.end()) {
      std::ostringstream msg;
      msg << "no success rate for " << x << "-input majority on " << n << " rows";
      throw ConfigError(msg.str());
    }
    const double s = it->second;
    if (s <= 0.0 || s > 1.0) throw ConfigError("success rates must be in (0, 1]");
    ++cost.maj_steps;
    if (params.mode == ThroughputMode::kRetry) {
      cost.latency_ns += step_ns / s;
    } else {
      cost.latency_ns += step_ns;
      cost.usable_fraction = std::min(cost.usable_fraction, s);
    }
  }
  if (cost.latency_ns <= 0.0) throw ConfigError("program has no steps to cost");
  cost.throughput = (params.mode == ThroughputMode::kRetry ? 1.0 : cost.usable_fraction) /
                    cost.latency_ns;
  return cost;
}

double estimate_speedup(const PudProgram& program, const CostParams& params,
                        const PudProgram& baseline, const CostParams& baseline_params) {
  const KernelCost a = estimate_cost(program, params);
  const KernelCost b = estimate_cost(baseline, baseline_params);
  return a.throughput / b.throughput;
}

const std::vector<BenchConfig>& bench_configs() {
  static const std::vector<BenchConfig> configs = {
      {"baseline", {3, 0}, 4},
      {"maj5", {5, 0}, 32},
      {"maj7", {7, 0}, 32},
      {"maj9", {9, 9}, 32},
  };
  return configs;
}

std::vector<BenchResult> run_bench(int width, ThroughputMode mode) {
  std::vector<BenchResult> results;
  const BenchConfig& base_cfg = bench_configs().front();
  for (const BenchConfig& cfg : bench_configs()) {
    for (Kernel kernel : all_kernels()) {
      const PudProgram prog = lower_kernel(kernel, width, cfg.lowering);
      const PudProgram base = lower_kernel(kernel, width, base_cfg.lowering);
      CostParams params;
      params.n_rows = cfg.n_rows;
      params.success = reference_success_table();
      params.mode = mode;
      CostParams base_params = params;
      base_params.n_rows = base_cfg.n_rows;
      BenchResult r;
      r.config = cfg.name;
      r.kernel = to_string(kernel);
      r.cost = estimate_cost(prog, params);
      r.speedup = estimate_speedup(prog, params, base, base_params);
      results.push_back(std::move(r));
    }
  }
  return results;
}

const char* to_string(DestructionMethod m) {
  switch (m) {
    case DestructionMethod::kRowCloneSweep: return "row_clone_sweep";
    case DestructionMethod::kFractionSweep: return "fraction_sweep";
    case DestructionMethod::kMultiRowCopySweep: return "multi_row_copy_sweep";
  }
  return "?";
}

double destruction_time_ns(DestructionMethod method, int n_rows, const DestructionParams& p) {
  const int rows = p.rows_per_subarray;
  if (rows < 2) throw ConfigError("destruction needs at least two rows per subarray");
  switch (method) {
    case DestructionMethod::kRowCloneSweep:
      // Overwrite one row from the host, then clone it over every other row.
      return p.latency.host_write_ns + static_cast<double>(rows - 1) * p.latency.row_clone_ns;
    case DestructionMethod::kFractionSweep:
      // Interrupted activation leaves a row at the midpoint: one op per row.
      return static_cast<double>(rows) * p.latency.frac_ns;
    case DestructionMethod::kMultiRowCopySweep: {
      if (n_rows < 2) throw ConfigError("multi-row-copy sweep needs an activation set of >= 2");
      // Each copy wipes n_rows - 1 destinations.
      const int sweeps = (rows - 1 + (n_rows - 2)) / (n_rows - 1);
      return p.latency.host_write_ns + static_cast<double>(sweeps) * p.latency.multi_row_copy_ns;
    }
  }
  throw ConfigError("unknown destruction method");
}

double destruction_speedup(DestructionMethod method, int n_rows, const DestructionParams& p) {
  return destruction_time_ns(DestructionMethod::kRowCloneSweep, 0, p) /
         destruction_time_ns(method, n_rows, p);
}

}  // namespace pudsim
