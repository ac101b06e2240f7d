// Case studies built on the characterized operations:
//
//  1. Bit-serial arithmetic throughput.  Kernels (AND/OR/XOR, ADD, SUB,
//     MUL, DIV) are lowered to programs of X-input majority steps plus
//     host-side writes/complements, costed with the command-sequence
//     latencies and the measured per-step success rates, and compared
//     against a 4-row, 3-input-majority baseline.
//  2. Bulk data destruction.  Wiping every row of a subarray by repeated
//     row-clone, by fractional (midpoint) initialization, or by one-to-many
//     copy sweeps.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pudsim/errors.hpp"

namespace pudsim {

enum class Kernel { kAnd, kOr, kXor, kAdd, kSub, kMul, kDiv };

Kernel kernel_from_name(const std::string& name);
const char* to_string(Kernel k);
const std::vector<Kernel>& all_kernels();

// One step of a lowered program.  Rows name virtual row-registers.
struct ProgramStep {
  bool is_maj = false;
  // Majority step: out = MAJ(inputs...) with inputs.size() odd.
  std::vector<int> inputs;
  // Host step: out = literal (src < 0) or out = src / NOT src.
  int src = -1;
  bool complement = false;
  int literal = 0;
  int out = -1;
};

struct PudProgram {
  Kernel kernel = Kernel::kAnd;
  int width = 0;      // operand bit width
  int row_count = 0;  // virtual rows used
  std::vector<int> a_rows;    // operand A, LSB first
  std::vector<int> b_rows;    // operand B, LSB first
  std::vector<int> out_rows;  // result, LSB first
  std::vector<ProgramStep> steps;

  int maj_step_count() const;
  int host_step_count() const;
  std::map<int, int> maj_histogram() const;  // fan-in -> step count
};

struct LoweringOptions {
  int max_x = 3;         // widest majority available
  int forced_sum_x = 0;  // 0 = free choice; 9 forces 9-input adder sums
};

// Lower `kernel` at `width` bits to majority + host steps.
PudProgram lower_kernel(Kernel kernel, int width, const LoweringOptions& options);

// Bit-parallel functional evaluation: each column is one lane.  Operand
// values are per-lane integers; returns the program's out_rows as per-lane
// integers (LSB first packing).
std::vector<std::uint64_t> run_program(const PudProgram& program,
                                       const std::vector<std::uint64_t>& a_values,
                                       const std::vector<std::uint64_t>& b_values);

// Expected result of a kernel on two width-bit operands (DIV by zero
// yields all-ones quotient, matching the restoring divider).
std::uint64_t kernel_reference(Kernel kernel, int width, std::uint64_t a, std::uint64_t b);

// Command-sequence latencies (ns) of the primitive operations.
struct LatencyTable {
  double host_write_ns = 51.0;       // ACT + WR + PRE at nominal timing
  double row_clone_ns = 93.0;        // ACT(tRAS) -> PRE(6) -> ACT(tRAS) -> PRE
  double multi_row_copy_ns = 90.0;   // ACT(tRAS) -> PRE(3) -> ACT(tRAS) -> PRE
  double frac_ns = 16.5;             // minimum-gap interrupted ACT (1.5) + PRE recovery (15)
  double maj_apa_ns = 55.5;          // ACT(1.5) -> PRE(3) -> ACT(tRAS) -> PRE
};

enum class ThroughputMode {
  kUsableColumns,  // keep all columns, discount by the worst step's success
  kRetry,          // repeat each step until it succeeds (expected latency)
};

struct CostParams {
  LatencyTable latency;
  int n_rows = 32;  // activation-set size used for majority steps
  // Per-majority-step success fraction by (fan-in, activation rows).
  std::map<std::pair<int, int>, double> success;
  ThroughputMode mode = ThroughputMode::kUsableColumns;
};

// Success table measured on the characterized modules (random data,
// 20% variation defaults).
const std::map<std::pair<int, int>, double>& reference_success_table();

struct KernelCost {
  double latency_ns = 0.0;      // per column batch
  double usable_fraction = 1.0; // columns that survive every majority step
  double throughput = 0.0;      // usable columns per ns (per unit column)
  int maj_steps = 0;
  int host_steps = 0;
};

KernelCost estimate_cost(const PudProgram& program, const CostParams& params);

// throughput(program)/throughput(baseline).
double estimate_speedup(const PudProgram& program, const CostParams& params,
                        const PudProgram& baseline, const CostParams& baseline_params);

// Named throughput configurations compared in the benchmark.
struct BenchConfig {
  std::string name;
  LoweringOptions lowering;
  int n_rows = 4;
};

const std::vector<BenchConfig>& bench_configs();  // baseline, maj5, maj7, maj9

struct BenchResult {
  std::string config;
  std::string kernel;
  double speedup = 0.0;
  KernelCost cost;
};

std::vector<BenchResult> run_bench(int width, ThroughputMode mode);

// --- Bulk data destruction -------------------------------------------------

enum class DestructionMethod { kRowCloneSweep, kFractionSweep, kMultiRowCopySweep };

const char* to_string(DestructionMethod m);

struct DestructionParams {
  int rows_per_subarray = 512;
  LatencyTable latency;
};

// Time to wipe one subarray.  `n_rows` is the activation-set size for the
// multi-row-copy sweep (ignored by the other methods).
double destruction_time_ns(DestructionMethod method, int n_rows, const DestructionParams& p);

// Speedup of the given method over the row-clone sweep.
double destruction_speedup(DestructionMethod method, int n_rows, const DestructionParams& p);

}  // namespace pudsim
