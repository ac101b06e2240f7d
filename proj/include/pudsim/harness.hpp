// Experiment harness: sampling plans, characterization sweeps, result
// tables, CSV/JSON export, and subarray-boundary discovery.
//
// Sampling design: every (bank, subarray, group) triple owns a seed derived
// from the master seed, so the manufactured cell variation and the chosen
// activation pair of a group are identical across every knob setting
// (timing, operand count, pattern, environment).  Sweeps are therefore
// paired comparisons, and per-trial noise (sense offsets, dropout, data)
// comes from trial-level streams that are also shared across knob settings.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pudsim/ops.hpp"
#include "pudsim/profile.hpp"

namespace pudsim {

// Data pattern written into operand/source rows.
struct DataPattern {
  std::string name;     // "random" or "0xAA/0x55"-style byte pair
  bool random = true;   // independent bit per cell per trial
  std::uint8_t byte_a = 0x00;  // fixed patterns: each row gets byte_a or
  std::uint8_t byte_b = 0xFF;  // byte_b (chosen per row per trial)
};

DataPattern parse_pattern(const std::string& name);

struct SweepConfig {
  DeviceProfile profile = make_profile("mfrH-512");
  // Columns simulated per group (0 = full profile width).  Characterization
  // statistics are per-column, so narrower groups trade precision for time.
  int columns = 512;
  int banks = 16;
  int subarrays = 3;   // sampled per bank
  int groups = 100;    // independent cell groups per (bank, subarray)
  int trials = 8;
  double variation_pct = 20.0;
  std::uint64_t seed = 1;
  int jobs = 1;
  EnvironmentParams env;

  std::string experiment = "maj";  // "activation" | "maj" | "mrc"
  std::vector<int> activation_counts = {2, 4, 8, 16, 32};
  std::vector<int> maj_x = {3, 5, 7, 9};
  std::vector<std::string> patterns = {"random"};
  std::vector<ApaTiming> timings = {{1.5, 3.0}};
  std::vector<EnvironmentParams> environments;  // empty = {env}
};

SweepConfig sweep_config_from_json(const nlohmann::json& j);
nlohmann::json sweep_config_to_json(const SweepConfig& cfg);

// One measured group at one knob setting.
struct ResultRow {
  std::string experiment;
  std::string operation;
  int x = 0;
  int n_rows = 0;
  double t1_ns = 0.0;
  double t2_ns = 0.0;
  std::string pattern;
  double temperature_c = 50.0;
  double vpp_v = 2.5;
  double variation_pct = 0.0;
  int bank = 0;
  int subarray = 0;
  int group = 0;
  int trials = 0;
  int cells = 0;
  double success_rate = 0.0;
};

// Number of (bank, subarray, group, activation-count) units the config
// enumerates for one module.
long long enumerate_group_count(const SweepConfig& cfg);

// Simultaneous-activation characterization: drive an N-row set with the
// timing grid, overwrite through the sense amplifiers, read every row back.
std::vector<ResultRow> run_activation_test(const SweepConfig& cfg);

// Majority characterization: replicate X operands across the set, fire the
// majority sequence, read back one driven row against the expected value.
std::vector<ResultRow> run_maj_sweep(const SweepConfig& cfg);

// Multi-row-copy characterization: destinations initialized to the inverse
// of the source data, then copied and read back.
std::vector<ResultRow> run_mrc_sweep(const SweepConfig& cfg);

std::vector<ResultRow> run_sweep(const SweepConfig& cfg);  // dispatch on cfg.experiment

// Aggregation over groups of identical knob settings.
struct AggregateRow {
  ResultRow key;  // bank/subarray/group zeroed
  int groups = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
};

std::vector<AggregateRow> aggregate_rows(const std::vector<ResultRow>& rows);

// Mean success over all groups matching the given knobs (helper for tests).
double mean_success(const std::vector<ResultRow>& rows, int x, int n_rows,
                    const std::string& pattern, double t1_ns, double t2_ns);

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
void write_aggregate_csv(const std::filesystem::path& path, const std::vector<AggregateRow>& rows);
nlohmann::json results_to_json(const std::vector<ResultRow>& rows);

// Subarray boundary discovery: row-clone between consecutive rows succeeds
// only inside a subarray, so the failure lines are the boundaries.  Each
// discovered range is verified with extra random interior pairs.
struct RowRange {
  int begin = 0;
  int end = 0;  // exclusive
};

struct DiscoveryOptions {
  int columns = 64;
  int rows = 0;           // 0 = whole bank
  int verify_pairs = 4;   // random interior pairs per range
  std::uint64_t seed = 1;
};

std::vector<RowRange> discover_subarrays(const DeviceProfile& profile,
                                         const DiscoveryOptions& options);

}  // namespace pudsim
