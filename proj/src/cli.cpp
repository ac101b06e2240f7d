// CLI front end: argument parsing, output-directory writing, manifests.
#include "pudsim/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pudsim/casestudies.hpp"
#include "pudsim/version.hpp"

namespace pudsim::cli {

namespace fs = std::filesystem;

namespace {

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open " + path.string());
  nlohmann::json j;
  try {
    file >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open " + path.string() + " for writing");
  file << text;
  if (!file.good()) throw Error("failed while writing " + path.string());
}

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

// Manifest: everything needed to reproduce the run, and nothing that would
// differ between two identical runs (no timestamps, no output paths).
void write_manifest(const fs::path& dir, const std::string& subcommand,
                    const nlohmann::json& config, std::uint64_t seed,
                    const std::string& profile_name, const std::vector<std::string>& files) {
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config.dump())));
  const nlohmann::json manifest = {
      {"schema", "pudsim-manifest-v1"},
      {"version", std::string(kVersion)},
      {"subcommand", subcommand},
      {"profile", profile_name},
      {"seed", seed},
      {"config_hash", std::string(hash_hex)},
      {"config", config},
      {"files", files},
  };
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

void write_sweep_outputs(const fs::path& dir, const std::string& subcommand,
                         const SweepConfig& cfg, const std::vector<ResultRow>& rows,
                         const std::string& format, bool quiet) {
  std::vector<std::string> files;
  if (format == "csv" || format == "both") {
    write_results_csv(dir / "raw.csv", rows);
    write_aggregate_csv(dir / "summary.csv", aggregate_rows(rows));
    files.push_back("raw.csv");
    files.push_back("summary.csv");
  }
  if (format == "json" || format == "both") {
    write_text_file(dir / "results.json", results_to_json(rows).dump(2) + "\n");
    files.push_back("results.json");
  }
  files.push_back("manifest.json");
  write_manifest(dir, subcommand, sweep_config_to_json(cfg), cfg.seed, cfg.profile.name, files);
  if (!quiet) {
    std::cout << subcommand << ": " << rows.size() << " result rows -> " << dir.string()
              << "\n";
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

int run_simulate(const std::string& profile_arg, int first, int second, double t1, double t2,
                 double variation, std::uint64_t seed, int columns) {
  DeviceProfile profile = load_profile_arg(profile_arg);
  if (columns > 0) profile.columns = columns;
  validate_profile(profile);
  const TimingRegime regime = classify_timing(profile.timing, t1, t2);
  std::cout << "profile: " << profile.name << "\n";
  std::cout << "sequence: ACT " << first << " .. " << format_double(t1) << " ns .. PRE .. "
            << format_double(t2) << " ns .. ACT " << second << "\n";
  std::cout << "activation: " << to_string(regime.activation)
            << ", sense: " << to_string(regime.sense) << "\n";

  BankState state(profile, EnvironmentParams{}, variation, seed);
  Rng rng = Rng::derive(seed, {0xC0DE});
  // Alternating data so the effect on each driven row is visible.
  std::vector<std::uint8_t> bits(profile.columns);
  for (int c = 0; c < profile.columns; ++c) bits[c] = c % 2;
  state.write_row(first, bits, 0.0, rng);
  if (second != first) {
    for (int c = 0; c < profile.columns; ++c) bits[c] = 1 - c % 2;
    state.write_row(second, bits, 0.0, rng);
  }
  const TimingParams& t = profile.timing;
  const Command seq[] = {
      act(first, t1),
      pre(t2),
      act(second, t.tras_ns),
      pre(t.trp_ns),
  };
  TraceResult trace = state.execute_sequence(seq, rng);
  for (const TraceEvent& e : trace.events) {
    std::cout << "  [" << format_double(e.at_ns) << " ns] " << to_string(e.kind);
    if (e.kind == CommandKind::kAct) std::cout << " row " << e.row;
    if (!e.note.empty()) std::cout << " -- " << e.note;
    if (e.kind == CommandKind::kAct && !e.activated_rows.empty()) {
      std::cout << " -> rows {";
      for (std::size_t i = 0; i < e.activated_rows.size(); ++i) {
        std::cout << (i ? "," : "") << e.activated_rows[i];
      }
      std::cout << "}";
    }
    std::cout << "\n";
  }
  int ones = 0, reliable = 0;
  for (int c = 0; c < profile.columns; ++c) {
    ones += state.sa_values()[c];
    reliable += state.sa_reliable()[c];
  }
  std::cout << "sense amplifiers: " << ones << "/" << profile.columns << " columns at 1, "
            << reliable << "/" << profile.columns << " reliable\n";
  return 0;
}

int run_destroy(const std::string& profile_arg, const std::vector<int>& counts,
                const std::string& out, bool quiet) {
  const DeviceProfile profile = load_profile_arg(profile_arg);
  DestructionParams params;
  params.rows_per_subarray = profile.rows_per_subarray;

  struct Line {
    std::string method;
    int n_rows;
    double time_ns;
    double speedup;
  };
  std::vector<Line> lines;
  lines.push_back({to_string(DestructionMethod::kRowCloneSweep), 0,
                   destruction_time_ns(DestructionMethod::kRowCloneSweep, 0, params), 1.0});
  lines.push_back({to_string(DestructionMethod::kFractionSweep), 0,
                   destruction_time_ns(DestructionMethod::kFractionSweep, 0, params),
                   destruction_speedup(DestructionMethod::kFractionSweep, 0, params)});
  for (int n : counts) {
    lines.push_back({to_string(DestructionMethod::kMultiRowCopySweep), n,
                     destruction_time_ns(DestructionMethod::kMultiRowCopySweep, n, params),
                     destruction_speedup(DestructionMethod::kMultiRowCopySweep, n, params)});
  }
  if (!quiet) {
    std::cout << "rows per subarray: " << params.rows_per_subarray << "\n";
    for (const Line& l : lines) {
      std::cout << "  " << l.method;
      if (l.n_rows > 0) std::cout << " (n=" << l.n_rows << ")";
      std::cout << ": " << format_double(l.time_ns) << " ns/subarray, speedup "
                << format_double(l.speedup) << "\n";
    }
  }
  if (!out.empty()) {
    const fs::path dir = prepare_out_dir(out);
    std::ostringstream csv;
    csv << "method,n_rows,time_ns_per_subarray,speedup_vs_row_clone\n";
    for (const Line& l : lines) {
      csv << l.method << ',' << l.n_rows << ',' << format_double(l.time_ns) << ','
          << format_double(l.speedup) << '\n';
    }
    write_text_file(dir / "destroy.csv", csv.str());
    const nlohmann::json config = {{"profile", profile.name},
                                   {"rows_per_subarray", params.rows_per_subarray},
                                   {"activation_counts", counts}};
    write_manifest(dir, "destroy", config, 0, profile.name, {"destroy.csv", "manifest.json"});
  }
  return 0;
}

int run_bench_cmd(int width, const std::string& mode_name, const std::string& out, bool quiet) {
  ThroughputMode mode;
  if (mode_name == "usable") {
    mode = ThroughputMode::kUsableColumns;
  } else if (mode_name == "retry") {
    mode = ThroughputMode::kRetry;
  } else {
    throw ConfigError("unknown throughput mode \"" + mode_name + "\" (usable or retry)");
  }
  const std::vector<BenchResult> results = run_bench(width, mode);
  if (!quiet) {
    std::cout << "bit-serial kernels, width " << width << ", mode " << mode_name << "\n";
    for (const BenchResult& r : results) {
      std::cout << "  " << r.config << " " << r.kernel << ": speedup "
                << format_double(r.speedup) << " (latency " << format_double(r.cost.latency_ns)
                << " ns, usable " << format_double(r.cost.usable_fraction) << ")\n";
    }
  }
  if (!out.empty()) {
    const fs::path dir = prepare_out_dir(out);
    std::ostringstream csv;
    csv << "config,kernel,width,mode,maj_steps,host_steps,latency_ns,usable_fraction,"
           "throughput_per_ns,speedup\n";
    for (const BenchResult& r : results) {
      csv << r.config << ',' << r.kernel << ',' << width << ',' << mode_name << ','
          << r.cost.maj_steps << ',' << r.cost.host_steps << ','
          << format_double(r.cost.latency_ns) << ',' << format_double(r.cost.usable_fraction)
          << ',' << format_double(r.cost.throughput) << ',' << format_double(r.speedup)
          << '\n';
    }
    write_text_file(dir / "bench.csv", csv.str());
    const nlohmann::json config = {{"width", width}, {"mode", mode_name}};
    write_manifest(dir, "bench", config, 0, "-", {"bench.csv", "manifest.json"});
  }
  return 0;
}

int run_discover(const std::string& profile_arg, int rows, int columns, std::uint64_t seed,
                 const std::string& out, bool quiet) {
  const DeviceProfile profile = load_profile_arg(profile_arg);
  DiscoveryOptions options;
  options.rows = rows;
  options.columns = columns;
  options.seed = seed;
  const std::vector<RowRange> ranges = discover_subarrays(profile, options);
  if (!quiet) {
    std::cout << "discovered " << ranges.size() << " subarray range(s) on " << profile.name
              << ":\n";
    for (const RowRange& r : ranges) {
      std::cout << "  rows [" << r.begin << ", " << r.end << ")  (" << r.end - r.begin
                << " rows)\n";
    }
  }
  if (!out.empty()) {
    const fs::path dir = prepare_out_dir(out);
    nlohmann::json items = nlohmann::json::array();
    for (const RowRange& r : ranges) items.push_back({{"begin", r.begin}, {"end", r.end}});
    const nlohmann::json doc = {{"schema", "pudsim-discovery-v1"},
                                {"profile", profile.name},
                                {"ranges", items}};
    write_text_file(dir / "discovery.json", doc.dump(2) + "\n");
    const nlohmann::json config = {{"profile", profile.name},
                                   {"rows", rows},
                                   {"columns", columns},
                                   {"seed", seed}};
    write_manifest(dir, "discover", config, seed, profile.name,
                   {"discovery.json", "manifest.json"});
  }
  return 0;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

DeviceProfile load_profile_arg(const std::string& arg) {
  for (const std::string& name : profile_names()) {
    if (arg == name) return make_profile(arg);
  }
  if (fs::exists(arg)) return profile_from_json(read_json_file(arg));
  if (const char* dir = std::getenv("PUDSIM_PROFILE_DIR")) {
    const fs::path candidate = fs::path(dir) / (arg + ".json");
    if (fs::exists(candidate)) return profile_from_json(read_json_file(candidate));
  }
  throw ConfigError("unknown profile \"" + arg +
                    "\": not a preset, not a file, and not found under PUDSIM_PROFILE_DIR");
}

SweepConfig default_characterization_config() {
  SweepConfig cfg;
  cfg.experiment = "maj";
  cfg.banks = 16;
  cfg.subarrays = 3;
  cfg.groups = 100;
  cfg.trials = 8;
  cfg.columns = 512;
  cfg.variation_pct = 20.0;
  cfg.activation_counts = {2, 4, 8, 16, 32};
  cfg.maj_x = {3, 5, 7, 9};
  cfg.patterns = {"random"};
  cfg.timings = {{1.5, 3.0}};
  return cfg;
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Command-level simulator for compute-in-DRAM timing violations"};
  app.require_subcommand(1);

  // simulate ------------------------------------------------------------
  auto* simulate = app.add_subcommand(
      "simulate", "Run one ACT -> PRE -> ACT sequence and show what it drives");
  std::string sim_profile = "mfrH-512";
  int sim_first = 0, sim_second = 0, sim_columns = 64;
  double sim_t1 = 1.5, sim_t2 = 3.0, sim_variation = 0.0;
  std::uint64_t sim_seed = 1;
  simulate->add_option("--profile", sim_profile, "Profile preset or JSON file");
  simulate->add_option("--first", sim_first, "First activated row")->required();
  simulate->add_option("--second", sim_second, "Second activated row")->required();
  simulate->add_option("--t1", sim_t1, "ACT -> PRE gap in ns");
  simulate->add_option("--t2", sim_t2, "PRE -> ACT gap in ns");
  simulate->add_option("--variation", sim_variation, "Cell variation in percent");
  simulate->add_option("--seed", sim_seed, "Random seed");
  simulate->add_option("--columns", sim_columns, "Columns to simulate");

  // sweep ----------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "Run a sweep described by a JSON config");
  std::string sweep_config_path, sweep_out = "out";
  std::string sweep_format = "both";
  bool sweep_quiet = false;
  std::int64_t sweep_seed = -1;
  int sweep_jobs = 0;
  sweep->add_option("--config", sweep_config_path, "Sweep config JSON file")->required();
  sweep->add_option("--out", sweep_out, "Output directory");
  sweep->add_option("--seed", sweep_seed, "Override the config seed");
  sweep->add_option("--jobs", sweep_jobs, "Worker threads (default: config value)");
  sweep->add_option("--format", sweep_format, "csv, json, or both");
  sweep->add_flag("--quiet", sweep_quiet, "Suppress progress output");

  // characterize -----------------------------------------------------------
  auto* charz = app.add_subcommand(
      "characterize", "Run the default characterization plan (override knobs as needed)");
  std::string ch_profile = "mfrH-512", ch_experiment = "maj", ch_out = "out";
  std::string ch_format = "both";
  int ch_banks = -1, ch_subarrays = -1, ch_groups = -1, ch_trials = -1, ch_columns = -1;
  int ch_jobs = 0;
  double ch_variation = -1.0;
  std::int64_t ch_seed = -1;
  bool ch_quiet = false;
  charz->add_option("--profile", ch_profile, "Profile preset or JSON file");
  charz->add_option("--experiment", ch_experiment, "activation, maj, or mrc");
  charz->add_option("--banks", ch_banks, "Banks to sample");
  charz->add_option("--subarrays", ch_subarrays, "Subarrays per bank");
  charz->add_option("--groups", ch_groups, "Groups per subarray");
  charz->add_option("--trials", ch_trials, "Trials per group");
  charz->add_option("--columns", ch_columns, "Columns per group");
  charz->add_option("--variation", ch_variation, "Cell variation in percent");
  charz->add_option("--seed", ch_seed, "Random seed");
  charz->add_option("--jobs", ch_jobs, "Worker threads");
  charz->add_option("--out", ch_out, "Output directory");
  charz->add_option("--format", ch_format, "csv, json, or both");
  charz->add_flag("--quiet", ch_quiet, "Suppress progress output");

  // bench ------------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "Bit-serial kernel throughput vs the baseline");
  int bench_width = 32;
  std::string bench_mode = "usable", bench_out;
  bool bench_quiet = false;
  bench->add_option("--width", bench_width, "Operand width in bits");
  bench->add_option("--mode", bench_mode, "usable or retry");
  bench->add_option("--out", bench_out, "Output directory (optional)");
  bench->add_flag("--quiet", bench_quiet, "Suppress table output");

  // destroy ------------------------------------------------------------------
  auto* destroy = app.add_subcommand("destroy", "Bulk data-destruction latency per subarray");
  std::string destroy_profile = "mfrH-512", destroy_out;
  std::vector<int> destroy_counts = {2, 4, 8, 16, 32};
  bool destroy_quiet = false;
  destroy->add_option("--profile", destroy_profile, "Profile preset or JSON file");
  destroy->add_option("--n-rows", destroy_counts, "Activation-set sizes for the copy sweep");
  destroy->add_option("--out", destroy_out, "Output directory (optional)");
  destroy->add_flag("--quiet", destroy_quiet, "Suppress table output");

  // discover -----------------------------------------------------------------
  auto* discover = app.add_subcommand("discover", "Locate subarray boundaries via row cloning");
  std::string disc_profile = "mfrH-512", disc_out;
  int disc_rows = 4096, disc_columns = 64;
  std::uint64_t disc_seed = 1;
  bool disc_quiet = false;
  discover->add_option("--profile", disc_profile, "Profile preset or JSON file");
  discover->add_option("--rows", disc_rows, "Rows to scan (0 = whole bank)");
  discover->add_option("--columns", disc_columns, "Columns per test");
  discover->add_option("--seed", disc_seed, "Random seed");
  discover->add_option("--out", disc_out, "Output directory (optional)");
  discover->add_flag("--quiet", disc_quiet, "Suppress range output");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) {
      return run_simulate(sim_profile, sim_first, sim_second, sim_t1, sim_t2, sim_variation,
                          sim_seed, sim_columns);
    }
    if (sweep->parsed()) {
      SweepConfig cfg = sweep_config_from_json(read_json_file(sweep_config_path));
      if (sweep_seed >= 0) cfg.seed = static_cast<std::uint64_t>(sweep_seed);
      if (sweep_jobs > 0) cfg.jobs = sweep_jobs;
      const std::vector<ResultRow> rows = run_sweep(cfg);
      write_sweep_outputs(prepare_out_dir(sweep_out), "sweep", cfg, rows, sweep_format,
                          sweep_quiet);
      return 0;
    }
    if (charz->parsed()) {
      SweepConfig cfg = default_characterization_config();
      cfg.profile = load_profile_arg(ch_profile);
      cfg.experiment = ch_experiment;
      if (ch_banks > 0) cfg.banks = ch_banks;
      if (ch_subarrays > 0) cfg.subarrays = ch_subarrays;
      if (ch_groups > 0) cfg.groups = ch_groups;
      if (ch_trials > 0) cfg.trials = ch_trials;
      if (ch_columns > 0) cfg.columns = ch_columns;
      if (ch_variation >= 0) cfg.variation_pct = ch_variation;
      if (ch_seed >= 0) cfg.seed = static_cast<std::uint64_t>(ch_seed);
      if (ch_jobs > 0) cfg.jobs = ch_jobs;
      const std::vector<ResultRow> rows = run_sweep(cfg);
      write_sweep_outputs(prepare_out_dir(ch_out), "characterize", cfg, rows, ch_format,
                          ch_quiet);
      return 0;
    }
    if (bench->parsed()) {
      return run_bench_cmd(bench_width, bench_mode, bench_out, bench_quiet);
    }
    if (destroy->parsed()) {
      return run_destroy(destroy_profile, destroy_counts, destroy_out, destroy_quiet);
    }
    if (discover->parsed()) {
      return run_discover(disc_profile, disc_rows, disc_columns, disc_seed, disc_out,
                          disc_quiet);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace pudsim::cli
