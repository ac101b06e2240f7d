// Experiment harness implementation.
#include "pudsim/harness.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "pudsim/stats.hpp"

namespace pudsim {

namespace {

// Seed-path tags (see rng.hpp): experiment, then per-group streams.
constexpr std::uint64_t kTagActivation = 1;
constexpr std::uint64_t kTagMaj = 2;
constexpr std::uint64_t kTagMrc = 3;
constexpr std::uint64_t kStreamPlan = 0x11;
constexpr std::uint64_t kStreamTrial = 0x22;

int parse_hex_byte(const std::string& text) {
  if (text.size() != 4 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) return -1;
  int value = 0;
  for (int i = 2; i < 4; ++i) {
    const char c = text[i];
    value <<= 4;
    if (c >= '0' && c <= '9') {
      value |= c - '0';
    } else if (c >= 'a' && c <= 'f') {
      value |= c - 'a' + 10;
    } else if (c >= 'A' && c <= 'F') {
      value |= c - 'A' + 10;
    } else {
      return -1;
    }
  }
  return value;
}

void fill_byte_bits(std::vector<std::uint8_t>& bits, std::uint8_t byte) {
  for (std::size_t c = 0; c < bits.size(); ++c) {
    bits[c] = (byte >> (7 - (c % 8))) & 1;
  }
}

void fill_random_bits(std::vector<std::uint8_t>& bits, Rng& rng) {
  for (auto& b : bits) b = rng.bernoulli(0.5) ? 1 : 0;
}

// Draw one operand's bits for the trial.  Returns the jitter to use when
// writing the row (non-repeating data is written with level jitter).
double draw_operand(const DataPattern& pattern, const AnalogParams& analog,
                    std::vector<std::uint8_t>& bits, Rng& rng) {
  if (pattern.random) {
    fill_random_bits(bits, rng);
    return analog.random_pattern_jitter;
  }
  fill_byte_bits(bits, rng.bernoulli(0.5) ? pattern.byte_b : pattern.byte_a);
  return 0.0;
}

struct GroupId {
  int bank = 0;
  int subarray = 0;
  int group = 0;
};

std::vector<GroupId> enumerate_groups(const SweepConfig& cfg) {
  std::vector<GroupId> ids;
  ids.reserve(static_cast<std::size_t>(cfg.banks) * cfg.subarrays * cfg.groups);
  for (int b = 0; b < cfg.banks; ++b) {
    for (int s = 0; s < cfg.subarrays; ++s) {
      for (int g = 0; g < cfg.groups; ++g) ids.push_back({b, s, g});
    }
  }
  return ids;
}

DeviceProfile working_profile(const SweepConfig& cfg) {
  DeviceProfile p = cfg.profile;
  if (cfg.columns > 0) p.columns = cfg.columns;
  validate_profile(p);
  return p;
}

std::vector<EnvironmentParams> environment_grid(const SweepConfig& cfg) {
  if (!cfg.environments.empty()) return cfg.environments;
  return {cfg.env};
}

template <typename Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(jobs, count);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

template <typename PerGroup>
std::vector<ResultRow> run_over_groups(const SweepConfig& cfg, PerGroup&& per_group) {
  const std::vector<GroupId> ids = enumerate_groups(cfg);
  std::vector<std::vector<ResultRow>> slots(ids.size());
  parallel_for(static_cast<int>(ids.size()), cfg.jobs,
               [&](int i) { slots[i] = per_group(ids[i]); });
  std::vector<ResultRow> rows;
  for (auto& slot : slots) {
    rows.insert(rows.end(), slot.begin(), slot.end());
  }
  return rows;
}

ResultRow base_row(const SweepConfig& cfg, const GroupId& id, const EnvironmentParams& env) {
  ResultRow row;
  row.experiment = cfg.experiment;
  row.variation_pct = cfg.variation_pct;
  row.temperature_c = env.temperature_c;
  row.vpp_v = env.vpp_v;
  row.bank = id.bank;
  row.subarray = id.subarray;
  row.group = id.group;
  row.trials = cfg.trials;
  return row;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

DataPattern parse_pattern(const std::string& name) {
  DataPattern p;
  p.name = name;
  if (name == "random") {
    p.random = true;
    return p;
  }
  const auto slash = name.find('/');
  if (slash != std::string::npos) {
    const int a = parse_hex_byte(name.substr(0, slash));
    const int b = parse_hex_byte(name.substr(slash + 1));
    if (a >= 0 && b >= 0) {
      p.random = false;
      p.byte_a = static_cast<std::uint8_t>(a);
      p.byte_b = static_cast<std::uint8_t>(b);
      return p;
    }
  }
  throw ConfigError("unknown data pattern \"" + name +
                    "\" (expected \"random\" or a byte pair like \"0xAA/0x55\")");
}

long long enumerate_group_count(const SweepConfig& cfg) {
  return static_cast<long long>(cfg.banks) * cfg.subarrays * cfg.groups *
         static_cast<long long>(cfg.activation_counts.size());
}

std::vector<ResultRow> run_activation_test(const SweepConfig& cfg) {
  const DeviceProfile profile = working_profile(cfg);
  return run_over_groups(cfg, [&](const GroupId& id) {
    std::vector<ResultRow> out;
    const std::uint64_t group_seed =
        Rng::derive(cfg.seed, {kTagActivation, static_cast<std::uint64_t>(id.bank),
                               static_cast<std::uint64_t>(id.subarray),
                               static_cast<std::uint64_t>(id.group)})
            .next_u64();
    const int sub = id.subarray % profile.subarray_count();
    for (const EnvironmentParams& env : environment_grid(cfg)) {
      BankState state(profile, env, cfg.variation_pct, group_seed);
      for (int n : cfg.activation_counts) {
        Rng plan_rng = Rng::derive(group_seed, {kStreamPlan, static_cast<std::uint64_t>(n)});
        ApaPair pair;
        std::vector<int> rows;
        try {
          ReplicationPlan plan = plan_replication(profile, sub, 1, n, plan_rng);
          pair = plan.pair;
          rows = plan.rows;
        } catch (const PlanError&) {
          continue;  // count not reachable on this geometry
        }
        for (const std::string& pattern_name : cfg.patterns) {
          const DataPattern pattern = parse_pattern(pattern_name);
          for (const ApaTiming& timing : cfg.timings) {
            std::vector<std::uint8_t> ok(rows.size() * profile.columns, 1);
            std::vector<std::uint8_t> fill(profile.columns);
            for (int trial = 0; trial < cfg.trials; ++trial) {
              Rng rng = Rng::derive(group_seed,
                                    {kStreamTrial, static_cast<std::uint64_t>(trial)});
              const int write_bit = rng.bernoulli(0.5) ? 1 : 0;
              double jitter = 0.0;
              for (int row : rows) {
                // Pre-fill so the overwrite is observable: pattern data for
                // random patterns, otherwise the complement of the write.
                if (pattern.random) {
                  jitter = draw_operand(pattern, profile.analog, fill, rng);
                } else {
                  for (auto& b : fill) b = write_bit ? 0 : 1;
                }
                state.write_row(row, fill, jitter, rng);
              }
              const TimingParams& t = profile.timing;
              const Command seq[] = {
                  act(pair.first_row, timing.t1_ns),
                  pre(timing.t2_ns),
                  act(pair.second_row, t.command_granularity_ns),
                  wr(write_bit, t.tras_ns),
                  pre(t.trp_ns),
              };
              state.execute_sequence(seq, rng);
              for (std::size_t r = 0; r < rows.size(); ++r) {
                const ReadResult read = read_row(state, rows[r], rng);
                for (int c = 0; c < profile.columns; ++c) {
                  if (!read.reliable[c] || read.values[c] != write_bit) {
                    ok[r * profile.columns + c] = 0;
                  }
                }
              }
            }
            long long good = 0;
            for (auto b : ok) good += b;
            ResultRow row = base_row(cfg, id, env);
            row.operation = "act_pre_act_write";
            row.x = 1;
            row.n_rows = n;
            row.t1_ns = timing.t1_ns;
            row.t2_ns = timing.t2_ns;
            row.pattern = pattern.name;
            row.cells = static_cast<int>(ok.size());
            row.success_rate = static_cast<double>(good) / static_cast<double>(ok.size());
            out.push_back(std::move(row));
          }
        }
      }
    }
    return out;
  });
}

std::vector<ResultRow> run_maj_sweep(const SweepConfig& cfg) {
  const DeviceProfile profile = working_profile(cfg);
  return run_over_groups(cfg, [&](const GroupId& id) {
    std::vector<ResultRow> out;
    const std::uint64_t group_seed =
        Rng::derive(cfg.seed, {kTagMaj, static_cast<std::uint64_t>(id.bank),
                               static_cast<std::uint64_t>(id.subarray),
                               static_cast<std::uint64_t>(id.group)})
            .next_u64();
    const int sub = id.subarray % profile.subarray_count();
    for (const EnvironmentParams& env : environment_grid(cfg)) {
      BankState state(profile, env, cfg.variation_pct, group_seed);
      for (int n : cfg.activation_counts) {
        for (int x : cfg.maj_x) {
          if (x > n) continue;  // the set cannot hold the operands
          Rng plan_rng = Rng::derive(group_seed, {kStreamPlan, static_cast<std::uint64_t>(n)});
          ReplicationPlan plan;
          try {
            plan = plan_replication(profile, sub, x, n, plan_rng);
          } catch (const PlanError&) {
            continue;
          }
          for (const std::string& pattern_name : cfg.patterns) {
            const DataPattern pattern = parse_pattern(pattern_name);
            for (const ApaTiming& timing : cfg.timings) {
              std::vector<std::uint8_t> ok(profile.columns, 1);
              std::vector<std::vector<std::uint8_t>> operands(
                  x, std::vector<std::uint8_t>(profile.columns));
              std::vector<std::uint8_t> expected(profile.columns);
              for (int trial = 0; trial < cfg.trials; ++trial) {
                Rng rng = Rng::derive(group_seed,
                                      {kStreamTrial, static_cast<std::uint64_t>(trial)});
                double jitter = 0.0;
                for (auto& op : operands) {
                  jitter = draw_operand(pattern, profile.analog, op, rng);
                }
                for (int c = 0; c < profile.columns; ++c) {
                  int ones = 0;
                  for (const auto& op : operands) ones += op[c];
                  expected[c] = ones * 2 > x ? 1 : 0;
                }
                maj_x(state, plan, operands, timing, jitter, rng);
                const ReadResult read = read_row(state, plan.rows.front(), rng);
                for (int c = 0; c < profile.columns; ++c) {
                  if (!read.reliable[c] || read.values[c] != expected[c]) ok[c] = 0;
                }
              }
              long long good = 0;
              for (auto b : ok) good += b;
              ResultRow row = base_row(cfg, id, env);
              row.operation = "maj" + std::to_string(x);
              row.x = x;
              row.n_rows = n;
              row.t1_ns = timing.t1_ns;
              row.t2_ns = timing.t2_ns;
              row.pattern = pattern.name;
              row.cells = profile.columns;
              row.success_rate = static_cast<double>(good) / profile.columns;
              out.push_back(std::move(row));
            }
          }
        }
      }
    }
    return out;
  });
}

std::vector<ResultRow> run_mrc_sweep(const SweepConfig& cfg) {
  const DeviceProfile profile = working_profile(cfg);
  return run_over_groups(cfg, [&](const GroupId& id) {
    std::vector<ResultRow> out;
    const std::uint64_t group_seed =
        Rng::derive(cfg.seed, {kTagMrc, static_cast<std::uint64_t>(id.bank),
                               static_cast<std::uint64_t>(id.subarray),
                               static_cast<std::uint64_t>(id.group)})
            .next_u64();
    const int sub = id.subarray % profile.subarray_count();
    for (const EnvironmentParams& env : environment_grid(cfg)) {
      BankState state(profile, env, cfg.variation_pct, group_seed);
      for (int n : cfg.activation_counts) {
        if (n < 2) continue;
        Rng plan_rng = Rng::derive(group_seed, {kStreamPlan, static_cast<std::uint64_t>(n)});
        ReplicationPlan plan;
        try {
          plan = plan_replication(profile, sub, 1, n, plan_rng);
        } catch (const PlanError&) {
          continue;
        }
        std::vector<int> dests;
        for (int row : plan.rows) {
          if (row != plan.pair.first_row) dests.push_back(row);
        }
        for (const std::string& pattern_name : cfg.patterns) {
          const DataPattern pattern = parse_pattern(pattern_name);
          for (const ApaTiming& timing : cfg.timings) {
            std::vector<std::uint8_t> ok(dests.size() * profile.columns, 1);
            std::vector<std::uint8_t> src_bits(profile.columns);
            std::vector<std::uint8_t> inverted(profile.columns);
            for (int trial = 0; trial < cfg.trials; ++trial) {
              Rng rng = Rng::derive(group_seed,
                                    {kStreamTrial, static_cast<std::uint64_t>(trial)});
              const double jitter = draw_operand(pattern, profile.analog, src_bits, rng);
              for (int c = 0; c < profile.columns; ++c) inverted[c] = src_bits[c] ? 0 : 1;
              state.write_row(plan.pair.first_row, src_bits, jitter, rng);
              for (int dest : dests) state.write_row(dest, inverted, jitter, rng);
              multi_row_copy(state, plan.pair, timing, rng);
              for (std::size_t d = 0; d < dests.size(); ++d) {
                const ReadResult read = read_row(state, dests[d], rng);
                for (int c = 0; c < profile.columns; ++c) {
                  if (!read.reliable[c] || read.values[c] != src_bits[c]) {
                    ok[d * profile.columns + c] = 0;
                  }
                }
              }
            }
            long long good = 0;
            for (auto b : ok) good += b;
            ResultRow row = base_row(cfg, id, env);
            row.operation = "multi_row_copy";
            row.x = 1;
            row.n_rows = n;
            row.t1_ns = timing.t1_ns;
            row.t2_ns = timing.t2_ns;
            row.pattern = pattern.name;
            row.cells = static_cast<int>(ok.size());
            row.success_rate =
                ok.empty() ? 0.0 : static_cast<double>(good) / static_cast<double>(ok.size());
            out.push_back(std::move(row));
          }
        }
      }
    }
    return out;
  });
}

std::vector<ResultRow> run_sweep(const SweepConfig& cfg) {
  if (cfg.experiment == "activation") return run_activation_test(cfg);
  if (cfg.experiment == "maj") return run_maj_sweep(cfg);
  if (cfg.experiment == "mrc") return run_mrc_sweep(cfg);
  throw ConfigError("unknown experiment \"" + cfg.experiment +
                    "\" (expected activation, maj, or mrc)");
}

std::vector<AggregateRow> aggregate_rows(const std::vector<ResultRow>& rows) {
  std::vector<AggregateRow> out;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<double>> samples;
  for (const ResultRow& row : rows) {
    std::ostringstream key;
    key << row.experiment << '|' << row.operation << '|' << row.x << '|' << row.n_rows << '|'
        << format_double(row.t1_ns) << '|' << format_double(row.t2_ns) << '|' << row.pattern
        << '|' << format_double(row.temperature_c) << '|' << format_double(row.vpp_v) << '|'
        << format_double(row.variation_pct) << '|' << row.trials << '|' << row.cells;
    auto [it, inserted] = index.emplace(key.str(), out.size());
    if (inserted) {
      AggregateRow agg;
      agg.key = row;
      agg.key.bank = 0;
      agg.key.subarray = 0;
      agg.key.group = 0;
      out.push_back(agg);
      samples.emplace_back();
    }
    samples[it->second].push_back(row.success_rate);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Summary s = summarize(samples[i]);
    out[i].groups = static_cast<int>(s.count);
    out[i].min = s.min;
    out[i].q1 = s.q1;
    out[i].median = s.median;
    out[i].q3 = s.q3;
    out[i].max = s.max;
    out[i].mean = s.mean;
  }
  return out;
}

double mean_success(const std::vector<ResultRow>& rows, int x, int n_rows,
                    const std::string& pattern, double t1_ns, double t2_ns) {
  double total = 0.0;
  int count = 0;
  for (const ResultRow& row : rows) {
    if (row.x != x || row.n_rows != n_rows) continue;
    if (!pattern.empty() && row.pattern != pattern) continue;
    if (std::abs(row.t1_ns - t1_ns) > 1e-9 || std::abs(row.t2_ns - t2_ns) > 1e-9) continue;
    total += row.success_rate;
    ++count;
  }
  if (count == 0) throw Error("mean_success: no rows match the requested knobs");
  return total / count;
}

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  std::ofstream file(path);
  if (!file) throw Error("cannot open " + path.string() + " for writing");
  file << "experiment,operation,x,n_rows,t1_ns,t2_ns,pattern,temperature_c,vpp_v,"
          "variation_pct,bank,subarray,group,trials,cells,success_rate\n";
  for (const ResultRow& r : rows) {
    file << r.experiment << ',' << r.operation << ',' << r.x << ',' << r.n_rows << ','
         << format_double(r.t1_ns) << ',' << format_double(r.t2_ns) << ',' << r.pattern << ','
         << format_double(r.temperature_c) << ',' << format_double(r.vpp_v) << ','
         << format_double(r.variation_pct) << ',' << r.bank << ',' << r.subarray << ','
         << r.group << ',' << r.trials << ',' << r.cells << ','
         << format_double(r.success_rate) << '\n';
  }
  if (!file.good()) throw Error("failed while writing " + path.string());
}

void write_aggregate_csv(const std::filesystem::path& path,
                         const std::vector<AggregateRow>& rows) {
  std::ofstream file(path);
  if (!file) throw Error("cannot open " + path.string() + " for writing");
  file << "experiment,operation,x,n_rows,t1_ns,t2_ns,pattern,temperature_c,vpp_v,"
          "variation_pct,trials,cells,groups,min,q1,median,q3,max,mean\n";
  for (const AggregateRow& a : rows) {
    const ResultRow& r = a.key;
    file << r.experiment << ',' << r.operation << ',' << r.x << ',' << r.n_rows << ','
         << format_double(r.t1_ns) << ',' << format_double(r.t2_ns) << ',' << r.pattern << ','
         << format_double(r.temperature_c) << ',' << format_double(r.vpp_v) << ','
         << format_double(r.variation_pct) << ',' << r.trials << ',' << r.cells << ','
         << a.groups << ',' << format_double(a.min) << ',' << format_double(a.q1) << ','
         << format_double(a.median) << ',' << format_double(a.q3) << ','
         << format_double(a.max) << ',' << format_double(a.mean) << '\n';
  }
  if (!file.good()) throw Error("failed while writing " + path.string());
}

nlohmann::json results_to_json(const std::vector<ResultRow>& rows) {
  nlohmann::json items = nlohmann::json::array();
  for (const ResultRow& r : rows) {
    items.push_back({
        {"experiment", r.experiment},
        {"operation", r.operation},
        {"x", r.x},
        {"n_rows", r.n_rows},
        {"t1_ns", r.t1_ns},
        {"t2_ns", r.t2_ns},
        {"pattern", r.pattern},
        {"temperature_c", r.temperature_c},
        {"vpp_v", r.vpp_v},
        {"variation_pct", r.variation_pct},
        {"bank", r.bank},
        {"subarray", r.subarray},
        {"group", r.group},
        {"trials", r.trials},
        {"cells", r.cells},
        {"success_rate", r.success_rate},
    });
  }
  return nlohmann::json{{"schema", "pudsim-results-v1"}, {"rows", items}};
}

SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("sweep config must be a JSON object");
  SweepConfig cfg;
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    const nlohmann::json& v = item.value();
    if (key == "experiment") {
      cfg.experiment = v.get<std::string>();
    } else if (key == "profile") {
      cfg.profile = v.is_string() ? make_profile(v.get<std::string>()) : profile_from_json(v);
    } else if (key == "columns") {
      cfg.columns = v.get<int>();
    } else if (key == "banks") {
      cfg.banks = v.get<int>();
    } else if (key == "subarrays") {
      cfg.subarrays = v.get<int>();
    } else if (key == "groups") {
      cfg.groups = v.get<int>();
    } else if (key == "trials") {
      cfg.trials = v.get<int>();
    } else if (key == "variation_pct") {
      cfg.variation_pct = v.get<double>();
    } else if (key == "seed") {
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "jobs") {
      cfg.jobs = v.get<int>();
    } else if (key == "environment") {
      cfg.env.temperature_c = v.value("temperature_c", cfg.env.temperature_c);
      cfg.env.vpp_v = v.value("vpp_v", cfg.env.vpp_v);
    } else if (key == "activation_counts") {
      cfg.activation_counts = v.get<std::vector<int>>();
    } else if (key == "maj_x") {
      cfg.maj_x = v.get<std::vector<int>>();
    } else if (key == "patterns") {
      cfg.patterns = v.get<std::vector<std::string>>();
    } else if (key == "timings") {
      cfg.timings.clear();
      for (const auto& t : v) {
        if (!t.is_array() || t.size() != 2) {
          throw ConfigError("timings must be an array of [t1_ns, t2_ns] pairs");
        }
        cfg.timings.push_back({t[0].get<double>(), t[1].get<double>()});
      }
    } else if (key == "environments") {
      cfg.environments.clear();
      for (const auto& e : v) {
        EnvironmentParams env;
        env.temperature_c = e.value("temperature_c", env.temperature_c);
        env.vpp_v = e.value("vpp_v", env.vpp_v);
        cfg.environments.push_back(env);
      }
    } else {
      throw ConfigError("unknown key \"" + key + "\" in sweep config");
    }
  }
  if (cfg.banks < 1 || cfg.subarrays < 1 || cfg.groups < 1 || cfg.trials < 1) {
    throw ConfigError("banks, subarrays, groups, and trials must all be at least 1");
  }
  if (cfg.variation_pct < 0 || cfg.variation_pct > 95) {
    throw ConfigError("variation_pct must be in [0, 95]");
  }
  if (cfg.jobs < 1) throw ConfigError("jobs must be at least 1");
  for (const std::string& p : cfg.patterns) parse_pattern(p);
  for (const ApaTiming& t : cfg.timings) {
    if (t.t1_ns <= 0 || t.t2_ns <= 0) throw ConfigError("timing values must be positive");
  }
  return cfg;
}

nlohmann::json sweep_config_to_json(const SweepConfig& cfg) {
  nlohmann::json timings = nlohmann::json::array();
  for (const ApaTiming& t : cfg.timings) timings.push_back({t.t1_ns, t.t2_ns});
  nlohmann::json envs = nlohmann::json::array();
  for (const EnvironmentParams& e : cfg.environments) {
    envs.push_back({{"temperature_c", e.temperature_c}, {"vpp_v", e.vpp_v}});
  }
  return nlohmann::json{
      {"experiment", cfg.experiment},
      {"profile", profile_to_json(cfg.profile)},
      {"columns", cfg.columns},
      {"banks", cfg.banks},
      {"subarrays", cfg.subarrays},
      {"groups", cfg.groups},
      {"trials", cfg.trials},
      {"variation_pct", cfg.variation_pct},
      {"seed", cfg.seed},
      {"jobs", cfg.jobs},
      {"environment",
       {{"temperature_c", cfg.env.temperature_c}, {"vpp_v", cfg.env.vpp_v}}},
      {"activation_counts", cfg.activation_counts},
      {"maj_x", cfg.maj_x},
      {"patterns", cfg.patterns},
      {"timings", timings},
      {"environments", envs},
  };
}

std::vector<RowRange> discover_subarrays(const DeviceProfile& profile,
                                         const DiscoveryOptions& options) {
  DeviceProfile p = profile;
  if (options.columns > 0) p.columns = options.columns;
  validate_profile(p);
  const int addressable = p.subarray_count() * p.rows_per_subarray;
  const int limit = options.rows > 0 ? std::min(options.rows, addressable) : addressable;
  if (limit < 2) throw ConfigError("discovery needs at least two rows");

  BankState state(p, EnvironmentParams{}, 0.0, options.seed);
  Rng rng(options.seed ^ 0xD15C0u);
  std::vector<std::uint8_t> bits(p.columns);
  std::vector<std::uint8_t> inverted(p.columns);
  const ApaTiming clone_timing{p.timing.tras_ns, 2.0 * p.timing.union_t2_max_ns};

  auto clone_succeeds = [&](int src, int dst) {
    fill_random_bits(bits, rng);
    for (int c = 0; c < p.columns; ++c) inverted[c] = bits[c] ? 0 : 1;
    state.write_row(src, bits, 0.0, rng);
    state.write_row(dst, inverted, 0.0, rng);
    row_clone(state, src, dst, clone_timing, rng);
    const ReadResult read = read_row(state, dst, rng);
    int match = 0;
    for (int c = 0; c < p.columns; ++c) {
      if (read.reliable[c] && read.values[c] == bits[c]) ++match;
    }
    return match * 10 >= p.columns * 9;  // >= 90% of columns copied
  };

  std::vector<RowRange> ranges;
  int begin = 0;
  for (int r = 0; r + 1 < limit; ++r) {
    if (!clone_succeeds(r, r + 1)) {
      ranges.push_back({begin, r + 1});
      begin = r + 1;
    }
  }
  ranges.push_back({begin, limit});

  // Verify each range with random interior pairs.
  for (const RowRange& range : ranges) {
    const int span = range.end - range.begin;
    if (span < 2) continue;
    for (int k = 0; k < options.verify_pairs; ++k) {
      const int a = range.begin + static_cast<int>(rng.below(span));
      int b = range.begin + static_cast<int>(rng.below(span - 1));
      if (b >= a) ++b;
      if (!clone_succeeds(a, b)) {
        std::ostringstream msg;
        msg << "discovery verification failed: rows " << a << " and " << b
            << " do not behave as one subarray";
        throw Error(msg.str());
      }
    }
  }
  return ranges;
}

}  // namespace pudsim
