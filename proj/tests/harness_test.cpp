// Characterization harness: sweep enumeration, determinism, parallelism,
// aggregation, serialization, and subarray discovery.
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pudsim/errors.hpp"
#include "pudsim/harness.hpp"
#include "pudsim/profile.hpp"

using namespace pudsim;
namespace fs = std::filesystem;

namespace {

SweepConfig small_demo_config() {
  SweepConfig cfg;
  cfg.profile = make_profile("demo-8");
  cfg.columns = 32;
  cfg.banks = 1;
  cfg.subarrays = 1;
  cfg.groups = 3;
  cfg.trials = 2;
  cfg.activation_counts = {4};
  cfg.maj_x = {3};
  cfg.seed = 7;
  return cfg;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("pudsim_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

bool rows_equal(const std::vector<ResultRow>& a, const std::vector<ResultRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].experiment != b[i].experiment || a[i].operation != b[i].operation ||
        a[i].x != b[i].x || a[i].n_rows != b[i].n_rows || a[i].t1_ns != b[i].t1_ns ||
        a[i].t2_ns != b[i].t2_ns || a[i].pattern != b[i].pattern ||
        a[i].bank != b[i].bank || a[i].subarray != b[i].subarray || a[i].group != b[i].group ||
        a[i].success_rate != b[i].success_rate) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("the default characterization plan enumerates 24000 groups") {
  CHECK(enumerate_group_count(SweepConfig{}) == 24000);
}

TEST_CASE("data pattern parsing") {
  const DataPattern random = parse_pattern("random");
  CHECK(random.random);
  CHECK(random.name == "random");

  const DataPattern fixed = parse_pattern("0xAA/0x55");
  CHECK_FALSE(fixed.random);
  CHECK(fixed.byte_a == 0xAA);
  CHECK(fixed.byte_b == 0x55);

  CHECK_THROWS_AS(parse_pattern("junk"), ConfigError);
  CHECK_THROWS_AS(parse_pattern("0xZZ/0x00"), ConfigError);
  CHECK_THROWS_AS(parse_pattern("0xAA"), ConfigError);
}

TEST_CASE("majority sweep rows are deterministic and parallelism-invariant") {
  const SweepConfig cfg = small_demo_config();
  const std::vector<ResultRow> first = run_maj_sweep(cfg);
  REQUIRE(first.size() == 3);  // 1 bank x 1 subarray x 3 groups x 1 count x 1 x
  for (const ResultRow& row : first) {
    CHECK(row.experiment == "maj");
    CHECK(row.operation == "maj3");
    CHECK(row.x == 3);
    CHECK(row.n_rows == 4);
    CHECK(row.cells == 32);
    CHECK(row.trials == 2);
    CHECK(row.success_rate >= 0.0);
    CHECK(row.success_rate <= 1.0);
  }

  const std::vector<ResultRow> again = run_maj_sweep(cfg);
  CHECK(rows_equal(first, again));

  SweepConfig parallel = cfg;
  parallel.jobs = 4;
  const std::vector<ResultRow> threaded = run_maj_sweep(parallel);
  CHECK(rows_equal(first, threaded));
}

TEST_CASE("activation and copy sweeps skip unreachable counts") {
  SweepConfig cfg = small_demo_config();
  cfg.activation_counts = {2, 4, 8};  // demo-8 unions top out at 4 rows

  cfg.experiment = "activation";
  const std::vector<ResultRow> act = run_sweep(cfg);
  CHECK(act.size() == 6);  // 3 groups x {2, 4}; the 8-row request is skipped
  for (const ResultRow& row : act) {
    CHECK(row.experiment == "activation");
    CHECK((row.n_rows == 2 || row.n_rows == 4));
  }

  cfg.experiment = "mrc";
  const std::vector<ResultRow> mrc = run_sweep(cfg);
  CHECK(mrc.size() == 6);
  for (const ResultRow& row : mrc) {
    CHECK(row.operation == "multi_row_copy");
    CHECK(row.x == 1);
    CHECK(row.success_rate >= 0.0);
  }

  cfg.experiment = "bogus";
  CHECK_THROWS_AS(run_sweep(cfg), ConfigError);
}

TEST_CASE("aggregation groups identical knob settings and summarizes success") {
  std::vector<ResultRow> rows;
  for (int group = 0; group < 5; ++group) {
    ResultRow r;
    r.experiment = "maj";
    r.operation = "maj3";
    r.x = 3;
    r.n_rows = 4;
    r.t1_ns = 1.5;
    r.t2_ns = 3.0;
    r.pattern = "random";
    r.variation_pct = 20.0;
    r.trials = 8;
    r.cells = 64;
    r.group = group;
    r.success_rate = 0.1 * (group + 1);  // 0.1 .. 0.5
    rows.push_back(r);
  }
  ResultRow other = rows.back();
  other.n_rows = 8;
  other.success_rate = 0.9;
  rows.push_back(other);

  const std::vector<AggregateRow> agg = aggregate_rows(rows);
  REQUIRE(agg.size() == 2);
  const AggregateRow& first = agg.front().key.n_rows == 4 ? agg.front() : agg.back();
  CHECK(first.groups == 5);
  CHECK(first.min == doctest::Approx(0.1));
  CHECK(first.q1 == doctest::Approx(0.2));
  CHECK(first.median == doctest::Approx(0.3));
  CHECK(first.q3 == doctest::Approx(0.4));
  CHECK(first.max == doctest::Approx(0.5));
  CHECK(first.mean == doctest::Approx(0.3));
  CHECK(first.key.bank == 0);
  CHECK(first.key.group == 0);

  CHECK(mean_success(rows, 3, 4, "random", 1.5, 3.0) == doctest::Approx(0.3));
  CHECK(mean_success(rows, 3, 8, "random", 1.5, 3.0) == doctest::Approx(0.9));
  CHECK_THROWS_AS(mean_success(rows, 5, 4, "random", 1.5, 3.0), Error);
}

TEST_CASE("CSV exports use the frozen headers") {
  TempDir dir;
  SweepConfig cfg = small_demo_config();
  const std::vector<ResultRow> rows = run_maj_sweep(cfg);

  const fs::path raw = dir.path / "raw.csv";
  write_results_csv(raw, rows);
  std::ifstream raw_in(raw);
  std::string header;
  std::getline(raw_in, header);
  CHECK(header ==
        "experiment,operation,x,n_rows,t1_ns,t2_ns,pattern,temperature_c,vpp_v,"
        "variation_pct,bank,subarray,group,trials,cells,success_rate");
  int lines = 0;
  for (std::string line; std::getline(raw_in, line);) ++lines;
  CHECK(lines == 3);

  const fs::path summary = dir.path / "summary.csv";
  write_aggregate_csv(summary, aggregate_rows(rows));
  std::ifstream agg_in(summary);
  std::getline(agg_in, header);
  CHECK(header ==
        "experiment,operation,x,n_rows,t1_ns,t2_ns,pattern,temperature_c,vpp_v,"
        "variation_pct,trials,cells,groups,min,q1,median,q3,max,mean");
}

TEST_CASE("JSON results carry the schema tag and full rows") {
  const std::vector<ResultRow> rows = run_maj_sweep(small_demo_config());
  const nlohmann::json j = results_to_json(rows);
  CHECK(j.at("schema") == "pudsim-results-v1");
  REQUIRE(j.at("rows").size() == 3);
  const auto& row = j.at("rows").front();
  CHECK(row.at("experiment") == "maj");
  CHECK(row.at("operation") == "maj3");
  CHECK(row.at("n_rows") == 4);
  CHECK(row.at("cells") == 32);
  CHECK(row.at("success_rate").is_number());
}

TEST_CASE("sweep configuration round trips through JSON") {
  SweepConfig cfg = small_demo_config();
  cfg.patterns = {"random", "0xAA/0x55"};
  cfg.timings = {{1.5, 3.0}, {36.0, 6.0}};
  cfg.environments = {{50.0, 2.5}, {90.0, 2.5}};
  cfg.variation_pct = 35.0;
  cfg.jobs = 2;

  const nlohmann::json j = sweep_config_to_json(cfg);
  const SweepConfig parsed = sweep_config_from_json(j);
  CHECK(parsed.profile.name == "demo-8");
  CHECK(parsed.columns == 32);
  CHECK(parsed.banks == 1);
  CHECK(parsed.groups == 3);
  CHECK(parsed.trials == 2);
  CHECK(parsed.variation_pct == doctest::Approx(35.0));
  CHECK(parsed.seed == 7);
  CHECK(parsed.jobs == 2);
  CHECK(parsed.patterns == cfg.patterns);
  REQUIRE(parsed.timings.size() == 2);
  CHECK(parsed.timings[1].t1_ns == doctest::Approx(36.0));
  REQUIRE(parsed.environments.size() == 2);
  CHECK(parsed.environments[1].temperature_c == doctest::Approx(90.0));

  SUBCASE("unknown keys are rejected") {
    nlohmann::json bad = j;
    bad["bogus_knob"] = 1;
    CHECK_THROWS_AS(sweep_config_from_json(bad), ConfigError);
  }
  SUBCASE("variation outside the supported range is rejected") {
    nlohmann::json bad = j;
    bad["variation_pct"] = 96.0;
    CHECK_THROWS_AS(sweep_config_from_json(bad), ConfigError);
  }
  SUBCASE("jobs must be positive") {
    nlohmann::json bad = j;
    bad["jobs"] = 0;
    CHECK_THROWS_AS(sweep_config_from_json(bad), ConfigError);
  }
  SUBCASE("timings must be [t1, t2] pairs") {
    nlohmann::json bad = j;
    bad["timings"] = nlohmann::json::array({nlohmann::json::array({1.5})});
    CHECK_THROWS_AS(sweep_config_from_json(bad), ConfigError);
  }
}

TEST_CASE("subarray discovery finds the boundaries from copy behavior") {
  DiscoveryOptions opt;
  opt.columns = 16;
  opt.seed = 3;

  const std::vector<RowRange> demo = discover_subarrays(make_profile("demo-8"), opt);
  REQUIRE(demo.size() == 8);
  for (int i = 0; i < 8; ++i) {
    CHECK(demo[i].begin == 8 * i);
    CHECK(demo[i].end == 8 * (i + 1));
  }

  DiscoveryOptions big;
  big.columns = 16;
  big.rows = 1536;  // first three subarrays of the 512-row geometry
  big.verify_pairs = 2;
  const std::vector<RowRange> ranges = discover_subarrays(make_profile("mfrH-512"), big);
  REQUIRE(ranges.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(ranges[i].begin == 512 * i);
    CHECK(ranges[i].end == 512 * (i + 1));
  }
}
