// Device profile presets, JSON handling, validation, environment response.
#include <doctest.h>

#include <vector>

#include <json.hpp>

#include "pudsim/errors.hpp"
#include "pudsim/profile.hpp"

using namespace pudsim;

TEST_CASE("preset geometries") {
  const DeviceProfile h512 = make_profile("mfrH-512");
  CHECK(h512.rows_per_subarray == 512);
  CHECK(h512.decoder_window_rows == 512);
  CHECK(h512.rows_per_bank == 65536);
  CHECK(h512.predecode_field_bits == std::vector<int>{1, 2, 2, 2, 2});
  CHECK(h512.decoder_address_bits() == 9);
  CHECK(h512.subarray_count() == 128);
  CHECK(h512.analog.sense_bias == 0.0);

  const DeviceProfile h640 = make_profile("mfrH-640");
  CHECK(h640.rows_per_subarray == 640);
  CHECK(h640.decoder_window_rows == 1024);
  CHECK(h640.predecode_field_bits == std::vector<int>{2, 2, 2, 2, 2});
  CHECK(h640.decoder_address_bits() == 10);
  // 65536 rows hold 102 complete 640-row subarrays plus a partial tail.
  CHECK(h640.subarray_count() == 102);

  const DeviceProfile m1024 = make_profile("mfrM-1024");
  CHECK(m1024.rows_per_subarray == 1024);
  CHECK(m1024.decoder_window_rows == 1024);
  CHECK(m1024.analog.sense_bias == doctest::Approx(0.01));
  CHECK(m1024.subarray_count() == 64);

  const DeviceProfile demo = make_profile("demo-8");
  CHECK(demo.rows_per_subarray == 8);
  CHECK(demo.rows_per_bank == 64);
  CHECK(demo.columns == 64);
  CHECK(demo.banks == 1);
  CHECK(demo.predecode_field_bits == std::vector<int>{1, 2});
  CHECK(demo.subarray_count() == 8);
}

TEST_CASE("every preset passes validation") {
  for (const std::string& name : profile_names()) {
    CHECK_NOTHROW(validate_profile(make_profile(name)));
  }
  CHECK(profile_names().size() == 4);
}

TEST_CASE("unknown preset is rejected") {
  CHECK_THROWS_AS(make_profile("mfrX-1"), ConfigError);
}

TEST_CASE("shared timing and analog defaults") {
  const DeviceProfile p = make_profile("mfrH-512");
  CHECK(p.timing.tras_ns == doctest::Approx(36.0));
  CHECK(p.timing.trp_ns == doctest::Approx(15.0));
  CHECK(p.timing.command_granularity_ns == doctest::Approx(1.5));
  CHECK(p.timing.union_t2_max_ns == doctest::Approx(3.0));
  CHECK(p.analog.bitline_cell_ratio == doctest::Approx(6.0));
  CHECK(p.analog.sensing_margin == doctest::Approx(0.038));
  CHECK(p.analog.sense_offset_sigma == doctest::Approx(0.001));
  CHECK(p.analog.variation_kind == VariationKind::kUniform);
}

TEST_CASE("JSON round trip preserves the profile") {
  for (const std::string& name : profile_names()) {
    const DeviceProfile p = make_profile(name);
    const nlohmann::json j = profile_to_json(p);
    const DeviceProfile q = profile_from_json(j);
    CHECK(profile_to_json(q).dump() == j.dump());
  }
}

TEST_CASE("JSON preset reference with overrides") {
  const nlohmann::json j = {{"preset", "mfrH-512"}, {"columns", 128}, {"banks", 2}};
  const DeviceProfile p = profile_from_json(j);
  CHECK(p.name == "mfrH-512");
  CHECK(p.columns == 128);
  CHECK(p.banks == 2);
  CHECK(p.rows_per_subarray == 512);  // inherited
}

TEST_CASE("nested timing and analog overrides") {
  const nlohmann::json j = {{"preset", "demo-8"},
                            {"timing", {{"union_t2_max_ns", 4.5}}},
                            {"analog", {{"sensing_margin", 0.05}, {"variation_kind", "gaussian"}}}};
  const DeviceProfile p = profile_from_json(j);
  CHECK(p.timing.union_t2_max_ns == doctest::Approx(4.5));
  CHECK(p.timing.tras_ns == doctest::Approx(36.0));  // untouched
  CHECK(p.analog.sensing_margin == doctest::Approx(0.05));
  CHECK(p.analog.variation_kind == VariationKind::kGaussian);
}

TEST_CASE("unknown JSON keys are rejected at every level") {
  CHECK_THROWS_AS(profile_from_json({{"preset", "demo-8"}, {"rows", 8}}), ConfigError);
  CHECK_THROWS_AS(profile_from_json({{"preset", "demo-8"}, {"timing", {{"tras", 36}}}}),
                  ConfigError);
  CHECK_THROWS_AS(profile_from_json({{"preset", "demo-8"}, {"analog", {{"margin", 0.02}}}}),
                  ConfigError);
  CHECK_THROWS_AS(profile_from_json(nlohmann::json::array()), ConfigError);
  CHECK_THROWS_AS(
      profile_from_json({{"preset", "demo-8"}, {"analog", {{"variation_kind", "lumpy"}}}}),
      ConfigError);
}

TEST_CASE("validation failures") {
  DeviceProfile p = make_profile("mfrH-512");

  SUBCASE("decoder fields must cover the window") {
    p.predecode_field_bits = {1, 2, 2, 2};  // 7 bits for a 512-row window
    CHECK_THROWS_AS(validate_profile(p), ConfigError);
  }
  SUBCASE("window must cover the populated rows") {
    p.decoder_window_rows = 256;
    CHECK_THROWS_AS(validate_profile(p), ConfigError);
  }
  SUBCASE("union threshold must stay below tRP") {
    p.timing.union_t2_max_ns = 15.0;
    CHECK_THROWS_AS(validate_profile(p), ConfigError);
  }
  SUBCASE("sensing margin below half swing") {
    p.analog.sensing_margin = 0.5;
    CHECK_THROWS_AS(validate_profile(p), ConfigError);
  }
  SUBCASE("bank must hold a subarray") {
    p.rows_per_bank = 100;
    CHECK_THROWS_AS(validate_profile(p), ConfigError);
  }
  SUBCASE("first-row weight cap at least one") {
    p.analog.first_row_weight_cap = 0.5;
    CHECK_THROWS_AS(validate_profile(p), ConfigError);
  }
  SUBCASE("probabilities in range") {
    p.analog.underdrive_max_prob = 1.5;
    CHECK_THROWS_AS(validate_profile(p), ConfigError);
  }
}

TEST_CASE("environment scale: anchors and slopes") {
  const AnalogParams a;  // defaults: +0.0004/degC above 50 C, -0.02/V below 2.5 V
  CHECK(environment_efficiency_scale(a, {50.0, 2.5}) == doctest::Approx(1.0));
  CHECK(environment_efficiency_scale(a, {90.0, 2.5}) == doctest::Approx(1.016));
  CHECK(environment_efficiency_scale(a, {50.0, 2.1}) == doctest::Approx(0.992));
  CHECK(environment_efficiency_scale(a, {90.0, 2.1}) == doctest::Approx(1.016 * 0.992));
}

TEST_CASE("environment outside the supported envelope is rejected") {
  const AnalogParams a;
  CHECK_THROWS_AS(environment_efficiency_scale(a, {49.0, 2.5}), ConfigError);
  CHECK_THROWS_AS(environment_efficiency_scale(a, {91.0, 2.5}), ConfigError);
  CHECK_THROWS_AS(environment_efficiency_scale(a, {50.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(environment_efficiency_scale(a, {50.0, 2.6}), ConfigError);
}
