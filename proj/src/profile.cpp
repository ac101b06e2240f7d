// Device profile presets, JSON (de)serialization, and validation.
#include "pudsim/profile.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace pudsim {

namespace {

DeviceProfile base_profile() {
  DeviceProfile p;
  p.timing = TimingParams{};
  p.analog = AnalogParams{};
  return p;
}

// Preset table.  The three module families share DDR4 timing and differ in
// subarray geometry, decoder partitioning, and sense behavior:
//  - mfrH-512:  512-row subarrays, 9-bit local decoder split 1+2+2+2+2.
//  - mfrH-640:  640 valid rows behind a 1024-row decoder window (2+2+2+2+2);
//               activations that expand past row 639 are dropped.
//  - mfrM-1024: 1024-row subarrays (10-bit decoder), sense amplifiers with a
//               constant input bias, so marginal columns collapse to one
//               polarity instead of splitting randomly.
//  - demo-8:    8-row toy subarray (fields 1+2) used in documentation and
//               small tests.
const std::map<std::string, DeviceProfile, std::less<>>& preset_table() {
  static const auto* table = [] {
    auto* t = new std::map<std::string, DeviceProfile, std::less<>>;

    DeviceProfile h512 = base_profile();
    h512.name = "mfrH-512";
    h512.rows_per_bank = 65536;
    h512.rows_per_subarray = 512;
    h512.decoder_window_rows = 512;
    h512.predecode_field_bits = {1, 2, 2, 2, 2};
    (*t)[h512.name] = h512;

    DeviceProfile h640 = base_profile();
    h640.name = "mfrH-640";
    h640.rows_per_bank = 65536;
    h640.rows_per_subarray = 640;
    h640.decoder_window_rows = 1024;
    h640.predecode_field_bits = {2, 2, 2, 2, 2};
    (*t)[h640.name] = h640;

    DeviceProfile m1024 = base_profile();
    m1024.name = "mfrM-1024";
    m1024.rows_per_bank = 65536;
    m1024.rows_per_subarray = 1024;
    m1024.decoder_window_rows = 1024;
    m1024.predecode_field_bits = {2, 2, 2, 2, 2};
    m1024.analog.sense_bias = 0.01;
    (*t)[m1024.name] = m1024;

    DeviceProfile demo = base_profile();
    demo.name = "demo-8";
    demo.rows_per_bank = 64;
    demo.rows_per_subarray = 8;
    demo.decoder_window_rows = 8;
    demo.columns = 64;
    demo.banks = 1;
    demo.predecode_field_bits = {1, 2};
    (*t)[demo.name] = demo;

    return t;
  }();
  return *table;
}

void expect_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                 const char* where) {
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError(std::string("unknown key \"") + item.key() + "\" in " + where);
    }
  }
}

double get_num(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string(key) + " must be a number");
  return j.at(key).get<double>();
}

int get_int(const nlohmann::json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
  return j.at(key).get<int>();
}

TimingParams timing_from_json(const nlohmann::json& j, TimingParams t) {
  expect_keys(j,
              {"tras_ns", "trp_ns", "command_granularity_ns", "union_t2_max_ns",
               "underdrive_full_ns", "underdrive_floor_ns"},
              "timing");
  t.tras_ns = get_num(j, "tras_ns", t.tras_ns);
  t.trp_ns = get_num(j, "trp_ns", t.trp_ns);
  t.command_granularity_ns = get_num(j, "command_granularity_ns", t.command_granularity_ns);
  t.union_t2_max_ns = get_num(j, "union_t2_max_ns", t.union_t2_max_ns);
  t.underdrive_full_ns = get_num(j, "underdrive_full_ns", t.underdrive_full_ns);
  t.underdrive_floor_ns = get_num(j, "underdrive_floor_ns", t.underdrive_floor_ns);
  return t;
}

AnalogParams analog_from_json(const nlohmann::json& j, AnalogParams a) {
  expect_keys(j,
              {"bitline_cell_ratio", "sensing_margin", "sense_offset_sigma", "sense_bias",
               "underdrive_max_prob", "underdrive_gamma", "first_row_weight_hinge_ns",
               "first_row_weight_slope", "first_row_weight_cap", "latch_fail_max_prob",
               "latch_fail_ramp_ns", "temperature_slope_per_c", "vpp_slope_per_v",
               "temperature_min_c", "temperature_max_c", "vpp_min_v", "vpp_max_v",
               "random_pattern_jitter", "variation_kind"},
              "analog");
  a.bitline_cell_ratio = get_num(j, "bitline_cell_ratio", a.bitline_cell_ratio);
  a.sensing_margin = get_num(j, "sensing_margin", a.sensing_margin);
  a.sense_offset_sigma = get_num(j, "sense_offset_sigma", a.sense_offset_sigma);
  a.sense_bias = get_num(j, "sense_bias", a.sense_bias);
  a.underdrive_max_prob = get_num(j, "underdrive_max_prob", a.underdrive_max_prob);
  a.underdrive_gamma = get_num(j, "underdrive_gamma", a.underdrive_gamma);
  a.first_row_weight_hinge_ns = get_num(j, "first_row_weight_hinge_ns", a.first_row_weight_hinge_ns);
  a.first_row_weight_slope = get_num(j, "first_row_weight_slope", a.first_row_weight_slope);
  a.first_row_weight_cap = get_num(j, "first_row_weight_cap", a.first_row_weight_cap);
  a.latch_fail_max_prob = get_num(j, "latch_fail_max_prob", a.latch_fail_max_prob);
  a.latch_fail_ramp_ns = get_num(j, "latch_fail_ramp_ns", a.latch_fail_ramp_ns);
  a.temperature_slope_per_c = get_num(j, "temperature_slope_per_c", a.temperature_slope_per_c);
  a.vpp_slope_per_v = get_num(j, "vpp_slope_per_v", a.vpp_slope_per_v);
  a.temperature_min_c = get_num(j, "temperature_min_c", a.temperature_min_c);
  a.temperature_max_c = get_num(j, "temperature_max_c", a.temperature_max_c);
  a.vpp_min_v = get_num(j, "vpp_min_v", a.vpp_min_v);
  a.vpp_max_v = get_num(j, "vpp_max_v", a.vpp_max_v);
  a.random_pattern_jitter = get_num(j, "random_pattern_jitter", a.random_pattern_jitter);
  if (j.contains("variation_kind")) {
    const std::string kind = j.at("variation_kind").get<std::string>();
    if (kind == "uniform") {
      a.variation_kind = VariationKind::kUniform;
    } else if (kind == "gaussian") {
      a.variation_kind = VariationKind::kGaussian;
    } else {
      throw ConfigError("variation_kind must be \"uniform\" or \"gaussian\"");
    }
  }
  return a;
}

}  // namespace

DeviceProfile make_profile(std::string_view preset) {
  const auto& table = preset_table();
  auto it = table.find(preset);
  if (it == table.end()) {
    std::ostringstream msg;
    msg << "unknown profile preset \"" << preset << "\"; available:";
    for (const auto& [name, _] : table) msg << " " << name;
    throw ConfigError(msg.str());
  }
  return it->second;
}

const std::vector<std::string>& profile_names() {
  static const auto* names = [] {
    auto* v = new std::vector<std::string>;
    for (const auto& [name, _] : preset_table()) v->push_back(name);
    return v;
  }();
  return *names;
}

DeviceProfile profile_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("profile must be a JSON object");
  expect_keys(j,
              {"preset", "name", "rows_per_bank", "rows_per_subarray", "decoder_window_rows",
               "columns", "banks", "predecode_field_bits", "timing", "analog",
               "reject_cross_subarray_apa"},
              "profile");
  DeviceProfile p = j.contains("preset") ? make_profile(j.at("preset").get<std::string>())
                                         : base_profile();
  if (j.contains("name")) p.name = j.at("name").get<std::string>();
  p.rows_per_bank = get_int(j, "rows_per_bank", p.rows_per_bank);
  p.rows_per_subarray = get_int(j, "rows_per_subarray", p.rows_per_subarray);
  p.decoder_window_rows = get_int(j, "decoder_window_rows", p.decoder_window_rows);
  p.columns = get_int(j, "columns", p.columns);
  p.banks = get_int(j, "banks", p.banks);
  if (j.contains("predecode_field_bits")) {
    p.predecode_field_bits = j.at("predecode_field_bits").get<std::vector<int>>();
  }
  if (j.contains("timing")) p.timing = timing_from_json(j.at("timing"), p.timing);
  if (j.contains("analog")) p.analog = analog_from_json(j.at("analog"), p.analog);
  if (j.contains("reject_cross_subarray_apa")) {
    p.reject_cross_subarray_apa = j.at("reject_cross_subarray_apa").get<bool>();
  }
  validate_profile(p);
  return p;
}

nlohmann::json profile_to_json(const DeviceProfile& p) {
  nlohmann::json t = {
      {"tras_ns", p.timing.tras_ns},
      {"trp_ns", p.timing.trp_ns},
      {"command_granularity_ns", p.timing.command_granularity_ns},
      {"union_t2_max_ns", p.timing.union_t2_max_ns},
      {"underdrive_full_ns", p.timing.underdrive_full_ns},
      {"underdrive_floor_ns", p.timing.underdrive_floor_ns},
  };
  const AnalogParams& a = p.analog;
  nlohmann::json an = {
      {"bitline_cell_ratio", a.bitline_cell_ratio},
      {"sensing_margin", a.sensing_margin},
      {"sense_offset_sigma", a.sense_offset_sigma},
      {"sense_bias", a.sense_bias},
      {"underdrive_max_prob", a.underdrive_max_prob},
      {"underdrive_gamma", a.underdrive_gamma},
      {"first_row_weight_hinge_ns", a.first_row_weight_hinge_ns},
      {"first_row_weight_slope", a.first_row_weight_slope},
      {"first_row_weight_cap", a.first_row_weight_cap},
      {"latch_fail_max_prob", a.latch_fail_max_prob},
      {"latch_fail_ramp_ns", a.latch_fail_ramp_ns},
      {"temperature_slope_per_c", a.temperature_slope_per_c},
      {"vpp_slope_per_v", a.vpp_slope_per_v},
      {"temperature_min_c", a.temperature_min_c},
      {"temperature_max_c", a.temperature_max_c},
      {"vpp_min_v", a.vpp_min_v},
      {"vpp_max_v", a.vpp_max_v},
      {"random_pattern_jitter", a.random_pattern_jitter},
      {"variation_kind", a.variation_kind == VariationKind::kUniform ? "uniform" : "gaussian"},
  };
  return nlohmann::json{
      {"name", p.name},
      {"rows_per_bank", p.rows_per_bank},
      {"rows_per_subarray", p.rows_per_subarray},
      {"decoder_window_rows", p.decoder_window_rows},
      {"columns", p.columns},
      {"banks", p.banks},
      {"predecode_field_bits", p.predecode_field_bits},
      {"timing", t},
      {"analog", an},
      {"reject_cross_subarray_apa", p.reject_cross_subarray_apa},
  };
}

void validate_profile(const DeviceProfile& p) {
  auto fail = [](const std::string& msg) { throw ConfigError("invalid profile: " + msg); };
  if (p.rows_per_subarray <= 0) fail("rows_per_subarray must be positive");
  if (p.rows_per_bank < p.rows_per_subarray) {
    // The bank may end in a partial tail (e.g. 640-row subarrays in a
    // 65536-row bank); the tail rows are not addressable by experiments.
    fail("rows_per_bank must hold at least one complete subarray");
  }
  if (p.columns <= 0) fail("columns must be positive");
  if (p.banks <= 0) fail("banks must be positive");
  if (p.decoder_window_rows < p.rows_per_subarray) {
    fail("decoder_window_rows must cover rows_per_subarray");
  }
  if (p.predecode_field_bits.empty()) fail("predecode_field_bits must not be empty");
  for (int b : p.predecode_field_bits) {
    if (b < 1 || b > 8) fail("each predecode field must have 1..8 bits");
  }
  if ((1 << p.decoder_address_bits()) != p.decoder_window_rows) {
    fail("predecode_field_bits must cover exactly the decoder window");
  }
  const TimingParams& t = p.timing;
  if (t.command_granularity_ns <= 0) fail("command granularity must be positive");
  if (t.tras_ns <= 0 || t.trp_ns <= 0) fail("tRAS and tRP must be positive");
  if (t.union_t2_max_ns <= 0 || t.union_t2_max_ns >= t.trp_ns) {
    fail("union_t2_max_ns must lie strictly between 0 and tRP");
  }
  if (t.underdrive_floor_ns > t.underdrive_full_ns) {
    fail("underdrive_floor_ns must not exceed underdrive_full_ns");
  }
  const AnalogParams& a = p.analog;
  if (a.bitline_cell_ratio <= 0) fail("bitline_cell_ratio must be positive");
  if (a.sensing_margin < 0 || a.sensing_margin >= 0.5) fail("sensing_margin must be in [0, 0.5)");
  if (a.sense_offset_sigma < 0) fail("sense_offset_sigma must be non-negative");
  if (a.underdrive_max_prob < 0 || a.underdrive_max_prob > 1) {
    fail("underdrive_max_prob must be in [0, 1]");
  }
  if (a.latch_fail_max_prob < 0 || a.latch_fail_max_prob > 1) {
    fail("latch_fail_max_prob must be in [0, 1]");
  }
  if (a.first_row_weight_cap < 1) fail("first_row_weight_cap must be at least 1");
  if (a.random_pattern_jitter < 0) fail("random_pattern_jitter must be non-negative");
  if (a.temperature_min_c > a.temperature_max_c) fail("temperature range is inverted");
  if (a.vpp_min_v > a.vpp_max_v) fail("vpp range is inverted");
}

double environment_efficiency_scale(const AnalogParams& a, const EnvironmentParams& env) {
  if (env.temperature_c < a.temperature_min_c || env.temperature_c > a.temperature_max_c) {
    std::ostringstream msg;
    msg << "temperature " << env.temperature_c << " C outside supported range ["
        << a.temperature_min_c << ", " << a.temperature_max_c << "]";
    throw ConfigError(msg.str());
  }
  if (env.vpp_v < a.vpp_min_v || env.vpp_v > a.vpp_max_v) {
    std::ostringstream msg;
    msg << "wordline voltage " << env.vpp_v << " V outside supported range [" << a.vpp_min_v
        << ", " << a.vpp_max_v << "]";
    throw ConfigError(msg.str());
  }
  const double temp_gain = 1.0 + a.temperature_slope_per_c * (env.temperature_c - a.temperature_min_c);
  const double vpp_loss = 1.0 - a.vpp_slope_per_v * (a.vpp_max_v - env.vpp_v);
  double scale = temp_gain * vpp_loss;
  if (scale < 0.0) scale = 0.0;
  return scale;
}

}  // namespace pudsim
