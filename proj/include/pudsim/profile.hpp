// Device profiles: geometry, timing, and analog behavior of a simulated
// DDR4 device, plus named presets for the three characterized module
// families and a tiny demonstration device.
//
// A profile fully determines deterministic behavior; stochastic behavior is
// parameterized by the variation percentage and the seed supplied at run
// time.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pudsim/errors.hpp"

namespace pudsim {

struct TimingParams {
  double tras_ns = 36.0;  // minimum ACT -> PRE for a full activation
  double trp_ns = 15.0;   // minimum PRE -> ACT for a full precharge
  double command_granularity_ns = 1.5;  // smallest command spacing
  // PRE -> ACT gaps at or below this leave the predecoder latches charged,
  // so the second ACT merges with the first instead of replacing it.
  double union_t2_max_ns = 3.0;
  // Wordline drive window (t1 + t2) at or above this suffers no
  // activation dropout; dropout probability ramps up quadratically as the
  // window shrinks toward `underdrive_floor_ns`.
  double underdrive_full_ns = 6.0;
  double underdrive_floor_ns = 3.0;
};

enum class VariationKind { kUniform, kGaussian };

struct AnalogParams {
  // Bitline capacitance as a multiple of nominal cell capacitance.
  double bitline_cell_ratio = 6.0;
  // Minimum |deviation| from the precharge midpoint for a reliable sense.
  double sensing_margin = 0.038;
  // Sense-amplifier input offset noise (per sense event).
  double sense_offset_sigma = 0.001;
  // Constant sense bias; > 0 resolves midpoint inputs toward logic 1.
  double sense_bias = 0.0;
  // Peak probability that a cell fails to connect to its bitline when the
  // activation window is at its shortest.
  double underdrive_max_prob = 0.12;
  double underdrive_gamma = 2.0;
  // Extra charge weight of the first activated row as the activation
  // window grows past the hinge: weight = 1 + slope * (window - hinge),
  // saturating at `first_row_weight_cap`.
  double first_row_weight_hinge_ns = 4.5;
  double first_row_weight_slope = 4.667;  // per ns
  double first_row_weight_cap = 12.0;
  // Per-predecoder-field probability of a failed latch capture when the
  // PRE -> ACT gap shrinks below the reliable threshold (1.5 ns ramp).
  double latch_fail_max_prob = 0.2;
  double latch_fail_ramp_ns = 1.5;
  // Environment response of charge-transfer efficiency.
  double temperature_slope_per_c = 0.0004;  // gain per degC above 50 C
  double vpp_slope_per_v = 0.02;            // loss per V below 2.5 V
  double temperature_min_c = 50.0;
  double temperature_max_c = 90.0;
  double vpp_min_v = 2.1;
  double vpp_max_v = 2.5;
  // Sigma of the mean-one lognormal jitter applied to the stored level when
  // a row is written with random (as opposed to repeating) data.  Repeating
  // patterns produce regular bitline coupling and are written cleanly;
  // irregular data disturbs the stored level.  Calibrated so random-data
  // majority success ranks below every repeating pattern.
  double random_pattern_jitter = 0.70;
  VariationKind variation_kind = VariationKind::kUniform;
};

struct EnvironmentParams {
  double temperature_c = 50.0;
  double vpp_v = 2.5;
};

struct DeviceProfile {
  std::string name;
  int rows_per_bank = 65536;
  // Rows that physically exist within one subarray.
  int rows_per_subarray = 512;
  // Address space covered by one local row decoder.  Usually equal to
  // rows_per_subarray; larger when a partially populated decoder window is
  // used (e.g. 640 valid rows behind a 1024-row decoder).
  int decoder_window_rows = 512;
  int columns = 8192;
  int banks = 16;
  // Bits consumed by each predecoder stage, least significant field first.
  std::vector<int> predecode_field_bits = {1, 2, 2, 2, 2};
  TimingParams timing;
  AnalogParams analog;
  // Reject (throw) on an interrupted precharge that re-activates a row in a
  // different subarray instead of modeling the replace behavior.
  bool reject_cross_subarray_apa = false;

  int decoder_address_bits() const {
    int bits = 0;
    for (int b : predecode_field_bits) bits += b;
    return bits;
  }
  int subarray_count() const { return rows_per_bank / rows_per_subarray; }
};

// Named presets: "mfrH-512", "mfrH-640", "mfrM-1024", "demo-8".
DeviceProfile make_profile(std::string_view preset);
const std::vector<std::string>& profile_names();

// Build a profile from a JSON object: {"profile": "<preset>", ...overrides}
// or a full inline definition.  Unknown keys are rejected.
DeviceProfile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const DeviceProfile& p);

// Throws ConfigError when a profile is internally inconsistent.
void validate_profile(const DeviceProfile& p);

// Throws ConfigError when the operating point is outside the supported
// envelope; returns the multiplicative charge-transfer-efficiency scale.
double environment_efficiency_scale(const AnalogParams& a, const EnvironmentParams& env);

}  // namespace pudsim
