// Command-level bank model.
//
// The bank executes ACT / PRE / WR / RD / REF commands with explicit
// inter-command delays.  Delays shorter than the datasheet minimums are not
// rejected; they select degraded behaviors instead:
//
//  - ACT r1, early PRE (t1 < tRAS), early ACT r2 (t2 <= union threshold):
//    the predecoder latches keep r1's select values, so r2's values merge
//    and the decoder drives the Cartesian product of the latched fields --
//    2^k rows for k differing fields.  If r1 had been driven for a full
//    tRAS, the sense amplifiers are already latched and overwrite every
//    driven row (multi-row copy); otherwise all driven cells share charge
//    with the bitline and the sense amplifiers resolve the mixture
//    (majority behavior).
//  - ACT r1, PRE, ACT r2 with union threshold < t2 < tRP: the latches are
//    replaced but the sense amplifiers still hold r1's data and overwrite
//    r2 (row clone).  Across a subarray boundary the second activation uses
//    different local sense amplifiers, so it simply replaces the first.
//  - t2 >= tRP: the precharge completes and the second activation is
//    ordinary.
//
// Analog effects modeled: charge sharing over the driven cells (with the
// first-activated row weighted by its longer drive window), per-cell
// activation dropout when the total drive window is short, per-field latch
// capture failure when t2 is very short, partial restore proportional to
// t1/tRAS on an early precharge, and sense-amplifier offset noise.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pudsim/analog.hpp"
#include "pudsim/decoder.hpp"
#include "pudsim/profile.hpp"
#include "pudsim/rng.hpp"

namespace pudsim {

enum class CommandKind { kAct, kPre, kWrite, kRead, kRefresh };

struct Command {
  CommandKind kind = CommandKind::kAct;
  int row = -1;        // ACT only (absolute row address)
  int bit = 0;         // WR only
  double delay_after_ns = 1.5;  // gap to the next command
};

inline Command act(int row, double delay_after_ns) {
  return Command{CommandKind::kAct, row, 0, delay_after_ns};
}
inline Command pre(double delay_after_ns) {
  return Command{CommandKind::kPre, -1, 0, delay_after_ns};
}
inline Command wr(int bit, double delay_after_ns) {
  return Command{CommandKind::kWrite, -1, bit, delay_after_ns};
}
inline Command rd(double delay_after_ns) {
  return Command{CommandKind::kRead, -1, 0, delay_after_ns};
}
inline Command refresh(double delay_after_ns) {
  return Command{CommandKind::kRefresh, -1, 0, delay_after_ns};
}

enum class ActivationMode { kNominal, kSimultaneousUnion, kConsecutiveTwoRow };
enum class SenseMode { kFullyLatched, kChargeSharing, kUnderdriven };

struct TimingRegime {
  ActivationMode activation = ActivationMode::kNominal;
  SenseMode sense = SenseMode::kFullyLatched;
};

// Classify the behavior of an ACT that follows a precharge gap of t2 after
// an activation window of t1.
TimingRegime classify_timing(const TimingParams& t, double t1_ns, double t2_ns);

const char* to_string(ActivationMode m);
const char* to_string(SenseMode m);
const char* to_string(CommandKind k);

// Cell array of one subarray: row-major charge / capacitance / efficiency.
class SubarrayState {
 public:
  SubarrayState(int rows, int columns);

  int rows() const { return rows_; }
  int columns() const { return columns_; }

  float& charge(int row, int col) { return charge_[index(row, col)]; }
  float charge(int row, int col) const { return charge_[index(row, col)]; }
  float& cap(int row, int col) { return cap_[index(row, col)]; }
  float cap(int row, int col) const { return cap_[index(row, col)]; }
  float& efficiency(int row, int col) { return eff_[index(row, col)]; }
  float efficiency(int row, int col) const { return eff_[index(row, col)]; }

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * columns_ + col;
  }
  int rows_;
  int columns_;
  std::vector<float> charge_, cap_, eff_;
};

struct TraceEvent {
  int index = 0;
  CommandKind kind = CommandKind::kAct;
  double at_ns = 0.0;
  int row = -1;
  TimingRegime regime;
  std::vector<int> activated_rows;  // absolute addresses after this command
  std::string note;
};

struct ReadResult {
  double at_ns = 0.0;
  std::vector<std::uint8_t> values;
  std::vector<std::uint8_t> reliable;
};

struct TraceResult {
  std::vector<TraceEvent> events;
  std::vector<ReadResult> reads;
};

class BankState {
 public:
  // Variation is sampled lazily per subarray from `seed`; `variation_pct`
  // is the manufacturing spread in percent.
  BankState(DeviceProfile profile, EnvironmentParams env, double variation_pct,
            std::uint64_t seed);

  const DeviceProfile& profile() const { return profile_; }
  const EnvironmentParams& environment() const { return env_; }
  double time_ns() const { return now_; }

  // Host-side row write at nominal timing (does not disturb bank phase;
  // meant for test setup).  `jitter_sigma` > 0 applies multiplicative
  // level jitter, used when writing non-repeating data.
  void write_row(int row, std::span<const std::uint8_t> bits, double jitter_sigma, Rng& rng);

  // Set every cell of `row` to the precharge midpoint (fractional level).
  void set_row_fraction(int row, double level = 0.5);

  // Apply one command at the current time; advances time by its delay.
  TraceEvent apply(const Command& cmd, Rng& rng);

  // Execute commands in order and settle the final precharge if its tRP
  // has elapsed by the end of the sequence.
  TraceResult execute_sequence(std::span<const Command> commands, Rng& rng);

  // Complete a pending precharge (restore, clear activation) regardless of
  // elapsed time; error if a row is still open.
  void settle(Rng& rng);

  // Sense-amplifier contents after the most recent resolution.
  const std::vector<std::uint8_t>& sa_values() const { return sa_value_; }
  const std::vector<std::uint8_t>& sa_reliable() const { return sa_reliable_; }

  // Local rows currently (or last) driven, as absolute addresses.
  std::vector<int> activated_rows() const;

  SubarrayState& subarray(int index);

 private:
  enum class Phase { kPrecharged, kActive, kInterrupted };

  double eff_of(const SubarrayState& s, int row, int col) const;
  double weight_for(double window_ns, bool first_row) const;
  double dropout_prob(double window_ns) const;
  void build_mask(double window_ns, Rng& rng);
  void resolve_share(double window_ns, Rng& rng);
  void restore_cells(double drive, Rng& rng);
  void complete_precharge(Rng& rng);
  void begin_fresh_activation(int row, Rng& rng);
  TraceEvent apply_act(const Command& cmd, Rng& rng, TraceEvent event);

  DeviceProfile profile_;
  EnvironmentParams env_;
  double env_scale_ = 1.0;
  double variation_pct_ = 0.0;
  std::uint64_t seed_ = 0;
  std::map<int, SubarrayState> subarrays_;

  Phase phase_ = Phase::kPrecharged;
  double now_ = 0.0;
  double act_time_ns_ = 0.0;        // time of the most recent ACT
  double first_act_time_ns_ = 0.0;  // time of the ACT that opened this activation
  double pre_time_ns_ = 0.0;
  int open_subarray_ = -1;
  LatchState latch_;
  std::vector<int> activated_;  // local rows, ascending
  int first_local_ = -1;
  bool share_resolved_ = false;
  std::vector<std::uint8_t> connected_;  // activated x columns mask
  bool mask_built_ = false;
  std::vector<std::uint8_t> sa_value_;
  std::vector<std::uint8_t> sa_reliable_;
  int command_index_ = 0;
};

}  // namespace pudsim
