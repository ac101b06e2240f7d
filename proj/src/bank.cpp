// Command-level bank state machine implementation.
#include "pudsim/bank.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pudsim/errors.hpp"

namespace pudsim {

namespace {

constexpr double kTimeEps = 1e-9;

// Seed-path tags for deriving independent random streams.
constexpr std::uint64_t kStreamVariation = 0xA11Cu;

}  // namespace

TimingRegime classify_timing(const TimingParams& t, double t1_ns, double t2_ns) {
  TimingRegime r;
  if (t2_ns <= t.union_t2_max_ns + kTimeEps) {
    r.activation = ActivationMode::kSimultaneousUnion;
  } else if (t2_ns < t.trp_ns - kTimeEps) {
    r.activation = ActivationMode::kConsecutiveTwoRow;
  } else {
    r.activation = ActivationMode::kNominal;
  }
  if (t1_ns >= t.tras_ns - kTimeEps) {
    r.sense = SenseMode::kFullyLatched;
  } else if (t1_ns < t.underdrive_floor_ns - kTimeEps &&
             t2_ns < t.underdrive_floor_ns - kTimeEps) {
    r.sense = SenseMode::kUnderdriven;
  } else {
    r.sense = SenseMode::kChargeSharing;
  }
  return r;
}

const char* to_string(ActivationMode m) {
  switch (m) {
    case ActivationMode::kNominal: return "nominal";
    case ActivationMode::kSimultaneousUnion: return "simultaneous-union";
    case ActivationMode::kConsecutiveTwoRow: return "consecutive-two-row";
  }
  return "?";
}

const char* to_string(SenseMode m) {
  switch (m) {
    case SenseMode::kFullyLatched: return "fully-latched";
    case SenseMode::kChargeSharing: return "charge-sharing";
    case SenseMode::kUnderdriven: return "underdriven";
  }
  return "?";
}

const char* to_string(CommandKind k) {
  switch (k) {
    case CommandKind::kAct: return "ACT";
    case CommandKind::kPre: return "PRE";
    case CommandKind::kWrite: return "WR";
    case CommandKind::kRead: return "RD";
    case CommandKind::kRefresh: return "REF";
  }
  return "?";
}

SubarrayState::SubarrayState(int rows, int columns)
    : rows_(rows),
      columns_(columns),
      charge_(static_cast<std::size_t>(rows) * columns, 0.5f),
      cap_(static_cast<std::size_t>(rows) * columns, 1.0f),
      eff_(static_cast<std::size_t>(rows) * columns, 1.0f) {}

BankState::BankState(DeviceProfile profile, EnvironmentParams env, double variation_pct,
                     std::uint64_t seed)
    : profile_(std::move(profile)),
      env_(env),
      variation_pct_(variation_pct),
      seed_(seed) {
  validate_profile(profile_);
  env_scale_ = environment_efficiency_scale(profile_.analog, env_);
  sa_value_.assign(profile_.columns, 0);
  sa_reliable_.assign(profile_.columns, 0);
}

SubarrayState& BankState::subarray(int index) {
  if (index < 0 || index >= profile_.subarray_count()) {
    throw PlanError("subarray index out of range");
  }
  auto it = subarrays_.find(index);
  if (it == subarrays_.end()) {
    SubarrayState s(profile_.rows_per_subarray, profile_.columns);
    Rng rng = Rng::derive(seed_, {kStreamVariation, static_cast<std::uint64_t>(index)});
    for (int r = 0; r < s.rows(); ++r) {
      for (int c = 0; c < s.columns(); ++c) {
        const CellVariation v = sample_variation(profile_.analog, variation_pct_, rng);
        s.cap(r, c) = static_cast<float>(v.cap);
        s.efficiency(r, c) = static_cast<float>(v.efficiency);
      }
    }
    it = subarrays_.emplace(index, std::move(s)).first;
  }
  return it->second;
}

double BankState::eff_of(const SubarrayState& s, int row, int col) const {
  return std::min(1.0, static_cast<double>(s.efficiency(row, col)) * env_scale_);
}

double BankState::weight_for(double window_ns, bool first_row) const {
  if (!first_row) return 1.0;
  const AnalogParams& a = profile_.analog;
  const double extra = std::max(0.0, window_ns - a.first_row_weight_hinge_ns);
  return std::min(a.first_row_weight_cap, 1.0 + a.first_row_weight_slope * extra);
}

double BankState::dropout_prob(double window_ns) const {
  const TimingParams& t = profile_.timing;
  const AnalogParams& a = profile_.analog;
  if (window_ns >= t.underdrive_full_ns) return 0.0;
  const double span = std::max(t.underdrive_full_ns - t.underdrive_floor_ns, kTimeEps);
  const double frac = std::clamp((t.underdrive_full_ns - window_ns) / span, 0.0, 1.0);
  return a.underdrive_max_prob * std::pow(frac, a.underdrive_gamma);
}

void BankState::build_mask(double window_ns, Rng& rng) {
  const int cols = profile_.columns;
  connected_.assign(activated_.size() * static_cast<std::size_t>(cols), 1);
  const double p = dropout_prob(window_ns);
  if (p > 0.0) {
    for (auto& bit : connected_) {
      if (rng.bernoulli(p)) bit = 0;
    }
  }
  mask_built_ = true;
}

void BankState::resolve_share(double window_ns, Rng& rng) {
  if (share_resolved_) return;
  if (!mask_built_) build_mask(window_ns, rng);
  SubarrayState& sub = subarray(open_subarray_);
  const int cols = profile_.columns;
  std::vector<CellContribution> cells;
  cells.reserve(activated_.size());
  for (int c = 0; c < cols; ++c) {
    cells.clear();
    for (std::size_t i = 0; i < activated_.size(); ++i) {
      if (!connected_[i * cols + c]) continue;
      const int r = activated_[i];
      cells.push_back(CellContribution{
          static_cast<double>(sub.charge(r, c)),
          static_cast<double>(sub.cap(r, c)),
          eff_of(sub, r, c),
          weight_for(window_ns, r == first_local_),
      });
    }
    const ShareResult share = charge_share(cells, profile_.analog);
    const SenseOutcome out = sense(share.perturbation, profile_.analog, rng);
    sa_value_[c] = out.value ? 1 : 0;
    sa_reliable_[c] = out.reliable ? 1 : 0;
    // Charge conservation: every connected cell ends at the shared level.
    for (std::size_t i = 0; i < activated_.size(); ++i) {
      if (!connected_[i * cols + c]) continue;
      sub.charge(activated_[i], c) = static_cast<float>(share.bitline_v);
    }
  }
  share_resolved_ = true;
}

void BankState::restore_cells(double drive, Rng& rng) {
  if (activated_.empty() || open_subarray_ < 0) return;
  if (!mask_built_) {
    // Rows activated after the union decision get their own full window.
    build_mask(pre_time_ns_ - act_time_ns_, rng);
  }
  SubarrayState& sub = subarray(open_subarray_);
  const int cols = profile_.columns;
  const double d = std::clamp(drive, 0.0, 1.0);
  for (std::size_t i = 0; i < activated_.size(); ++i) {
    const int r = activated_[i];
    for (int c = 0; c < cols; ++c) {
      if (!connected_[i * cols + c]) continue;
      const double swing = (sa_value_[c] ? 0.5 : -0.5) * d * eff_of(sub, r, c);
      sub.charge(r, c) = static_cast<float>(std::clamp(0.5 + swing, 0.0, 1.0));
    }
  }
}

void BankState::complete_precharge(Rng& rng) {
  if (phase_ != Phase::kInterrupted) return;
  const double t1 = pre_time_ns_ - act_time_ns_;
  if (!share_resolved_) {
    resolve_share(pre_time_ns_ - first_act_time_ns_, rng);
  }
  restore_cells(t1 / profile_.timing.tras_ns, rng);
  phase_ = Phase::kPrecharged;
  mask_built_ = false;
  share_resolved_ = false;
}

void BankState::begin_fresh_activation(int row, Rng& rng) {
  (void)rng;
  const AddressParts parts = split_address(profile_, row);
  open_subarray_ = parts.subarray;
  latch_ = latch_single(profile_, parts.local);
  activated_ = {parts.local};
  first_local_ = parts.local;
  first_act_time_ns_ = now_;
  act_time_ns_ = now_;
  share_resolved_ = false;
  mask_built_ = false;
  phase_ = Phase::kActive;
}

TraceEvent BankState::apply_act(const Command& cmd, Rng& rng, TraceEvent event) {
  const AddressParts parts = split_address(profile_, cmd.row);
  if (phase_ == Phase::kActive) {
    throw CommandError("ACT while a row is already open (missing PRE)");
  }

  if (phase_ == Phase::kInterrupted) {
    const double t1 = pre_time_ns_ - act_time_ns_;
    const double t2 = now_ - pre_time_ns_;
    const TimingRegime regime = classify_timing(profile_.timing, t1, t2);
    event.regime = regime;

    if (regime.activation == ActivationMode::kNominal) {
      complete_precharge(rng);
      // Fall through to the fresh-activation path below.
    } else if (parts.subarray != open_subarray_) {
      if (profile_.reject_cross_subarray_apa) {
        std::ostringstream msg;
        msg << "interrupted-precharge ACT crosses from subarray " << open_subarray_ << " to "
            << parts.subarray;
        throw CommandError(msg.str());
      }
      // Different local sense amplifiers and decoder latches: the second
      // activation simply replaces the first.
      complete_precharge(rng);
      event.note = "cross-subarray replace";
    } else if (regime.activation == ActivationMode::kSimultaneousUnion) {
      // The predecoder latches still hold the first row's select values.
      FieldValues fields = predecode(profile_, parts.local);
      const AnalogParams& a = profile_.analog;
      double latch_fail = 0.0;
      if (a.latch_fail_max_prob > 0.0 && t2 < profile_.timing.union_t2_max_ns) {
        const double frac =
            std::clamp((profile_.timing.union_t2_max_ns - t2) / a.latch_fail_ramp_ns, 0.0, 1.0);
        latch_fail = a.latch_fail_max_prob * frac;
      }
      int failed_fields = 0;
      for (std::size_t f = 0; f < fields.size(); ++f) {
        if (latch_fail > 0.0 && rng.bernoulli(latch_fail)) {
          ++failed_fields;
          continue;  // this field's new value is not captured
        }
        auto& vals = latch_.fields[f];
        if (std::find(vals.begin(), vals.end(), fields[f]) == vals.end()) {
          vals.push_back(fields[f]);
          std::sort(vals.begin(), vals.end());
        }
      }
      activated_ = expand_activation(profile_, latch_);
      mask_built_ = false;
      act_time_ns_ = now_;
      phase_ = Phase::kActive;
      if (regime.sense == SenseMode::kFullyLatched) {
        // The sense amplifiers latched the first row during its full tRAS
        // window; they now drive every row in the union (multi-row copy).
        if (!share_resolved_) {
          // Resolve the first row's sense as of the interrupted precharge.
          std::vector<int> union_set = std::move(activated_);
          std::vector<std::uint8_t> saved_mask = std::move(connected_);
          const bool saved_built = mask_built_;
          activated_ = {first_local_};
          mask_built_ = false;
          resolve_share(pre_time_ns_ - first_act_time_ns_, rng);
          activated_ = std::move(union_set);
          connected_ = std::move(saved_mask);
          mask_built_ = saved_built;
        }
        mask_built_ = false;  // fresh mask for the union set
        event.note = "sense amplifiers drive the union";
      } else {
        // Mixture: all driven cells share charge with the bitline now.
        share_resolved_ = false;
        resolve_share(now_ - first_act_time_ns_, rng);
        event.note = "charge sharing across the union";
      }
      if (failed_fields > 0) {
        event.note += " (";
        event.note += std::to_string(failed_fields);
        event.note += " field latch capture(s) missed)";
      }
    } else {  // ActivationMode::kConsecutiveTwoRow
      // Latches are replaced, but the sense amplifiers still hold the first
      // row's data and overwrite the second row (row clone).
      if (!share_resolved_) {
        resolve_share(pre_time_ns_ - first_act_time_ns_, rng);
      }
      restore_cells((pre_time_ns_ - act_time_ns_) / profile_.timing.tras_ns, rng);
      latch_ = latch_single(profile_, parts.local);
      activated_ = {parts.local};
      first_local_ = parts.local;
      first_act_time_ns_ = now_;
      act_time_ns_ = now_;
      mask_built_ = false;
      share_resolved_ = true;  // sense amplifiers keep driving their values
      phase_ = Phase::kActive;
      event.note = "sense amplifiers overwrite the re-activated row";
    }
  }

  if (phase_ == Phase::kPrecharged) {
    begin_fresh_activation(cmd.row, rng);
    event.regime = TimingRegime{ActivationMode::kNominal, SenseMode::kFullyLatched};
    if (event.note.empty()) event.note = "fresh activation";
  }

  event.activated_rows = activated_rows();
  return event;
}

TraceEvent BankState::apply(const Command& cmd, Rng& rng) {
  const TimingParams& t = profile_.timing;
  const double gran = t.command_granularity_ns;
  if (cmd.delay_after_ns < gran - kTimeEps) {
    throw CommandError("command delay below the command granularity");
  }
  const double ratio = cmd.delay_after_ns / gran;
  if (std::abs(ratio - std::round(ratio)) > 1e-6) {
    throw CommandError("command delay is not a multiple of the command granularity");
  }

  // A precharge whose tRP has elapsed by now has completed.
  if (phase_ == Phase::kInterrupted && now_ - pre_time_ns_ >= t.trp_ns - kTimeEps) {
    complete_precharge(rng);
  }

  TraceEvent event;
  event.index = command_index_++;
  event.kind = cmd.kind;
  event.at_ns = now_;
  event.row = cmd.row;

  switch (cmd.kind) {
    case CommandKind::kAct:
      event = apply_act(cmd, rng, event);
      break;
    case CommandKind::kPre:
      if (phase_ != Phase::kActive) {
        throw CommandError("PRE without an open activation");
      }
      pre_time_ns_ = now_;
      phase_ = Phase::kInterrupted;
      break;
    case CommandKind::kWrite: {
      if (phase_ != Phase::kActive) {
        throw CommandError("WR requires an open row");
      }
      if (cmd.bit != 0 && cmd.bit != 1) throw CommandError("WR bit must be 0 or 1");
      if (!mask_built_) build_mask(now_ - first_act_time_ns_, rng);
      std::fill(sa_value_.begin(), sa_value_.end(), static_cast<std::uint8_t>(cmd.bit));
      std::fill(sa_reliable_.begin(), sa_reliable_.end(), static_cast<std::uint8_t>(1));
      share_resolved_ = true;
      // Write drivers overpower the cells: connected cells take the full
      // written level immediately.
      {
        SubarrayState& sub = subarray(open_subarray_);
        const int cols = profile_.columns;
        for (std::size_t i = 0; i < activated_.size(); ++i) {
          for (int c = 0; c < cols; ++c) {
            if (!connected_[i * cols + c]) continue;
            const double swing = (cmd.bit ? 0.5 : -0.5) * eff_of(sub, activated_[i], c);
            sub.charge(activated_[i], c) = static_cast<float>(std::clamp(0.5 + swing, 0.0, 1.0));
          }
        }
      }
      break;
    }
    case CommandKind::kRead:
      if (phase_ != Phase::kActive) {
        throw CommandError("RD requires an open row");
      }
      resolve_share(now_ - first_act_time_ns_, rng);
      break;
    case CommandKind::kRefresh:
      if (phase_ != Phase::kPrecharged) {
        throw CommandError("REF requires all banks precharged");
      }
      event.note = "refresh (retention decay is not modeled)";
      break;
  }

  if (event.activated_rows.empty() && phase_ == Phase::kActive) {
    event.activated_rows = activated_rows();
  }
  now_ += cmd.delay_after_ns;
  return event;
}

TraceResult BankState::execute_sequence(std::span<const Command> commands, Rng& rng) {
  TraceResult result;
  result.events.reserve(commands.size());
  for (const Command& cmd : commands) {
    TraceEvent event = apply(cmd, rng);
    if (cmd.kind == CommandKind::kRead) {
      ReadResult read;
      read.at_ns = event.at_ns;
      read.values = sa_value_;
      read.reliable = sa_reliable_;
      result.reads.push_back(std::move(read));
    }
    result.events.push_back(std::move(event));
  }
  if (phase_ == Phase::kInterrupted &&
      now_ - pre_time_ns_ >= profile_.timing.trp_ns - kTimeEps) {
    complete_precharge(rng);
  }
  return result;
}

void BankState::settle(Rng& rng) {
  if (phase_ == Phase::kActive) {
    throw CommandError("cannot settle with a row still open (missing PRE)");
  }
  if (phase_ == Phase::kInterrupted) complete_precharge(rng);
}

std::vector<int> BankState::activated_rows() const {
  std::vector<int> rows;
  if (open_subarray_ < 0) return rows;
  rows.reserve(activated_.size());
  for (int local : activated_) {
    rows.push_back(open_subarray_ * profile_.rows_per_subarray + local);
  }
  return rows;
}

void BankState::write_row(int row, std::span<const std::uint8_t> bits, double jitter_sigma,
                          Rng& rng) {
  const AddressParts parts = split_address(profile_, row);
  if (static_cast<int>(bits.size()) != profile_.columns) {
    throw PlanError("write_row: bit count does not match the column count");
  }
  SubarrayState& sub = subarray(parts.subarray);
  for (int c = 0; c < profile_.columns; ++c) {
    double factor = 1.0;
    if (jitter_sigma > 0.0) {
      // Mean-one lognormal: never zero, so the stored level keeps its sign.
      factor = std::exp(jitter_sigma * rng.normal() - 0.5 * jitter_sigma * jitter_sigma);
    }
    const double swing = (bits[c] ? 0.5 : -0.5) * eff_of(sub, parts.local, c) * factor;
    sub.charge(parts.local, c) = static_cast<float>(std::clamp(0.5 + swing, 0.0, 1.0));
  }
}

void BankState::set_row_fraction(int row, double level) {
  const AddressParts parts = split_address(profile_, row);
  SubarrayState& sub = subarray(parts.subarray);
  for (int c = 0; c < profile_.columns; ++c) {
    sub.charge(parts.local, c) = static_cast<float>(std::clamp(level, 0.0, 1.0));
  }
}

}  // namespace pudsim
