// Analog column model: charge sharing between a precharged bitline and the
// cells connected to it, sense-amplifier resolution, and per-cell process
// variation.
//
// Voltages are normalized: 0 = ground, 1 = Vdd, 0.5 = precharge midpoint.
// Cell charge is the normalized stored level; capacitances are relative to
// the nominal cell capacitance.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pudsim/profile.hpp"
#include "pudsim/rng.hpp"

namespace pudsim {

// One cell connected to a bitline during charge sharing.
struct CellContribution {
  double charge = 0.5;      // stored level
  double cap = 1.0;         // manufactured capacitance (relative)
  double efficiency = 1.0;  // charge-transfer efficiency in [0, 1]
  double weight = 1.0;      // access weight (>= 1); longer-driven rows count more
};

struct ShareResult {
  double bitline_v = 0.5;
  double perturbation = 0.0;  // bitline_v - 0.5
};

// Capacitive divider between the bitline (ratio * nominal, precharged to
// 0.5) and the connected cells; each cell participates with effective
// capacitance weight * efficiency * cap.
ShareResult charge_share(std::span<const CellContribution> cells, const AnalogParams& a);

struct SenseOutcome {
  bool value = false;     // resolved logic level
  bool reliable = false;  // |adjusted input| reached the sensing margin
  double adjusted = 0.0;  // perturbation after offset noise and bias
};

// Resolve a bitline perturbation.  Offset noise is drawn per sense event;
// the constant bias breaks ties (and models devices whose marginal columns
// collapse to one polarity).
SenseOutcome sense(double perturbation, const AnalogParams& a, Rng& rng);

struct CellVariation {
  double cap = 1.0;
  double efficiency = 1.0;
};

// Draw manufacturing variation for one cell.  `variation_pct` is the spread
// in percent: uniform kind draws from 1 +/- pct/100, gaussian kind uses
// sigma = pct/100 / sqrt(3) (same variance as the uniform draw).
CellVariation sample_variation(const AnalogParams& a, double variation_pct, Rng& rng);

// Monte-Carlo study of one column configuration: `charges` lists the stored
// level of every connected cell (first entry = first activated row).
struct ColumnExperiment {
  std::vector<double> charges;
  double variation_pct = 20.0;
  double first_row_weight = 1.0;
  bool expected = false;
};

struct MonteCarloResult {
  double success_fraction = 0.0;       // sensed the expected value reliably
  double mean_abs_perturbation = 0.0;  // before offset noise
};

MonteCarloResult monte_carlo_success(const ColumnExperiment& exp, const AnalogParams& a,
                                     int iterations, Rng& rng);

}  // namespace pudsim
