// Analog column model implementation.
#include "pudsim/analog.hpp"

#include <algorithm>
#include <cmath>

#include "pudsim/errors.hpp"

namespace pudsim {

ShareResult charge_share(std::span<const CellContribution> cells, const AnalogParams& a) {
  double num = a.bitline_cell_ratio * 0.5;
  double den = a.bitline_cell_ratio;
  for (const CellContribution& cell : cells) {
    const double eff_cap = cell.weight * cell.efficiency * cell.cap;
    num += eff_cap * cell.charge;
    den += eff_cap;
  }
  ShareResult r;
  r.bitline_v = num / den;
  r.perturbation = r.bitline_v - 0.5;
  return r;
}

SenseOutcome sense(double perturbation, const AnalogParams& a, Rng& rng) {
  SenseOutcome out;
  double adjusted = perturbation + a.sense_bias;
  if (a.sense_offset_sigma > 0.0) adjusted -= rng.normal(0.0, a.sense_offset_sigma);
  out.adjusted = adjusted;
  out.value = adjusted > 0.0 || (adjusted == 0.0 && a.sense_bias > 0.0);
  out.reliable = std::abs(adjusted) >= a.sensing_margin;
  return out;
}

CellVariation sample_variation(const AnalogParams& a, double variation_pct, Rng& rng) {
  CellVariation v;
  if (variation_pct <= 0.0) return v;
  const double spread = variation_pct / 100.0;
  if (a.variation_kind == VariationKind::kUniform) {
    v.cap = rng.uniform(1.0 - spread, 1.0 + spread);
    v.efficiency = rng.uniform(1.0 - spread, 1.0 + spread);
  } else {
    const double sigma = spread / std::sqrt(3.0);
    v.cap = rng.normal(1.0, sigma);
    v.efficiency = rng.normal(1.0, sigma);
  }
  v.cap = std::max(v.cap, 0.05);
  v.efficiency = std::clamp(v.efficiency, 0.0, 1.0);
  return v;
}

MonteCarloResult monte_carlo_success(const ColumnExperiment& exp, const AnalogParams& a,
                                     int iterations, Rng& rng) {
  if (iterations <= 0) throw Error("monte_carlo_success: iterations must be positive");
  MonteCarloResult result;
  long long successes = 0;
  double abs_pert_sum = 0.0;
  std::vector<CellContribution> cells(exp.charges.size());
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < exp.charges.size(); ++i) {
      const CellVariation v = sample_variation(a, exp.variation_pct, rng);
      cells[i].charge = exp.charges[i];
      cells[i].cap = v.cap;
      cells[i].efficiency = v.efficiency;
      cells[i].weight = (i == 0) ? exp.first_row_weight : 1.0;
    }
    const ShareResult share = charge_share(cells, a);
    abs_pert_sum += std::abs(share.perturbation);
    const SenseOutcome out = sense(share.perturbation, a, rng);
    if (out.reliable && out.value == exp.expected) ++successes;
  }
  result.success_fraction = static_cast<double>(successes) / iterations;
  result.mean_abs_perturbation = abs_pert_sum / iterations;
  return result;
}

}  // namespace pudsim
