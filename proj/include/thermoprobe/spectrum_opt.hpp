#ifndef THERMOPROBE_SPECTRUM_OPT_HPP
#define THERMOPROBE_SPECTRUM_OPT_HPP

#include <cstddef>
#include <cstdint>
#include <span>

#include "thermoprobe/optimize.hpp"
#include "thermoprobe/thermal.hpp"

namespace thermoprobe {

struct OptimizationResult {
  EnergySpectrum spectrum;
  double g_value;
  std::size_t evaluations = 0;
  std::size_t generations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
};

/// Upper bound on any free level during the search, in units of t_max.
inline constexpr double kLevelBoundFactor = 40.0;

/// Minimizes G over the N-1 excited levels (ground pinned at zero) by
/// differential evolution followed, when cfg.polish is set, by a projected
/// quasi-Newton refinement with central differences of step 1e-6 t_hm.
/// Warm starts are refined locally and also injected into the initial
/// population; the best of all candidates is returned.
OptimizationResult optimize_levels(int n_levels, const TemperatureRange& range, const OptimizerConfig& cfg,
                                   std::span<const EnergySpectrum> warm_starts = {});

/// Local refinement only, from `start`.
OptimizationResult refine_levels(const EnergySpectrum& start, const TemperatureRange& range, unsigned threads = 0);

/// Best effective two-level probe: one ground state and an (N-1)-fold
/// degenerate excited level, gap chosen by golden-section search.
OptimizationResult optimize_constrained_two_level(int n_levels, const TemperatureRange& range);

/// Locally optimal gap at the arithmetic mean temperature (t_min + t_max)/2.
double mean_temperature_gap_estimate(int n_levels, const TemperatureRange& range);

/// Two-level ansatz spectrum {0, gap x (N-1)}.
EnergySpectrum two_level_spectrum(int n_levels, double gap);

}  // namespace thermoprobe

#endif  // THERMOPROBE_SPECTRUM_OPT_HPP
