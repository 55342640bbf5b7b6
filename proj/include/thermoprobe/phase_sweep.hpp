#ifndef THERMOPROBE_PHASE_SWEEP_HPP
#define THERMOPROBE_PHASE_SWEEP_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermoprobe/spectrum_opt.hpp"

namespace thermoprobe {

/// Default clustering tolerance in units of t_hm.
inline constexpr double kClusterTolFactor = 1e-3;

/// Levels grouped into effective levels. Energies are cluster means.
struct ClusteredSpectrum {
  std::vector<double> energies;
  std::vector<std::size_t> degeneracies;

  std::size_t count() const noexcept { return energies.size(); }
};

/// Single-linkage clustering along the sorted levels: a new cluster starts
/// wherever consecutive levels differ by at least cluster_tol.
ClusteredSpectrum cluster_levels(const EnergySpectrum& spectrum, double cluster_tol);

struct SweepPoint {
  double ratio = 1.0;
  std::optional<OptimizationResult> result;  // empty when the optimizer failed
  ClusteredSpectrum clusters;
  std::string failure;
};

/// Grid interval over which the cluster count changes.
struct CountChange {
  double r_lo;
  double r_hi;
  std::size_t count_lo;
  std::size_t count_hi;
};

struct PhaseDiagram {
  int n_levels = 0;
  double t_hm = 1.0;
  double cluster_tol = 0.0;
  std::vector<SweepPoint> points;
  std::vector<CountChange> transitions;
};

/// Optimizes the spectrum at every ratio of an ascending grid. Each point is
/// warm-started from the previous optimum and also searched from scratch; the
/// better of the two is kept. Optimizer failures are recorded, not thrown.
PhaseDiagram sweep(int n_levels, double t_hm, std::span<const double> ratios, const OptimizerConfig& cfg,
                   double cluster_tol_factor = kClusterTolFactor);

struct CriticalRatio {
  std::size_t phase = 1;  // the optimum gains its (phase + 2)-th cluster here
  double ratio;           // bracket midpoint
  double half_width;
  double r_lo;            // final bracket
  double r_hi;
  std::size_t count_lo;
  std::size_t count_hi;
  std::size_t optimizations = 0;
};

/// Bisection for the ratio at which the optimum first has phase + 2 clusters.
/// Stops once (r_hi - r_lo) / midpoint < rel_width. Optional end-point optima
/// seed the first midpoint searches.
CriticalRatio find_critical_ratio(int n_levels, double t_hm, std::size_t phase, double r_lo, double r_hi,
                                  const OptimizerConfig& cfg, double rel_width = 1e-3,
                                  double cluster_tol_factor = kClusterTolFactor);

}  // namespace thermoprobe

#endif  // THERMOPROBE_PHASE_SWEEP_HPP
