#include "thermoprobe/phase_sweep.hpp"

#include <cmath>

#include "thermoprobe/errors.hpp"

namespace thermoprobe {

ClusteredSpectrum cluster_levels(const EnergySpectrum& spectrum, double cluster_tol) {
  if (!(cluster_tol > 0.0)) throw DomainError("cluster tolerance must be positive");
  ClusteredSpectrum out;
  double sum = 0.0;
  std::size_t members = 0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    if (members > 0 && spectrum[i] - spectrum[i - 1] >= cluster_tol) {
      out.energies.push_back(sum / static_cast<double>(members));
      out.degeneracies.push_back(members);
      sum = 0.0;
      members = 0;
    }
    sum += spectrum[i];
    ++members;
  }
  out.energies.push_back(sum / static_cast<double>(members));
  out.degeneracies.push_back(members);
  return out;
}

PhaseDiagram sweep(int n_levels, double t_hm, std::span<const double> ratios, const OptimizerConfig& cfg,
                   double cluster_tol_factor) {
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    if (!(ratios[i] > ratios[i - 1])) throw ConfigError("ratio grid must be strictly ascending");
  }
  PhaseDiagram diagram;
  diagram.n_levels = n_levels;
  diagram.t_hm = t_hm;
  diagram.cluster_tol = cluster_tol_factor * t_hm;

  std::optional<EnergySpectrum> previous;
  for (double r : ratios) {
    SweepPoint point;
    point.ratio = r;
    try {
      const TemperatureRange range = TemperatureRange::from_harmonic_mean(t_hm, r);
      std::vector<EnergySpectrum> warm;
      if (previous) warm.push_back(*previous);
      point.result = optimize_levels(n_levels, range, cfg, warm);
      point.clusters = cluster_levels(point.result->spectrum, diagram.cluster_tol);
      previous = point.result->spectrum;
    } catch (const std::exception& e) {
      point.failure = e.what();
    }
    diagram.points.push_back(std::move(point));
  }

  const SweepPoint* last = nullptr;
  for (const SweepPoint& p : diagram.points) {
    if (!p.result) continue;
    if (last && last->clusters.count() != p.clusters.count()) {
      diagram.transitions.push_back({last->ratio, p.ratio, last->clusters.count(), p.clusters.count()});
    }
    last = &p;
  }
  return diagram;
}

CriticalRatio find_critical_ratio(int n_levels, double t_hm, std::size_t phase, double r_lo, double r_hi,
                                  const OptimizerConfig& cfg, double rel_width, double cluster_tol_factor) {
  if (!(r_lo >= 1.0 && r_hi > r_lo)) throw DomainError("need 1 <= r_lo < r_hi");
  if (!(rel_width > 0.0)) throw DomainError("relative width must be positive");
  const double tol = cluster_tol_factor * t_hm;
  const std::size_t target = phase + 2;

  CriticalRatio out{phase, 0.0, 0.0, r_lo, r_hi, 0, 0, 0};
  auto solve = [&](double r, const std::vector<EnergySpectrum>& warm) {
    ++out.optimizations;
    return optimize_levels(n_levels, TemperatureRange::from_harmonic_mean(t_hm, r), cfg, warm);
  };

  OptimizationResult lo = solve(r_lo, {});
  OptimizationResult hi = solve(r_hi, {lo.spectrum});
  out.count_lo = cluster_levels(lo.spectrum, tol).count();
  out.count_hi = cluster_levels(hi.spectrum, tol).count();
  if (out.count_lo == out.count_hi) throw BracketError("cluster counts agree at both ends of the bracket");
  if (!(out.count_lo < target && out.count_hi >= target)) {
    throw BracketError("bracket does not straddle the requested phase boundary");
  }

  while ((out.r_hi - out.r_lo) / (0.5 * (out.r_lo + out.r_hi)) >= rel_width) {
    const double mid = 0.5 * (out.r_lo + out.r_hi);
    OptimizationResult m = solve(mid, {lo.spectrum, hi.spectrum});
    const std::size_t count = cluster_levels(m.spectrum, tol).count();
    if (count >= target) {
      out.r_hi = mid;
      out.count_hi = count;
      hi = std::move(m);
    } else {
      out.r_lo = mid;
      out.count_lo = count;
      lo = std::move(m);
    }
  }
  out.ratio = 0.5 * (out.r_lo + out.r_hi);
  out.half_width = 0.5 * (out.r_hi - out.r_lo);
  return out;
}

}  // namespace thermoprobe
