#include "thermoprobe/spectrum_opt.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "thermoprobe/analytic.hpp"
#include "thermoprobe/errors.hpp"
#include "thermoprobe/numerics.hpp"

namespace thermoprobe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> with_ground(std::span<const double> excited) {
  std::vector<double> levels;
  levels.reserve(excited.size() + 1);
  levels.push_back(0.0);
  levels.insert(levels.end(), excited.begin(), excited.end());
  return levels;
}

double adaptive_g(std::span<const double> excited, const TemperatureRange& range) {
  try {
    return g_measure(with_ground(excited), range);
  } catch (const DivergentMeasureError&) {
    return kInf;
  } catch (const QuadratureError&) {
    return kInf;
  }
}

Objective fixed_rule_objective(const TemperatureRange& range, std::size_t nodes) {
  return [range, nodes](std::span<const double> excited) {
    try {
      return g_measure_fixed(with_ground(excited), range, nodes);
    } catch (const DivergentMeasureError&) {
      return kInf;
    }
  };
}

// Rule order used for the smooth polish objective: the converged adaptive order
// at the starting point, never below 64.
std::size_t polish_nodes(std::span<const double> excited, const TemperatureRange& range) {
  try {
    return std::max<std::size_t>(64, g_measure_estimate(with_ground(excited), range).nodes);
  } catch (const std::runtime_error&) {
    return QuadratureConfig{}.max_nodes;
  }
}

Box level_box(int n_levels, const TemperatureRange& range) {
  const auto dim = static_cast<std::size_t>(n_levels - 1);
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, kLevelBoundFactor * range.t_max())};
}

struct Candidate {
  std::vector<double> excited;
  double g;
};

Candidate polish_levels(std::vector<double> excited, const TemperatureRange& range, const Box& box,
                        unsigned threads, std::size_t& evaluations) {
  std::sort(excited.begin(), excited.end());
  const double start_g = adaptive_g(excited, range);
  if (!std::isfinite(start_g)) return {std::move(excited), start_g};
  PolishOptions options;
  options.fd_step = 1e-6 * range.harmonic_mean();
  options.threads = threads;
  const SearchResult polished =
      polish_bfgs(fixed_rule_objective(range, polish_nodes(excited, range)), box, excited, options);
  evaluations += polished.evaluations;
  std::vector<double> x = polished.x;
  std::sort(x.begin(), x.end());
  const double g = adaptive_g(x, range);
  if (g <= start_g) return {std::move(x), g};
  return {std::move(excited), start_g};
}

OptimizationResult make_result(const Candidate& c, const TemperatureRange& range) {
  OptimizationResult r{EnergySpectrum::pinned(with_ground(c.excited)), 0.0};
  r.g_value = g_measure(r.spectrum, range);
  return r;
}

void require_levels(int n_levels) {
  if (n_levels < 2) throw DomainError("the probe needs at least two levels");
}

}  // namespace

EnergySpectrum two_level_spectrum(int n_levels, double gap) {
  require_levels(n_levels);
  std::vector<double> levels(static_cast<std::size_t>(n_levels), gap);
  levels[0] = 0.0;
  return EnergySpectrum(std::move(levels));
}

OptimizationResult optimize_levels(int n_levels, const TemperatureRange& range, const OptimizerConfig& cfg,
                                   std::span<const EnergySpectrum> warm_starts) {
  require_levels(n_levels);
  cfg.validate();
  const Box box = level_box(n_levels, range);

  std::vector<std::vector<double>> seeds;
  for (const EnergySpectrum& w : warm_starts) {
    if (w.size() != static_cast<std::size_t>(n_levels)) throw ConfigError("warm start has the wrong level count");
    seeds.emplace_back(w.levels().begin() + 1, w.levels().end());
    box.clamp(seeds.back());
  }

  const Objective objective = [range](std::span<const double> excited) { return adaptive_g(excited, range); };
  const Canonicalizer sort_levels = [](std::span<double> x) { std::sort(x.begin(), x.end()); };
  const SearchResult de = differential_evolution(objective, box, cfg, seeds, sort_levels);

  std::size_t evaluations = de.evaluations;
  std::vector<Candidate> candidates;
  candidates.push_back({de.x, de.value});
  if (cfg.polish) {
    candidates.push_back(polish_levels(de.x, range, box, cfg.threads, evaluations));
    for (const auto& s : seeds) candidates.push_back(polish_levels(s, range, box, cfg.threads, evaluations));
  }
  // Ties go to the earliest candidate, i.e. the DE result.
  const auto best = std::min_element(candidates.begin(), candidates.end(),
                                     [](const Candidate& a, const Candidate& b) { return a.g < b.g; });
  if (!std::isfinite(best->g)) throw DivergentMeasureError("no candidate with a finite average variance");

  OptimizationResult result = make_result(*best, range);
  result.evaluations = evaluations;
  result.generations = de.generations;
  result.converged = de.converged;
  result.seed = cfg.seed;
  return result;
}

OptimizationResult refine_levels(const EnergySpectrum& start, const TemperatureRange& range, unsigned threads) {
  const Box box = level_box(static_cast<int>(start.size()), range);
  std::vector<double> excited(start.levels().begin() + 1, start.levels().end());
  box.clamp(excited);
  std::size_t evaluations = 0;
  const Candidate c = polish_levels(std::move(excited), range, box, threads, evaluations);
  if (!std::isfinite(c.g)) throw DivergentMeasureError("refinement start has a divergent average variance");
  OptimizationResult result = make_result(c, range);
  result.evaluations = evaluations;
  result.converged = true;
  return result;
}

OptimizationResult optimize_constrained_two_level(int n_levels, const TemperatureRange& range) {
  require_levels(n_levels);
  std::size_t evaluations = 0;
  auto g_of_gap = [&](double gap) {
    ++evaluations;
    try {
      return g_measure(two_level_spectrum(n_levels, gap), range);
    } catch (const std::runtime_error&) {
      return kInf;
    }
  };
  const Minimum m = golden_section_minimize(g_of_gap, 1e-6 * range.t_min(), kLevelBoundFactor * range.t_max(),
                                            1e-10 * range.harmonic_mean());
  OptimizationResult result{two_level_spectrum(n_levels, m.x), 0.0};
  result.g_value = g_measure(result.spectrum, range);
  result.evaluations = evaluations;
  result.converged = true;
  return result;
}

double mean_temperature_gap_estimate(int n_levels, const TemperatureRange& range) {
  return local_optimal_gap(n_levels) * 0.5 * (range.t_min() + range.t_max());
}

}  // namespace thermoprobe
