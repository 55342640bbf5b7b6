#ifndef THERMOPROBE_OPTIMIZE_HPP
#define THERMOPROBE_OPTIMIZE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace thermoprobe {

/// Differential-evolution settings shared by the spectrum and chain searches.
struct OptimizerConfig {
  std::size_t population = 500;
  std::size_t max_generations = 2000;
  double mutation = 0.6;   // differential weight, in (0, 2)
  double crossover = 0.9;  // binomial crossover rate, in (0, 1]
  std::uint64_t seed = 0;
  double conv_tol = 1e-10;  // relative best-vs-mean spread
  bool polish = true;
  unsigned threads = 0;  // 0: THERMOPROBE_THREADS or 1; never affects results

  void validate() const;
};

/// Pure objective over a flat parameter vector. Must be safe to call
/// concurrently. May return +inf for infeasible points.
using Objective = std::function<double(std::span<const double>)>;

/// In-place canonicalization applied to every candidate before evaluation.
using Canonicalizer = std::function<void(std::span<double>)>;

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dimension() const noexcept { return lower.size(); }
  void clamp(std::span<double> x) const;
};

struct SearchResult {
  std::vector<double> x;
  double value = 0.0;
  double initial_best = 0.0;  // best objective of the initial population
  std::size_t evaluations = 0;
  std::size_t generations = 0;
  bool converged = false;
};

/// DE/rand/1/bin with synchronous (per-generation) replacement. Every trial
/// vector draws from its own stream keyed by (seed, generation, index), so the
/// run is bit-identical for any thread count. `seeds` replace the first
/// members of the random initial population. Polishing is not applied here.
SearchResult differential_evolution(const Objective& objective, const Box& box, const OptimizerConfig& cfg,
                                    std::span<const std::vector<double>> seeds = {},
                                    const Canonicalizer& canonicalize = {});

struct PolishOptions {
  double fd_step = 1e-6;  // central-difference step (absolute)
  std::size_t max_iterations = 500;
  double gradient_tol = 0.0;  // stop when the projected gradient max-norm is below this
  unsigned threads = 0;
};

/// Projected BFGS with central-difference gradients and Armijo backtracking.
/// Coordinates pinned at a bound with an outward gradient are held fixed.
/// Never returns a point worse than `start`.
SearchResult polish_bfgs(const Objective& objective, const Box& box, std::vector<double> start,
                         const PolishOptions& options = {});

/// Central-difference gradient; components are evaluated concurrently.
std::vector<double> central_gradient(const Objective& objective, std::span<const double> x, double step,
                                     unsigned threads = 0);

}  // namespace thermoprobe

#endif  // THERMOPROBE_OPTIMIZE_HPP
