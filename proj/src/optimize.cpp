#include "thermoprobe/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "thermoprobe/errors.hpp"
#include "thermoprobe/parallel.hpp"
#include "thermoprobe/random.hpp"

namespace thermoprobe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tag separating the initial-population streams from generation streams.
constexpr std::uint64_t kInitTag = 0x1417e5eedULL;

double safe_eval(const Objective& f, std::span<const double> x) {
  const double v = f(x);
  return std::isnan(v) ? kInf : v;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (population < 4) throw ConfigError("population must be at least 4");
  if (max_generations < 1) throw ConfigError("max_generations must be positive");
  if (!(mutation > 0.0 && mutation < 2.0)) throw ConfigError("mutation must lie in (0, 2)");
  if (!(crossover > 0.0 && crossover <= 1.0)) throw ConfigError("crossover must lie in (0, 1]");
  if (!(conv_tol > 0.0)) throw ConfigError("conv_tol must be positive");
}

void Box::clamp(std::span<double> x) const {
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = std::clamp(x[j], lower[j], upper[j]);
}

SearchResult differential_evolution(const Objective& objective, const Box& box, const OptimizerConfig& cfg,
                                    std::span<const std::vector<double>> seeds,
                                    const Canonicalizer& canonicalize) {
  cfg.validate();
  const std::size_t dim = box.dimension();
  if (dim == 0 || box.upper.size() != dim) throw ConfigError("search box is empty or inconsistent");
  for (std::size_t j = 0; j < dim; ++j) {
    if (!(box.lower[j] <= box.upper[j])) throw ConfigError("search box has lower > upper");
  }
  const std::size_t pop_size = cfg.population;

  std::vector<std::vector<double>> pop(pop_size, std::vector<double>(dim));
  std::vector<double> fit(pop_size);
  parallel_for(pop_size, cfg.threads, [&](std::size_t i) {
    auto& x = pop[i];
    if (i < seeds.size()) {
      if (seeds[i].size() != dim) throw ConfigError("seed vector has the wrong dimension");
      x = seeds[i];
      box.clamp(x);
    } else {
      Stream rng{cfg.seed, kInitTag, i};
      for (std::size_t j = 0; j < dim; ++j) x[j] = rng.uniform(box.lower[j], box.upper[j]);
    }
    if (canonicalize) canonicalize(x);
    fit[i] = safe_eval(objective, x);
  });

  SearchResult result;
  result.evaluations = pop_size;
  auto best_index = [&] { return static_cast<std::size_t>(std::min_element(fit.begin(), fit.end()) - fit.begin()); };
  result.initial_best = fit[best_index()];

  std::vector<std::vector<double>> trials(pop_size, std::vector<double>(dim));
  std::vector<double> trial_fit(pop_size);
  for (std::size_t gen = 1; gen <= cfg.max_generations; ++gen) {
    parallel_for(pop_size, cfg.threads, [&](std::size_t i) {
      Stream rng{cfg.seed, gen, i};
      std::size_t r1, r2, r3;
      do r1 = rng.below(pop_size); while (r1 == i);
      do r2 = rng.below(pop_size); while (r2 == i || r2 == r1);
      do r3 = rng.below(pop_size); while (r3 == i || r3 == r1 || r3 == r2);
      const std::size_t forced = rng.below(dim);
      auto& trial = trials[i];
      for (std::size_t j = 0; j < dim; ++j) {
        if (j == forced || rng.uniform() < cfg.crossover) {
          const double base = pop[r1][j];
          double v = base + cfg.mutation * (pop[r2][j] - pop[r3][j]);
          // Out-of-box components land between the violated bound and the base.
          if (v < box.lower[j]) v = box.lower[j] + rng.uniform() * (base - box.lower[j]);
          if (v > box.upper[j]) v = box.upper[j] - rng.uniform() * (box.upper[j] - base);
          trial[j] = v;
        } else {
          trial[j] = pop[i][j];
        }
      }
      if (canonicalize) canonicalize(trial);
      trial_fit[i] = safe_eval(objective, trial);
    });
    for (std::size_t i = 0; i < pop_size; ++i) {
      if (trial_fit[i] <= fit[i]) {
        std::swap(pop[i], trials[i]);
        fit[i] = trial_fit[i];
      }
    }
    result.evaluations += pop_size;
    result.generations = gen;

    const double best = fit[best_index()];
    double mean = 0.0;
    for (double v : fit) mean += v;
    mean /= static_cast<double>(pop_size);
    if (std::isfinite(mean) && mean - best <= cfg.conv_tol * std::max(std::abs(best), 1e-300)) {
      result.converged = true;
      break;
    }
  }
  const std::size_t b = best_index();
  result.x = pop[b];
  result.value = fit[b];
  return result;
}

std::vector<double> central_gradient(const Objective& objective, std::span<const double> x, double step,
                                     unsigned threads) {
  const std::size_t n = x.size();
  std::vector<double> grad(n);
  parallel_for(n, threads, [&](std::size_t j) {
    std::vector<double> probe(x.begin(), x.end());
    probe[j] = x[j] + step;
    const double up = objective(probe);
    probe[j] = x[j] - step;
    const double down = objective(probe);
    grad[j] = (up - down) / (2.0 * step);
  });
  return grad;
}

SearchResult polish_bfgs(const Objective& objective, const Box& box, std::vector<double> start,
                         const PolishOptions& options) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const std::size_t n = start.size();
  if (box.dimension() != n) throw ConfigError("polish start point does not match the box");

  SearchResult result;
  box.clamp(start);
  double f = safe_eval(objective, start);
  result.evaluations = 1;
  result.initial_best = f;
  result.x = start;
  result.value = f;
  if (!std::isfinite(f)) return result;

  VectorXd x = Eigen::Map<const VectorXd>(start.data(), static_cast<Eigen::Index>(n));
  MatrixXd h_inv = MatrixXd::Identity(n, n);
  bool fresh_hessian = true;
  VectorXd g_prev, x_prev;

  auto gradient_at = [&](const VectorXd& p) {
    std::vector<double> pv(p.data(), p.data() + n);
    std::vector<double> g = central_gradient(objective, pv, options.fd_step, options.threads);
    result.evaluations += 2 * n;
    return VectorXd(Eigen::Map<VectorXd>(g.data(), static_cast<Eigen::Index>(n)));
  };

  int stalls = 0;
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    VectorXd g = gradient_at(x);
    if (!g.allFinite()) break;

    if (iter > 0) {
      const VectorXd s = x - x_prev;
      const VectorXd y = g - g_prev;
      const double sy = s.dot(y);
      if (sy > 1e-300 * s.norm() * y.norm() && sy > 0.0) {
        if (fresh_hessian) {
          h_inv *= sy / y.dot(y);
          fresh_hessian = false;
        }
        const double rho = 1.0 / sy;
        const VectorXd hy = h_inv * y;
        h_inv += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
      }
    }

    std::vector<bool> pinned(n, false);
    double proj_norm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const bool at_lo = x[j] <= box.lower[j] && g[j] > 0.0;
      const bool at_hi = x[j] >= box.upper[j] && g[j] < 0.0;
      pinned[j] = at_lo || at_hi;
      if (!pinned[j]) proj_norm = std::max(proj_norm, std::abs(g[j]));
    }
    if (proj_norm <= options.gradient_tol) break;

    VectorXd g_free = g;
    for (std::size_t j = 0; j < n; ++j) {
      if (pinned[j]) g_free[j] = 0.0;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      VectorXd d = -(h_inv * g_free);
      for (std::size_t j = 0; j < n; ++j) {
        if (pinned[j]) d[j] = 0.0;
      }
      if (!(d.dot(g_free) < 0.0)) d = -g_free;
      double alpha = 1.0;
      for (int k = 0; k < 60; ++k, alpha *= 0.5) {
        VectorXd trial = x + alpha * d;
        std::vector<double> tv(trial.data(), trial.data() + n);
        box.clamp(tv);
        trial = Eigen::Map<VectorXd>(tv.data(), static_cast<Eigen::Index>(n));
        const double ft = safe_eval(objective, tv);
        ++result.evaluations;
        if (ft <= f + 1e-4 * g.dot(trial - x) && ft <= f) {
          if (ft >= f - 1e-15 * std::abs(f)) ++stalls; else stalls = 0;
          x_prev = x;
          g_prev = g;
          x = trial;
          f = ft;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (fresh_hessian) break;
        h_inv.setIdentity();
        fresh_hessian = true;
      }
    }
    result.generations = iter + 1;
    if (!accepted || stalls >= 3) break;
  }

  if (f <= result.value) {
    result.x.assign(x.data(), x.data() + n);
    result.value = f;
  }
  result.converged = true;
  return result;
}

}  // namespace thermoprobe
