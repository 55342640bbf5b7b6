#ifndef THERMOPROBE_QUADRATURE_HPP
#define THERMOPROBE_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "thermoprobe/errors.hpp"

namespace thermoprobe {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Returns the n-point rule. Rules are computed once per n and cached; the
/// returned reference stays valid for the lifetime of the program.
const GaussLegendreRule& gauss_legendre(std::size_t n);

/// Node-doubling schedule for Gauss-Legendre integration.
struct QuadratureConfig {
  std::size_t initial_nodes = 32;
  std::size_t max_nodes = 4096;
  double rel_tol = 1e-9;

  void validate() const;
};

/// Fixed-order integral of f over [a, b].
template <typename F>
double integrate_fixed(F&& f, double a, double b, std::size_t nodes) {
  const GaussLegendreRule& rule = gauss_legendre(nodes);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

struct IntegralEstimate {
  double value;
  std::size_t nodes;  // order of the rule that produced `value`
};

/// Integral of f over [a, b], doubling the rule order from cfg.initial_nodes
/// until two successive estimates agree to cfg.rel_tol. Throws QuadratureError
/// carrying the last two estimates once another doubling would exceed
/// cfg.max_nodes. With initial_nodes == max_nodes the single fixed-order
/// estimate is returned.
template <typename F>
IntegralEstimate integrate(F&& f, double a, double b, const QuadratureConfig& cfg) {
  std::size_t n = cfg.initial_nodes;
  double previous = integrate_fixed(f, a, b, n);
  if (2 * n > cfg.max_nodes) return {previous, n};
  double before = previous;
  while (2 * n <= cfg.max_nodes) {
    n *= 2;
    const double current = integrate_fixed(f, a, b, n);
    if (std::abs(current - previous) <= cfg.rel_tol * std::abs(current)) return {current, n};
    before = previous;
    previous = current;
  }
  throw QuadratureError("quadrature did not converge within max_nodes", before, previous);
}

}  // namespace thermoprobe

#endif  // THERMOPROBE_QUADRATURE_HPP
