#include "thermoprobe/analytic.hpp"

#include <cmath>

#include "thermoprobe/errors.hpp"
#include "thermoprobe/numerics.hpp"
#include "thermoprobe/quadrature.hpp"

namespace thermoprobe {

namespace {

void require_levels(int n_levels) {
  if (n_levels < 2) throw DomainError("the probe needs at least two levels");
}

void require_params(const NarrowRangeParams& p) {
  if (!(p.t0 > 0.0)) throw DomainError("t0 must be positive");
  if (!(p.delta >= 0.0)) throw DomainError("delta must be nonnegative");
}

// Coefficient multiplying (N-1) on the right-hand side of the optimality
// condition, truncated at `order` in d = delta/t0.
double condition_rhs(double x, double d, int order) {
  const double xm2 = x - 2.0;
  double r = (x + 2.0) / xm2;
  if (order >= 1) r += x * x * x * d / (2.0 * xm2 * xm2);
  if (order >= 2) r += x * x * x * (12.0 + x * (x - 6.0)) * d * d / (8.0 * xm2 * xm2 * xm2);
  return r;
}

double solve_condition(int n_levels, double d, int order, double upper_pad) {
  const double log_degeneracy = std::log(static_cast<double>(n_levels - 1));
  // Log form of e^x = (N-1) R(x): increasing through zero, no overflow.
  auto h = [=](double x) { return x - log_degeneracy - std::log(condition_rhs(x, d, order)); };
  return bracketed_root(h, 2.0 + 1e-9, 2.0 + log_degeneracy + upper_pad, 1e-13);
}

}  // namespace

double local_optimal_gap(int n_levels) {
  require_levels(n_levels);
  return solve_condition(n_levels, 0.0, 0, 20.0);
}

double effective_two_level_qfi(const TwoLevelAnsatz& ansatz, double t) {
  if (!(t > 0.0)) throw DomainError("temperature must be positive");
  require_levels(ansatz.n_levels);
  if (!(ansatz.gap >= 0.0)) throw DomainError("gap must be nonnegative");
  const double degeneracy = ansatz.n_levels - 1.0;
  const double u = std::exp(-ansatz.gap / t);  // e^{-eps/t}
  const double denom = 1.0 + degeneracy * u;
  const double t2 = t * t;
  return degeneracy * ansatz.gap * ansatz.gap * u / (denom * denom * t2 * t2);
}

double narrow_range_optimal_gap(int n_levels, const NarrowRangeParams& params, int order) {
  require_levels(n_levels);
  require_params(params);
  if (order < 0 || order > 2) throw DomainError("expansion order must be 0, 1 or 2");
  if (order == 0 || params.delta == 0.0) return local_optimal_gap(n_levels);
  return solve_condition(n_levels, params.delta / params.t0, order, 40.0);
}

double two_level_inverse_qfi_integral(int n_levels, double gap, const NarrowRangeParams& params) {
  require_levels(n_levels);
  require_params(params);
  auto inverse = [&](double t) { return 1.0 / effective_two_level_qfi({gap, n_levels}, t); };
  if (params.delta == 0.0) return inverse(params.t0);
  const QuadratureConfig quad{32, 4096, 1e-13};
  return integrate(inverse, params.t0, params.t0 + params.delta, quad).value;
}

double exact_narrow_optimum(int n_levels, const NarrowRangeParams& params) {
  require_levels(n_levels);
  require_params(params);
  const double t_hi = params.t0 + params.delta;
  // The objective is dominated by 1/eps^2 near zero; start just above it.
  const Minimum best = golden_section_minimize(
      [&](double gap) { return two_level_inverse_qfi_integral(n_levels, gap, params); }, 1e-6 * t_hi,
      40.0 * t_hi, 1e-10 * t_hi);
  return best.x / params.t0;
}

}  // namespace thermoprobe
