#ifndef THERMOPROBE_ANALYTIC_HPP
#define THERMOPROBE_ANALYTIC_HPP

namespace thermoprobe {

/// Ground state plus an (n_levels - 1)-fold degenerate excited level at `gap`.
struct TwoLevelAnsatz {
  double gap;
  int n_levels;
};

/// Narrow temperature window [t0, t0 + delta].
struct NarrowRangeParams {
  double t0;
  double delta;

  /// delta/t0 above 0.3 is outside the regime where the expansion is meaningful.
  bool outside_validity() const noexcept { return delta > 0.3 * t0; }
};

/// Dimensionless gap x = eps/T maximizing the QFI of an N-level probe at a
/// single temperature: the unique root x > 2 of e^x = (N-1)(x+2)/(x-2).
double local_optimal_gap(int n_levels);

/// QFI of the two-level ansatz, (N-1) eps^2 e^{eps/t} / ((N-1+e^{eps/t})^2 t^4),
/// evaluated without overflow.
double effective_two_level_qfi(const TwoLevelAnsatz& ansatz, double t);

/// Finite-width corrections to the local optimum: solves
///   e^x = (N-1) [ (x+2)/(x-2) + x^3 d/(2(x-2)^2) + x^3 (12 + x(x-6)) d^2 / (8(x-2)^3) ]
/// with d = delta/t0, truncated after the term of the requested order (0, 1, 2).
/// Throws BracketError when no root exists in (2, 2 + ln(N-1) + 40].
double narrow_range_optimal_gap(int n_levels, const NarrowRangeParams& params, int order);

/// x = eps/t0 minimizing the exact integral of 1/F_th over [t0, t0 + delta]
/// for the two-level ansatz.
double exact_narrow_optimum(int n_levels, const NarrowRangeParams& params);

/// Objective minimized by exact_narrow_optimum: the integral of 1/F_th over
/// [t0, t0 + delta] for the ansatz, or 1/F_th(t0) when delta == 0.
double two_level_inverse_qfi_integral(int n_levels, double gap, const NarrowRangeParams& params);

}  // namespace thermoprobe

#endif  // THERMOPROBE_ANALYTIC_HPP
