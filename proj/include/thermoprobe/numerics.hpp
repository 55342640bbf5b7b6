#ifndef THERMOPROBE_NUMERICS_HPP
#define THERMOPROBE_NUMERICS_HPP

#include <cmath>
#include <cstdint>
#include <utility>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "thermoprobe/errors.hpp"

namespace thermoprobe {

/// Root of f in [lo, hi] by TOMS 748 (Brent-class bracketed solver). Throws
/// BracketError when f(lo) and f(hi) share a sign.
template <typename F>
double bracketed_root(F&& f, double lo, double hi, double abs_tol) {
  const double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::signbit(flo) == std::signbit(fhi)) throw BracketError("no sign change across the root bracket");
  std::uintmax_t max_iter = 200;
  auto tol = [abs_tol](double a, double b) { return std::abs(b - a) <= abs_tol; };
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, max_iter);
  return 0.5 * (a + b);
}

struct Minimum {
  double x;
  double value;
};

/// Golden-section search for the minimum of a unimodal f on [lo, hi]; stops
/// when the bracket is narrower than abs_tol or stops shrinking.
template <typename F>
Minimum golden_section_minimize(F&& f, double lo, double hi, double abs_tol) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int iter = 0; iter < 400 && (b - a) > abs_tol; ++iter) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      if (!(c > a && c < d)) break;
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      if (!(d > c && d < b)) break;
      fd = f(d);
    }
  }
  return fc < fd ? Minimum{c, fc} : Minimum{d, fd};
}

}  // namespace thermoprobe

#endif  // THERMOPROBE_NUMERICS_HPP
