#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "thermoprobe/analytic.hpp"
#include "thermoprobe/errors.hpp"
#include "thermoprobe/quadrature.hpp"
#include "thermoprobe/thermal.hpp"

using namespace thermoprobe;

TEST_CASE("local optimal gap matches a bisection oracle") {
  for (int n : {2, 3, 4, 16, 64, 1000, 65536}) {
    CHECK(local_optimal_gap(n) == doctest::Approx(oracle::local_gap(n)).epsilon(1e-12));
  }
  CHECK(local_optimal_gap(2) == doctest::Approx(2.399357280515).epsilon(1e-11));
  CHECK(local_optimal_gap(16) == doctest::Approx(3.856799272181).epsilon(1e-11));
  CHECK_THROWS_AS(local_optimal_gap(1), DomainError);
}

TEST_CASE("local optimal gap increases with N") {
  double prev = 0.0;
  for (int n = 2; n <= 512; n *= 2) {
    const double x = local_optimal_gap(n);
    CHECK(x > prev);
    prev = x;
  }
}

TEST_CASE("the local gap maximizes the two-level QFI") {
  for (int n : {2, 16, 64}) {
    const double x = local_optimal_gap(n);
    const double f = effective_two_level_qfi({x, n}, 1.0);
    CHECK(effective_two_level_qfi({x * 1.001, n}, 1.0) < f);
    CHECK(effective_two_level_qfi({x * 0.999, n}, 1.0) < f);
  }
}

TEST_CASE("two-level ansatz QFI equals the general QFI of the explicit spectrum") {
  for (int n : {2, 5, 16}) {
    std::vector<double> levels(static_cast<std::size_t>(n), 2.7);
    levels[0] = 0.0;
    for (double t : {0.5, 1.0, 4.0}) {
      CHECK(effective_two_level_qfi({2.7, n}, t) == doctest::Approx(thermal_qfi(levels, t)).epsilon(1e-12));
    }
  }
  CHECK(std::isfinite(effective_two_level_qfi({1e4, 16}, 1.0)));
}

TEST_CASE("zeroth order of the narrow-range expansion is the local gap") {
  CHECK(narrow_range_optimal_gap(16, {1.0, 0.1}, 0) == doctest::Approx(local_optimal_gap(16)).epsilon(1e-13));
  CHECK(narrow_range_optimal_gap(16, {1.0, 0.0}, 2) == doctest::Approx(local_optimal_gap(16)).epsilon(1e-13));
  CHECK_THROWS_AS(narrow_range_optimal_gap(16, {1.0, 0.1}, 3), DomainError);
}

TEST_CASE("narrow-range worked example at N = 16") {
  const NarrowRangeParams p{1.0, 0.1};
  const double exact = exact_narrow_optimum(16, p);
  const double second = narrow_range_optimal_gap(16, p, 2);
  CHECK(exact == doctest::Approx(4.05268).epsilon(2e-6));
  CHECK(second == doctest::Approx(4.04085).epsilon(2e-6));
  CHECK(std::abs(exact - second) / exact * 100.0 == doctest::Approx(0.292).epsilon(0.01));
}

TEST_CASE("exact narrow optimum agrees with a brute-force scan") {
  const NarrowRangeParams p{1.0, 0.2};
  const int n = 8;
  // Independent objective: trapezoid integral of 1/F over [t0, t0 + delta].
  auto objective = [&](double x) {
    std::vector<double> levels(static_cast<std::size_t>(n), x);
    levels[0] = 0.0;
    return oracle::g_trapezoid(levels, p.t0, p.t0 + p.delta, 2000);
  };
  auto scan = [&](double lo, double hi, double step) {
    double best_x = lo, best = INFINITY;
    for (double x = lo; x <= hi; x += step) {
      const double v = objective(x);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
    return best_x;
  };
  const double coarse = scan(2.5, 5.5, 1e-2);
  const double fine = scan(coarse - 2e-2, coarse + 2e-2, 1e-5);
  CHECK(exact_narrow_optimum(n, p) == doctest::Approx(fine).epsilon(1e-5));
}

TEST_CASE("exact narrow optimum tends to the local gap as delta shrinks") {
  CHECK(exact_narrow_optimum(16, {1.0, 1e-5}) == doctest::Approx(local_optimal_gap(16)).epsilon(1e-4));
  // Minimizing by function values resolves x only to about sqrt(machine epsilon).
  CHECK(exact_narrow_optimum(16, {2.0, 0.0}) == doctest::Approx(local_optimal_gap(16)).epsilon(1e-7));
}

TEST_CASE("expansion validity flag") {
  CHECK_FALSE(NarrowRangeParams{1.0, 0.3}.outside_validity());
  CHECK(NarrowRangeParams{1.0, 0.31}.outside_validity());
}
