#include "thermoprobe/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "thermoprobe/errors.hpp"

namespace thermoprobe {

namespace {

constexpr double kFlushWeight = 1e-300;

void require_temperature(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("temperature must be positive and finite");
}

double min_level(std::span<const double> levels) { return *std::min_element(levels.begin(), levels.end()); }

struct Moments {
  double mean;      // relative to the lowest level
  double variance;
};

// Weighted West/Welford update: one exp per level and no cancellation between
// <H^2> and <H>^2.
Moments thermal_moments(std::span<const double> levels, double t) {
  const double ground = min_level(levels);
  double total = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
  for (double e : levels) {
    const double x = e - ground;
    double w = std::exp(-x / t);
    if (w < kFlushWeight) w = 0.0;
    if (w == 0.0) continue;
    total += w;
    const double delta = x - mean;
    mean += (w / total) * delta;
    m2 += w * delta * (x - mean);
  }
  return {mean, std::max(0.0, m2 / total)};
}

bool has_two_distinct(std::span<const double> levels) {
  return std::adjacent_find(levels.begin(), levels.end(), std::not_equal_to<>()) != levels.end();
}

void check_node(double qfi, double t) {
  if (!(qfi >= kDivergentQfi)) {
    throw DivergentMeasureError("thermal QFI vanishes at T = " + std::to_string(t) + "; G diverges");
  }
}

}  // namespace

EnergySpectrum::EnergySpectrum(std::vector<double> levels) : levels_(std::move(levels)) {
  if (levels_.size() < 2) throw DomainError("an energy spectrum needs at least two levels");
  for (double e : levels_) {
    if (!std::isfinite(e) || e < 0.0) throw DomainError("energy levels must be finite and nonnegative");
  }
  if (levels_.front() != 0.0) throw DomainError("ground level must be pinned at zero");
  if (!std::is_sorted(levels_.begin(), levels_.end())) throw DomainError("energy levels must be sorted");
}

EnergySpectrum EnergySpectrum::pinned(std::vector<double> levels) {
  if (levels.empty()) throw DomainError("an energy spectrum needs at least two levels");
  std::sort(levels.begin(), levels.end());
  const double ground = levels.front();
  for (double& e : levels) e -= ground;
  return EnergySpectrum(std::move(levels));
}

EnergySpectrum EnergySpectrum::scaled(double factor) const {
  if (!(factor > 0.0)) throw DomainError("spectrum scale factor must be positive");
  std::vector<double> out(levels_);
  for (double& e : out) e *= factor;
  return EnergySpectrum(std::move(out));
}

TemperatureRange::TemperatureRange(double t_min, double t_max) : t_min_(t_min), t_max_(t_max) {
  if (!(t_min > 0.0) || !std::isfinite(t_max)) throw DomainError("t_min must be positive and t_max finite");
  if (t_max < t_min) throw DomainError("t_max must not be below t_min");
}

TemperatureRange TemperatureRange::from_harmonic_mean(double t_hm, double ratio) {
  if (!(t_hm > 0.0)) throw DomainError("harmonic-mean temperature must be positive");
  if (!(ratio >= 1.0)) throw DomainError("temperature ratio must be at least 1");
  // 1/t_min + 1/t_max = 1/t_hm with t_max = ratio * t_min.
  const double t_min = t_hm * (1.0 + 1.0 / ratio);
  return {t_min, ratio == 1.0 ? t_min : ratio * t_min};
}

std::vector<double> boltzmann_weights(std::span<const double> levels, double t) {
  require_temperature(t);
  if (levels.empty()) throw DomainError("empty level list");
  const double ground = min_level(levels);
  std::vector<double> w(levels.size());
  double z = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    w[k] = std::exp(-(levels[k] - ground) / t);
    if (w[k] < kFlushWeight) w[k] = 0.0;
    z += w[k];
  }
  for (double& p : w) p /= z;
  return w;
}

double mean_energy(std::span<const double> levels, double t) {
  require_temperature(t);
  if (levels.empty()) throw DomainError("empty level list");
  return min_level(levels) + thermal_moments(levels, t).mean;
}

double thermal_qfi(std::span<const double> levels, double t) {
  require_temperature(t);
  if (levels.empty()) throw DomainError("empty level list");
  const double t2 = t * t;
  return thermal_moments(levels, t).variance / (t2 * t2);
}

IntegralEstimate g_measure_estimate(std::span<const double> levels, const TemperatureRange& range,
                                    const QuadratureConfig& quad) {
  quad.validate();
  if (levels.size() < 2 || !has_two_distinct(levels)) {
    throw DivergentMeasureError("spectrum has fewer than two distinct levels; G diverges");
  }
  auto inverse_qfi = [levels](double t) {
    const double f = thermal_qfi(levels, t);
    check_node(f, t);
    return 1.0 / f;
  };
  if (range.is_point()) return {inverse_qfi(range.t_min()), 1};
  const IntegralEstimate integral = integrate(inverse_qfi, range.t_min(), range.t_max(), quad);
  return {integral.value / (range.t_max() - range.t_min()), integral.nodes};
}

double g_measure(std::span<const double> levels, const TemperatureRange& range, const QuadratureConfig& quad) {
  return g_measure_estimate(levels, range, quad).value;
}

double g_measure_fixed(std::span<const double> levels, const TemperatureRange& range, std::size_t nodes) {
  if (levels.size() < 2 || !has_two_distinct(levels)) {
    throw DivergentMeasureError("spectrum has fewer than two distinct levels; G diverges");
  }
  auto inverse_qfi = [levels](double t) {
    const double f = thermal_qfi(levels, t);
    check_node(f, t);
    return 1.0 / f;
  };
  if (range.is_point()) return inverse_qfi(range.t_min());
  return integrate_fixed(inverse_qfi, range.t_min(), range.t_max(), nodes) / (range.t_max() - range.t_min());
}

}  // namespace thermoprobe
