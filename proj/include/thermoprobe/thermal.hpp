#ifndef THERMOPROBE_THERMAL_HPP
#define THERMOPROBE_THERMAL_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "thermoprobe/quadrature.hpp"

namespace thermoprobe {

/// Probe energy levels in units of temperature (k_B = 1): sorted, finite,
/// nonnegative, with the ground state pinned at exactly zero.
class EnergySpectrum {
 public:
  /// Validates an already canonical level list; throws DomainError otherwise.
  explicit EnergySpectrum(std::vector<double> levels);

  /// Sorts and subtracts the minimum so that levels[0] == 0.
  static EnergySpectrum pinned(std::vector<double> levels);

  std::span<const double> levels() const noexcept { return levels_; }
  const std::vector<double>& values() const noexcept { return levels_; }
  std::size_t size() const noexcept { return levels_.size(); }
  double operator[](std::size_t i) const noexcept { return levels_[i]; }
  double max_level() const noexcept { return levels_.back(); }

  EnergySpectrum scaled(double factor) const;

  bool operator==(const EnergySpectrum&) const = default;

 private:
  std::vector<double> levels_;
};

/// Temperature interval [t_min, t_max] with 0 < t_min <= t_max.
class TemperatureRange {
 public:
  TemperatureRange(double t_min, double t_max);

  /// Range with t_max / t_min == ratio and harmonic_mean() == t_hm.
  static TemperatureRange from_harmonic_mean(double t_hm, double ratio);

  /// A single temperature (local thermometry).
  static TemperatureRange point(double t) { return {t, t}; }

  double t_min() const noexcept { return t_min_; }
  double t_max() const noexcept { return t_max_; }
  /// (1/t_min + 1/t_max)^-1, the characteristic energy scale of the problem.
  double harmonic_mean() const noexcept { return 1.0 / (1.0 / t_min_ + 1.0 / t_max_); }
  double ratio() const noexcept { return t_max_ / t_min_; }
  bool is_point() const noexcept { return t_min_ == t_max_; }

  TemperatureRange scaled(double factor) const { return {t_min_ * factor, t_max_ * factor}; }

 private:
  double t_min_;
  double t_max_;
};

/// Gibbs probabilities exp(-E_k/t)/Z. Exponents are taken relative to the
/// lowest level; weights below 1e-300 are flushed to zero. Accepts unpinned,
/// unsorted levels.
std::vector<double> boltzmann_weights(std::span<const double> levels, double t);
inline std::vector<double> boltzmann_weights(const EnergySpectrum& s, double t) {
  return boltzmann_weights(s.levels(), t);
}

/// Thermal mean energy <H>_t.
double mean_energy(std::span<const double> levels, double t);

/// Thermal quantum Fisher information (<H^2> - <H>^2) / t^4.
double thermal_qfi(std::span<const double> levels, double t);
inline double thermal_qfi(const EnergySpectrum& s, double t) { return thermal_qfi(s.levels(), t); }

/// F_th below this at any node means the measure is treated as divergent.
inline constexpr double kDivergentQfi = 1e-280;

/// Average variance G = (1/(t_max - t_min)) * integral of dT / F_th(T).
/// Returns 1/F_th(t_min) when the range is a single point. Throws
/// DivergentMeasureError for spectra with fewer than two distinct levels or
/// when F_th underflows at a node, and QuadratureError on non-convergence.
double g_measure(std::span<const double> levels, const TemperatureRange& range,
                 const QuadratureConfig& quad = {});
inline double g_measure(const EnergySpectrum& s, const TemperatureRange& range,
                        const QuadratureConfig& quad = {}) {
  return g_measure(s.levels(), range, quad);
}

/// G with the node count reported, for callers that want to pin the rule.
IntegralEstimate g_measure_estimate(std::span<const double> levels, const TemperatureRange& range,
                                    const QuadratureConfig& quad = {});

/// G with a fixed n-point rule (no convergence check). Used where a smooth
/// objective is needed, e.g. finite-difference gradients.
double g_measure_fixed(std::span<const double> levels, const TemperatureRange& range, std::size_t nodes);

}  // namespace thermoprobe

#endif  // THERMOPROBE_THERMAL_HPP
