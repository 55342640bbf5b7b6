#ifndef THERMOPROBE_ESTIMATOR_HPP
#define THERMOPROBE_ESTIMATOR_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "thermoprobe/random.hpp"
#include "thermoprobe/thermal.hpp"

namespace thermoprobe {

enum class Clip { none, cold, hot };

struct TemperatureEstimate {
  double t;
  Clip clip = Clip::none;
};

/// Bisection window for the MLE, in units of the largest level.
inline constexpr double kMleLowerScale = 1e-6;
inline constexpr double kMleUpperScale = 1e6;

/// m i.i.d. level indices drawn from the Gibbs distribution at t.
std::vector<std::size_t> sample_energies(const EnergySpectrum& spectrum, double t, std::size_t m, std::uint64_t seed);
std::vector<std::size_t> sample_energies(const EnergySpectrum& spectrum, double t, std::size_t m, Stream& rng);

/// Temperature whose thermal mean energy equals the sample mean. Sample means
/// at the ground energy or at the infinite-temperature mean are clipped to the
/// ends of the bisection window and flagged.
TemperatureEstimate mle_temperature(const EnergySpectrum& spectrum, std::span<const std::size_t> sample);
TemperatureEstimate mle_from_mean_energy(const EnergySpectrum& spectrum, double mean);

struct EstimationRun {
  EnergySpectrum spectrum{std::vector<double>{0.0, 0.0}};
  double true_t = 0.0;
  std::size_t samples_per_trial = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<double> estimates;
  std::vector<Clip> clips;
  std::size_t cold_clipped = 0;
  std::size_t hot_clipped = 0;
  double mean_estimate = 0.0;       // over unclipped trials
  double empirical_variance = 0.0;  // unbiased, over unclipped trials
  double crb = 0.0;                 // 1 / (M F_th(true_t))
  double ratio = 0.0;               // empirical_variance / crb
  double ratio_ci_low = 0.0;        // 95% percentile bootstrap
  double ratio_ci_high = 0.0;
  bool clip_warning = false;        // more than 1% of trials clipped
};

inline constexpr std::size_t kBootstrapResamples = 1000;

/// Monte Carlo check of the Cramer-Rao bound for energy-basis measurements.
/// Trial k draws from the stream keyed by (seed, k).
EstimationRun crb_saturation_check(const EnergySpectrum& spectrum, double true_t, std::size_t m, std::size_t trials,
                                   std::uint64_t seed, unsigned threads = 0);

}  // namespace thermoprobe

#endif  // THERMOPROBE_ESTIMATOR_HPP
