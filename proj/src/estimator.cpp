#include "thermoprobe/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "thermoprobe/errors.hpp"
#include "thermoprobe/parallel.hpp"

namespace thermoprobe {

namespace {

constexpr std::uint64_t kBootstrapTag = 0xb0075742ULL;

std::vector<double> cumulative(const EnergySpectrum& spectrum, double t) {
  std::vector<double> c = boltzmann_weights(spectrum, t);
  std::partial_sum(c.begin(), c.end(), c.begin());
  return c;
}

double variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

std::vector<std::size_t> sample_energies(const EnergySpectrum& spectrum, double t, std::size_t m, Stream& rng) {
  if (!(t > 0.0)) throw DomainError("temperature must be positive");
  if (m < 1) throw DomainError("need at least one sample");
  const std::vector<double> cdf = cumulative(spectrum, t);
  const double total = cdf.back();
  std::vector<std::size_t> out(m);
  for (auto& idx : out) {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
  }
  return out;
}

std::vector<std::size_t> sample_energies(const EnergySpectrum& spectrum, double t, std::size_t m,
                                         std::uint64_t seed) {
  Stream rng{seed};
  return sample_energies(spectrum, t, m, rng);
}

TemperatureEstimate mle_from_mean_energy(const EnergySpectrum& spectrum, double mean) {
  const double scale = spectrum.max_level();
  if (!(scale > 0.0)) throw DomainError("temperature is not identifiable from a fully degenerate spectrum");
  double lo = kMleLowerScale * scale;
  double hi = kMleUpperScale * scale;
  const auto levels = spectrum.levels();
  const double hot_mean = std::accumulate(levels.begin(), levels.end(), 0.0) / static_cast<double>(levels.size());
  if (mean <= levels.front()) return {lo, Clip::cold};
  if (mean >= hot_mean) return {hi, Clip::hot};
  if (mean_energy(levels, lo) >= mean) return {lo, Clip::cold};
  if (mean_energy(levels, hi) <= mean) return {hi, Clip::hot};
  // Mean energy increases strictly with t; bisect in log t.
  while (hi / lo - 1.0 > 1e-10) {
    const double mid = std::sqrt(lo * hi);
    if (mean_energy(levels, mid) < mean) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {std::sqrt(lo * hi), Clip::none};
}

TemperatureEstimate mle_temperature(const EnergySpectrum& spectrum, std::span<const std::size_t> sample) {
  if (sample.empty()) throw DomainError("empty sample");
  double sum = 0.0;
  for (std::size_t idx : sample) {
    if (idx >= spectrum.size()) throw DomainError("sample index out of range");
    sum += spectrum[idx];
  }
  return mle_from_mean_energy(spectrum, sum / static_cast<double>(sample.size()));
}

EstimationRun crb_saturation_check(const EnergySpectrum& spectrum, double true_t, std::size_t m, std::size_t trials,
                                   std::uint64_t seed, unsigned threads) {
  if (trials < 2) throw DomainError("need at least two trials for a variance");
  EstimationRun run;
  run.spectrum = spectrum;
  run.true_t = true_t;
  run.samples_per_trial = m;
  run.trials = trials;
  run.seed = seed;
  run.estimates.resize(trials);
  run.clips.resize(trials);

  parallel_for(trials, threads, [&](std::size_t k) {
    Stream rng{seed, k};
    const TemperatureEstimate e = mle_temperature(spectrum, sample_energies(spectrum, true_t, m, rng));
    run.estimates[k] = e.t;
    run.clips[k] = e.clip;
  });

  std::vector<double> kept;
  for (std::size_t k = 0; k < trials; ++k) {
    if (run.clips[k] == Clip::cold) ++run.cold_clipped;
    if (run.clips[k] == Clip::hot) ++run.hot_clipped;
    if (run.clips[k] == Clip::none) kept.push_back(run.estimates[k]);
  }
  run.clip_warning = 100 * (run.cold_clipped + run.hot_clipped) > trials;
  run.crb = 1.0 / (static_cast<double>(m) * thermal_qfi(spectrum, true_t));
  if (kept.size() < 2) return run;

  run.mean_estimate = std::accumulate(kept.begin(), kept.end(), 0.0) / static_cast<double>(kept.size());
  run.empirical_variance = variance(kept);
  run.ratio = run.empirical_variance / run.crb;

  std::vector<double> ratios(kBootstrapResamples);
  parallel_for(kBootstrapResamples, threads, [&](std::size_t b) {
    Stream rng{seed, kBootstrapTag, b};
    std::vector<double> resample(kept.size());
    for (double& x : resample) x = kept[rng.below(kept.size())];
    ratios[b] = variance(resample) / run.crb;
  });
  std::sort(ratios.begin(), ratios.end());
  run.ratio_ci_low = ratios[static_cast<std::size_t>(0.025 * kBootstrapResamples)];
  run.ratio_ci_high = ratios[static_cast<std::size_t>(0.975 * kBootstrapResamples) - 1];
  return run;
}

}  // namespace thermoprobe
