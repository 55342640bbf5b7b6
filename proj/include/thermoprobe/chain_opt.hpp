#ifndef THERMOPROBE_CHAIN_OPT_HPP
#define THERMOPROBE_CHAIN_OPT_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermoprobe/hamiltonian.hpp"
#include "thermoprobe/optimize.hpp"
#include "thermoprobe/spectrum_opt.hpp"

namespace thermoprobe {

enum class ChainFamily {
  xyz,              // independent jx, jy, jz per bond; hx, hy, hz per site
  xxx,              // jx = jy = jz = j per bond; fields per site
  xxx_homogeneous,  // jx = jy = jz = j per bond; one field vector for all sites
  ising,            // jz per bond, hz per site; transverse terms fixed at zero
};

/// All exchange couplings share this sign; fields are unconstrained.
enum class CouplingSign { ferromagnetic, antiferromagnetic };

std::string to_string(ChainFamily family);
std::string to_string(CouplingSign sign);
ChainFamily parse_family(const std::string& text);
CouplingSign parse_sign(const std::string& text);

struct ChainConstraint {
  ChainFamily family = ChainFamily::xyz;
  std::optional<CouplingSign> sign;  // empty: search both and keep the better
  double coupling_cap = 20.0;        // |J| <= coupling_cap * t_hm
  double field_cap = 20.0;           // |h| <= field_cap * t_hm

  void validate() const;
};

/// A chain together with the family whose free parameters describe it.
struct ChainParameters {
  ChainFamily family = ChainFamily::xyz;
  XYZChain model;
};

/// Parameters below this (in units of t_hm) count as zero when reading
/// structure off an optimum.
inline constexpr double kCollapseThreshold = 1e-3;

struct ChainOptimizationResult {
  OptimizationResult result;  // realized spectrum and G
  ChainParameters parameters;
  CouplingSign sign = CouplingSign::ferromagnetic;
};

/// Number of free parameters of a family at n sites.
std::size_t free_parameter_count(ChainFamily family, int n);

/// Free parameters in natural (signed) units: couplings first, then fields.
std::vector<double> free_parameters(const ChainParameters& params);
ChainParameters from_free_parameters(ChainFamily family, int n, std::span<const double> values);

/// Minimizes G over the family's parameters by differential evolution (and
/// polish when cfg.polish is set). Seeds whose couplings are compatible with a
/// searched sign are injected into that search's initial population, so the
/// result is never worse than any compatible seed.
ChainOptimizationResult optimize_chain(int n, const TemperatureRange& range, const ChainConstraint& constraint,
                                       const OptimizerConfig& cfg, std::span<const ChainParameters> seeds = {});

/// Lifts parameters of a narrower family into a wider one (xxx_homogeneous ->
/// xxx -> xyz, ising -> xyz). Same Hamiltonian.
ChainParameters embed(const ChainParameters& params, ChainFamily target);

/// G of a parameter set through chain_spectrum and g_measure.
double chain_g(const ChainParameters& params, const TemperatureRange& range);

/// chain_g / G_opt - 1 with G_opt from optimize_levels at N = 2^n. A chain
/// spectrum, when given, seeds the ideal search so the result is >= 0 up to
/// rounding.
double relative_gap_to_ideal(double chain_g_value, int n, const TemperatureRange& range, const OptimizerConfig& cfg,
                             const std::optional<EnergySpectrum>& chain_spectrum = std::nullopt);

struct TransferRung {
  int n = 0;
  ChainParameters parameters;
  double g_value = 0.0;
  bool ising_subspace = false;  // refined with transverse terms pinned at zero
  std::string note;             // failure reason when the ladder halted here
};

/// Global search at n_start, then for each larger n: replicate the previous
/// optimum's per-site / per-bond pattern onto the new site and refine locally.
std::vector<TransferRung> transfer_optimize(int n_start, int n_end, const TemperatureRange& range,
                                            const ChainConstraint& constraint, const OptimizerConfig& cfg);

/// Same ladder from given parameters; the first rung is a local refinement at
/// start.model.n.
std::vector<TransferRung> transfer_from(const ChainParameters& start, int n_end, const TemperatureRange& range,
                                        const ChainConstraint& constraint, unsigned threads = 0);

/// Periodic tiling of per-site / per-bond arrays onto n sites.
ChainParameters extend_chain(const ChainParameters& params, int n);

struct NoiseSweepResult {
  std::vector<double> noise_levels;
  std::vector<double> mean_qfi;
  std::vector<double> std_error;
  std::vector<double> min_qfi;
  std::vector<double> max_qfi;
  std::size_t trial_count = 0;
  double noiseless_qfi = 0.0;
};

/// For each noise level eps, adds independent U[-eps, eps] draws to every free
/// parameter and records F_th at t, over `trials` draws per level.
NoiseSweepResult noise_robustness(const ChainParameters& params, double t, std::span<const double> noise_levels,
                                  std::size_t trials, std::uint64_t seed, unsigned threads = 0);

}  // namespace thermoprobe

#endif  // THERMOPROBE_CHAIN_OPT_HPP
