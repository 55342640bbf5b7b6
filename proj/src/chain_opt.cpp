#include "thermoprobe/chain_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "thermoprobe/errors.hpp"
#include "thermoprobe/parallel.hpp"
#include "thermoprobe/random.hpp"

namespace thermoprobe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sign_factor(CouplingSign s) { return s == CouplingSign::ferromagnetic ? -1.0 : 1.0; }

std::size_t coupling_count(ChainFamily family, int n) {
  return family == ChainFamily::xyz ? 3 * static_cast<std::size_t>(n) : static_cast<std::size_t>(n);
}

bool embeds_into(ChainFamily source, ChainFamily target) {
  return source == target || target == ChainFamily::xyz ||
         (target == ChainFamily::xxx && source == ChainFamily::xxx_homogeneous);
}

XYZChain zero_chain(int n) {
  const std::vector<double> z(static_cast<std::size_t>(n), 0.0);
  return {n, z, z, z, z, z, z};
}

// Eigenvalues used inside objectives. A homogeneous field commutes with the
// isotropic exchange, so rotating it onto z leaves the spectrum unchanged and
// keeps the matrix real.
std::vector<double> objective_levels(const ChainParameters& p) {
  if (p.family == ChainFamily::xxx_homogeneous) {
    XYZChain m = p.model;
    const double h = std::sqrt(m.hx[0] * m.hx[0] + m.hy[0] * m.hy[0] + m.hz[0] * m.hz[0]);
    std::fill(m.hx.begin(), m.hx.end(), 0.0);
    std::fill(m.hy.begin(), m.hy.end(), 0.0);
    std::fill(m.hz.begin(), m.hz.end(), h);
    return chain_eigenvalues(m);
  }
  return chain_eigenvalues(p.model);
}

// Search coordinates: coupling magnitudes (sign applied on decode), then fields.
struct Encoding {
  ChainFamily family;
  int n;
  double sign;

  ChainParameters decode(std::span<const double> x) const {
    std::vector<double> natural(x.begin(), x.end());
    const std::size_t nc = coupling_count(family, n);
    for (std::size_t k = 0; k < nc; ++k) natural[k] *= sign;
    return from_free_parameters(family, n, natural);
  }

  // Empty when the parameters carry a coupling of the opposite sign.
  std::optional<std::vector<double>> encode(const ChainParameters& p) const {
    std::vector<double> x = free_parameters(p);
    const std::size_t nc = coupling_count(family, n);
    for (std::size_t k = 0; k < nc; ++k) {
      x[k] *= sign;
      if (x[k] < 0.0) return std::nullopt;
    }
    return x;
  }

  Box box(const ChainConstraint& c, double t_hm) const {
    const std::size_t dim = free_parameter_count(family, n);
    const std::size_t nc = coupling_count(family, n);
    Box b{std::vector<double>(dim), std::vector<double>(dim)};
    for (std::size_t k = 0; k < dim; ++k) {
      if (k < nc) {
        b.lower[k] = 0.0;
        b.upper[k] = c.coupling_cap * t_hm;
      } else {
        b.lower[k] = -c.field_cap * t_hm;
        b.upper[k] = c.field_cap * t_hm;
      }
    }
    return b;
  }
};

double safe_g(std::span<const double> levels, const TemperatureRange& range, std::size_t fixed_nodes) {
  try {
    return fixed_nodes == 0 ? g_measure(levels, range) : g_measure_fixed(levels, range, fixed_nodes);
  } catch (const DivergentMeasureError&) {
    return kInf;
  } catch (const QuadratureError&) {
    return kInf;
  }
}

Objective family_objective(const Encoding& enc, const TemperatureRange& range, std::size_t fixed_nodes) {
  return [enc, range, fixed_nodes](std::span<const double> x) {
    return safe_g(objective_levels(enc.decode(x)), range, fixed_nodes);
  };
}

std::size_t polish_nodes(const std::vector<double>& levels, const TemperatureRange& range) {
  try {
    return std::max<std::size_t>(64, g_measure_estimate(levels, range).nodes);
  } catch (const std::runtime_error&) {
    return QuadratureConfig{}.max_nodes;
  }
}

struct SignedRun {
  ChainParameters params;
  double g;
  OptimizationResult result;
};

SignedRun run_sign(int n, const TemperatureRange& range, const ChainConstraint& constraint,
                   const OptimizerConfig& cfg, CouplingSign sign, std::span<const ChainParameters> seeds) {
  const Encoding enc{constraint.family, n, sign_factor(sign)};
  const double t_hm = range.harmonic_mean();
  const Box box = enc.box(constraint, t_hm);

  std::vector<std::vector<double>> seed_vectors;
  for (const ChainParameters& s : seeds) {
    if (s.model.n != n) throw ConfigError("chain seed has the wrong number of sites");
    if (!embeds_into(s.family, constraint.family)) continue;
    if (auto x = enc.encode(embed(s, constraint.family))) seed_vectors.push_back(std::move(*x));
  }

  const SearchResult de = differential_evolution(family_objective(enc, range, 0), box, cfg, seed_vectors);
  std::size_t evaluations = de.evaluations;
  std::vector<std::vector<double>> candidates{de.x};
  if (cfg.polish && std::isfinite(de.value)) {
    PolishOptions options;
    options.fd_step = 1e-6 * t_hm;
    options.threads = cfg.threads;
    const std::size_t nodes = polish_nodes(objective_levels(enc.decode(de.x)), range);
    const SearchResult polished = polish_bfgs(family_objective(enc, range, nodes), box, de.x, options);
    evaluations += polished.evaluations;
    candidates.push_back(polished.x);
  }

  std::optional<SignedRun> best;
  for (auto& x : candidates) {
    box.clamp(x);
    ChainParameters p = enc.decode(x);
    EnergySpectrum spectrum = chain_spectrum(p.model);
    const double g = safe_g(spectrum.levels(), range, 0);
    if (!best || g < best->g) {
      best = SignedRun{p, g, OptimizationResult{std::move(spectrum), g}};
    }
  }
  if (!std::isfinite(best->g)) throw DivergentMeasureError("chain search found no probe with finite G");
  best->result.evaluations = evaluations;
  best->result.generations = de.generations;
  best->result.converged = de.converged;
  best->result.seed = cfg.seed;
  return *best;
}

bool is_collapsed_to_ising(const XYZChain& m, double t_hm) {
  const double cut = kCollapseThreshold * t_hm;
  for (const auto* v : {&m.jx, &m.jy, &m.hx, &m.hy}) {
    for (double x : *v) {
      if (std::abs(x) >= cut) return false;
    }
  }
  return true;
}

CouplingSign infer_sign(const ChainParameters& p, const ChainConstraint& c) {
  if (c.sign) return *c.sign;
  const auto& m = p.model;
  for (const auto* v : {&m.jx, &m.jy, &m.jz}) {
    for (double x : *v) {
      if (x < 0.0) return CouplingSign::ferromagnetic;
    }
  }
  return CouplingSign::antiferromagnetic;
}

// Local refinement of one rung. XYZ chains whose transverse terms have
// collapsed are refined over (jz, hz) only, which keeps the Hamiltonian
// diagonal and the cost linear in 2^n.
TransferRung refine_rung(const ChainParameters& start, const TemperatureRange& range,
                         const ChainConstraint& constraint, CouplingSign sign, unsigned threads) {
  const int n = start.model.n;
  const double t_hm = range.harmonic_mean();
  const double s = sign_factor(sign);
  TransferRung rung;
  rung.n = n;
  PolishOptions options;
  options.fd_step = 1e-6 * t_hm;
  options.threads = threads;

  if (start.family == ChainFamily::xyz && is_collapsed_to_ising(start.model, t_hm)) {
    rung.ising_subspace = true;
    const auto un = static_cast<std::size_t>(n);
    Box box{std::vector<double>(2 * un), std::vector<double>(2 * un)};
    std::vector<double> x(2 * un);
    for (std::size_t i = 0; i < un; ++i) {
      box.lower[i] = 0.0;
      box.upper[i] = constraint.coupling_cap * t_hm;
      box.lower[un + i] = -constraint.field_cap * t_hm;
      box.upper[un + i] = constraint.field_cap * t_hm;
      x[i] = s * start.model.jz[i];
      x[un + i] = start.model.hz[i];
    }
    auto decode = [n, un, s](std::span<const double> v) {
      ChainParameters p{ChainFamily::xyz, zero_chain(n)};
      for (std::size_t i = 0; i < un; ++i) {
        p.model.jz[i] = s * v[i];
        p.model.hz[i] = v[un + i];
      }
      return p;
    };
    box.clamp(x);
    const std::size_t nodes = polish_nodes(chain_eigenvalues(decode(x).model), range);
    const Objective f = [&](std::span<const double> v) {
      return safe_g(chain_eigenvalues(decode(v).model), range, nodes);
    };
    const SearchResult r = polish_bfgs(f, box, x, options);
    rung.parameters = decode(r.x);
  } else {
    rung.ising_subspace = start.family == ChainFamily::ising;
    if (n > kMaxDenseSpins && !rung.ising_subspace) throw CapacityError("chain too long for dense refinement");
    const Encoding enc{start.family, n, s};
    const Box box = enc.box(constraint, t_hm);
    auto x = enc.encode(start);
    if (!x) throw ConfigError("start parameters violate the coupling sign");
    box.clamp(*x);
    const std::size_t nodes = polish_nodes(objective_levels(enc.decode(*x)), range);
    const SearchResult r = polish_bfgs(family_objective(enc, range, nodes), box, *x, options);
    rung.parameters = enc.decode(r.x);
  }
  rung.g_value = chain_g(rung.parameters, range);
  const double start_g = chain_g(start, range);
  if (start_g < rung.g_value) {
    rung.parameters = start;
    rung.g_value = start_g;
  }
  return rung;
}

}  // namespace

std::string to_string(ChainFamily family) {
  switch (family) {
    case ChainFamily::xyz: return "xyz";
    case ChainFamily::xxx: return "xxx";
    case ChainFamily::xxx_homogeneous: return "xxx-hom";
    case ChainFamily::ising: return "ising";
  }
  return "?";
}

std::string to_string(CouplingSign sign) {
  return sign == CouplingSign::ferromagnetic ? "ferro" : "antiferro";
}

ChainFamily parse_family(const std::string& text) {
  if (text == "xyz") return ChainFamily::xyz;
  if (text == "xxx") return ChainFamily::xxx;
  if (text == "xxx-hom") return ChainFamily::xxx_homogeneous;
  if (text == "ising") return ChainFamily::ising;
  throw ConfigError("unknown chain family '" + text + "' (expected xyz, xxx, xxx-hom or ising)");
}

CouplingSign parse_sign(const std::string& text) {
  if (text == "ferro") return CouplingSign::ferromagnetic;
  if (text == "antiferro") return CouplingSign::antiferromagnetic;
  throw ConfigError("unknown coupling sign '" + text + "' (expected ferro or antiferro)");
}

void ChainConstraint::validate() const {
  if (!(coupling_cap > 0.0) || !(field_cap > 0.0)) throw ConfigError("parameter caps must be positive");
}

std::size_t free_parameter_count(ChainFamily family, int n) {
  const auto un = static_cast<std::size_t>(n);
  switch (family) {
    case ChainFamily::xyz: return 6 * un;
    case ChainFamily::xxx: return 4 * un;
    case ChainFamily::xxx_homogeneous: return un + 3;
    case ChainFamily::ising: return 2 * un;
  }
  return 0;
}

std::vector<double> free_parameters(const ChainParameters& p) {
  const XYZChain& m = p.model;
  m.validate();
  std::vector<double> v;
  auto append = [&v](const std::vector<double>& a) { v.insert(v.end(), a.begin(), a.end()); };
  switch (p.family) {
    case ChainFamily::xyz:
      for (const auto* a : {&m.jx, &m.jy, &m.jz, &m.hx, &m.hy, &m.hz}) append(*a);
      break;
    case ChainFamily::xxx:
      for (const auto* a : {&m.jz, &m.hx, &m.hy, &m.hz}) append(*a);
      break;
    case ChainFamily::xxx_homogeneous:
      append(m.jz);
      v.push_back(m.hx[0]);
      v.push_back(m.hy[0]);
      v.push_back(m.hz[0]);
      break;
    case ChainFamily::ising:
      append(m.jz);
      append(m.hz);
      break;
  }
  return v;
}

ChainParameters from_free_parameters(ChainFamily family, int n, std::span<const double> values) {
  if (n < 2) throw DomainError("a periodic chain needs at least two sites");
  if (values.size() != free_parameter_count(family, n)) throw DomainError("wrong number of free parameters");
  const auto un = static_cast<std::size_t>(n);
  ChainParameters p{family, zero_chain(n)};
  auto slice = [&](std::size_t block) { return std::vector<double>(values.begin() + block * un, values.begin() + (block + 1) * un); };
  XYZChain& m = p.model;
  switch (family) {
    case ChainFamily::xyz:
      m.jx = slice(0);
      m.jy = slice(1);
      m.jz = slice(2);
      m.hx = slice(3);
      m.hy = slice(4);
      m.hz = slice(5);
      break;
    case ChainFamily::xxx:
      m.jz = slice(0);
      m.jx = m.jz;
      m.jy = m.jz;
      m.hx = slice(1);
      m.hy = slice(2);
      m.hz = slice(3);
      break;
    case ChainFamily::xxx_homogeneous:
      m.jz = slice(0);
      m.jx = m.jz;
      m.jy = m.jz;
      std::fill(m.hx.begin(), m.hx.end(), values[un]);
      std::fill(m.hy.begin(), m.hy.end(), values[un + 1]);
      std::fill(m.hz.begin(), m.hz.end(), values[un + 2]);
      break;
    case ChainFamily::ising:
      m.jz = slice(0);
      m.hz = slice(1);
      break;
  }
  return p;
}

ChainParameters embed(const ChainParameters& params, ChainFamily target) {
  if (!embeds_into(params.family, target)) {
    throw ConfigError("cannot embed " + to_string(params.family) + " parameters into " + to_string(target));
  }
  return {target, params.model};
}

double chain_g(const ChainParameters& params, const TemperatureRange& range) {
  return g_measure(chain_spectrum(params.model), range);
}

ChainOptimizationResult optimize_chain(int n, const TemperatureRange& range, const ChainConstraint& constraint,
                                       const OptimizerConfig& cfg, std::span<const ChainParameters> seeds) {
  constraint.validate();
  cfg.validate();
  if (n < 2) throw DomainError("a periodic chain needs at least two sites");
  if (n > kMaxDenseSpins) throw CapacityError("chain too long for global search");

  std::vector<CouplingSign> signs;
  if (constraint.sign) {
    signs.push_back(*constraint.sign);
  } else {
    signs = {CouplingSign::ferromagnetic, CouplingSign::antiferromagnetic};
  }
  std::optional<ChainOptimizationResult> best;
  for (std::size_t k = 0; k < signs.size(); ++k) {
    OptimizerConfig run_cfg = cfg;
    run_cfg.seed = k == 0 ? cfg.seed : mix64(cfg.seed ^ 0xa5a5a5a5ULL);
    SignedRun run = run_sign(n, range, constraint, run_cfg, signs[k], seeds);
    run.result.seed = cfg.seed;
    if (!best || run.g < best->result.g_value) {
      best = ChainOptimizationResult{std::move(run.result), std::move(run.params), signs[k]};
    }
  }
  return *best;
}

double relative_gap_to_ideal(double chain_g_value, int n, const TemperatureRange& range, const OptimizerConfig& cfg,
                             const std::optional<EnergySpectrum>& chain_spectrum) {
  if (n < 1 || n > 16) throw CapacityError("ideal comparison needs 1 <= n <= 16");
  std::vector<EnergySpectrum> warm;
  if (chain_spectrum) warm.push_back(*chain_spectrum);
  const OptimizationResult ideal = optimize_levels(1 << n, range, cfg, warm);
  return chain_g_value / ideal.g_value - 1.0;
}

ChainParameters extend_chain(const ChainParameters& params, int n) {
  const XYZChain& m = params.model;
  m.validate();
  if (n < m.n) throw DomainError("extend_chain cannot shrink a chain");
  auto tile = [n, old = m.n](const std::vector<double>& a) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[i] = a[i % old];
    return out;
  };
  return {params.family, {n, tile(m.jx), tile(m.jy), tile(m.jz), tile(m.hx), tile(m.hy), tile(m.hz)}};
}

std::vector<TransferRung> transfer_from(const ChainParameters& start, int n_end, const TemperatureRange& range,
                                        const ChainConstraint& constraint, unsigned threads) {
  constraint.validate();
  start.model.validate();
  if (start.family != constraint.family) throw ConfigError("start parameters belong to a different family");
  if (n_end < start.model.n) throw DomainError("n_end must not be below the starting chain length");
  const CouplingSign sign = infer_sign(start, constraint);

  std::vector<TransferRung> ladder;
  ChainParameters current = start;
  for (int n = start.model.n; n <= n_end; ++n) {
    if (n > start.model.n) current = extend_chain(current, n);
    try {
      TransferRung rung = refine_rung(current, range, constraint, sign, threads);
      current = rung.parameters;
      ladder.push_back(std::move(rung));
    } catch (const std::exception& e) {
      TransferRung failed;
      failed.n = n;
      failed.parameters = current;
      failed.g_value = kInf;
      failed.note = e.what();
      ladder.push_back(std::move(failed));
      break;
    }
  }
  return ladder;
}

std::vector<TransferRung> transfer_optimize(int n_start, int n_end, const TemperatureRange& range,
                                            const ChainConstraint& constraint, const OptimizerConfig& cfg) {
  if (n_end < n_start) throw DomainError("n_end must not be below n_start");
  const ChainOptimizationResult first = optimize_chain(n_start, range, constraint, cfg);
  ChainConstraint fixed = constraint;
  fixed.sign = first.sign;
  return transfer_from(first.parameters, n_end, range, fixed, cfg.threads);
}

NoiseSweepResult noise_robustness(const ChainParameters& params, double t, std::span<const double> noise_levels,
                                  std::size_t trials, std::uint64_t seed, unsigned threads) {
  if (trials < 1) throw DomainError("noise sweep needs at least one trial");
  if (!(t > 0.0)) throw DomainError("temperature must be positive");
  const std::vector<double> base = free_parameters(params);
  const int n = params.model.n;

  NoiseSweepResult out;
  out.noise_levels.assign(noise_levels.begin(), noise_levels.end());
  out.trial_count = trials;
  out.noiseless_qfi = thermal_qfi(chain_eigenvalues(params.model), t);

  for (std::size_t level = 0; level < noise_levels.size(); ++level) {
    const double eps = noise_levels[level];
    if (!(eps >= 0.0)) throw DomainError("noise levels must be nonnegative");
    std::vector<double> qfi(trials);
    parallel_for(trials, threads, [&](std::size_t k) {
      Stream rng{seed, level, k};
      std::vector<double> v = base;
      for (double& x : v) x += eps * (2.0 * rng.uniform() - 1.0);
      qfi[k] = thermal_qfi(chain_eigenvalues(from_free_parameters(params.family, n, v).model), t);
    });
    double mean = 0.0;
    for (double q : qfi) mean += q;
    mean /= static_cast<double>(trials);
    double ss = 0.0;
    for (double q : qfi) ss += (q - mean) * (q - mean);
    const double sd = trials > 1 ? std::sqrt(ss / static_cast<double>(trials - 1)) : 0.0;
    out.mean_qfi.push_back(mean);
    out.std_error.push_back(sd / std::sqrt(static_cast<double>(trials)));
    out.min_qfi.push_back(*std::min_element(qfi.begin(), qfi.end()));
    out.max_qfi.push_back(*std::max_element(qfi.begin(), qfi.end()));
  }
  return out;
}

}  // namespace thermoprobe
