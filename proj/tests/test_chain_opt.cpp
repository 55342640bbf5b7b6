#include <doctest.h>

#include <cmath>

#include "thermoprobe/chain_opt.hpp"
#include "thermoprobe/errors.hpp"
#include "thermoprobe/random.hpp"

using namespace thermoprobe;

namespace {

OptimizerConfig small_config(std::uint64_t seed) {
  OptimizerConfig cfg;
  cfg.population = 40;
  cfg.max_generations = 150;
  cfg.seed = seed;
  return cfg;
}

std::vector<double> random_values(Stream& rng, std::size_t count) {
  std::vector<double> v(count);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

}  // namespace

TEST_CASE("free parameter counts") {
  CHECK(free_parameter_count(ChainFamily::xyz, 4) == 24);
  CHECK(free_parameter_count(ChainFamily::xxx, 4) == 16);
  CHECK(free_parameter_count(ChainFamily::xxx_homogeneous, 4) == 7);
  CHECK(free_parameter_count(ChainFamily::ising, 4) == 8);
}

TEST_CASE("free parameters round trip for every family") {
  Stream rng{3};
  for (ChainFamily f : {ChainFamily::xyz, ChainFamily::xxx, ChainFamily::xxx_homogeneous, ChainFamily::ising}) {
    for (int n : {2, 3, 5}) {
      const std::vector<double> v = random_values(rng, free_parameter_count(f, n));
      const ChainParameters p = from_free_parameters(f, n, v);
      CHECK(p.model.n == n);
      CHECK(free_parameters(p) == v);
    }
  }
  CHECK_THROWS(from_free_parameters(ChainFamily::ising, 3, std::vector<double>(5, 0.0)));
}

TEST_CASE("family names parse back") {
  for (ChainFamily f : {ChainFamily::xyz, ChainFamily::xxx, ChainFamily::xxx_homogeneous, ChainFamily::ising}) {
    CHECK(parse_family(to_string(f)) == f);
  }
  CHECK(parse_sign(to_string(CouplingSign::antiferromagnetic)) == CouplingSign::antiferromagnetic);
  CHECK_THROWS_AS(parse_family("heisenberg"), ConfigError);
}

TEST_CASE("embedding preserves the Hamiltonian") {
  Stream rng{4};
  const ChainParameters hom =
      from_free_parameters(ChainFamily::xxx_homogeneous, 4, random_values(rng, free_parameter_count(ChainFamily::xxx_homogeneous, 4)));
  const ChainParameters as_xxx = embed(hom, ChainFamily::xxx);
  const ChainParameters as_xyz = embed(hom, ChainFamily::xyz);
  CHECK(as_xxx.family == ChainFamily::xxx);
  const std::vector<double> a = chain_spectrum(hom.model).values();
  const std::vector<double> b = chain_spectrum(as_xyz.model).values();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  CHECK(chain_spectrum(as_xxx.model).values() == chain_spectrum(as_xyz.model).values());

  const ChainParameters ising =
      from_free_parameters(ChainFamily::ising, 3, random_values(rng, free_parameter_count(ChainFamily::ising, 3)));
  CHECK(embed(ising, ChainFamily::xyz).model.is_diagonal());
  CHECK_THROWS_AS(embed(ising, ChainFamily::xxx), ConfigError);
  CHECK_THROWS_AS(embed(as_xyz, ChainFamily::xxx), ConfigError);
}

TEST_CASE("periodic extension tiles every array") {
  Stream rng{5};
  const ChainParameters p = from_free_parameters(ChainFamily::xyz, 2, random_values(rng, 12));
  const ChainParameters q = extend_chain(p, 5);
  CHECK(q.model.n == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(q.model.jx[i] == p.model.jx[i % 2]);
    CHECK(q.model.hz[i] == p.model.hz[i % 2]);
  }
  CHECK_THROWS_AS(extend_chain(p, 1), DomainError);
}

TEST_CASE("optimized chain respects its constraints and reports a reproducible G") {
  const TemperatureRange range = TemperatureRange::from_harmonic_mean(1.0, 2.0);
  ChainConstraint c;
  c.family = ChainFamily::xxx;
  c.sign = CouplingSign::ferromagnetic;
  c.coupling_cap = 5.0;
  c.field_cap = 5.0;
  const ChainOptimizationResult r = optimize_chain(2, range, c, small_config(11));
  CHECK(r.sign == CouplingSign::ferromagnetic);
  const XYZChain& m = r.parameters.model;
  for (int i = 0; i < 2; ++i) {
    CHECK(m.jx[i] <= 0.0);
    CHECK(m.jx[i] >= -5.0);
    CHECK(m.jx[i] == m.jy[i]);
    CHECK(m.jx[i] == m.jz[i]);
    CHECK(std::abs(m.hx[i]) <= 5.0);
  }
  CHECK(chain_g(r.parameters, range) == doctest::Approx(r.result.g_value).epsilon(1e-10));
  CHECK(std::isfinite(r.result.g_value));
}

TEST_CASE("chain search is deterministic and thread independent") {
  const TemperatureRange range = TemperatureRange::from_harmonic_mean(1.0, 3.0);
  ChainConstraint c;
  c.family = ChainFamily::ising;
  OptimizerConfig a = small_config(21);
  OptimizerConfig b = a;
  a.threads = 1;
  b.threads = 4;
  const ChainOptimizationResult ra = optimize_chain(3, range, c, a);
  const ChainOptimizationResult rb = optimize_chain(3, range, c, b);
  CHECK(ra.result.g_value == rb.result.g_value);
  CHECK(free_parameters(ra.parameters) == free_parameters(rb.parameters));
}

TEST_CASE("seeded search never loses to its seed") {
  const TemperatureRange range = TemperatureRange::from_harmonic_mean(1.0, 2.0);
  ChainConstraint c;
  c.family = ChainFamily::ising;
  c.sign = CouplingSign::antiferromagnetic;
  const ChainParameters seed = from_free_parameters(ChainFamily::ising, 3, std::vector<double>{1.2, 1.2, 1.2, 0.5, -0.5, 0.5});
  OptimizerConfig cfg = small_config(7);
  cfg.max_generations = 5;
  cfg.polish = false;
  const ChainOptimizationResult r = optimize_chain(3, range, c, cfg, std::span<const ChainParameters>(&seed, 1));
  CHECK(r.result.g_value <= chain_g(seed, range));
}

TEST_CASE("two-spin ising optimum matches the best two-cluster level design") {
  // Two spins realize {0, a, b, c} freely up to a sum rule, so the chain
  // family cannot beat the unconstrained optimum and should come close.
  const TemperatureRange range = TemperatureRange::from_harmonic_mean(1.0, 1.5);
  ChainConstraint c;
  c.family = ChainFamily::ising;
  OptimizerConfig cfg = small_config(9);
  cfg.population = 60;
  cfg.max_generations = 400;
  const ChainOptimizationResult r = optimize_chain(2, range, c, cfg);
  const double gap = relative_gap_to_ideal(r.result.g_value, 2, range, cfg, r.result.spectrum);
  CHECK(gap >= -1e-9);
  CHECK(gap < 0.5);
}

TEST_CASE("transfer ladder refines without increasing G at the start size") {
  const TemperatureRange range = TemperatureRange::from_harmonic_mean(1.0, 2.0);
  ChainConstraint c;
  c.family = ChainFamily::ising;
  c.sign = CouplingSign::ferromagnetic;
  const ChainParameters start =
      from_free_parameters(ChainFamily::ising, 2, std::vector<double>{-1.0, -1.0, 0.3, 0.3});
  const std::vector<TransferRung> rungs = transfer_from(start, 4, range, c);
  REQUIRE(rungs.size() == 3);
  CHECK(rungs[0].n == 2);
  CHECK(rungs[0].g_value <= chain_g(start, range));
  for (const TransferRung& rung : rungs) {
    CHECK(rung.note.empty());
    CHECK(rung.ising_subspace);
    CHECK(rung.parameters.model.n == rung.n);
    CHECK(std::isfinite(rung.g_value));
    for (double j : rung.parameters.model.jz) CHECK(j <= 0.0);
  }
  CHECK(rungs[2].n == 4);
}

TEST_CASE("noise sweep at zero amplitude reproduces the noiseless QFI") {
  const ChainParameters p = from_free_parameters(ChainFamily::xxx_homogeneous, 4,
                                                 std::vector<double>{1.6, 0.0, 1.6, 0.0, 0.0, 0.0, 0.2});
  const std::vector<double> levels{0.0, 0.05, 0.2};
  const NoiseSweepResult a = noise_robustness(p, 1.0, levels, 12, 99, 1);
  const NoiseSweepResult b = noise_robustness(p, 1.0, levels, 12, 99, 3);
  CHECK(a.trial_count == 12);
  CHECK(a.mean_qfi[0] == doctest::Approx(a.noiseless_qfi).epsilon(1e-12));
  CHECK(a.std_error[0] == doctest::Approx(0.0).scale(1e-12));
  CHECK(a.noiseless_qfi == doctest::Approx(thermal_qfi(chain_spectrum(p.model), 1.0)).epsilon(1e-14));
  CHECK(a.mean_qfi == b.mean_qfi);
  CHECK(a.std_error == b.std_error);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    CHECK(a.min_qfi[i] <= a.mean_qfi[i]);
    CHECK(a.mean_qfi[i] <= a.max_qfi[i]);
  }
}

TEST_CASE("invalid requests are rejected") {
  const TemperatureRange range = TemperatureRange::from_harmonic_mean(1.0, 2.0);
  ChainConstraint c;
  c.coupling_cap = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ChainConstraint{};
  CHECK_THROWS_AS(optimize_chain(13, range, c, small_config(1)), CapacityError);
  CHECK_THROWS_AS(relative_gap_to_ideal(1.0, 17, range, small_config(1)), CapacityError);
}
