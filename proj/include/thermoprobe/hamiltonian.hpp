#ifndef THERMOPROBE_HAMILTONIAN_HPP
#define THERMOPROBE_HAMILTONIAN_HPP

#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "thermoprobe/thermal.hpp"

// Basis convention used throughout: configuration index b has spin s_i = +1
// (|0>, up) when bit (n-1-i) of b is 0, so site 0 is the most significant bit.

namespace thermoprobe {

/// Largest chain handled by dense diagonalization (dimension 2^12).
inline constexpr int kMaxDenseSpins = 12;
/// Largest system whose 2^n diagonal is materialized.
inline constexpr int kMaxDiagonalSpins = 24;
/// Largest inverse-design / rank problem.
inline constexpr int kMaxDesignSpins = 10;

/// Set of sites coupled by one sigma_z product. Ordered by cardinality, then
/// lexicographically by site tuple.
class Hyperedge {
 public:
  Hyperedge(std::vector<int> sites, int n_spins);

  const std::vector<int>& sites() const noexcept { return sites_; }
  std::size_t order() const noexcept { return sites_.size(); }
  /// Bitmask over configuration bits (site i -> bit n-1-i).
  unsigned long mask(int n_spins) const noexcept;

  std::strong_ordering operator<=>(const Hyperedge& other) const;
  bool operator==(const Hyperedge& other) const = default;

 private:
  std::vector<int> sites_;
};

/// All 2^n - 1 nonempty hyperedges in canonical order.
std::vector<Hyperedge> all_hyperedges(int n_spins);

/// Diagonal Hamiltonian sum_e J_e prod_{i in e} sigma_z^i.
struct GeneralizedIsing {
  int n = 0;
  std::map<Hyperedge, double> couplings;
};

/// Periodic chain: bond i couples sites (i, (i+1) mod n).
struct XYZChain {
  int n = 0;
  std::vector<double> jx, jy, jz;  // per bond
  std::vector<double> hx, hy, hz;  // per site

  void validate() const;
  /// True when only sigma_z terms are present, i.e. the Hamiltonian is diagonal.
  bool is_diagonal() const;
};

struct XXXChain {
  int n = 0;
  std::vector<double> j;           // per bond
  std::vector<double> hx, hy, hz;  // per site

  void validate() const;
  XYZChain as_xyz() const;
};

/// n/2 decoupled Heisenberg pairs (2k, 2k+1) with couplings j[k] > 0.
struct DimerChain {
  int n = 0;
  std::vector<double> j;

  void validate() const;
  /// Same Hamiltonian as an XXX chain with the dimer couplings on even bonds.
  XXXChain as_xxx() const;
};

using SpinModel = std::variant<GeneralizedIsing, XYZChain, XXXChain, DimerChain>;

/// Energy of every configuration b = 0 .. 2^n - 1 (unpinned).
std::vector<double> ising_energies(const GeneralizedIsing& model);
EnergySpectrum ising_spectrum(const GeneralizedIsing& model);

struct IsingDesign {
  GeneralizedIsing model;
  /// Constant subtracted from the target so that its levels sum to zero; the
  /// model reproduces target[b] - shift on configuration b.
  double shift = 0.0;
  /// Max |reconstructed - shifted target| over configurations.
  double max_error = 0.0;
};

/// Couplings whose configuration energies reproduce `target` (level k assigned
/// to configuration k) up to a global shift. Throws RankError when the
/// truncated system is singular and CapacityError past kMaxDesignSpins.
IsingDesign design_couplings(int n_spins, const EnergySpectrum& target);

/// Coefficient matrix: rows are configurations, columns the hyperedges in
/// canonical order, entries prod_{i in e} s_i.
Eigen::MatrixXd ising_coefficients(int n_spins);

/// Numerical rank (singular values above 1e-9 of the largest) of the
/// coefficient matrix with the all-down row removed.
long rank_check(int n_spins);

/// Dense Hamiltonian in the computational basis.
Eigen::MatrixXcd chain_hamiltonian(const XYZChain& model);

/// Unpinned eigenvalues in ascending order. Diagonal chains skip the dense
/// path and are limited by kMaxDiagonalSpins instead of kMaxDenseSpins.
std::vector<double> chain_eigenvalues(const XYZChain& model);

EnergySpectrum chain_spectrum(const XYZChain& model);
EnergySpectrum chain_spectrum(const XXXChain& model);
/// Closed form: each dimer contributes a singlet at -3J or a triplet at +J.
EnergySpectrum chain_spectrum(const DimerChain& model);
EnergySpectrum model_spectrum(const SpinModel& model);

}  // namespace thermoprobe

#endif  // THERMOPROBE_HAMILTONIAN_HPP
