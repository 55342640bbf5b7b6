#include "thermoprobe/hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "thermoprobe/errors.hpp"

namespace thermoprobe {

namespace {

void require_spins(int n, int cap, const char* what) {
  if (n < 1) throw DomainError(std::string(what) + ": spin count must be positive");
  if (n > cap) {
    throw CapacityError(std::string(what) + ": " + std::to_string(n) + " spins exceeds the limit of " +
                        std::to_string(cap));
  }
}

void require_length(const std::vector<double>& v, int n, const char* name) {
  if (v.size() != static_cast<std::size_t>(n)) {
    throw DomainError(std::string("parameter array ") + name + " must have one entry per site/bond");
  }
}

// Spin value of site i in configuration b.
inline int spin(unsigned long b, int i, int n) { return ((b >> (n - 1 - i)) & 1UL) ? -1 : 1; }
inline unsigned long site_bit(int i, int n) { return 1UL << (n - 1 - i); }

bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

std::vector<double> diagonal_energies(const XYZChain& m) {
  const unsigned long dim = 1UL << m.n;
  std::vector<double> e(dim, 0.0);
  for (unsigned long b = 0; b < dim; ++b) {
    double sum = 0.0;
    for (int i = 0; i < m.n; ++i) {
      const int si = spin(b, i, m.n);
      sum += m.hz[i] * si + m.jz[i] * si * spin(b, (i + 1) % m.n, m.n);
    }
    e[b] = sum;
  }
  return e;
}

}  // namespace

Hyperedge::Hyperedge(std::vector<int> sites, int n_spins) : sites_(std::move(sites)) {
  if (sites_.empty()) throw DomainError("hyperedge must contain at least one site");
  for (std::size_t k = 0; k < sites_.size(); ++k) {
    if (sites_[k] < 0 || sites_[k] >= n_spins) throw DomainError("hyperedge site index out of range");
    if (k > 0 && sites_[k] <= sites_[k - 1]) throw DomainError("hyperedge sites must be strictly increasing");
  }
}

unsigned long Hyperedge::mask(int n_spins) const noexcept {
  unsigned long m = 0;
  for (int i : sites_) m |= site_bit(i, n_spins);
  return m;
}

std::strong_ordering Hyperedge::operator<=>(const Hyperedge& other) const {
  if (auto c = sites_.size() <=> other.sites_.size(); c != 0) return c;
  return sites_ <=> other.sites_;
}

std::vector<Hyperedge> all_hyperedges(int n_spins) {
  require_spins(n_spins, kMaxDiagonalSpins, "all_hyperedges");
  std::vector<Hyperedge> edges;
  edges.reserve((1UL << n_spins) - 1);
  for (int k = 1; k <= n_spins; ++k) {
    // Lexicographic k-subsets of {0..n-1}.
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      edges.emplace_back(idx, n_spins);
      int pos = k - 1;
      while (pos >= 0 && idx[pos] == n_spins - k + pos) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (int i = pos + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
    }
  }
  return edges;
}

std::vector<double> ising_energies(const GeneralizedIsing& model) {
  require_spins(model.n, kMaxDiagonalSpins, "ising_energies");
  const unsigned long dim = 1UL << model.n;
  std::vector<std::pair<unsigned long, double>> terms;
  for (const auto& [edge, j] : model.couplings) {
    if (edge.sites().back() >= model.n) throw DomainError("hyperedge refers to a site outside the model");
    terms.emplace_back(edge.mask(model.n), j);
  }
  std::vector<double> e(dim, 0.0);
  for (unsigned long b = 0; b < dim; ++b) {
    double sum = 0.0;
    for (const auto& [mask, j] : terms) sum += (std::popcount(b & mask) & 1) ? -j : j;
    e[b] = sum;
  }
  return e;
}

EnergySpectrum ising_spectrum(const GeneralizedIsing& model) { return EnergySpectrum::pinned(ising_energies(model)); }

Eigen::MatrixXd ising_coefficients(int n_spins) {
  require_spins(n_spins, kMaxDesignSpins, "ising_coefficients");
  const auto edges = all_hyperedges(n_spins);
  const auto dim = static_cast<Eigen::Index>(1UL << n_spins);
  Eigen::MatrixXd a(dim, static_cast<Eigen::Index>(edges.size()));
  for (std::size_t c = 0; c < edges.size(); ++c) {
    const unsigned long mask = edges[c].mask(n_spins);
    for (Eigen::Index b = 0; b < dim; ++b) {
      a(b, static_cast<Eigen::Index>(c)) = (std::popcount(static_cast<unsigned long>(b) & mask) & 1) ? -1.0 : 1.0;
    }
  }
  return a;
}

long rank_check(int n_spins) {
  const Eigen::MatrixXd a = ising_coefficients(n_spins);
  const Eigen::MatrixXd truncated = a.topRows(a.rows() - 1);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(truncated);
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-9 * sv.maxCoeff();
  return static_cast<long>((sv.array() > cutoff).count());
}

IsingDesign design_couplings(int n_spins, const EnergySpectrum& target) {
  require_spins(n_spins, kMaxDesignSpins, "design_couplings");
  const std::size_t dim = 1UL << n_spins;
  if (target.size() != dim) throw DomainError("target spectrum must have exactly 2^n levels");

  IsingDesign design;
  double sum = 0.0;
  for (double e : target.levels()) sum += e;
  design.shift = sum / static_cast<double>(dim);

  // Every sigma_z product is traceless, so the shifted target sums to zero and
  // the all-down energy is minus the sum of the others: drop that row.
  const Eigen::MatrixXd a = ising_coefficients(n_spins);
  const auto rows = static_cast<Eigen::Index>(dim - 1);
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index b = 0; b < rows; ++b) rhs[b] = target[static_cast<std::size_t>(b)] - design.shift;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.topRows(rows));
  qr.setThreshold(1e-9);
  if (qr.rank() < rows) {
    throw RankError("inverse Ising system is rank deficient: rank " + std::to_string(qr.rank()) + " < " +
                        std::to_string(rows),
                    qr.rank());
  }
  const Eigen::VectorXd j = qr.solve(rhs);

  design.model.n = n_spins;
  const auto edges = all_hyperedges(n_spins);
  for (std::size_t c = 0; c < edges.size(); ++c) design.model.couplings.emplace(edges[c], j[static_cast<Eigen::Index>(c)]);

  const std::vector<double> rebuilt = ising_energies(design.model);
  double scale = 0.0;
  for (std::size_t b = 0; b < dim; ++b) {
    design.max_error = std::max(design.max_error, std::abs(rebuilt[b] - (target[b] - design.shift)));
    scale = std::max(scale, std::abs(target[b]));
  }
  if (design.max_error > 1e-9 * std::max(scale, 1.0)) {
    throw std::runtime_error("inverse Ising design failed its round-trip check");
  }
  return design;
}

void XYZChain::validate() const {
  if (n < 2) throw DomainError("a periodic chain needs at least two sites");
  for (const auto* v : {&jx, &jy, &jz, &hx, &hy, &hz}) require_length(*v, n, "xyz");
  for (const auto* v : {&jx, &jy, &jz, &hx, &hy, &hz}) {
    for (double x : *v) {
      if (!std::isfinite(x)) throw DomainError("chain parameters must be finite");
    }
  }
}

bool XYZChain::is_diagonal() const { return all_zero(jx) && all_zero(jy) && all_zero(hx) && all_zero(hy); }

void XXXChain::validate() const {
  if (n < 2) throw DomainError("a periodic chain needs at least two sites");
  for (const auto* v : {&j, &hx, &hy, &hz}) require_length(*v, n, "xxx");
}

XYZChain XXXChain::as_xyz() const {
  validate();
  return {n, j, j, j, hx, hy, hz};
}

void DimerChain::validate() const {
  if (n < 2 || n % 2 != 0) throw DomainError("a dimer chain needs an even number of sites");
  if (j.size() != static_cast<std::size_t>(n / 2)) throw DomainError("a dimer chain needs n/2 couplings");
  for (double x : j) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("dimer couplings must be positive");
  }
}

XXXChain DimerChain::as_xxx() const {
  validate();
  XXXChain c{n, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
             std::vector<double>(n, 0.0)};
  for (int k = 0; k < n / 2; ++k) c.j[2 * k] = j[k];
  return c;
}

Eigen::MatrixXcd chain_hamiltonian(const XYZChain& m) {
  m.validate();
  require_spins(m.n, kMaxDenseSpins, "chain_hamiltonian");
  const unsigned long dim = 1UL << m.n;
  using cd = std::complex<double>;
  const cd i_unit(0.0, 1.0);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (unsigned long b = 0; b < dim; ++b) {
    const auto col = static_cast<Eigen::Index>(b);
    double diag = 0.0;
    for (int i = 0; i < m.n; ++i) {
      const int k = (i + 1) % m.n;
      const int si = spin(b, i, m.n);
      const int sk = spin(b, k, m.n);
      diag += m.hz[i] * si + m.jz[i] * si * sk;

      const auto flip_i = static_cast<Eigen::Index>(b ^ site_bit(i, m.n));
      h(flip_i, col) += m.hx[i];
      // sigma_y|up> = i|down>, sigma_y|down> = -i|up>
      h(flip_i, col) += m.hy[i] * (si > 0 ? i_unit : -i_unit);

      const auto flip_ik = static_cast<Eigen::Index>(b ^ site_bit(i, m.n) ^ site_bit(k, m.n));
      if (k != i) {
        h(flip_ik, col) += m.jx[i];
        h(flip_ik, col) += m.jy[i] * (si == sk ? -1.0 : 1.0);
      } else {
        diag += m.jx[i] + m.jy[i];  // sigma_a sigma_a = 1 on a single site
      }
    }
    h(col, col) += diag;
  }
  return h;
}

std::vector<double> chain_eigenvalues(const XYZChain& m) {
  m.validate();
  if (m.is_diagonal()) {
    require_spins(m.n, kMaxDiagonalSpins, "chain_eigenvalues");
    std::vector<double> e = diagonal_energies(m);
    std::sort(e.begin(), e.end());
    return e;
  }
  require_spins(m.n, kMaxDenseSpins, "chain_eigenvalues");
  const Eigen::MatrixXcd h = chain_hamiltonian(m);
  Eigen::VectorXd ev;
  if (all_zero(m.hy)) {
    // Without sigma_y fields every entry is real (sigma_y sigma_y is real).
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.real(), Eigen::EigenvaluesOnly);
    ev = solver.eigenvalues();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    ev = solver.eigenvalues();
  }
  return {ev.data(), ev.data() + ev.size()};
}

EnergySpectrum chain_spectrum(const XYZChain& model) { return EnergySpectrum::pinned(chain_eigenvalues(model)); }

EnergySpectrum chain_spectrum(const XXXChain& model) { return chain_spectrum(model.as_xyz()); }

EnergySpectrum chain_spectrum(const DimerChain& model) {
  model.validate();
  require_spins(model.n, kMaxDiagonalSpins, "chain_spectrum");
  const int dimers = model.n / 2;
  std::vector<double> levels;
  levels.reserve(1UL << model.n);
  for (unsigned long choice = 0; choice < (1UL << dimers); ++choice) {
    double e = 0.0;
    std::size_t multiplicity = 1;
    for (int k = 0; k < dimers; ++k) {
      if ((choice >> k) & 1UL) {
        e += model.j[k];
        multiplicity *= 3;
      } else {
        e -= 3.0 * model.j[k];
      }
    }
    levels.insert(levels.end(), multiplicity, e);
  }
  return EnergySpectrum::pinned(std::move(levels));
}

EnergySpectrum model_spectrum(const SpinModel& model) {
  return std::visit(
      [](const auto& m) -> EnergySpectrum {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, GeneralizedIsing>) {
          return ising_spectrum(m);
        } else {
          return chain_spectrum(m);
        }
      },
      model);
}

}  // namespace thermoprobe
