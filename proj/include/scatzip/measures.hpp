#pragma once

// Matrix-valued measures on the circle, the Caratheodory transform, and
// the Gram-Schmidt construction of orthonormal Laurent polynomials that
// recovers scattering blocks from a measure.

#include <optional>
#include <string>
#include <vector>

#include "scatzip/weyl.hpp"

namespace scatzip {

struct Atom {
  Complex xi;
  CMatrix weight;
};

struct MatrixMeasure {
  Eigen::Index L = 1;
  std::vector<Atom> atoms;

  CMatrix total_mass() const {
    CMatrix m = zeros(L, L);
    for (const auto& a : atoms) m += a.weight;
    return m;
  }

  void validate(double tol = 1e-9) const {
    for (const auto& a : atoms) {
      if (std::abs(std::abs(a.xi) - 1.0) > tol) throw Error(ErrorCode::OutsideDisc, "atom off the unit circle");
      if (a.weight.rows() != L || a.weight.cols() != L) throw Error(ErrorCode::DimensionMismatch, "atom weight size");
      if (hermitian_defect(a.weight) > tol) throw Error(ErrorCode::NotHermitian, "atom weight");
      if (hermitian_eigen(a.weight).values(0) < -tol) throw Error(ErrorCode::NotPSD, "atom weight");
    }
    if ((total_mass() - identity(L)).norm() > tol) throw Error(ErrorCode::NotPSD, "weights do not sum to the identity");
  }
};

/// Equal-weight quadrature of a density on the circle: M atoms at
/// exp(2 pi i (j + 1/2) / M) with weights density(theta) / M, rescaled so
/// the total mass is the identity.
template <typename Density>
MatrixMeasure quadrature_measure(Eigen::Index l, int m, Density&& density) {
  MatrixMeasure mu;
  mu.L = l;
  for (int j = 0; j < m; ++j) {
    const double theta = 2.0 * std::numbers::pi * (j + 0.5) / m;
    mu.atoms.push_back({std::polar(1.0, theta), CMatrix(density(theta)) / static_cast<double>(m)});
  }
  const CMatrix inv_sqrt = hermitian_inv_sqrt(mu.total_mass());
  for (auto& a : mu.atoms) a.weight = inv_sqrt * a.weight * inv_sqrt;
  return mu;
}

/// F(z) = i sum_j W_j (xi_j + z)/(xi_j - z).
inline CMatrix caratheodory(const MatrixMeasure& mu, Complex z) {
  require_in_disc(z);
  CMatrix f = zeros(mu.L, mu.L);
  for (const auto& a : mu.atoms) f += a.weight * ((a.xi + z) / (a.xi - z));
  return kI * f;
}

/// Spectral measure of pi_1 for U_N: atoms at the eigenvalues, weights
/// pi_1^* P_j pi_1.
inline MatrixMeasure spectral_measure(const CMatrix& u, Eigen::Index l, int cap = kDenseCap,
                                      double tol_cluster = kClusterTol) {
  if (u.rows() > cap) throw Error(ErrorCode::CapExceeded, "dense spectrum limited to dimension " + std::to_string(cap));
  const NormalEigen eig = normal_eigen(u);
  MatrixMeasure mu;
  mu.L = l;
  const std::size_t n = eig.values.size();
  std::size_t start = 0;
  while (start < n) {
    std::size_t stop = start + 1;
    while (stop < n && phase_0_2pi(eig.values[stop]) - phase_0_2pi(eig.values[stop - 1]) <= tol_cluster) ++stop;
    CMatrix w = zeros(l, l);
    Complex mean = 0.0;
    for (std::size_t j = start; j < stop; ++j) {
      const CVector top = eig.vectors.col(static_cast<Eigen::Index>(j)).head(l);
      w += top * top.adjoint();
      mean += eig.values[j] / std::abs(eig.values[j]);
    }
    mu.atoms.push_back({mean / std::abs(mean), 0.5 * (w + w.adjoint())});
    start = stop;
  }
  return mu;
}

inline MatrixMeasure spectral_measure_finite(const Zipper& zp, int cap = kDenseCap) {
  return spectral_measure(assemble_finite(zp).to_dense(), zp.L, cap);
}

/// Laurent polynomial with L x L coefficients on exponents [-m, m].
class MatrixLaurentPoly {
 public:
  MatrixLaurentPoly(Eigen::Index l, int m) : l_(l), m_(m), c_(static_cast<std::size_t>(2 * m + 1), zeros(l, l)) {}

  static MatrixLaurentPoly monomial(Eigen::Index l, int m, int k, const CMatrix& c) {
    MatrixLaurentPoly p(l, m);
    p.coeff(k) = c;
    return p;
  }

  Eigen::Index channels() const { return l_; }
  int range() const { return m_; }
  CMatrix& coeff(int k) { return c_.at(static_cast<std::size_t>(k + m_)); }
  const CMatrix& coeff(int k) const { return c_.at(static_cast<std::size_t>(k + m_)); }

  CMatrix operator()(Complex x) const {
    CMatrix v = zeros(l_, l_);
    for (int k = -m_; k <= m_; ++k)
      if (!coeff(k).isZero(0.0)) v += coeff(k) * std::pow(x, k);
    return v;
  }

  MatrixLaurentPoly& operator+=(const MatrixLaurentPoly& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  MatrixLaurentPoly& operator-=(const MatrixLaurentPoly& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  friend MatrixLaurentPoly operator+(MatrixLaurentPoly a, const MatrixLaurentPoly& b) { return a += b; }
  friend MatrixLaurentPoly operator-(MatrixLaurentPoly a, const MatrixLaurentPoly& b) { return a -= b; }

  /// Left multiplication by a constant matrix.
  friend MatrixLaurentPoly operator*(const CMatrix& a, const MatrixLaurentPoly& p) {
    MatrixLaurentPoly out(p.l_, p.m_);
    for (std::size_t i = 0; i < p.c_.size(); ++i) out.c_[i] = a * p.c_[i];
    return out;
  }

  /// Multiplication by z^s; coefficients shifted out of range must vanish.
  MatrixLaurentPoly shifted(int s) const {
    MatrixLaurentPoly out(l_, m_);
    for (int k = -m_; k <= m_; ++k) {
      if (coeff(k).isZero(0.0)) continue;
      if (k + s < -m_ || k + s > m_) throw Error(ErrorCode::SizeMismatch, "shift leaves the exponent range");
      out.coeff(k + s) = coeff(k);
    }
    return out;
  }

  /// Smallest and largest exponents whose coefficient exceeds tol.
  std::pair<int, int> support(double tol = 1e-12) const {
    int lo = m_ + 1, hi = -m_ - 1;
    for (int k = -m_; k <= m_; ++k) {
      if (coeff(k).norm() > tol) {
        lo = std::min(lo, k);
        hi = std::max(hi, k);
      }
    }
    return {lo, hi};
  }

 private:
  Eigen::Index l_;
  int m_;
  std::vector<CMatrix> c_;
};

/// <f, g> = sum_j g(xi_j) W_j f(xi_j)^*.
inline CMatrix inner_product(const MatrixLaurentPoly& f, const MatrixLaurentPoly& g, const MatrixMeasure& mu) {
  CMatrix s = zeros(mu.L, mu.L);
  for (const auto& a : mu.atoms) s += g(a.xi) * a.weight * f(a.xi).adjoint();
  return s;
}

inline double mu_norm(const MatrixLaurentPoly& f, const MatrixMeasure& mu) {
  return std::sqrt(std::max(0.0, op_norm(inner_product(f, f, mu))));
}

struct SzegoData {
  // Indexed by n; entries below 2 are unused.
  std::vector<CMatrix> alpha, rho, rho_tilde, u, v;
  CMatrix boundary_u;
  std::optional<CMatrix> terminal;  // <phi_N, psi_N> when both sequences stop at N
  int last = 1;                     // largest n with alpha_n available
};

struct GramSchmidtResult {
  std::vector<MatrixLaurentPoly> phi;  // phi[n - 1] = phi_n
  std::vector<MatrixLaurentPoly> psi;
  std::vector<CMatrix> kappa, kappa_tilde;  // leading coefficients, same indexing
  SzegoData data;
  int steps = 0;  // number of orthonormal elements produced in each family
  std::string stop_reason;
};

inline constexpr double kGramTol = 1e-10;

namespace detail {

inline int phi_exponent(int n) { return n % 2 == 0 ? -n / 2 : (n - 1) / 2; }
inline int psi_exponent(int n) { return n % 2 == 0 ? n / 2 : -(n - 1) / 2; }

/// Orthonormalizes b against family (two passes); returns nullopt when the
/// residual Gram matrix has an eigenvalue below tol.
inline std::optional<std::pair<MatrixLaurentPoly, CMatrix>> orthonormalize(
    MatrixLaurentPoly b, const std::vector<MatrixLaurentPoly>& family, const MatrixMeasure& mu, double tol) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : family) b -= inner_product(q, b, mu) * q;
  const CMatrix gram = inner_product(b, b, mu);
  const auto eig = hermitian_eigen(gram);
  if (eig.values(0) < tol) return std::nullopt;
  const CMatrix norm = hermitian_function(eig, [](double x) { return Complex(1.0 / std::sqrt(x)); });
  return std::make_pair(norm * b, norm);
}

}  // namespace detail

/// Gram-Schmidt in CMV order: phi from {1, z^-1, z, z^-2, ...}, psi from
/// {U, z, z^-1, z^2, ...}.  Each normalizer <r,r>^{-1/2} is Hermitian
/// positive definite, so the leading coefficients are too (except
/// kappa_tilde_1 = U).
inline GramSchmidtResult gram_schmidt(const MatrixMeasure& mu, const CMatrix& u, int n_max, double tol = kGramTol) {
  require_unitary(u, 1e-9, "boundary U");
  const Eigen::Index l = mu.L;
  const int m = n_max / 2 + 2;
  GramSchmidtResult out;
  out.data.boundary_u = u;

  for (int n = 1; n <= n_max + 1; ++n) {
    const auto phi_n = detail::orthonormalize(
        MatrixLaurentPoly::monomial(l, m, detail::phi_exponent(n), identity(l)), out.phi, mu, tol);
    std::optional<std::pair<MatrixLaurentPoly, CMatrix>> psi_n;
    if (n == 1) {
      const MatrixLaurentPoly b = MatrixLaurentPoly::monomial(l, m, 0, u);
      psi_n = std::make_pair(b, identity(l));
    } else {
      psi_n = detail::orthonormalize(MatrixLaurentPoly::monomial(l, m, detail::psi_exponent(n), identity(l)), out.psi,
                                     mu, tol);
    }
    if (!phi_n || !psi_n) {
      out.stop_reason = "Gram matrix degenerate at step " + std::to_string(n);
      break;
    }
    out.phi.push_back(phi_n->first);
    out.psi.push_back(psi_n->first);
    out.kappa.push_back(phi_n->second);
    out.kappa_tilde.push_back(n == 1 ? u : psi_n->second);
    out.steps = n;
    if (n == n_max + 1) out.stop_reason = "reached n_max";
  }

  SzegoData& d = out.data;
  const int steps = out.steps;
  const auto sz = static_cast<std::size_t>(steps + 2);
  d.alpha.assign(sz, CMatrix());
  d.rho.assign(sz, CMatrix());
  d.rho_tilde.assign(sz, CMatrix());
  d.u.assign(sz, CMatrix());
  d.v.assign(sz, CMatrix());
  const CMatrix one = identity(l);
  for (int n = 2; n <= steps; ++n) {
    const auto& phi = out.phi;
    const auto& psi = out.psi;
    CMatrix a;
    if (n % 2 == 1) {
      a = inner_product(phi[n - 2], psi[n - 2], mu);  // <phi_{n-1}, psi_{n-1}>
    } else {
      a = inner_product(phi[n - 2], psi[n - 2].shifted(-1), mu);  // <phi_{n-1}, z^{-1} psi_{n-1}>
    }
    d.alpha[n] = a;
    d.rho[n] = out.kappa_tilde[n - 2] * out.kappa[n - 1].inverse();
    d.rho_tilde[n] = out.kappa[n - 2] * out.kappa_tilde[n - 1].inverse();
    d.u[n] = hermitian_inv_sqrt(one - a * a.adjoint(), 1e-14) * d.rho[n];
    d.v[n] = d.rho_tilde[n].adjoint() * hermitian_inv_sqrt(one - a.adjoint() * a, 1e-14);
    d.last = n;
  }
  if (steps >= 2 && steps % 2 == 0 && steps <= n_max)
    d.terminal = inner_product(out.phi[steps - 1], out.psi[steps - 1], mu);
  return out;
}

/// Residual polynomials of the four recursion relations at index n:
/// odd n = 2k+1 uses the first pair, even n = 2k the second pair.
inline std::array<double, 2> recursion_residuals(const GramSchmidtResult& gs, const MatrixMeasure& mu, int n) {
  const auto& phi = gs.phi;
  const auto& psi = gs.psi;
  const auto& d = gs.data;
  const CMatrix& a = d.alpha[n];
  if (n % 2 == 1) {
    // psi_{n-1} - rho_n phi_n - alpha_n phi_{n-1};  phi_{n-1} - rho~_n psi_n - alpha_n^* psi_{n-1}
    const MatrixLaurentPoly r1 = psi[n - 2] - d.rho[n] * phi[n - 1] - a * phi[n - 2];
    const MatrixLaurentPoly r2 = phi[n - 2] - d.rho_tilde[n] * psi[n - 1] - CMatrix(a.adjoint()) * psi[n - 2];
    return {mu_norm(r1, mu), mu_norm(r2, mu)};
  }
  // z^{-1} psi_{n-1} - rho_n phi_n - alpha_n phi_{n-1};  z phi_{n-1} - rho~_n psi_n - alpha_n^* psi_{n-1}
  const MatrixLaurentPoly r3 = psi[n - 2].shifted(-1) - d.rho[n] * phi[n - 1] - a * phi[n - 2];
  const MatrixLaurentPoly r4 = phi[n - 2].shifted(1) - d.rho_tilde[n] * psi[n - 1] - CMatrix(a.adjoint()) * psi[n - 2];
  return {mu_norm(r3, mu), mu_norm(r4, mu)};
}

/// Largest deviation of the Gram matrices of both families from the identity.
inline double orthonormality_defect(const GramSchmidtResult& gs, const MatrixMeasure& mu) {
  double worst = 0.0;
  const Eigen::Index l = mu.L;
  for (std::size_t i = 0; i < gs.phi.size(); ++i)
    for (std::size_t j = 0; j < gs.phi.size(); ++j) {
      const CMatrix target = i == j ? identity(l) : zeros(l, l);
      worst = std::max(worst, (inner_product(gs.phi[i], gs.phi[j], mu) - target).norm());
      worst = std::max(worst, (inner_product(gs.psi[i], gs.psi[j], mu) - target).norm());
    }
  return worst;
}

/// Blocks S_n = S(alpha_n, U_n, V_n) recovered from the measure.  When the
/// recursion closes at an even N with a unitary terminal coefficient, that
/// coefficient is the right boundary and a finite zipper is returned;
/// otherwise a semi-infinite zipper holding the available blocks.
inline Zipper zipper_from_measure(const MatrixMeasure& mu, const CMatrix& u, int n_max, double tol = kGramTol) {
  const GramSchmidtResult gs = gram_schmidt(mu, u, n_max, tol);
  const SzegoData& d = gs.data;
  std::map<int, ScatteringBlock> blocks;
  for (int n = 2; n <= d.last; ++n) {
    const CMatrix un = polar_unitary(d.u[n]);
    const CMatrix vn = polar_unitary(d.v[n]);
    // Odd relations give psi = S phi directly.  Even ones give
    // psi = z S(alpha, U, V) phi, so the operator block is the adjoint
    // S(alpha, U, V)^* = S(alpha^*, V^*, U^*).
    if (n % 2 == 1)
      blocks.emplace(n, ScatteringBlock::build(d.alpha[n], un, vn, 1e-7));
    else
      blocks.emplace(n, ScatteringBlock::build(d.alpha[n].adjoint(), vn.adjoint(), un.adjoint(), 1e-7));
  }
  if (d.terminal && unitarity_defect(*d.terminal) < 1e-7 && d.last % 2 == 0)
    return make_finite(u, polar_unitary(*d.terminal), std::move(blocks));
  Zipper z;
  z.L = mu.L;
  z.N = d.last;
  z.flavor = Flavor::SemiInfinite;
  z.boundary_u = u;
  z.blocks = std::move(blocks);
  return z;
}

}  // namespace scatzip
