#pragma once

// Dense complex small-matrix layer: Hermitian Jacobi eigensolver, square
// roots and polar factors, the fixed forms L / J / Cayley, and matrix
// Moebius actions.  Storage and elementary arithmetic come from Eigen.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scatzip/error.hpp"

namespace scatzip {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kDefaultTol = 1e-10;
inline constexpr Complex kI{0.0, 1.0};

inline CMatrix identity(Eigen::Index n) { return CMatrix::Identity(n, n); }
inline CMatrix zeros(Eigen::Index rows, Eigen::Index cols) { return CMatrix::Zero(rows, cols); }

// Block access for 2L x 2L matrices written as [[A, B], [C, D]].
inline Eigen::Index half(const CMatrix& t) { return t.rows() / 2; }
inline CMatrix block_a(const CMatrix& t) { return t.topLeftCorner(half(t), half(t)); }
inline CMatrix block_b(const CMatrix& t) { return t.topRightCorner(half(t), half(t)); }
inline CMatrix block_c(const CMatrix& t) { return t.bottomLeftCorner(half(t), half(t)); }
inline CMatrix block_d(const CMatrix& t) { return t.bottomRightCorner(half(t), half(t)); }

inline CMatrix from_blocks(const CMatrix& a, const CMatrix& b, const CMatrix& c, const CMatrix& d) {
  CMatrix t(a.rows() + c.rows(), a.cols() + b.cols());
  t << a, b, c, d;
  return t;
}

inline CMatrix stack(const CMatrix& top, const CMatrix& bottom) {
  CMatrix s(top.rows() + bottom.rows(), top.cols());
  s << top, bottom;
  return s;
}

inline CMatrix block_diag(const CMatrix& a, const CMatrix& d) {
  return from_blocks(a, zeros(a.rows(), d.cols()), zeros(d.rows(), a.cols()), d);
}

/// The signature-(L,L) form diag(1, -1).
inline CMatrix form_l(Eigen::Index l) { return block_diag(identity(l), -identity(l)); }

/// J = [[0, -1], [1, 0]].
inline CMatrix form_j(Eigen::Index l) {
  return from_blocks(zeros(l, l), -identity(l), identity(l), zeros(l, l));
}

/// The unitary Cayley matrix (1/sqrt 2) [[1, -i], [1, i]].
inline CMatrix cayley(Eigen::Index l) {
  const double r = 1.0 / std::numbers::sqrt2;
  return from_blocks(r * identity(l), -kI * r * identity(l), r * identity(l), kI * r * identity(l));
}

/// Phase of a nonzero complex number folded into [0, 2 pi).
inline double phase_0_2pi(Complex w) {
  double p = std::arg(w);
  if (p < 0.0) p += 2.0 * std::numbers::pi;
  if (p >= 2.0 * std::numbers::pi) p -= 2.0 * std::numbers::pi;
  return p;
}

struct HermitianEigen {
  Eigen::VectorXd values;  // ascending
  CMatrix vectors;         // columns are orthonormal eigenvectors
};

/// Cyclic Jacobi sweeps with complex plane rotations.  Input is symmetrized
/// before iterating.
inline HermitianEigen hermitian_eigen(const CMatrix& m, int max_sweeps = 80) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw Error(ErrorCode::DimensionMismatch, "hermitian_eigen needs a square matrix");
  CMatrix a = 0.5 * (m + m.adjoint());
  CMatrix v = identity(n);
  const double frob = a.norm();

  for (int sweep = 0; sweep < max_sweeps && frob > 0.0; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (std::sqrt(off) <= 1e-15 * frob) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Complex g = a(p, q);
        const double ag = std::abs(g);
        if (ag <= 1e-300 || ag <= 1e-18 * frob) continue;
        const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * ag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const Complex e = g / ag;

        // A <- A J, V <- V J with J = [[c, s e], [-s conj(e), c]] on (p, q).
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * std::conj(e) * akq;
          a(k, q) = s * e * akp + c * akq;
          const Complex vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * std::conj(e) * vkq;
          v(k, q) = s * e * vkp + c * vkq;
        }
        // A <- J^* A.
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * e * aqk;
          a(q, k) = s * std::conj(e) * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() < a(j, j).real(); });
  HermitianEigen out{Eigen::VectorXd(n), CMatrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]).real();
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

/// Singular values in descending order, read off the Hermitian dilation
/// [[0, A], [A^*, 0]] so that small singular values keep absolute accuracy.
inline Eigen::VectorXd singular_values(const CMatrix& a) {
  const Eigen::Index m = a.rows(), n = a.cols();
  CMatrix dil = zeros(m + n, m + n);
  dil.topRightCorner(m, n) = a;
  dil.bottomLeftCorner(n, m) = a.adjoint();
  const auto eig = hermitian_eigen(dil);
  const Eigen::Index k = std::min(m, n);
  Eigen::VectorXd sv(k);
  for (Eigen::Index i = 0; i < k; ++i) sv(i) = std::max(0.0, eig.values(m + n - 1 - i));
  return sv;
}

inline double smallest_singular_value(const CMatrix& a) {
  const auto sv = singular_values(a);
  return sv.size() == 0 ? 0.0 : sv(sv.size() - 1);
}

/// Operator (spectral) norm.
inline double op_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a)(0);
}

inline double hermitian_defect(const CMatrix& m) { return (m - m.adjoint()).norm(); }

inline double unitarity_defect(const CMatrix& u) {
  return op_norm(u.adjoint() * u - identity(u.cols()));
}

inline void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " must be a nonempty square matrix");
}

inline void require_unitary(const CMatrix& u, double tol, const char* what) {
  require_square(u, what);
  if (unitarity_defect(u) > tol) throw Error(ErrorCode::NotUnitary, std::string(what) + " is not unitary");
}

/// Applies f to the spectrum of a Hermitian matrix.
template <typename F>
CMatrix hermitian_function(const HermitianEigen& eig, F&& f) {
  Eigen::VectorXcd d(eig.values.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = f(eig.values(i));
  return eig.vectors * d.asDiagonal() * eig.vectors.adjoint();
}

/// Hermitian PSD square root; eigenvalues in [-tol, 0) are clamped to zero.
inline CMatrix hermitian_sqrt(const CMatrix& m, double tol = kDefaultTol) {
  require_square(m, "hermitian_sqrt argument");
  if (hermitian_defect(m) > tol) throw Error(ErrorCode::NotHermitian, "hermitian_sqrt argument");
  const auto eig = hermitian_eigen(m);
  if (eig.values(0) < -tol) throw Error(ErrorCode::NotPSD, "hermitian_sqrt argument has a negative eigenvalue");
  return hermitian_function(eig, [](double x) { return Complex(std::sqrt(std::max(x, 0.0))); });
}

/// Inverse square root of a Hermitian positive-definite matrix.
inline CMatrix hermitian_inv_sqrt(const CMatrix& m, double tol = kDefaultTol) {
  require_square(m, "hermitian_inv_sqrt argument");
  if (hermitian_defect(m) > tol) throw Error(ErrorCode::NotHermitian, "hermitian_inv_sqrt argument");
  const auto eig = hermitian_eigen(m);
  if (eig.values(0) <= tol) throw Error(ErrorCode::Singular, "hermitian_inv_sqrt argument is not positive definite");
  return hermitian_function(eig, [](double x) { return Complex(1.0 / std::sqrt(x)); });
}

/// Unitary polar factor (A A^*)^{-1/2} A, computed by scaled Newton
/// iteration X <- (z X + X^{-*} / z) / 2.
inline CMatrix polar_unitary(const CMatrix& a, double tol = kDefaultTol) {
  require_square(a, "polar_unitary argument");
  if (smallest_singular_value(a) <= tol) throw Error(ErrorCode::Singular, "polar_unitary argument is singular");
  CMatrix x = a;
  for (int it = 0; it < 100; ++it) {
    const CMatrix xinv = x.partialPivLu().inverse();
    const double zeta = std::sqrt(xinv.norm() / x.norm());
    const CMatrix next = 0.5 * (zeta * x + xinv.adjoint() / zeta);
    const double change = (next - x).norm();
    x = next;
    if (change <= 1e-15 * std::sqrt(static_cast<double>(a.rows()))) break;
  }
  // One unscaled step polishes the unitary to working precision.
  x = 0.5 * (x + x.partialPivLu().inverse().adjoint());
  return x;
}

/// Inverse with an explicit singular-value guard.
inline CMatrix checked_inverse(const CMatrix& m, double tol, ErrorCode code, const char* what) {
  require_square(m, what);
  if (smallest_singular_value(m) <= tol) throw Error(code, std::string(what) + " is not invertible");
  return m.partialPivLu().inverse();
}

/// Left Moebius action T . Z = (A Z + B)(C Z + D)^{-1}.
inline CMatrix mobius(const CMatrix& t, const CMatrix& z, double tol = kDefaultTol) {
  if (t.rows() != t.cols() || t.rows() != 2 * z.rows() || z.rows() != z.cols())
    throw Error(ErrorCode::DimensionMismatch, "mobius expects a 2L x 2L matrix and an L x L matrix");
  const CMatrix num = block_a(t) * z + block_b(t);
  const CMatrix den = block_c(t) * z + block_d(t);
  return num * checked_inverse(den, tol, ErrorCode::SingularDenominator, "C Z + D");
}

/// Right action W : T = (W C - A)^{-1}(B - W D).
inline CMatrix mobius_inverse(const CMatrix& w, const CMatrix& t, double tol = kDefaultTol) {
  if (t.rows() != t.cols() || t.rows() != 2 * w.rows() || w.rows() != w.cols())
    throw Error(ErrorCode::DimensionMismatch, "mobius_inverse expects an L x L matrix and a 2L x 2L matrix");
  const CMatrix den = w * block_c(t) - block_a(t);
  return checked_inverse(den, tol, ErrorCode::SingularDenominator, "W C - A") * (block_b(t) - w * block_d(t));
}

/// Siegel disc membership: largest eigenvalue of Z^* Z below 1 - tol
/// (strict) or at most 1 + tol (closed).
inline bool in_siegel_disc(const CMatrix& z, bool strict = true, double tol = kDefaultTol) {
  require_square(z, "in_siegel_disc argument");
  const double s = op_norm(z);
  return strict ? s * s < 1.0 - tol : s * s <= 1.0 + tol;
}

/// Matrix upper half-plane: i (Z^* - Z) positive definite.
inline bool in_upper_half_plane(const CMatrix& z, double tol = kDefaultTol) {
  require_square(z, "in_upper_half_plane argument");
  const CMatrix im = kI * (z.adjoint() - z);
  return hermitian_eigen(im).values(0) > tol;
}

struct NormalEigen {
  std::vector<Complex> values;  // sorted by phase in [0, 2 pi)
  CMatrix vectors;
};

/// Eigen-decomposition of a normal matrix (in practice a unitary) through
/// its commuting Hermitian parts H = (M + M^*)/2, K = (M - M^*)/2i.  A
/// generic real combination H + c K is diagonalized first; clusters that
/// collide under that projection are re-split with a second combination.
inline NormalEigen normal_eigen(const CMatrix& m) {
  require_square(m, "normal_eigen argument");
  const Eigen::Index n = m.rows();
  const CMatrix h = 0.5 * (m + m.adjoint());
  const CMatrix k = (m - m.adjoint()) / (2.0 * kI);
  constexpr double kMix1 = 0.6180339887498949;
  constexpr double kMix2 = -1.4142135623730951;

  const auto first = hermitian_eigen(h + kMix1 * k);
  CMatrix vecs = first.vectors;
  const double scale = std::max(1.0, first.values.cwiseAbs().maxCoeff());
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index stop = start + 1;
    while (stop < n && first.values(stop) - first.values(stop - 1) < 1e-6 * scale) ++stop;
    if (stop - start > 1) {
      const CMatrix basis = vecs.middleCols(start, stop - start);
      const CMatrix restricted = basis.adjoint() * (h + kMix2 * k) * basis;
      vecs.middleCols(start, stop - start) = basis * hermitian_eigen(restricted).vectors;
    }
    start = stop;
  }

  NormalEigen out;
  out.values.resize(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const CVector vj = vecs.col(j);
    const double hj = (vj.adjoint() * h * vj)(0, 0).real();
    const double kj = (vj.adjoint() * k * vj)(0, 0).real();
    out.values[static_cast<std::size_t>(j)] = Complex(hj, kj);
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return phase_0_2pi(out.values[static_cast<std::size_t>(i)]) < phase_0_2pi(out.values[static_cast<std::size_t>(j)]);
  });
  NormalEigen sorted;
  sorted.vectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    sorted.values.push_back(out.values[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])]);
    sorted.vectors.col(j) = vecs.col(order[static_cast<std::size_t>(j)]);
  }
  return sorted;
}

/// Eigenphases of a unitary in [0, 2 pi), ascending.
inline std::vector<double> eigenphases(const CMatrix& u) {
  const auto eig = normal_eigen(u);
  std::vector<double> p;
  p.reserve(eig.values.size());
  for (const auto& v : eig.values) p.push_back(phase_0_2pi(v));
  std::sort(p.begin(), p.end());
  return p;
}

/// Column-orthonormalizes a full-rank frame: frame = q r with q^* q = 1.
struct ThinQr {
  CMatrix q;
  CMatrix r;
};

inline ThinQr thin_qr(const CMatrix& frame) {
  Eigen::HouseholderQR<CMatrix> qr(frame);
  ThinQr out;
  out.q = qr.householderQ() * CMatrix::Identity(frame.rows(), frame.cols());
  out.r = out.q.adjoint() * frame;
  return out;
}

/// Cosines of the principal angles between the column spans of two frames,
/// descending.
inline Eigen::VectorXd principal_cosines(const CMatrix& x, const CMatrix& y) {
  const CMatrix qx = thin_qr(x).q;
  const CMatrix qy = thin_qr(y).q;
  return singular_values(qx.adjoint() * qy);
}

}  // namespace scatzip
