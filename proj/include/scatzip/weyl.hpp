#pragma once

// Boundary resolvent data E, F, G at site 1, the radial and central
// operators of the Weyl disc, and the semi-infinite limit of F.

#include <cmath>
#include <limits>

#include "scatzip/transfer.hpp"

namespace scatzip {

inline void require_in_disc(Complex z) {
  if (!(std::abs(z) < 1.0)) throw Error(ErrorCode::OutsideDisc, "z must lie in the open unit disc");
}

/// E = T(N,0)^{-1} . V^*, evaluated as T_1^{-1} . (T_2^{-1} . ( ... T_N^{-1} . V^*)).
/// Every intermediate stays in the closed Siegel disc.
inline CMatrix e_matrix(const Zipper& zp, Complex z, const CMatrix& v) {
  require_nonzero(z);
  require_in_disc(z);
  require_unitary(v, kDefaultTol, "boundary V");
  CMatrix w = v.adjoint();
  for (int n = zp.N; n >= 1; --n) w = mobius(zipper_transfer_inverse(zp, n, z), w);
  return w;
}

inline CMatrix e_matrix(const Zipper& zp, Complex z) { return e_matrix(zp, z, zp.boundary_v); }

/// (C - V A)^{-1} (V B - D) with A, B, C, D the blocks of the raw product T(N,0).
inline CMatrix e_matrix_closed(const Zipper& zp, Complex z, const CMatrix& v) {
  require_nonzero(z);
  const CMatrix t = transfer_product(zp, z, zp.N);
  const CMatrix den = block_c(t) - v * block_a(t);
  return checked_inverse(den, 1e-14 * std::max(1.0, op_norm(t)), ErrorCode::SingularDenominator, "C - V A") *
         (v * block_b(t) - block_d(t));
}

/// V^* : T(N,0), the right action on the raw product.
inline CMatrix e_matrix_forward(const Zipper& zp, Complex z, const CMatrix& v) {
  require_nonzero(z);
  return mobius_inverse(v.adjoint(), transfer_product(zp, z, zp.N), 1e-14);
}

inline CMatrix f_from_e(const CMatrix& e) {
  const CMatrix one = identity(e.rows());
  return -kI * (e + one) * checked_inverse(e - one, 1e-14, ErrorCode::SingularDenominator, "E - 1");
}

inline CMatrix g_from_e(const CMatrix& e, Complex z) {
  const CMatrix one = identity(e.rows());
  return e * checked_inverse(one - e, 1e-14, ErrorCode::SingularDenominator, "1 - E") / z;
}

/// F = (1/i)(E + 1)(E - 1)^{-1}; exactly i at z = 0.
inline CMatrix f_matrix(const Zipper& zp, Complex z, const CMatrix& v) {
  require_in_disc(z);
  if (z == Complex(0.0, 0.0)) return kI * identity(zp.L);
  return f_from_e(e_matrix(zp, z, v));
}

inline CMatrix f_matrix(const Zipper& zp, Complex z) { return f_matrix(zp, z, zp.boundary_v); }

/// G = z^{-1} E (1 - E)^{-1}.
inline CMatrix g_matrix(const Zipper& zp, Complex z, const CMatrix& v) {
  require_nonzero(z);
  return g_from_e(e_matrix(zp, z, v), z);
}

inline CMatrix g_matrix(const Zipper& zp, Complex z) { return g_matrix(zp, z, zp.boundary_v); }

/// pi_1^* (U - z)^{-1} pi_1 by a dense solve.
inline CMatrix g_dense(const CMatrix& u, Eigen::Index l, Complex z) {
  const Eigen::Index n = u.rows();
  const CMatrix rhs = CMatrix::Identity(n, l);
  return (u - z * identity(n)).partialPivLu().solve(rhs).topRows(l);
}

/// i pi_1^* (U - z)^{-1} (U + z) pi_1 by a dense solve.
inline CMatrix f_dense(const CMatrix& u, Eigen::Index l, Complex z) {
  const Eigen::Index n = u.rows();
  const CMatrix rhs = (u + z * identity(n)).leftCols(l);
  return kI * CMatrix((u - z * identity(n)).partialPivLu().solve(rhs).topRows(l));
}

struct WeylDisc {
  Complex z;
  int N = 0;
  CMatrix center;          // S_N^z
  CMatrix radius_left;     // R_N^z, positive definite
  CMatrix radius_right;    // -R_N^{1/conj z}, positive definite
  CMatrix center_reflected;  // S_N^{1/conj z}
  double identity_residual = 0.0;  // relative residual of the lower-right block identity
};

namespace detail {

/// Scaled Cayley-transformed form: Qtilde = exp(2 s) X with X returned.
inline CMatrix scaled_qtilde(const Zipper& zp, Complex z, int n, double& log_scale) {
  CMatrix t = identity(2 * zp.L);
  log_scale = 0.0;
  for (int m = 1; m <= n; ++m) {
    t = zipper_transfer(zp, m, z) * t;
    const double nt = t.norm();
    if (nt > 1e8) {
      t /= nt;
      log_scale += std::log(nt);
    }
  }
  const CMatrix c = cayley(zp.L);
  return c.adjoint() * t.adjoint() * form_l(zp.L) * t * c;
}

}  // namespace detail

/// R = [Qtilde_11]^{-1}, S = -R Qtilde_12 at z and at 1/conj z, with
/// Qtilde = C^* T(N,0)^* L T(N,0) C.
inline WeylDisc radial_central(const Zipper& zp, Complex z, int n) {
  require_nonzero(z);
  require_in_disc(z);
  const Eigen::Index l = zp.L;
  const Complex zr = 1.0 / std::conj(z);
  double s = 0.0, sr = 0.0;
  const CMatrix x = detail::scaled_qtilde(zp, z, n, s);
  const CMatrix xr = detail::scaled_qtilde(zp, zr, n, sr);

  const CMatrix x11 = 0.5 * (x.topLeftCorner(l, l) + x.topLeftCorner(l, l).adjoint());
  const CMatrix xr11 = 0.5 * (xr.topLeftCorner(l, l) + xr.topLeftCorner(l, l).adjoint());
  const auto e11 = hermitian_eigen(x11);
  const auto er11 = hermitian_eigen(xr11);
  if (!(e11.values(0) > 1e-13 * std::max(1.0, e11.values.cwiseAbs().maxCoeff())))
    throw Error(ErrorCode::SingularBlock, "upper-left block of the form is not positive");
  if (!(er11.values(er11.values.size() - 1) < -1e-13 * std::max(1.0, er11.values.cwiseAbs().maxCoeff())))
    throw Error(ErrorCode::SingularBlock, "reflected upper-left block is not negative");

  const CMatrix x11inv = hermitian_function(e11, [](double v) { return Complex(1.0 / v); });
  const CMatrix xr11inv = hermitian_function(er11, [](double v) { return Complex(1.0 / v); });

  WeylDisc d;
  d.z = z;
  d.N = n;
  d.radius_left = std::exp(-2.0 * s) * x11inv;
  const CMatrix r_reflected = std::exp(-2.0 * sr) * xr11inv;
  d.radius_right = -r_reflected;
  d.center = -x11inv * x.topRightCorner(l, l);
  d.center_reflected = -xr11inv * xr.topRightCorner(l, l);

  // Lower-right identity, divided by exp(2 s).
  const CMatrix lhs = x.bottomRightCorner(l, l);
  const CMatrix rhs = d.center.adjoint() * x11 * d.center + std::exp(-2.0 * s) * r_reflected;
  d.identity_residual = (lhs - rhs).norm() / std::max(1.0, lhs.norm());
  return d;
}

/// W = R^{-1/2} (F - S) (-R')^{-1/2}; no unitarity check.
inline CMatrix disc_coordinate(const CMatrix& f, const WeylDisc& d) {
  auto inv_sqrt = [](const CMatrix& r) {
    const auto e = hermitian_eigen(r);
    if (!(e.values(0) > 0.0)) throw Error(ErrorCode::SingularBlock, "radius operator is not positive definite");
    return hermitian_function(e, [](double v) { return Complex(1.0 / std::sqrt(v)); });
  };
  return inv_sqrt(d.radius_left) * (f - d.center) * inv_sqrt(d.radius_right);
}

/// Surface coordinate of a boundary value; NotOnSurface if not unitary.
inline CMatrix disc_membership(const CMatrix& f, const WeylDisc& d, double threshold = 1e-7) {
  const CMatrix w = disc_coordinate(f, d);
  if ((w.adjoint() * w - identity(w.cols())).norm() > threshold)
    throw Error(ErrorCode::NotOnSurface, "value does not lie on the Weyl surface");
  return w;
}

/// Point of the Weyl surface with coordinate W.
inline CMatrix disc_point(const WeylDisc& d, const CMatrix& w) {
  return d.center + hermitian_sqrt(d.radius_left) * w * hermitian_sqrt(d.radius_right);
}

inline double radius_bound(int n, Complex z) {
  const double a = 1.0 - std::norm(z);
  return 8.0 / (static_cast<double>(n) * a * a);
}

/// log of the operator norm of |R_N^z| computed from a renormalized frame:
/// R^{-1} = Phi^* L Phi / 2 with Phi = T(N,0)(1;1) = Phi_hat b.
inline double log_radius_norm(const Zipper& zp, Complex z, int n) {
  const SolutionFrame f = propagate(zp, z, n, true);
  const CMatrix m = f.frame.adjoint() * form_l(zp.L) * f.frame;
  const CMatrix h = 0.5 * (m + m.adjoint());
  const auto eig = hermitian_eigen(h);
  const double smallest = std::min(std::abs(eig.values(0)), std::abs(eig.values(eig.values.size() - 1)));
  if (!(smallest > 0.0) || (eig.values(0) < 0.0 && eig.values(eig.values.size() - 1) > 0.0))
    throw Error(ErrorCode::SingularBlock, "frame form is indefinite");
  const CMatrix hinv = hermitian_function(eig, [](double v) { return Complex(1.0 / v); });
  const CMatrix core = 2.0 * f.normalizer_inv * hinv * f.normalizer_inv.adjoint();
  return 2.0 * f.log_scale_inv + std::log(op_norm(core));
}

struct LimitResult {
  CMatrix F;
  double certified_error = 0.0;  // sqrt(|R| |R'|) plus a rounding floor
  double disc_radius = 0.0;      // sqrt(|R| |R'|) alone
  double log_disc_radius = 0.0;  // its natural log; the radius itself underflows for long N
  double rounding_floor = 0.0;
  double slack = 2.0;            // surface points lie within slack * disc_radius of each other
  double a_priori_bound = 0.0;   // 8 / (N (1 - |z|^2)^2)
  int N_used = 0;
};

inline int limit_length(Complex z, double tol) {
  const double a = 1.0 - std::norm(z);
  const double need = 8.0 / (tol * a * a);
  int n = static_cast<int>(std::ceil(need));
  if (n % 2 != 0) ++n;
  return std::max(n, 2);
}

/// Semi-infinite boundary value F^z approximated by F_N^z(V) with N chosen
/// from the a priori radius bound; the error is certified a posteriori from
/// the radius operators at z and 1/conj z.
inline LimitResult limit_f(const Zipper& zp, Complex z, double tol, const CMatrix& v) {
  if (zp.flavor != Flavor::SemiInfinite) throw Error(ErrorCode::WrongFlavor, "limit_f needs a semi-infinite zipper");
  require_in_disc(z);
  LimitResult out;
  if (z == Complex(0.0, 0.0)) {
    out.F = kI * identity(zp.L);
    return out;
  }
  out.N_used = limit_length(z, tol);
  out.a_priori_bound = radius_bound(out.N_used, z);
  const Zipper trunc = zp.truncated(out.N_used, v);
  out.F = f_matrix(trunc, z, v);
  const double log_r = log_radius_norm(trunc, z, out.N_used);
  const double log_rr = log_radius_norm(trunc, 1.0 / std::conj(z), out.N_used);
  out.log_disc_radius = 0.5 * (log_r + log_rr);
  out.disc_radius = std::exp(out.log_disc_radius);
  out.rounding_floor = 1e-13 * (1.0 + op_norm(out.F));
  out.certified_error = out.disc_radius + out.rounding_floor;
  return out;
}

inline LimitResult limit_f(const Zipper& zp, Complex z, double tol) { return limit_f(zp, z, tol, identity(zp.L)); }

}  // namespace scatzip
