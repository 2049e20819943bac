#pragma once

// Transfer matrices T^z_n, solution frames Phi_n = T^z(n,0)(1;1), the
// positive forms P^z and Q^z_N, and the inhomogeneous solve at site 1.

#include <vector>

#include "scatzip/zipper.hpp"

namespace scatzip {

/// Raw products are kept for cross-checks only up to this length.
inline constexpr int kRawProductCap = 64;

inline void require_nonzero(Complex z) {
  if (z == Complex(0.0, 0.0)) throw Error(ErrorCode::ZeroZ, "transfer matrices are undefined at z = 0");
}

/// Even n: phi(z^{-1} S) = [[z^{-1} A, B], [C, z D]] with (A, B, C, D) the
/// blocks of phi(S).  Odd n: phi(S).
inline CMatrix transfer_at(const ScatteringBlock& s, int n, Complex z) {
  require_nonzero(z);
  CMatrix t = phi(s);
  if (n % 2 == 0) {
    const Eigen::Index l = s.channels();
    t.topLeftCorner(l, l) /= z;
    t.bottomRightCorner(l, l) *= z;
  }
  return t;
}

/// (T^z)^{-1} = L (T^{1/conj z})^* L, i.e. [[z A^*, -C^*], [-B^*, D^*/z]]
/// for even n and L T^* L for odd n.
inline CMatrix transfer_inverse_at(const ScatteringBlock& s, int n, Complex z) {
  require_nonzero(z);
  const CMatrix l = form_l(s.channels());
  return l * transfer_at(s, n, 1.0 / std::conj(z)).adjoint() * l;
}

/// Transfer matrix of site n of a zipper.  Site 1 of a finite or
/// semi-infinite zipper is the boundary scatterer [[0, 1], [U, 0]], whose
/// image under phi is diag(U, 1).
inline CMatrix zipper_transfer(const Zipper& zp, int n, Complex z) {
  require_nonzero(z);
  if (n == 1 && zp.flavor != Flavor::Periodic) return block_diag(zp.boundary_u, identity(zp.L));
  return transfer_at(zp.block(n), n, z);
}

inline CMatrix zipper_transfer_inverse(const Zipper& zp, int n, Complex z) {
  require_nonzero(z);
  if (n == 1 && zp.flavor != Flavor::Periodic) return block_diag(zp.boundary_u.adjoint(), identity(zp.L));
  return transfer_inverse_at(zp.block(n), n, z);
}

/// T^z(n, k) = T_n ... T_{k+1}.
inline CMatrix transfer_product(const Zipper& zp, Complex z, int n, int k = 0) {
  CMatrix t = identity(2 * zp.L);
  for (int m = k + 1; m <= n; ++m) t = zipper_transfer(zp, m, z) * t;
  return t;
}

inline CMatrix initial_frame(Eigen::Index l) { return stack(identity(l), identity(l)); }

/// A 2L x L frame spanning the same plane as the raw solution
/// T^z(n,0)(1;1) = frame * exp(log_scale) * normalizer.  The inverse factor
/// is carried separately as exp(log_scale_inv) * normalizer_inv.
struct SolutionFrame {
  CMatrix frame;
  int site = 0;
  Complex z;
  CMatrix normalizer;
  double log_scale = 0.0;
  CMatrix normalizer_inv;
  double log_scale_inv = 0.0;

  CMatrix raw() const { return frame * (std::exp(log_scale) * normalizer); }
};

namespace detail {

inline void absorb_right_factor(SolutionFrame& f) {
  const ThinQr qr = thin_qr(f.frame);
  const double smin = smallest_singular_value(qr.r);
  const double smax = op_norm(qr.r);
  if (!(smin > 1e-14 * smax) || !std::isfinite(smax))
    throw Error(ErrorCode::DegenerateFrame, "solution frame lost rank at site " + std::to_string(f.site));
  f.frame = qr.q;
  f.normalizer = qr.r * f.normalizer;
  f.normalizer_inv = f.normalizer_inv * qr.r.partialPivLu().inverse();
  const double nb = f.normalizer.norm();
  f.normalizer /= nb;
  f.log_scale += std::log(nb);
  const double ni = f.normalizer_inv.norm();
  f.normalizer_inv /= ni;
  f.log_scale_inv += std::log(ni);
}

}  // namespace detail

inline SolutionFrame start_frame(const CMatrix& phi0, Complex z) {
  SolutionFrame f;
  f.frame = phi0;
  f.site = 0;
  f.z = z;
  f.normalizer = identity(phi0.cols());
  f.normalizer_inv = identity(phi0.cols());
  return f;
}

/// Advances a frame by one site.
inline void step_frame(const Zipper& zp, SolutionFrame& f, bool renormalize) {
  f.site += 1;
  f.frame = zipper_transfer(zp, f.site, f.z) * f.frame;
  if (renormalize) detail::absorb_right_factor(f);
}

/// Phi_n = T^z(n,0)(1;1), optionally column-orthonormalized after every step.
inline SolutionFrame propagate(const Zipper& zp, Complex z, int upto, bool renormalize = true) {
  require_nonzero(z);
  SolutionFrame f = start_frame(initial_frame(zp.L), z);
  for (int n = 1; n <= upto; ++n) step_frame(zp, f, renormalize);
  return f;
}

/// P^z of a single even step from the blocks of phi(S):
/// [[(|z|^{-2}-1) A^*A, (1/conj z - z) A^*B], [(1/z - conj z) B^*A, (1-|z|^2)(B^*B + 1)]].
inline CMatrix p_matrix_from(const CMatrix& phi_s, Complex z) {
  require_nonzero(z);
  const CMatrix a = block_a(phi_s), b = block_b(phi_s);
  const double r2 = std::norm(z);
  const Eigen::Index l = a.rows();
  return from_blocks((1.0 / r2 - 1.0) * a.adjoint() * a, (1.0 / std::conj(z) - z) * a.adjoint() * b,
                     (1.0 / z - std::conj(z)) * b.adjoint() * a, (1.0 - r2) * (b.adjoint() * b + identity(l)));
}

inline CMatrix p_matrix(const ScatteringBlock& s, Complex z) { return p_matrix_from(phi(s), z); }

struct QuadraticForm {
  CMatrix direct;  // T(N,0)^* L T(N,0)
  CMatrix summed;  // L + sum_k T(2k-1,0)^* P_{2k} T(2k-1,0)
  Complex z;
  int N = 0;

  double agreement() const { return (direct - summed).norm(); }
};

inline QuadraticForm q_form(const Zipper& zp, Complex z, int n) {
  require_nonzero(z);
  const CMatrix l = form_l(zp.L);
  QuadraticForm q;
  q.z = z;
  q.N = n;
  q.summed = l;
  CMatrix t = identity(2 * zp.L);
  for (int m = 1; m <= n; ++m) {
    if (m % 2 == 0) q.summed += t.adjoint() * p_matrix(zp.block(m), z) * t;
    t = zipper_transfer(zp, m, z) * t;
  }
  q.direct = t.adjoint() * l * t;
  return q;
}

/// Number of positive and negative eigenvalues of a Hermitian matrix.
inline std::pair<int, int> signature(const CMatrix& h, double tol = kDefaultTol) {
  const auto eig = hermitian_eigen(h);
  int pos = 0, neg = 0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values(i) > tol) ++pos;
    if (eig.values(i) < -tol) ++neg;
  }
  return {pos, neg};
}

/// Solves (U_N - z) phi = xi for a finite zipper, with xi given per site as
/// L x m blocks.  The homogeneous frame and a particular solution are
/// propagated together; phi_1 is fixed by psi_N = V phi_N.
inline std::vector<CMatrix> solve_inhomogeneous(const Zipper& zp, Complex z, const std::vector<CMatrix>& xi) {
  require_nonzero(z);
  if (std::abs(z) >= 1.0) throw Error(ErrorCode::OutsideDisc, "solve_inhomogeneous needs |z| < 1");
  if (zp.flavor != Flavor::Finite) throw Error(ErrorCode::WrongFlavor, "solve_inhomogeneous needs a finite zipper");
  const int n_sites = zp.N;
  if (static_cast<int>(xi.size()) != n_sites) throw Error(ErrorCode::DimensionMismatch, "need one right-hand block per site");
  const Eigen::Index l = zp.L;
  const Eigen::Index m = xi.front().cols();
  for (const auto& x : xi)
    if (x.rows() != l || x.cols() != m) throw Error(ErrorCode::DimensionMismatch, "right-hand blocks must be L x m");

  std::vector<CMatrix> hom(static_cast<std::size_t>(n_sites + 1));
  std::vector<CMatrix> part(static_cast<std::size_t>(n_sites + 1));
  hom[0] = initial_frame(l);
  part[0] = zeros(2 * l, m);
  for (int n = 1; n <= n_sites; ++n) {
    const CMatrix t = zipper_transfer(zp, n, z);
    hom[n] = t * hom[n - 1];
    part[n] = t * part[n - 1];
    if (n % 2 == 0) {
      const ScatteringBlock s = zp.block(n);
      const CMatrix binv = s.beta().partialPivLu().inverse();
      // Solved from S (psi_{n-1}; psi_n) = z (phi_{n-1}; phi_n) + (xi_{n-1}; xi_n).
      const CMatrix inhom = from_blocks(s.delta() * binv / z, -identity(l) / z, binv, zeros(l, l));
      part[n] += inhom * stack(xi[n - 2], xi[n - 1]);
    }
  }
  const CMatrix& v = zp.boundary_v;
  const CMatrix& hn = hom[n_sites];
  const CMatrix& pn = part[n_sites];
  const CMatrix pivot = hn.bottomRows(l) - v * hn.topRows(l);
  if (smallest_singular_value(pivot) <= 1e-14 * std::max(1.0, op_norm(hn)))
    throw Error(ErrorCode::ImpossibleByTheory, "boundary pivot is singular");
  const CMatrix phi1 = pivot.partialPivLu().solve(v * pn.topRows(l) - pn.bottomRows(l));

  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(n_sites));
  for (int n = 1; n <= n_sites; ++n) {
    const CMatrix full = hom[n] * phi1 + part[n];
    // Odd frames are (psi; phi), even frames (phi; psi).
    out.push_back(n % 2 == 0 ? CMatrix(full.topRows(l)) : CMatrix(full.bottomRows(l)));
  }
  return out;
}

/// Stacks per-site blocks into an (N L) x m matrix.
inline CMatrix stack_sites(const std::vector<CMatrix>& parts) {
  const Eigen::Index l = parts.front().rows();
  CMatrix out(l * static_cast<Eigen::Index>(parts.size()), parts.front().cols());
  for (std::size_t k = 0; k < parts.size(); ++k) out.middleRows(static_cast<Eigen::Index>(k) * l, l) = parts[k];
  return out;
}

}  // namespace scatzip
