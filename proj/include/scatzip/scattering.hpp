#pragma once

// Scattering blocks S(alpha, U, V), the map phi onto U(L,L) and its inverse.

#include <array>
#include <string>

#include "scatzip/matrix_core.hpp"

namespace scatzip {

/// Smallest singular value of beta that still counts as an effective
/// (non-decoupling) scattering event.
inline constexpr double kMembershipTol = 1e-8;

class ScatteringBlock {
 public:
  /// Assembles [[alpha, (1 - alpha alpha^*)^{1/2} U], [V (1 - alpha^* alpha)^{1/2}, -V alpha^* U]].
  static ScatteringBlock build(const CMatrix& alpha, const CMatrix& u, const CMatrix& v, double tol = kDefaultTol) {
    require_square(alpha, "alpha");
    const Eigen::Index l = alpha.rows();
    if (u.rows() != l || u.cols() != l || v.rows() != l || v.cols() != l)
      throw Error(ErrorCode::DimensionMismatch, "gauges must match alpha");
    if (op_norm(alpha) >= 1.0 - tol) throw Error(ErrorCode::NotContraction, "alpha must be a strict contraction");
    require_unitary(u, tol, "u gauge");
    require_unitary(v, tol, "v gauge");
    ScatteringBlock s;
    s.alpha_ = alpha;
    s.u_ = u;
    s.v_ = v;
    const CMatrix one = identity(l);
    const CMatrix left = hermitian_sqrt(one - alpha * alpha.adjoint(), tol);
    const CMatrix right = hermitian_sqrt(one - alpha.adjoint() * alpha, tol);
    s.matrix_ = from_blocks(alpha, left * u, v * right, -v * alpha.adjoint() * u);
    return s;
  }

  /// Recovers the unique (alpha, U, V) of a unitary with invertible beta
  /// through the polar decompositions of beta and gamma.
  static ScatteringBlock decompose(const CMatrix& s, double tol = kDefaultTol, double membership = kMembershipTol) {
    if (s.rows() != s.cols() || s.rows() % 2 != 0 || s.rows() == 0)
      throw Error(ErrorCode::DimensionMismatch, "scattering matrix must be 2L x 2L");
    require_unitary(s, tol, "scattering matrix");
    if (smallest_singular_value(block_b(s)) <= membership)
      throw Error(ErrorCode::NotInUInv, "upper-right block is not invertible");
    ScatteringBlock out;
    out.alpha_ = block_a(s);
    out.u_ = polar_unitary(block_b(s), tol);
    out.v_ = polar_unitary(block_c(s), tol);
    out.matrix_ = s;
    return out;
  }

  /// Wraps a raw matrix without validation; used to inject faults into the
  /// verification suite.
  static ScatteringBlock unchecked(const CMatrix& s) {
    ScatteringBlock out;
    out.matrix_ = s;
    out.alpha_ = block_a(s);
    out.u_ = identity(half(s));
    out.v_ = identity(half(s));
    return out;
  }

  Eigen::Index channels() const { return alpha_.rows(); }
  const CMatrix& alpha() const { return alpha_; }
  const CMatrix& u() const { return u_; }
  const CMatrix& v() const { return v_; }
  const CMatrix& matrix() const { return matrix_; }
  CMatrix beta() const { return block_b(matrix_); }
  CMatrix gamma() const { return block_c(matrix_); }
  CMatrix delta() const { return block_d(matrix_); }

  /// S(alpha, e^{-ik} U, e^{ik} V): beta picks up e^{-ik}, gamma e^{ik}.
  ScatteringBlock twisted(double k) const {
    ScatteringBlock out = *this;
    const Complex minus = std::polar(1.0, -k);
    const Complex plus = std::polar(1.0, k);
    out.u_ = minus * u_;
    out.v_ = plus * v_;
    const Eigen::Index l = channels();
    out.matrix_.topRightCorner(l, l) *= minus;
    out.matrix_.bottomLeftCorner(l, l) *= plus;
    return out;
  }

 private:
  ScatteringBlock() = default;
  CMatrix alpha_, u_, v_, matrix_;
};

/// Residuals of the six unitarity relations between alpha, beta, gamma, delta.
inline std::array<double, 6> block_relation_residuals(const CMatrix& s) {
  const CMatrix a = block_a(s), b = block_b(s), c = block_c(s), d = block_d(s);
  const CMatrix one = identity(a.rows());
  return {(a.adjoint() * a + c.adjoint() * c - one).norm(), (d.adjoint() * d + b.adjoint() * b - one).norm(),
          (d.adjoint() * c + b.adjoint() * a).norm(),      (a * a.adjoint() + b * b.adjoint() - one).norm(),
          (d * d.adjoint() + c * c.adjoint() - one).norm(), (c * a.adjoint() + d * b.adjoint()).norm()};
}

/// phi(S) = [[gamma - delta beta^{-1} alpha, delta beta^{-1}], [-beta^{-1} alpha, beta^{-1}]].
inline CMatrix phi(const CMatrix& s, double tol = kDefaultTol) {
  if (s.rows() != s.cols() || s.rows() % 2 != 0) throw Error(ErrorCode::DimensionMismatch, "phi needs a 2L x 2L matrix");
  const CMatrix binv = checked_inverse(block_b(s), tol, ErrorCode::SingularBeta, "beta");
  const CMatrix a = block_a(s), c = block_c(s), d = block_d(s);
  return from_blocks(c - d * binv * a, d * binv, -binv * a, binv);
}

inline CMatrix phi(const ScatteringBlock& s, double tol = kDefaultTol) { return phi(s.matrix(), tol); }

inline double lorentz_defect(const CMatrix& t) {
  const CMatrix l = form_l(half(t));
  return (t.adjoint() * l * t - l).norm();
}

/// Inverse of phi: [[-D^{-1} C, D^{-1}], [A - B D^{-1} C, B D^{-1}]].
inline CMatrix phi_inverse_matrix(const CMatrix& t, double tol = kDefaultTol) {
  if (t.rows() != t.cols() || t.rows() % 2 != 0)
    throw Error(ErrorCode::DimensionMismatch, "phi_inverse needs a 2L x 2L matrix");
  const double scale = std::max(1.0, t.squaredNorm());
  if (lorentz_defect(t) > tol * scale) throw Error(ErrorCode::NotLorentz, "matrix does not conserve the L form");
  const CMatrix dinv = checked_inverse(block_d(t), tol, ErrorCode::SingularD, "D");
  const CMatrix a = block_a(t), b = block_b(t), c = block_c(t);
  return from_blocks(-dinv * c, dinv, a - b * dinv * c, b * dinv);
}

inline ScatteringBlock phi_inverse(const CMatrix& t, double tol = kDefaultTol) {
  return ScatteringBlock::decompose(phi_inverse_matrix(t, tol), tol);
}

/// The degenerate boundary scatterer [[0, U], [V, 0]].
inline CMatrix boundary_block(const CMatrix& u, const CMatrix& v, double tol = kDefaultTol) {
  require_unitary(u, tol, "boundary U");
  require_unitary(v, tol, "boundary V");
  if (u.rows() != v.rows()) throw Error(ErrorCode::DimensionMismatch, "boundary unitaries differ in size");
  const Eigen::Index l = u.rows();
  return from_blocks(zeros(l, l), u, v, zeros(l, l));
}

}  // namespace scatzip
