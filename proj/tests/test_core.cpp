// Dense primitives, scattering blocks and operator assembly.

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "scatzip/ensembles.hpp"

using namespace scatzip;

namespace {

CMatrix scalar(Complex c) { return CMatrix::Constant(1, 1, c); }

CMatrix random_hermitian(Rng& rng, Eigen::Index n) {
  const CMatrix g = rng.gaussian(n, n);
  return 0.5 * (g + g.adjoint());
}

// Generic element of U(L,L): block rotation built from a contraction.
CMatrix random_lorentz(Rng& rng, Eigen::Index l) {
  return phi(random_block(rng, l, Ensemble::HaarGauge));
}

double dist(const CMatrix& a, const CMatrix& b) { return (a - b).norm(); }

}  // namespace

// ---------------------------------------------------------------------------
// matrix_core

TEST(MatrixCore, SqrtOfDiagonal) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 4.0;
  m(1, 1) = 9.0;
  CMatrix want = CMatrix::Zero(2, 2);
  want(0, 0) = 2.0;
  want(1, 1) = 3.0;
  EXPECT_LT(dist(hermitian_sqrt(m), want), 1e-12);
}

TEST(MatrixCore, SqrtSquaresBackAndRejectsNegative) {
  Rng rng(11);
  for (Eigen::Index n : {1, 2, 3, 5}) {
    const CMatrix g = rng.gaussian(n, n);
    const CMatrix m = g * g.adjoint();
    const CMatrix r = hermitian_sqrt(m);
    EXPECT_LT(dist(r * r, m), 1e-10 * (1 + m.norm()));
    EXPECT_LT(hermitian_defect(r), 1e-12);
  }
  EXPECT_THROW(
      {
        try {
          hermitian_sqrt(-identity(2));
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::NotPSD);
          throw;
        }
      },
      Error);
}

TEST(MatrixCore, PolarOfUnitaryAndPositive) {
  Rng rng(12);
  const CMatrix u = haar_unitary(rng, 3);
  EXPECT_LT(dist(polar_unitary(u), u), 1e-12);
  const CMatrix g = rng.gaussian(3, 3);
  const CMatrix p = g * g.adjoint() + identity(3);
  EXPECT_LT(dist(polar_unitary(p), identity(3)), 1e-12);
  const CMatrix a = rng.gaussian(4, 4);
  const CMatrix w = polar_unitary(a);
  EXPECT_LT(unitarity_defect(w), 1e-12);
  // A = W P with P positive.
  const CMatrix pp = w.adjoint() * a;
  EXPECT_LT(hermitian_defect(pp), 1e-10);
  EXPECT_GT(hermitian_eigen(0.5 * (pp + pp.adjoint())).values(0), 0.0);
}

TEST(MatrixCore, JacobiMatchesEigenSolver) {
  Rng rng(13);
  for (Eigen::Index n : {2, 4, 7}) {
    const CMatrix h = random_hermitian(rng, n);
    const auto mine = hermitian_eigen(h);
    Eigen::SelfAdjointEigenSolver<CMatrix> ref(h);
    EXPECT_LT((mine.values - ref.eigenvalues()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(dist(h * mine.vectors, mine.vectors * mine.values.asDiagonal()), 1e-11);
  }
}

TEST(MatrixCore, MobiusIdentityAndGaugeAction) {
  Rng rng(14);
  const Eigen::Index l = 2;
  const CMatrix z = random_contraction(rng, l);
  EXPECT_LT(dist(mobius(identity(2 * l), z), z), 1e-14);
  const CMatrix u = haar_unitary(rng, l), v = haar_unitary(rng, l);
  EXPECT_LT(dist(mobius(block_diag(v, u.adjoint()), z), v * z * u), 1e-13);
  EXPECT_LT(dist(mobius_inverse(z, identity(2 * l)), z), 1e-14);
}

TEST(MatrixCore, MobiusActionLaws) {
  Rng rng(15);
  for (Eigen::Index l : {1, 2, 3}) {
    const CMatrix t1 = random_lorentz(rng, l), t2 = random_lorentz(rng, l);
    const CMatrix z = random_contraction(rng, l, 0.7);
    // Left action composes.
    EXPECT_LT(dist(mobius(t1 * t2, z), mobius(t1, mobius(t2, z))), 1e-10);
    // Right action composes the other way and undoes the left action.
    EXPECT_LT(dist(mobius_inverse(mobius(t1, z), t1), z), 1e-10);
    EXPECT_LT(dist(mobius_inverse(z, t1 * t2), mobius_inverse(mobius_inverse(z, t1), t2)), 1e-10);
    // Right action by T is the left action by T^{-1}.
    EXPECT_LT(dist(mobius_inverse(z, t1), mobius(t1.inverse(), z)), 1e-10);
  }
}

TEST(MatrixCore, LorentzMapsPreserveSiegelDisc) {
  Rng rng(16);
  for (int i = 0; i < 20; ++i) {
    const CMatrix t = random_lorentz(rng, 2);
    const CMatrix z = random_contraction(rng, 2, 0.95);
    ASSERT_TRUE(in_siegel_disc(z));
    EXPECT_TRUE(in_siegel_disc(mobius(t, z)));
  }
  EXPECT_FALSE(in_siegel_disc(identity(2)));
  EXPECT_TRUE(in_siegel_disc(identity(2), false));
  EXPECT_FALSE(in_siegel_disc(2.0 * identity(1), false));
}

TEST(MatrixCore, CayleyIntertwinesForms) {
  for (Eigen::Index l : {1, 2, 3}) {
    const CMatrix c = cayley(l);
    EXPECT_LT(unitarity_defect(c), 1e-14);
    EXPECT_LT(dist(c.adjoint() * form_l(l) * c, kI * form_j(l)), 1e-14);
  }
  // i 1 sits in the upper half plane and maps to the disc center.
  Rng rng(17);
  EXPECT_TRUE(in_upper_half_plane(kI * identity(2)));
  const CMatrix g = rng.gaussian(2, 2);
  const CMatrix h = random_hermitian(rng, 2) + kI * (g * g.adjoint() + 0.1 * identity(2));
  ASSERT_TRUE(in_upper_half_plane(h));
  EXPECT_TRUE(in_siegel_disc(mobius(cayley(2), h)));
}

TEST(MatrixCore, NormalEigenOfUnitary) {
  Rng rng(18);
  const CMatrix u = haar_unitary(rng, 5);
  const auto eig = normal_eigen(u);
  EXPECT_LT(unitarity_defect(eig.vectors), 1e-10);
  for (std::size_t i = 0; i < eig.values.size(); ++i)
    EXPECT_LT((u * eig.vectors.col(i) - eig.values[i] * eig.vectors.col(i)).norm(), 1e-10);
  // Degenerate: a reflection with a repeated eigenvalue.
  CMatrix d = identity(4);
  d(3, 3) = -1.0;
  const CMatrix q = haar_unitary(rng, 4);
  const auto ph = eigenphases(q * d * q.adjoint());
  ASSERT_EQ(ph.size(), 4u);
  EXPECT_NEAR(ph[0], 0.0, 1e-10);
  EXPECT_NEAR(ph[2], 0.0, 1e-10);
  EXPECT_NEAR(ph[3], std::numbers::pi, 1e-10);
}

// ---------------------------------------------------------------------------
// scattering

TEST(Scattering, ScalarBlockEntries) {
  const auto s = ScatteringBlock::build(scalar(0.5), scalar(1.0), scalar(1.0));
  const double r = std::sqrt(0.75);
  EXPECT_NEAR(std::abs(s.alpha()(0, 0) - 0.5), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(s.beta()(0, 0) - r), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(s.gamma()(0, 0) - r), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(s.delta()(0, 0) + 0.5), 0.0, 1e-14);
}

TEST(Scattering, BuildIsUnitaryAndDecomposes) {
  Rng rng(21);
  for (Eigen::Index l : {1, 2, 3}) {
    for (int i = 0; i < 5; ++i) {
      const CMatrix a = random_contraction(rng, l), u = haar_unitary(rng, l), v = haar_unitary(rng, l);
      const auto s = ScatteringBlock::build(a, u, v);
      EXPECT_LT(unitarity_defect(s.matrix()), 1e-12);
      for (double r : block_relation_residuals(s.matrix())) EXPECT_LT(r, 1e-12);
      const auto back = ScatteringBlock::decompose(s.matrix());
      EXPECT_LT(dist(back.alpha(), a), 1e-10);
      EXPECT_LT(dist(back.u(), u), 1e-10);
      EXPECT_LT(dist(back.v(), v), 1e-10);
    }
  }
}

TEST(Scattering, BuildRejectsBadParameters) {
  EXPECT_THROW(ScatteringBlock::build(scalar(1.5), scalar(1.0), scalar(1.0)), Error);
  EXPECT_THROW(ScatteringBlock::build(scalar(0.5), scalar(2.0), scalar(1.0)), Error);
}

TEST(Scattering, PhiOfScalarBlockHasNegativeOffDiagonals) {
  // alpha = 0.6: (1 - 0.36)^{-1/2} = 1.25 and 1.25 * 0.6 = 0.75.
  const auto s = ScatteringBlock::build(scalar(0.6), scalar(1.0), scalar(1.0));
  const CMatrix t = phi(s);
  EXPECT_NEAR(std::abs(t(0, 0) - 1.25), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(t(1, 1) - 1.25), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(t(0, 1) + 0.75), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(t(1, 0) + 0.75), 0.0, 1e-12);
}

TEST(Scattering, PhiClosedFormWithNegatedAlpha) {
  Rng rng(22);
  const Eigen::Index l = 2;
  const CMatrix a = random_contraction(rng, l), u = haar_unitary(rng, l), v = haar_unitary(rng, l);
  const CMatrix one = identity(l);
  const CMatrix r = hermitian_inv_sqrt(one - a.adjoint() * a), rr = hermitian_inv_sqrt(one - a * a.adjoint());
  const CMatrix an = -a;
  const CMatrix closed = block_diag(v, u.adjoint()) * from_blocks(r, r * an.adjoint(), an * r, rr);
  EXPECT_LT(dist(phi(ScatteringBlock::build(a, u, v)), closed), 1e-11);
}

TEST(Scattering, PhiBijection) {
  Rng rng(23);
  for (Eigen::Index l : {1, 2, 3}) {
    const auto s = random_block(rng, l, Ensemble::HaarGauge);
    const CMatrix t = phi(s);
    EXPECT_LT(lorentz_defect(t), 1e-10);
    EXPECT_LT(dist(phi_inverse_matrix(t), s.matrix()), 1e-10);
    EXPECT_LT(dist(phi(phi_inverse(t)), t), 1e-9 * t.norm());
  }
}

TEST(Scattering, BoundaryPhiAndIdentityInverse) {
  Rng rng(24);
  const CMatrix u = haar_unitary(rng, 2), v = haar_unitary(rng, 2);
  EXPECT_LT(dist(phi(boundary_block(u, v)), block_diag(v, u.adjoint())), 1e-12);
  const CMatrix swap = from_blocks(zeros(2, 2), identity(2), identity(2), zeros(2, 2));
  EXPECT_LT(dist(phi_inverse_matrix(identity(4)), swap), 1e-14);
}

TEST(Scattering, DecomposeRejectsDecoupledBlock) {
  // beta = 0: the channels decouple, outside U(2L)_inv.
  const CMatrix s = from_blocks(identity(1), zeros(1, 1), zeros(1, 1), identity(1));
  try {
    ScatteringBlock::decompose(s);
    FAIL() << "expected NotInUInv";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotInUInv);
  }
  EXPECT_THROW(phi(s), Error);
}

TEST(Scattering, PhiInverseRejectsNonLorentz) {
  try {
    phi_inverse_matrix(2.0 * identity(2));
    FAIL() << "expected NotLorentz";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotLorentz);
  }
}

TEST(Scattering, TwistedShiftsGauges) {
  Rng rng(25);
  const auto s = random_block(rng, 2, Ensemble::HaarGauge);
  const double k = 0.37;
  const auto t = s.twisted(k);
  EXPECT_LT(dist(t.alpha(), s.alpha()), 1e-14);
  EXPECT_LT(dist(t.beta(), std::polar(1.0, -k) * s.beta()), 1e-12);
  EXPECT_LT(dist(t.gamma(), std::polar(1.0, k) * s.gamma()), 1e-12);
  EXPECT_LT(dist(t.delta(), s.delta()), 1e-12);
}

// ---------------------------------------------------------------------------
// zipper

TEST(Zipper, FreeTwoSiteIsSwap) {
  const Zipper zp = random_finite(1, 2, 1, Ensemble::Free);
  const CMatrix u = assemble_finite(zp).to_dense();
  const CMatrix swap = from_blocks(zeros(1, 1), identity(1), identity(1), zeros(1, 1));
  EXPECT_LT(dist(u, swap), 1e-14);
}

TEST(Zipper, FreePeriodicTwoSites) {
  const Zipper zp = random_periodic(1, 2, 1, Ensemble::Free);
  const auto spec = dense_spectrum(assemble_periodic(zp));
  ASSERT_EQ(spec.points.size(), 1u);
  EXPECT_EQ(spec.points[0].multiplicity, 2);
  EXPECT_NEAR(std::abs(spec.points[0].value - 1.0), 0.0, 1e-12);
}

TEST(Zipper, AssembledOperatorsUnitaryAndFiveDiagonal) {
  for (Eigen::Index l : {1, 2, 3}) {
    for (int n : {2, 4, 8, 12}) {
      const Zipper f = random_finite(l, n, 100 + n);
      const auto uf = assemble_finite(f);
      EXPECT_LT(unitarity_defect(uf.to_dense()), 1e-10);
      EXPECT_LE(uf.bandwidth(), 2);
      EXPECT_EQ(uf.dim(), l * n);
      const Zipper p = random_periodic(l, n, 200 + n);
      const auto up = assemble_periodic(p);
      EXPECT_LT(unitarity_defect(up.to_dense()), 1e-10);
      EXPECT_LE(up.bandwidth(), 2);
    }
  }
}

TEST(Zipper, FiberAtZeroIsPeriodicOperator) {
  const Zipper p = random_periodic(2, 6, 31);
  EXPECT_LT(dist(fiber(p, 0.0).to_dense(), assemble_periodic(p).to_dense()), 1e-14);
  const CMatrix f = fiber(p, 0.4).to_dense();
  EXPECT_LT(unitarity_defect(f), 1e-10);
  // Quasi-periodicity: a shift by 2 pi / N in k is a unitary gauge change.
  const auto a = dense_spectrum(fiber(p, 0.4));
  const auto b = dense_spectrum(fiber(p, 0.4 + 2.0 * std::numbers::pi / 6));
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) EXPECT_NEAR(a.points[i].theta, b.points[i].theta, 1e-9);
}

TEST(Zipper, ApplyMatchesDense) {
  Rng rng(32);
  const Zipper zp = random_finite(3, 10, 33);
  const auto op = assemble_finite(zp);
  const CVector x = rng.gaussian_vector(op.dim());
  EXPECT_LT((apply(op, x) - op.to_dense() * x).norm(), 1e-12);
}

TEST(Zipper, DenseEigenpairs) {
  const Zipper zp = random_finite(2, 8, 34);
  const CMatrix u = assemble_finite(zp).to_dense();
  const auto eig = normal_eigen(u);
  for (std::size_t i = 0; i < eig.values.size(); ++i) {
    EXPECT_NEAR(std::abs(eig.values[i]), 1.0, 1e-12);
    EXPECT_LT((u * eig.vectors.col(i) - eig.values[i] * eig.vectors.col(i)).norm(), 1e-10);
  }
  EXPECT_EQ(dense_spectrum(u).total, 16);
}

TEST(Zipper, ValidationErrors) {
  Zipper zp = random_finite(1, 4, 35);
  zp.N = 3;
  try {
    zp.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OddN);
  }
  Zipper p = random_periodic(1, 4, 36);
  p.blocks.erase(1);
  try {
    p.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingS1);
  }
  EXPECT_THROW(dense_spectrum(identity(600)), Error);
}

TEST(Zipper, DirectSumSpectrumIsUnion) {
  const Zipper a = random_finite(1, 4, 37), b = random_finite(2, 4, 38);
  const auto sa = dense_spectrum(assemble_finite(a)), sb = dense_spectrum(assemble_finite(b));
  const auto s = dense_spectrum(assemble_finite(direct_sum(a, b)));
  EXPECT_EQ(s.total, sa.total + sb.total);
}

TEST(Zipper, SemiInfiniteTruncationIsDeterministic) {
  const Zipper si = random_semi_infinite(2, 77);
  const Zipper t1 = si.truncated(10, identity(2)), t2 = si.truncated(10, identity(2));
  for (int n = 2; n <= 10; ++n) EXPECT_EQ(dist(t1.block(n).matrix(), t2.block(n).matrix()), 0.0);
  EXPECT_LT(dist(si.truncated(6, identity(2)).block(6).matrix(), t1.block(6).matrix()), 1e-15);
}
