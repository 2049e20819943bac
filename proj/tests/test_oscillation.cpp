// Lagrangian planes, Pruefer phases, oscillation spectra and bands.

#include <gtest/gtest.h>

#include <cmath>

#include "scatzip/ensembles.hpp"
#include "scatzip/oscillation.hpp"

using namespace scatzip;

namespace {

double dist(const CMatrix& a, const CMatrix& b) { return (a - b).norm(); }

// max |theta_a - theta_b| over a nearest matching, plus an exact
// multiplicity comparison.
void expect_same_spectrum(const SpectrumResult& a, const SpectrumResult& b, double tol) {
  ASSERT_EQ(a.total, b.total);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (const auto& p : b.points) {
    double best = 10.0;
    int mult = -1;
    for (const auto& q : a.points) {
      const double d = std::abs(std::arg(p.value / q.value));
      if (d < best) {
        best = d;
        mult = q.multiplicity;
      }
    }
    EXPECT_LT(best, tol);
    EXPECT_EQ(mult, p.multiplicity);
  }
}

// Unitary with eigenvalue 1 of multiplicity k.
CMatrix with_fixed_space(Rng& rng, Eigen::Index l, int k) {
  CMatrix d = identity(l);
  for (Eigen::Index i = k; i < l; ++i) d(i, i) = std::polar(1.0, 0.5 + 2.0 * rng.uniform());
  const CMatrix q = haar_unitary(rng, l);
  return q * d * q.adjoint();
}

}  // namespace

// ---------------------------------------------------------------------------
// Lagrangian planes

TEST(Lagrangian, ChartOfFrame) {
  Rng rng(101);
  const CMatrix u = haar_unitary(rng, 3);
  const CMatrix b = rng.gaussian(3, 3);
  const CMatrix f = lagrangian_frame(u, b);
  EXPECT_LT(lagrangian_defect(f), 1e-12);
  EXPECT_LT(dist(stereographic(f), u), 1e-10);
}

TEST(Lagrangian, IntersectionCharacterizationsAgree) {
  Rng rng(102);
  for (int k = 0; k <= 3; ++k) {
    const CMatrix u1 = haar_unitary(rng, 3);
    const CMatrix u2 = u1 * with_fixed_space(rng, 3, k);
    const CMatrix x = lagrangian_frame(u1, rng.gaussian(3, 3));
    const CMatrix y = lagrangian_frame(u2, rng.gaussian(3, 3));
    EXPECT_EQ(intersection_dim_chart(x, y), k);
    EXPECT_EQ(intersection_dim_angles(x, y), k);
    EXPECT_EQ(intersection_dim_kernel(x, y), k);
  }
}

TEST(Lagrangian, CheckerboardSum) {
  Rng rng(103);
  const Eigen::Index l = 2;
  EXPECT_EQ(checkerboard_sum(identity(2 * l), identity(2 * l)), identity(4 * l));
  const CMatrix a = rng.gaussian(4, 4), b = rng.gaussian(4, 4), c = rng.gaussian(4, 4), d = rng.gaussian(4, 4);
  EXPECT_LT(dist(checkerboard_sum(a, b) * checkerboard_sum(c, d), checkerboard_sum(a * c, b * d)), 1e-12);
  const CMatrix t1 = phi(random_block(rng, l, Ensemble::HaarGauge));
  const CMatrix t2 = phi(random_block(rng, l, Ensemble::HaarGauge));
  const CMatrix h = checkerboard_sum(t1, t2);
  EXPECT_LT(dist(h.adjoint() * form_l_hat(l) * h, form_l_hat(l)), 1e-10);
  CMatrix want = identity(4 * l);
  want.bottomRightCorner(2 * l, 2 * l) *= -1.0;
  EXPECT_EQ(form_l_hat(l), want);
}

TEST(Lagrangian, DoubledStartIsSwap) {
  const Eigen::Index l = 2;
  const CMatrix p = stereographic_doubled(doubled_initial_frame(l));
  const CMatrix swap = from_blocks(zeros(l, l), identity(l), identity(l), zeros(l, l));
  EXPECT_LT(dist(p, swap), 1e-15);
}

// ---------------------------------------------------------------------------
// Pruefer phases

TEST(Prufer, RawAndRenormalizedAgree) {
  const Zipper zp = random_finite(2, 8, 111);
  for (double theta : {0.3, 1.7, 4.1}) {
    const PruferPhase w = prufer(zp, theta);
    EXPECT_LT(unitarity_defect(w.W), 1e-10);
    EXPECT_LT(dist(w.W, prufer_raw(zp, theta)), 1e-9);
  }
}

TEST(Prufer, EigenvalueOneAtOperatorEigenvalues) {
  const Zipper zp = random_finite(2, 6, 112);
  const auto spec = dense_spectrum(assemble_finite(zp));
  for (const auto& p : spec.points)
    EXPECT_EQ(eigenvalue_one_multiplicity(prufer(zp, p.theta).W, 1e-6), p.multiplicity);
  EXPECT_EQ(eigenvalue_one_multiplicity(prufer(zp, 0.5 * (spec.points[0].theta + spec.points[1].theta)).W, 1e-6), 0);
}

TEST(Prufer, RotationPositive) {
  Rng rng(113);
  const Zipper f = random_finite(2, 6, 114);
  const Zipper p = random_periodic(2, 6, 115);
  for (int i = 0; i < 10; ++i) {
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    EXPECT_GT(rotation_positivity_check(f, theta), 0.0);
    EXPECT_GT(rotation_positivity_check(p, theta), 0.0);
  }
}

TEST(Prufer, FiniteDifferenceConvergesQuadratically) {
  const Zipper zp = random_finite(1, 4, 116);
  const double theta = 1.1;
  const double a = rotation_positivity_check(zp, theta, 4e-2);
  const double b = rotation_positivity_check(zp, theta, 2e-2);
  const double c = rotation_positivity_check(zp, theta, 1e-2);
  const double ratio = std::abs(a - b) / std::abs(b - c);
  EXPECT_GT(ratio, 2.5);
  EXPECT_LT(ratio, 6.0);
}

TEST(Prufer, PrintedPeriodicOrderIsAdjoint) {
  const Zipper zp = random_periodic(1, 4, 117);
  const double theta = 0.8, h = 1e-5;
  auto printed = [&](double t) {
    const CMatrix tn = transfer_product(zp, std::polar(1.0, t), zp.N);
    const CMatrix psi_n = checkerboard_sum(identity(2 * zp.L), tn) * doubled_initial_frame(zp.L);
    return CMatrix(stereographic_doubled(psi_n).adjoint() * stereographic_doubled(doubled_initial_frame(zp.L)));
  };
  EXPECT_LT(dist(printed(theta), prufer_periodic(zp, theta).W.adjoint()), 1e-9);
  const CMatrix w = printed(theta);
  const CMatrix d = (printed(theta + h) - printed(theta - h)) / (2.0 * h);
  const CMatrix r = -kI * w.adjoint() * d;
  EXPECT_LT(hermitian_eigen(0.5 * (r + r.adjoint())).values.maxCoeff(), 0.0);
}

TEST(Prufer, WrongFlavorRejected) {
  EXPECT_THROW(prufer(random_periodic(1, 4, 118), 0.1), Error);
  EXPECT_THROW(prufer_periodic(random_finite(1, 4, 119), 0.1), Error);
}

// ---------------------------------------------------------------------------
// Spectra

TEST(Oscillation, FiniteMatchesDense) {
  for (Eigen::Index l : {1, 2, 3}) {
    for (int n : {2, 4, 8, 12}) {
      const Zipper zp = random_finite(l, n, 120 + 10 * l + n);
      const OscillationReport rep = oscillation_report(zp);
      EXPECT_EQ(rep.spectrum.total, n * l);
      EXPECT_EQ(rep.track.monotonicity_violations, 0);
      expect_same_spectrum(rep.spectrum, dense_spectrum(assemble_finite(zp)), 1e-7);
    }
  }
}

TEST(Oscillation, PeriodicMatchesDense) {
  for (Eigen::Index l : {1, 2}) {
    for (int n : {2, 4, 6}) {
      const Zipper zp = random_periodic(l, n, 150 + 10 * l + n);
      const SpectrumResult s = spectrum_periodic(zp);
      EXPECT_EQ(s.total, n * l);
      expect_same_spectrum(s, dense_spectrum(assemble_periodic(zp)), 1e-7);
    }
  }
}

TEST(Oscillation, FreeOperatorsWithMultiplicity) {
  const Zipper p = random_periodic(1, 2, 1, Ensemble::Free);
  const SpectrumResult s = spectrum_periodic(p);
  ASSERT_EQ(s.points.size(), 1u);
  EXPECT_EQ(s.points[0].multiplicity, 2);
  EXPECT_LT(std::abs(s.points[0].value - 1.0), 1e-8);
  const Zipper f = random_finite(2, 4, 1, Ensemble::Free);
  expect_same_spectrum(spectrum_by_oscillation(f), dense_spectrum(assemble_finite(f)), 1e-7);
}

TEST(Oscillation, DirectSumDoublesMultiplicities) {
  const Zipper a = random_finite(1, 6, 170);
  const Zipper zp = direct_sum(a, a);
  const SpectrumResult s = spectrum_by_oscillation(zp);
  const SpectrumResult single = spectrum_by_oscillation(a);
  ASSERT_EQ(s.points.size(), single.points.size());
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    EXPECT_EQ(s.points[i].multiplicity, 2 * single.points[i].multiplicity);
    EXPECT_NEAR(s.points[i].theta, single.points[i].theta, 1e-7);
  }
}

TEST(Oscillation, WorkerCountDoesNotChangeResult) {
  const Zipper zp = random_finite(2, 8, 171);
  OscillationOptions one, four;
  four.workers = 4;
  const auto a = oscillation_report(zp, one).spectrum, b = oscillation_report(zp, four).spectrum;
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) EXPECT_EQ(a.points[i].theta, b.points[i].theta);
}

TEST(Bands, ZeroMomentumColumnIsPeriodicSpectrum) {
  const Zipper zp = random_periodic(2, 4, 180);
  const int k_grid = 8;
  const BandStructure b = bands(zp, k_grid);
  ASSERT_EQ(b.k.size(), 8u);
  const std::size_t j0 = k_grid / 2 - 1;
  EXPECT_NEAR(b.k[j0], 0.0, 1e-15);
  expect_same_spectrum(b.spectra[j0], dense_spectrum(assemble_periodic(zp)), 1e-7);
  for (std::size_t j = 0; j < b.k.size(); ++j) EXPECT_EQ(b.spectra[j].total, 8);
}

TEST(Bands, ContinuousInMomentum) {
  const Zipper zp = random_periodic(1, 4, 181);
  const int k_grid = 32;
  const BandStructure b = bands(zp, k_grid);
  const double dk = 2.0 * std::numbers::pi / 4 / k_grid;
  EXPECT_LE(b.max_adjacent_jump(), std::numbers::pi * dk + 1e-8);
}

TEST(Bands, FreePeriodTwoCoversCircle) {
  const Zipper zp = random_periodic(1, 2, 1, Ensemble::Free);
  const int k_grid = 64;
  const BandStructure b = bands(zp, k_grid);
  for (std::size_t j = 0; j < b.k.size(); ++j) {
    const auto ph = b.phases(j);
    ASSERT_EQ(ph.size(), 2u);
    // Fiber eigenphases are +-2k.
    for (double p : ph) {
      const double d1 = std::abs(std::arg(std::polar(1.0, p - 2.0 * b.k[j])));
      const double d2 = std::abs(std::arg(std::polar(1.0, p + 2.0 * b.k[j])));
      EXPECT_LT(std::min(d1, d2), 1e-8);
    }
  }
  EXPECT_LT(b.max_gap(), 2.0 * std::numbers::pi / k_grid + 1e-9);
}
