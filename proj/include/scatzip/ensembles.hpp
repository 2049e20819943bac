#pragma once

// Seeded random instances.  Uniform and normal variates are derived by hand
// from mt19937_64 so that streams are identical across standard libraries.

#include <cstdint>
#include <random>
#include <string>

#include "scatzip/zipper.hpp"

namespace scatzip {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  Complex complex_normal() { return Complex(normal(), normal()) / std::numbers::sqrt2; }

  Complex unit_phase() { return std::polar(1.0, 2.0 * std::numbers::pi * uniform()); }

  CMatrix gaussian(Eigen::Index rows, Eigen::Index cols) {
    CMatrix g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = complex_normal();
    return g;
  }

  CVector gaussian_vector(Eigen::Index n) { return gaussian(n, 1).col(0); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer, used to derive independent per-index seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Haar-distributed unitary from the QR factorization of a complex Ginibre
/// matrix with the phases of R's diagonal moved into Q.
inline CMatrix haar_unitary(Rng& rng, Eigen::Index l) {
  const CMatrix g = rng.gaussian(l, l);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < l; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

/// W1 diag(s) W2 with singular values s = max_sv * sqrt(u), u uniform; for
/// L = 1 this is uniform in the disc of radius max_sv.
inline CMatrix random_contraction(Rng& rng, Eigen::Index l, double max_sv = 0.9) {
  const CMatrix w1 = haar_unitary(rng, l);
  const CMatrix w2 = haar_unitary(rng, l);
  Eigen::VectorXcd s(l);
  for (Eigen::Index i = 0; i < l; ++i) s(i) = max_sv * std::sqrt(rng.uniform());
  return w1 * s.asDiagonal() * w2;
}

enum class Ensemble { Cmv, HaarGauge, Free };

inline Ensemble parse_ensemble(const std::string& name) {
  if (name == "cmv") return Ensemble::Cmv;
  if (name == "haar-gauge") return Ensemble::HaarGauge;
  if (name == "free") return Ensemble::Free;
  throw Error(ErrorCode::ParseError, "unknown ensemble '" + name + "'");
}

inline std::string to_string(Ensemble e) {
  switch (e) {
    case Ensemble::Cmv: return "cmv";
    case Ensemble::HaarGauge: return "haar-gauge";
    case Ensemble::Free: return "free";
  }
  return "cmv";
}

inline ScatteringBlock random_block(Rng& rng, Eigen::Index l, Ensemble e) {
  switch (e) {
    case Ensemble::Free: return ScatteringBlock::build(zeros(l, l), identity(l), identity(l));
    case Ensemble::Cmv: return ScatteringBlock::build(random_contraction(rng, l), identity(l), identity(l));
    case Ensemble::HaarGauge: {
      const CMatrix alpha = random_contraction(rng, l);
      const CMatrix u = haar_unitary(rng, l);
      const CMatrix v = haar_unitary(rng, l);
      return ScatteringBlock::build(alpha, u, v);
    }
  }
  throw Error(ErrorCode::ParseError, "unknown ensemble");
}

inline CMatrix random_boundary(Rng& rng, Eigen::Index l, Ensemble e) {
  return e == Ensemble::HaarGauge ? haar_unitary(rng, l) : identity(l);
}

inline Zipper random_finite(Eigen::Index l, int n, std::uint64_t seed, Ensemble e = Ensemble::HaarGauge) {
  if (n < 2 || n % 2 != 0) throw Error(ErrorCode::OddN, "N must be even and at least 2");
  Rng rng(seed);
  const CMatrix u = random_boundary(rng, l, e);
  const CMatrix v = random_boundary(rng, l, e);
  std::map<int, ScatteringBlock> blocks;
  for (int k = 2; k <= n; ++k) blocks.emplace(k, random_block(rng, l, e));
  return make_finite(u, v, std::move(blocks));
}

inline Zipper random_periodic(Eigen::Index l, int n, std::uint64_t seed, Ensemble e = Ensemble::HaarGauge) {
  if (n < 2 || n % 2 != 0) throw Error(ErrorCode::OddN, "N must be even and at least 2");
  Rng rng(seed);
  std::map<int, ScatteringBlock> blocks;
  for (int k = 1; k <= n; ++k) blocks.emplace(k, random_block(rng, l, e));
  return make_periodic(std::move(blocks));
}

/// Semi-infinite zipper whose block n is drawn from its own seed, so that
/// any truncation or evaluation order sees the same blocks.
inline Zipper random_semi_infinite(Eigen::Index l, std::uint64_t seed, Ensemble e = Ensemble::HaarGauge) {
  Rng rng(mix_seed(seed, 0));
  const CMatrix u = random_boundary(rng, l, e);
  return make_semi_infinite(u, [l, seed, e](int n) {
    Rng local(mix_seed(seed, static_cast<std::uint64_t>(n)));
    return random_block(local, l, e);
  });
}

}  // namespace scatzip
