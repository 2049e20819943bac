#pragma once

// Zipper data (boundaries plus indexed scattering blocks) and assembly of
// the five-diagonal unitary U_N = V_N W_N in its finite, periodic and
// Bloch-Floquet fiber versions.

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "scatzip/scattering.hpp"

namespace scatzip {

enum class Flavor { Finite, Periodic, SemiInfinite };

inline constexpr std::string_view to_string(Flavor f) {
  switch (f) {
    case Flavor::Finite: return "finite";
    case Flavor::Periodic: return "periodic";
    case Flavor::SemiInfinite: return "semi-infinite";
  }
  return "finite";
}

/// Block source for semi-infinite zippers; must be a pure function of n.
using BlockGenerator = std::function<ScatteringBlock(int)>;

struct Zipper {
  Eigen::Index L = 1;
  int N = 0;  // number of sites; unused for semi-infinite zippers
  Flavor flavor = Flavor::Finite;
  CMatrix boundary_u;  // finite and semi-infinite
  CMatrix boundary_v;  // finite only
  std::map<int, ScatteringBlock> blocks;
  BlockGenerator generator;

  bool has_block(int n) const { return blocks.count(n) != 0 || (flavor == Flavor::SemiInfinite && generator); }

  /// Block S_n; semi-infinite zippers fall back to the generator.
  ScatteringBlock block(int n) const {
    if (auto it = blocks.find(n); it != blocks.end()) return it->second;
    if (flavor == Flavor::SemiInfinite && generator && n >= 2) return generator(n);
    throw Error(n == 1 ? ErrorCode::MissingS1 : ErrorCode::MissingBlock, "no scattering block at site " + std::to_string(n));
  }

  /// Finite zipper on sites 1..n with right boundary v.  Blocks 2..n are
  /// materialized once.
  Zipper truncated(int n, const CMatrix& v) const {
    if (flavor == Flavor::Periodic) throw Error(ErrorCode::WrongFlavor, "periodic zippers have no truncation");
    if (n < 2 || n % 2 != 0) throw Error(ErrorCode::OddN, "truncation length must be even and at least 2");
    Zipper out;
    out.L = L;
    out.N = n;
    out.flavor = Flavor::Finite;
    out.boundary_u = boundary_u;
    out.boundary_v = v;
    for (int k = 2; k <= n; ++k) out.blocks.emplace(k, block(k));
    return out;
  }

  Zipper with_boundary_v(const CMatrix& v) const {
    Zipper out = *this;
    out.boundary_v = v;
    return out;
  }

  /// Checks the structural invariants of the flavor.
  void validate(double tol = kDefaultTol) const {
    if (L < 1) throw Error(ErrorCode::DimensionMismatch, "L must be positive");
    if (flavor == Flavor::SemiInfinite) {
      require_unitary(boundary_u, tol, "boundary U");
      return;
    }
    if (N < 2 || N % 2 != 0) throw Error(ErrorCode::OddN, "N must be even and at least 2");
    if (flavor == Flavor::Finite) {
      require_unitary(boundary_u, tol, "boundary U");
      require_unitary(boundary_v, tol, "boundary V");
      if (boundary_u.rows() != L || boundary_v.rows() != L)
        throw Error(ErrorCode::DimensionMismatch, "boundary size differs from L");
    }
    const int first = flavor == Flavor::Periodic ? 1 : 2;
    for (int n = first; n <= N; ++n) {
      auto it = blocks.find(n);
      if (it == blocks.end())
        throw Error(n == 1 ? ErrorCode::MissingS1 : ErrorCode::MissingBlock, "no scattering block at site " + std::to_string(n));
      if (it->second.channels() != L) throw Error(ErrorCode::DimensionMismatch, "block size differs from L");
    }
  }
};

inline Zipper make_finite(const CMatrix& u, const CMatrix& v, std::map<int, ScatteringBlock> blocks) {
  Zipper z;
  z.L = u.rows();
  z.N = blocks.empty() ? 0 : blocks.rbegin()->first;
  z.flavor = Flavor::Finite;
  z.boundary_u = u;
  z.boundary_v = v;
  z.blocks = std::move(blocks);
  z.validate();
  return z;
}

inline Zipper make_periodic(std::map<int, ScatteringBlock> blocks) {
  Zipper z;
  if (blocks.empty()) throw Error(ErrorCode::MissingS1, "periodic zipper without blocks");
  z.L = blocks.begin()->second.channels();
  z.N = blocks.rbegin()->first;
  z.flavor = Flavor::Periodic;
  z.blocks = std::move(blocks);
  z.validate();
  return z;
}

inline Zipper make_semi_infinite(const CMatrix& u, BlockGenerator gen) {
  Zipper z;
  z.L = u.rows();
  z.flavor = Flavor::SemiInfinite;
  z.boundary_u = u;
  z.generator = std::move(gen);
  z.validate();
  return z;
}

/// Sparse block storage indexed by 1-based (row site, column site).
class BlockBandedUnitary {
 public:
  BlockBandedUnitary(Eigen::Index l, int n, bool periodic) : l_(l), n_(n), periodic_(periodic) {}

  Eigen::Index channels() const { return l_; }
  int sites() const { return n_; }
  bool periodic() const { return periodic_; }
  Eigen::Index dim() const { return l_ * n_; }
  const std::map<std::pair<int, int>, CMatrix>& blocks() const { return blocks_; }

  void add(int row, int col, const CMatrix& b) {
    auto [it, inserted] = blocks_.try_emplace({row, col}, b);
    if (!inserted) it->second += b;
  }

  CMatrix block(int row, int col) const {
    auto it = blocks_.find({row, col});
    return it == blocks_.end() ? zeros(l_, l_) : it->second;
  }

  CMatrix to_dense() const {
    CMatrix m = zeros(dim(), dim());
    for (const auto& [rc, b] : blocks_) m.block((rc.first - 1) * l_, (rc.second - 1) * l_, l_, l_) = b;
    return m;
  }

  /// Largest site distance among stored nonzero blocks, measured cyclically
  /// for periodic operators.
  int bandwidth(double tol = 0.0) const {
    int w = 0;
    for (const auto& [rc, b] : blocks_) {
      if (b.cwiseAbs().maxCoeff() <= tol) continue;
      int d = std::abs(rc.first - rc.second);
      if (periodic_) d = std::min(d, n_ - d);
      w = std::max(w, d);
    }
    return w;
  }

  friend BlockBandedUnitary operator*(const BlockBandedUnitary& a, const BlockBandedUnitary& b) {
    BlockBandedUnitary out(a.l_, a.n_, a.periodic_ || b.periodic_);
    for (const auto& [rk, x] : a.blocks_)
      for (const auto& [kc, y] : b.blocks_)
        if (rk.second == kc.first) out.add(rk.first, kc.second, x * y);
    return out;
  }

 private:
  Eigen::Index l_;
  int n_;
  bool periodic_;
  std::map<std::pair<int, int>, CMatrix> blocks_;
};

namespace detail {

inline void place_pair(BlockBandedUnitary& op, int left, int right, const CMatrix& s) {
  op.add(left, left, block_a(s));
  op.add(left, right, block_b(s));
  op.add(right, left, block_c(s));
  op.add(right, right, block_d(s));
}

inline BlockBandedUnitary even_factor(const Zipper& z, bool periodic) {
  BlockBandedUnitary v(z.L, z.N, periodic);
  for (int n = 2; n <= z.N; n += 2) place_pair(v, n - 1, n, z.block(n).matrix());
  return v;
}

}  // namespace detail

inline BlockBandedUnitary assemble_finite(const Zipper& z) {
  if (z.flavor != Flavor::Finite) throw Error(ErrorCode::WrongFlavor, "assemble_finite needs a finite zipper");
  z.validate();
  BlockBandedUnitary w(z.L, z.N, false);
  w.add(1, 1, z.boundary_u);
  for (int n = 3; n < z.N; n += 2) detail::place_pair(w, n - 1, n, z.block(n).matrix());
  w.add(z.N, z.N, z.boundary_v);
  return detail::even_factor(z, false) * w;
}

inline BlockBandedUnitary assemble_periodic(const Zipper& z) {
  if (z.flavor != Flavor::Periodic) throw Error(ErrorCode::WrongFlavor, "assemble_periodic needs a periodic zipper");
  z.validate();
  BlockBandedUnitary w(z.L, z.N, true);
  // S_1 couples site N (incoming left) with site 1.
  detail::place_pair(w, z.N, 1, z.block(1).matrix());
  for (int n = 3; n < z.N; n += 2) detail::place_pair(w, n - 1, n, z.block(n).matrix());
  return detail::even_factor(z, true) * w;
}

/// Periodic zipper whose blocks are S_j(k) = S(alpha_j, e^{-ik} U_j, e^{ik} V_j).
inline Zipper fiber_zipper(const Zipper& z, double k) {
  if (z.flavor != Flavor::Periodic) throw Error(ErrorCode::WrongFlavor, "fibers need a periodic zipper");
  Zipper out = z;
  for (auto& [n, b] : out.blocks) b = b.twisted(k);
  return out;
}

inline BlockBandedUnitary fiber(const Zipper& z, double k) { return assemble_periodic(fiber_zipper(z, k)); }

inline CVector apply(const BlockBandedUnitary& op, const CVector& x) {
  if (x.size() != op.dim()) throw Error(ErrorCode::DimensionMismatch, "vector length differs from N*L");
  const Eigen::Index l = op.channels();
  CVector y = CVector::Zero(op.dim());
  for (const auto& [rc, b] : op.blocks()) y.segment((rc.first - 1) * l, l) += b * x.segment((rc.second - 1) * l, l);
  return y;
}

struct SpectralPoint {
  Complex value;
  double theta = 0.0;  // in [0, 2 pi)
  int multiplicity = 1;
};

struct SpectrumResult {
  std::vector<SpectralPoint> points;  // ascending theta
  int total = 0;
};

inline constexpr int kDenseCap = 512;
inline constexpr double kClusterTol = 1e-7;

/// Groups sorted phases in [0, 2 pi) into clusters of width tol, treating
/// the circle cyclically.
inline SpectrumResult cluster_phases(std::vector<double> phases, double tol = kClusterTol) {
  std::sort(phases.begin(), phases.end());
  SpectrumResult out;
  out.total = static_cast<int>(phases.size());
  std::vector<std::vector<double>> groups;
  for (double p : phases) {
    if (!groups.empty() && p - groups.back().back() <= tol)
      groups.back().push_back(p);
    else
      groups.push_back({p});
  }
  if (groups.size() > 1 && groups.front().front() + 2.0 * std::numbers::pi - groups.back().back() <= tol) {
    for (double p : groups.front()) groups.back().push_back(p + 2.0 * std::numbers::pi);
    groups.erase(groups.begin());
  }
  for (const auto& g : groups) {
    Complex mean = 0.0;
    for (double p : g) mean += std::polar(1.0, p);
    SpectralPoint sp;
    sp.value = mean / std::abs(mean);
    sp.theta = phase_0_2pi(sp.value);
    sp.multiplicity = static_cast<int>(g.size());
    out.points.push_back(sp);
  }
  std::sort(out.points.begin(), out.points.end(), [](const auto& a, const auto& b) { return a.theta < b.theta; });
  return out;
}

inline SpectrumResult dense_spectrum(const CMatrix& u, int cap = kDenseCap, double tol_cluster = kClusterTol) {
  if (u.rows() > cap) throw Error(ErrorCode::CapExceeded, "dense spectrum limited to dimension " + std::to_string(cap));
  return cluster_phases(eigenphases(u), tol_cluster);
}

inline SpectrumResult dense_spectrum(const BlockBandedUnitary& op, int cap = kDenseCap, double tol_cluster = kClusterTol) {
  if (op.dim() > cap) throw Error(ErrorCode::CapExceeded, "dense spectrum limited to dimension " + std::to_string(cap));
  return dense_spectrum(op.to_dense(), cap, tol_cluster);
}

/// Direct sum of two zippers of the same flavor and length, with channel
/// blocks stacked block-diagonally.
inline Zipper direct_sum(const Zipper& a, const Zipper& b) {
  if (a.flavor != b.flavor || a.N != b.N) throw Error(ErrorCode::SizeMismatch, "direct sum needs matching zippers");
  Zipper out;
  out.L = a.L + b.L;
  out.N = a.N;
  out.flavor = a.flavor;
  if (a.flavor != Flavor::Periodic) out.boundary_u = block_diag(a.boundary_u, b.boundary_u);
  if (a.flavor == Flavor::Finite) out.boundary_v = block_diag(a.boundary_v, b.boundary_v);
  for (const auto& [n, blk] : a.blocks) {
    const auto& other = b.block(n);
    out.blocks.emplace(n, ScatteringBlock::build(block_diag(blk.alpha(), other.alpha()), block_diag(blk.u(), other.u()),
                                                 block_diag(blk.v(), other.v())));
  }
  return out;
}

}  // namespace scatzip
