#pragma once

// Matrix Pruefer phases of finite and periodic zippers, eigenvalue counting
// by monotone rotation of their eigenphases through 1, and band structures
// over Bloch momenta.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "scatzip/parallel.hpp"
#include "scatzip/transfer.hpp"

namespace scatzip {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kNudge = 1e-12;

// ---------------------------------------------------------------------------
// Lagrangian planes

/// Stereographic chart pi(Phi) = a b^{-1} for Phi = (a; b).
inline CMatrix stereographic(const CMatrix& frame) {
  const Eigen::Index l = frame.cols();
  if (frame.rows() != 2 * l) throw Error(ErrorCode::DimensionMismatch, "frame must be 2L x L");
  const CMatrix b = frame.bottomRows(l);
  return frame.topRows(l) * checked_inverse(b, 1e-12 * std::max(1.0, op_norm(frame)), ErrorCode::Singular, "lower frame block");
}

/// Frame (U; 1) b of the Lagrangian plane with chart U.
inline CMatrix lagrangian_frame(const CMatrix& u, const CMatrix& b) { return stack(u, identity(u.rows())) * b; }

inline double lagrangian_defect(const CMatrix& frame) {
  const CMatrix q = thin_qr(frame).q;
  return (q.adjoint() * form_l(frame.cols()) * q).norm();
}

/// dim(Phi cap Psi) from principal angles.
inline int intersection_dim_angles(const CMatrix& x, const CMatrix& y, double tol = 1e-8) {
  const Eigen::VectorXd c = principal_cosines(x, y);
  int k = 0;
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (c(i) > 1.0 - tol) ++k;
  return k;
}

/// dim Ker(Phi^* L Psi) for orthonormalized frames.
inline int intersection_dim_kernel(const CMatrix& x, const CMatrix& y, double tol = 1e-8) {
  const CMatrix qx = thin_qr(x).q, qy = thin_qr(y).q;
  const Eigen::VectorXd s = singular_values(qx.adjoint() * form_l(x.cols()) * qy);
  int k = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) < tol) ++k;
  return k;
}

/// Number of eigenphases of a unitary within tol of 0 (mod 2 pi).
inline int eigenvalue_one_multiplicity(const CMatrix& w, double tol = 1e-8) {
  int k = 0;
  for (double p : eigenphases(w))
    if (p < tol || kTwoPi - p < tol) ++k;
  return k;
}

/// Multiplicity of 1 as eigenvalue of pi(Phi)^* pi(Psi).
inline int intersection_dim_chart(const CMatrix& x, const CMatrix& y, double tol = 1e-8) {
  return eigenvalue_one_multiplicity(stereographic(x).adjoint() * stereographic(y), tol);
}

// ---------------------------------------------------------------------------
// Checkerboard sums

/// [[A,0,B,0],[0,A',0,B'],[C,0,D,0],[0,C',0,D']] in L x L blocks.
inline CMatrix checkerboard_sum(const CMatrix& t1, const CMatrix& t2) {
  if (t1.rows() != t2.rows() || t1.cols() != t2.cols() || t1.rows() != t1.cols() || t1.rows() % 2 != 0)
    throw Error(ErrorCode::SizeMismatch, "checkerboard sum needs two square matrices of equal even size");
  const Eigen::Index l = t1.rows() / 2;
  CMatrix out = zeros(4 * l, 4 * l);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      out.block(2 * r * l, 2 * c * l, l, l) = t1.block(r * l, c * l, l, l);
      out.block((2 * r + 1) * l, (2 * c + 1) * l, l, l) = t2.block(r * l, c * l, l, l);
    }
  return out;
}

/// L-hat = L checkerboard L = diag(1, 1, -1, -1).
inline CMatrix form_l_hat(Eigen::Index l) { return checkerboard_sum(form_l(l), form_l(l)); }

/// Psi-hat_0 = [[0,1],[1,0],[1,0],[0,1]]: the plane whose second copy equals
/// its first copy, so intersections with it are fixed points of T.
inline CMatrix doubled_initial_frame(Eigen::Index l) {
  CMatrix f = zeros(4 * l, 2 * l);
  f.block(0, l, l, l) = identity(l);
  f.block(l, 0, l, l) = identity(l);
  f.block(2 * l, 0, l, l) = identity(l);
  f.block(3 * l, l, l, l) = identity(l);
  return f;
}

/// pi-hat(Psi) = psi_- psi_+^{-1}, psi_+ the upper and psi_- the lower 2L rows.
inline CMatrix stereographic_doubled(const CMatrix& frame) {
  const Eigen::Index m = frame.cols();
  const CMatrix plus = frame.topRows(m);
  return frame.bottomRows(m) *
         checked_inverse(plus, 1e-12 * std::max(1.0, op_norm(frame)), ErrorCode::DegenerateFrame, "upper doubled frame block");
}

// ---------------------------------------------------------------------------
// Pruefer phases

struct PruferPhase {
  Complex z;
  double theta = 0.0;
  CMatrix W;
  double nudge = 0.0;  // theta shift applied when the first evaluation was degenerate
};

namespace detail {

/// phi(S_n) for every site; the z dependence of even sites is a rescaling.
struct SiteCache {
  std::vector<CMatrix> phis;  // index n - 1
  Eigen::Index l = 1;

  explicit SiteCache(const Zipper& zp) : l(zp.L) {
    for (int n = 1; n <= zp.N; ++n) {
      if (n == 1 && zp.flavor != Flavor::Periodic)
        phis.push_back(block_diag(zp.boundary_u, identity(zp.L)));
      else
        phis.push_back(phi(zp.block(n)));
    }
  }

  CMatrix transfer(int n, Complex z) const {
    CMatrix t = phis[static_cast<std::size_t>(n - 1)];
    if (n % 2 == 0) {
      t.topLeftCorner(l, l) /= z;
      t.bottomRightCorner(l, l) *= z;
    }
    return t;
  }
};

inline CMatrix orthonormal(const CMatrix& f) { return thin_qr(f).q; }

inline bool invertible_half(const CMatrix& block) { return smallest_singular_value(block) > 1e-8; }

/// Finite zipper cut at site m: the left plane T(m,0)(1;1) and the right
/// plane T(N,m)^{-1}(1;V), both orthonormalized.
inline std::pair<CMatrix, CMatrix> cut_planes(const Zipper& zp, const SiteCache& cache, Complex z, int m) {
  const Eigen::Index l = zp.L;
  const CMatrix lf = form_l(l);
  CMatrix left = orthonormal(initial_frame(l));
  for (int n = 1; n <= m; ++n) left = orthonormal(cache.transfer(n, z) * left);
  CMatrix right = orthonormal(stack(identity(l), zp.boundary_v));
  for (int n = zp.N; n > m; --n) right = orthonormal(lf * cache.transfer(n, z).adjoint() * lf * right);
  return {left, right};
}

/// pi(left)^* pi(right); at m = N this is psi_N phi_N^{-1} V^*.
inline CMatrix relative_phase(const CMatrix& left, const CMatrix& right, bool& degenerate) {
  const Eigen::Index l = left.cols();
  degenerate = !invertible_half(left.bottomRows(l)) || !invertible_half(right.bottomRows(l));
  if (degenerate) return {};
  const CMatrix pl = left.topRows(l) * left.bottomRows(l).partialPivLu().inverse();
  const CMatrix pr = right.topRows(l) * right.bottomRows(l).partialPivLu().inverse();
  return pl.adjoint() * pr;
}

/// Doubled frame propagated through one period starting after site m.
inline CMatrix periodic_cut_w(const Zipper& zp, const SiteCache& cache, Complex z, int m, bool& degenerate) {
  const Eigen::Index l = zp.L;
  const CMatrix one = identity(2 * l);
  const CMatrix f0 = doubled_initial_frame(l);
  CMatrix f = f0;
  for (int k = 1; k <= zp.N; ++k) {
    const int n = (m + k - 1) % zp.N + 1;
    f = orthonormal(checkerboard_sum(one, cache.transfer(n, z)) * f);
  }
  const CMatrix plus = f.topRows(2 * l);
  degenerate = !invertible_half(plus);
  if (degenerate) return {};
  const CMatrix pi_n = f.bottomRows(2 * l) * plus.partialPivLu().inverse();
  // pi-hat(Psi-hat_0)^* pi-hat(Psi-hat_N); the reverse order is its adjoint and turns clockwise.
  return stereographic_doubled(f0).adjoint() * pi_n;
}

/// Relative phase at cut m; m = N (finite) or m = 0 (periodic) is the
/// Pruefer phase proper.
inline CMatrix cut_w(const Zipper& zp, const SiteCache& cache, Complex z, int m, bool& degenerate) {
  if (zp.flavor == Flavor::Periodic) return periodic_cut_w(zp, cache, z, m, degenerate);
  const auto [left, right] = cut_planes(zp, cache, z, m);
  return relative_phase(left, right, degenerate);
}

/// Relative phases at every cut m = 0..N (finite) or 0..N-1 (periodic).
inline std::vector<CMatrix> all_cut_w(const Zipper& zp, const SiteCache& cache, Complex z, bool& degenerate) {
  std::vector<CMatrix> out;
  degenerate = false;
  if (zp.flavor == Flavor::Periodic) {
    for (int m = 0; m < zp.N && !degenerate; ++m) out.push_back(periodic_cut_w(zp, cache, z, m, degenerate));
    return out;
  }
  const Eigen::Index l = zp.L;
  const CMatrix lf = form_l(l);
  std::vector<CMatrix> lefts(static_cast<std::size_t>(zp.N + 1)), rights(static_cast<std::size_t>(zp.N + 1));
  lefts[0] = orthonormal(initial_frame(l));
  for (int n = 1; n <= zp.N; ++n) lefts[n] = orthonormal(cache.transfer(n, z) * lefts[n - 1]);
  rights[zp.N] = orthonormal(stack(identity(l), zp.boundary_v));
  for (int n = zp.N; n >= 1; --n) rights[n - 1] = orthonormal(lf * cache.transfer(n, z).adjoint() * lf * rights[n]);
  for (int m = 0; m <= zp.N && !degenerate; ++m) out.push_back(relative_phase(lefts[m], rights[m], degenerate));
  return out;
}

inline int primary_cut(const Zipper& zp) { return zp.flavor == Flavor::Periodic ? 0 : zp.N; }

inline PruferPhase evaluate_cut(const Zipper& zp, const SiteCache& cache, double theta, int m) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    const double t = theta + attempt * kNudge;
    const Complex z = std::polar(1.0, t);
    bool degenerate = false;
    CMatrix w = cut_w(zp, cache, z, m, degenerate);
    if (!degenerate) return PruferPhase{z, t, std::move(w), t - theta};
  }
  throw Error(ErrorCode::DegeneratePhiBlock, "Pruefer phase undefined at theta = " + std::to_string(theta));
}

inline PruferPhase evaluate(const Zipper& zp, const SiteCache& cache, double theta) {
  return evaluate_cut(zp, cache, theta, primary_cut(zp));
}

inline void require_oscillation_flavor(const Zipper& zp, Flavor f) {
  if (zp.flavor != f)
    throw Error(ErrorCode::WrongFlavor, std::string("expected a ") + std::string(to_string(f)) + " zipper");
  zp.validate();
}

}  // namespace detail

/// W = psi_N phi_N^{-1} V^* at z = e^{i theta}, with (phi_N; psi_N) the
/// plane of T(N,0)(1;1).
inline PruferPhase prufer(const Zipper& zp, double theta) {
  detail::require_oscillation_flavor(zp, Flavor::Finite);
  return detail::evaluate(zp, detail::SiteCache(zp), theta);
}

/// W-hat = pi-hat(Psi-hat_0)^* pi-hat(Psi-hat_N), Psi-hat_N propagated with
/// 1 checkerboard T_n.
inline PruferPhase prufer_periodic(const Zipper& zp, double theta) {
  detail::require_oscillation_flavor(zp, Flavor::Periodic);
  return detail::evaluate(zp, detail::SiteCache(zp), theta);
}

/// W from the unnormalized product T(N,0)(1;1); for cross-checks only.
inline CMatrix prufer_raw(const Zipper& zp, double theta) {
  detail::require_oscillation_flavor(zp, Flavor::Finite);
  const CMatrix f = transfer_product(zp, std::polar(1.0, theta), zp.N) * initial_frame(zp.L);
  return f.bottomRows(zp.L) * f.topRows(zp.L).partialPivLu().inverse() * zp.boundary_v.adjoint();
}

/// Smallest eigenvalue of the Hermitian part of (1/i) W^* dW/dtheta, with the
/// derivative from a central difference of step h.
/// cut < 0 selects the Pruefer phase proper; otherwise the relative phase at that cut.
inline double rotation_positivity_check(const Zipper& zp, double theta, double h = 1e-5, int cut = -1) {
  const detail::SiteCache cache(zp);
  const int m = cut < 0 ? detail::primary_cut(zp) : cut;
  const PruferPhase w0 = detail::evaluate_cut(zp, cache, theta, m);
  const PruferPhase wp = detail::evaluate_cut(zp, cache, theta + h, m);
  const PruferPhase wm = detail::evaluate_cut(zp, cache, theta - h, m);
  const CMatrix d = (wp.W - wm.W) / (wp.theta - wm.theta);
  const CMatrix r = -kI * w0.W.adjoint() * d;
  return hermitian_eigen(0.5 * (r + r.adjoint())).values(0);
}

// ---------------------------------------------------------------------------
// Crossing counts

struct PhaseTrack {
  std::vector<double> theta;                 // grid points, increasing, spanning 2 pi
  std::vector<std::vector<double>> phases;   // sorted eigenphases in [0, 2 pi) per grid point
  std::vector<std::vector<double>> branches; // unwrapped continuous branches per grid point
  int monotonicity_violations = 0;
};

struct OscillationOptions {
  int grid_size = 0;         // 0: 8 N L
  double refine_tol = 1e-10; // bisection width in theta
  int max_retries = 2;       // grid doublings on a count mismatch
  int workers = 1;
};

struct OscillationReport {
  SpectrumResult spectrum;
  PhaseTrack track;
  int grid_used = 0;
  int retries = 0;
  int expected = 0;
  std::vector<std::string> log;
};

namespace detail {

inline double phase_sum(const std::vector<double>& p) {
  double s = 0.0;
  for (double x : p) s += x;
  return s;
}

inline double mod_2pi(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

/// Rotation from a to b (in [0, 2 pi)), read off det W, and the number of
/// eigenphases that pass through 0 on the way.  Valid while the total
/// rotation over the step stays below 2 pi.
struct Step {
  double rotation = 0.0;
  int wraps = 0;
};

inline Step step_between(const std::vector<double>& a, const std::vector<double>& b) {
  Step s;
  s.rotation = mod_2pi(phase_sum(b) - phase_sum(a));
  s.wraps = static_cast<int>(std::lround((phase_sum(a) + s.rotation - phase_sum(b)) / kTwoPi));
  return s;
}

struct Sample {
  double theta;
  std::vector<std::vector<double>> cuts;  // sorted eigenphases of W_m per cut m
};

/// The cut whose wrap count over a step is largest.  Rotation is monotone at
/// every cut and aliasing only drops whole turns, so the largest count is
/// the best lower bound; ties go to the smallest rotation.
inline std::pair<std::size_t, Step> best_cut(const Sample& a, const Sample& b) {
  std::size_t best = 0;
  Step bs = step_between(a.cuts[0], b.cuts[0]);
  for (std::size_t m = 1; m < a.cuts.size(); ++m) {
    const Step s = step_between(a.cuts[m], b.cuts[m]);
    if (s.wraps > bs.wraps || (s.wraps == bs.wraps && s.rotation < bs.rotation)) {
      best = m;
      bs = s;
    }
  }
  return {best, bs};
}

/// Counts and locates the upward passages of eigenphases through 0 on
/// [theta0, theta0 + 2 pi).  Each step is read at every cut site: a state
/// localized far from the primary cut turns W_N through a full circle in an
/// exponentially narrow window, but turns the relative phase at a cut near
/// its center slowly.
class CrossingCounter {
 public:
  CrossingCounter(const Zipper& zp, const OscillationOptions& opt) : zp_(zp), cache_(zp), opt_(opt) {}

  /// Grid samples are moved off crossings: a phase at 0 to rounding may land
  /// on either side of the cut at different sites.
  Sample sample(double theta) const {
    Sample s = sample_at(theta);
    for (int k = 1; k <= 4 && distance_to_one(s) < 1e-9; ++k) s = sample_at(theta + 1e-7 * k);
    return s;
  }

  Sample sample_at(double theta) const {
    for (int attempt = 0; attempt < 2; ++attempt) {
      const double t = theta + attempt * kNudge;
      bool degenerate = false;
      const std::vector<CMatrix> ws = all_cut_w(zp_, cache_, std::polar(1.0, t), degenerate);
      if (degenerate) continue;
      Sample s{t, {}};
      for (const auto& w : ws) s.cuts.push_back(eigenphases(w));
      return s;
    }
    throw Error(ErrorCode::DegeneratePhiBlock, "Pruefer phase undefined at theta = " + std::to_string(theta));
  }

  static double distance_to_one(const Sample& s) {
    double d = kTwoPi;
    for (const auto& c : s.cuts)
      for (double p : c) d = std::min({d, p, kTwoPi - p});
    return d;
  }

  std::vector<double> sample_cut(double theta, std::size_t m) const {
    return eigenphases(evaluate_cut(zp_, cache_, theta, static_cast<int>(m)).W);
  }

  /// Start angle at which no eigenphase sits near 0.
  double start_angle() const {
    double best = 0.0, best_dist = -1.0;
    for (int k = 0; k < 16; ++k) {
      const double t = 0.1234567 * k;
      const double d = distance_to_one(sample_at(t));
      if (d > 1e-3) return t;
      if (d > best_dist) {
        best_dist = d;
        best = t;
      }
    }
    return best;
  }

  std::vector<Sample> grid(double t0, int size) const {
    return parallel_map<Sample>(static_cast<std::size_t>(size) + 1, opt_.workers, [&](std::size_t i) {
      return sample(t0 + kTwoPi * static_cast<double>(i) / size);
    });
  }

  /// Splits steps whose rotation at the chosen cut exceeds pi/2.
  void refine_coarse(std::vector<Sample>& g) const {
    for (int depth = 0; depth < 12; ++depth) {
      std::vector<std::size_t> split;
      for (std::size_t i = 0; i + 1 < g.size(); ++i)
        if (best_cut(g[i], g[i + 1]).second.rotation > 0.5 * std::numbers::pi) split.push_back(i);
      if (split.empty()) return;
      const std::vector<Sample> mids = parallel_map<Sample>(split.size(), opt_.workers, [&](std::size_t j) {
        return sample(0.5 * (g[split[j]].theta + g[split[j] + 1].theta));
      });
      std::vector<Sample> out;
      out.reserve(g.size() + mids.size());
      std::size_t next = 0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        out.push_back(std::move(g[i]));
        if (next < split.size() && split[next] == i) out.push_back(mids[next++]);
      }
      g = std::move(out);
    }
  }

  /// k-th passage through 0 in (a, b] at cut m, by bisection on the passage count.
  double locate(const Sample& a, const Sample& b, std::size_t m, int k) const {
    double lo = a.theta, hi = b.theta;
    for (int it = 0; it < 60 && hi - lo > opt_.refine_tol; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (step_between(a.cuts[m], sample_cut(mid, m)).wraps >= k)
        hi = mid;
      else
        lo = mid;
    }
    return 0.5 * (lo + hi);
  }

  std::size_t primary() const {
    return zp_.flavor == Flavor::Periodic ? 0 : static_cast<std::size_t>(zp_.N);
  }

 private:
  const Zipper& zp_;
  SiteCache cache_;
  OscillationOptions opt_;
};

/// Unwrapped branches of the Pruefer phase proper (cut c).
inline PhaseTrack build_track(const std::vector<Sample>& g, std::size_t c) {
  PhaseTrack t;
  if (g.empty()) return t;
  const std::size_t n = g.front().cuts[c].size();
  t.theta.push_back(g.front().theta);
  t.phases.push_back(g.front().cuts[c]);
  t.branches.push_back(g.front().cuts[c]);
  for (std::size_t i = 1; i < g.size(); ++i) {
    const auto& a = g[i - 1].cuts[c];
    const auto& b = g[i].cuts[c];
    // Whole turns the primary cut aliases away are restored from the best cut.
    const int w = best_cut(g[i - 1], g[i]).second.wraps;
    // Sorted matching by cyclic shift: the top w phases of a re-enter at the bottom of b.
    std::vector<double> next(n);
    const auto& prev = t.branches.back();
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t shifted = j + static_cast<std::size_t>(std::max(w, 0));
      const double delta = b[shifted % n] - a[j] + kTwoPi * static_cast<double>(shifted / n);
      if (delta < -1e-8) ++t.monotonicity_violations;
      next[j] = prev[j] + delta;
    }
    t.theta.push_back(g[i].theta);
    t.phases.push_back(b);
    t.branches.push_back(std::move(next));
  }
  return t;
}

inline OscillationReport run_oscillation(const Zipper& zp, const OscillationOptions& opt_in) {
  OscillationOptions opt = opt_in;
  const int expected = zp.N * static_cast<int>(zp.L);
  if (opt.grid_size <= 0) opt.grid_size = 8 * expected;
  if (opt.grid_size < 4 * expected)
    throw Error(ErrorCode::DimensionMismatch, "grid must have at least 4 N L points");
  const CrossingCounter counter(zp, opt);
  const double t0 = counter.start_angle();

  OscillationReport rep;
  rep.expected = expected;
  int size = opt.grid_size;
  for (int attempt = 0; attempt <= opt.max_retries; ++attempt) {
    std::vector<Sample> g = counter.grid(t0, size);
    counter.refine_coarse(g);
    struct Job {
      std::size_t step, cut;
      int k;
    };
    std::vector<Job> jobs;
    int total = 0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
      const auto [cut, st] = best_cut(g[i], g[i + 1]);
      for (int k = 1; k <= st.wraps; ++k) jobs.push_back({i, cut, k});
      total += st.wraps;
    }
    rep.grid_used = size;
    rep.retries = attempt;
    if (total != expected) {
      rep.log.push_back("grid " + std::to_string(size) + ": " + std::to_string(total) + " crossings, expected " +
                        std::to_string(expected));
      size *= 2;
      continue;
    }
    const std::vector<double> thetas = parallel_map<double>(jobs.size(), opt.workers, [&](std::size_t j) {
      const Job& jb = jobs[j];
      return mod_2pi(counter.locate(g[jb.step], g[jb.step + 1], jb.cut, jb.k));
    });
    rep.spectrum = cluster_phases(thetas, 10.0 * opt.refine_tol);
    rep.track = build_track(g, counter.primary());
    return rep;
  }
  std::string log;
  for (const auto& line : rep.log) log += "\n  " + line;
  throw Error(ErrorCode::CrossingCountMismatch,
              "crossing count differs from N L after " + std::to_string(opt.max_retries) + " grid doublings:" + log);
}

}  // namespace detail

/// Eigenvalues of U_N from the passages of the eigenphases of W^{e^{i theta}} through 0.
inline OscillationReport oscillation_report(const Zipper& zp, const OscillationOptions& opt = {}) {
  detail::require_oscillation_flavor(zp, Flavor::Finite);
  return detail::run_oscillation(zp, opt);
}

inline SpectrumResult spectrum_by_oscillation(const Zipper& zp, int grid_size = 0, double refine_tol = 1e-10) {
  OscillationOptions opt;
  opt.grid_size = grid_size;
  opt.refine_tol = refine_tol;
  return oscillation_report(zp, opt).spectrum;
}

/// Eigenvalues of the periodic operator from the 2L eigenphases of W-hat.
inline OscillationReport periodic_report(const Zipper& zp, const OscillationOptions& opt = {}) {
  detail::require_oscillation_flavor(zp, Flavor::Periodic);
  return detail::run_oscillation(zp, opt);
}

inline SpectrumResult spectrum_periodic(const Zipper& zp, int grid_size = 0, double refine_tol = 1e-10) {
  OscillationOptions opt;
  opt.grid_size = grid_size;
  opt.refine_tol = refine_tol;
  return periodic_report(zp, opt).spectrum;
}

// ---------------------------------------------------------------------------
// Bands

struct BandStructure {
  std::vector<double> k;                // uniform grid of (-pi/N, pi/N]
  std::vector<SpectrumResult> spectra;  // fiber spectrum per k

  /// Eigenphases at k index j, repeated by multiplicity, ascending.
  std::vector<double> phases(std::size_t j) const {
    std::vector<double> out;
    for (const auto& p : spectra[j].points)
      for (int m = 0; m < p.multiplicity; ++m) out.push_back(p.theta);
    return out;
  }

  /// Largest arc of the circle not hit by any fiber eigenvalue.
  double max_gap() const {
    std::vector<double> all;
    for (std::size_t j = 0; j < k.size(); ++j)
      for (double p : phases(j)) all.push_back(p);
    if (all.empty()) return kTwoPi;
    std::sort(all.begin(), all.end());
    double gap = all.front() + kTwoPi - all.back();
    for (std::size_t i = 1; i < all.size(); ++i) gap = std::max(gap, all[i] - all[i - 1]);
    return gap;
  }

  /// Largest jump of the sorted eigenphases between adjacent momenta,
  /// measured cyclically.
  double max_adjacent_jump() const {
    double worst = 0.0;
    for (std::size_t j = 1; j < k.size(); ++j) {
      const auto a = phases(j - 1), b = phases(j);
      if (a.size() != b.size()) return kTwoPi;
      // Minimal cyclic-shift matching.
      double best = kTwoPi;
      const std::size_t n = a.size();
      for (std::size_t s = 0; s < n; ++s) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = std::abs(b[(i + s) % n] - a[i]);
          m = std::max(m, std::min(d, kTwoPi - d));
        }
        best = std::min(best, m);
      }
      worst = std::max(worst, best);
    }
    return worst;
  }
};

inline std::vector<double> momentum_grid(int n, int k_grid_size) {
  if (k_grid_size < 1) throw Error(ErrorCode::DimensionMismatch, "k grid needs at least one point");
  std::vector<double> k;
  const double width = kTwoPi / n;
  for (int j = 0; j < k_grid_size; ++j) k.push_back(-0.5 * width + width * (j + 1) / k_grid_size);
  return k;
}

inline BandStructure bands(const Zipper& zp, int k_grid_size, double theta_tol = 1e-10, int workers = 1) {
  detail::require_oscillation_flavor(zp, Flavor::Periodic);
  BandStructure b;
  b.k = momentum_grid(zp.N, k_grid_size);
  OscillationOptions opt;
  opt.refine_tol = theta_tol;
  b.spectra = parallel_map<SpectrumResult>(b.k.size(), workers, [&](std::size_t j) {
    return periodic_report(fiber_zipper(zp, b.k[j]), opt).spectrum;
  });
  return b;
}

}  // namespace scatzip
