#pragma once

// Invariant suites, one per module, run on seeded random instances.  Each
// check aggregates a worst-case value over its cases and compares it with a
// threshold.

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "scatzip/io.hpp"
#include "scatzip/oscillation.hpp"

namespace scatzip {

struct Check {
  std::string module;
  std::string name;
  double threshold = 0.0;
  bool upper = true;  // pass iff value <= threshold; otherwise value >= threshold
  int cases = 0;
  int failures = 0;
  double worst = 0.0;
  bool seen = false;

  void record(double value) {
    const bool ok = std::isfinite(value) && (upper ? value <= threshold : value >= threshold);
    if (!seen || (upper ? value > worst : value < worst) || !std::isfinite(value)) worst = value;
    seen = true;
    ++cases;
    if (!ok) ++failures;
  }
  /// Records an exact condition; worst is the number of failures.
  void require(bool ok) {
    ++cases;
    if (!ok) ++failures;
    worst = failures;
    seen = true;
  }
  bool passed() const { return cases > 0 && failures == 0; }
};

struct VerifyOptions {
  std::string suite = "all";
  std::uint64_t seed = 1;
  bool inject_fault = false;
};

struct VerifyReport {
  std::deque<Check> checks;
  std::vector<std::string> errors;  // exceptions escaping a module suite
  double seconds = 0.0;

  int passed() const {
    int n = 0;
    for (const auto& c : checks) n += c.passed() ? 1 : 0;
    return n;
  }
  int failed() const { return static_cast<int>(checks.size()) - passed() + static_cast<int>(errors.size()); }
  bool ok() const { return failed() == 0 && !checks.empty(); }
  const Check* find(const std::string& module, const std::string& name) const {
    for (const auto& c : checks)
      if (c.module == module && c.name == name) return &c;
    return nullptr;
  }

  std::string to_text() const {
    std::ostringstream out;
    for (const auto& c : checks) {
      out << (c.passed() ? "PASS " : "FAIL ") << c.module << "/" << c.name << "  cases=" << c.cases
          << " failures=" << c.failures << " worst=" << fmt(c.worst) << (c.upper ? " <= " : " >= ") << fmt(c.threshold)
          << "\n";
    }
    for (const auto& e : errors) out << "ERROR " << e << "\n";
    out << "checks: " << checks.size() << " passed: " << passed() << " failed: " << failed() << "\n";
    return out.str();
  }

  Json to_json() const {
    Json j;
    Json arr = Json::array();
    for (const auto& c : checks)
      arr.push_back(Json{{"module", c.module},
                         {"name", c.name},
                         {"pass", c.passed()},
                         {"cases", c.cases},
                         {"failures", c.failures},
                         {"worst", c.worst},
                         {"threshold", c.threshold}});
    j["checks"] = std::move(arr);
    j["errors"] = errors;
    j["passed"] = passed();
    j["failed"] = failed();
    return j;
  }
};

inline const std::vector<std::string>& verify_modules() {
  static const std::vector<std::string> m{"matrix_core", "scattering", "zipper",      "transfer",
                                          "weyl",        "measures",   "oscillation", "cli"};
  return m;
}

namespace detail {

class Suite {
 public:
  Suite(std::string module, std::deque<Check>& out) : module_(std::move(module)), out_(out) {}
  Check& add(const std::string& name, double threshold, bool upper = true) {
    Check c;
    c.module = module_;
    c.name = name;
    c.threshold = threshold;
    c.upper = upper;
    out_.push_back(c);
    return out_.back();
  }

 private:
  std::string module_;
  std::deque<Check>& out_;
};

inline double rel(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

inline Complex random_point_in_annulus(Rng& rng, double lo, double hi) {
  const double r = std::sqrt(lo * lo + (hi * hi - lo * lo) * rng.uniform());
  return std::polar(r, kTwoPi * rng.uniform());
}

inline CMatrix random_hermitian(Rng& rng, Eigen::Index l) {
  const CMatrix g = rng.gaussian(l, l);
  return 0.5 * (g + g.adjoint());
}

/// Unitary with an eigenvalue-1 eigenspace of dimension k and the other
/// eigenphases spread away from 0.
inline CMatrix unitary_with_fixed_space(Rng& rng, Eigen::Index l, int k) {
  const CMatrix q = haar_unitary(rng, l);
  Eigen::VectorXcd d(l);
  for (Eigen::Index i = 0; i < l; ++i) d(i) = i < k ? Complex(1.0) : std::polar(1.0, 0.5 + 5.0 * rng.uniform());
  return q * d.asDiagonal() * q.adjoint();
}

/// Unitary 2L x 2L built like S(alpha, U, V) but with a possibly
/// non-strict contraction alpha, so members and non-members both occur.
inline CMatrix scattering_like(const CMatrix& alpha, const CMatrix& u, const CMatrix& v) {
  const Eigen::Index l = alpha.rows();
  auto psd_sqrt = [](const CMatrix& m) {
    const auto e = hermitian_eigen(m);
    return hermitian_function(e, [](double x) { return Complex(std::sqrt(std::max(x, 0.0))); });
  };
  return from_blocks(alpha, psd_sqrt(identity(l) - alpha * alpha.adjoint()) * u,
                     v * psd_sqrt(identity(l) - alpha.adjoint() * alpha), -v * alpha.adjoint() * u);
}

struct InstanceShape {
  Eigen::Index L;
  int N;
};

inline std::vector<InstanceShape> desk_shapes(int n_max = 12) {
  std::vector<InstanceShape> s;
  for (Eigen::Index l = 1; l <= 3; ++l)
    for (int n = 2; n <= n_max; n += 2) s.push_back({l, n});
  return s;
}

inline std::uint64_t instance_seed(std::uint64_t seed, std::size_t i, std::uint64_t salt) {
  return mix_seed(seed ^ (salt * 0x9E3779B97F4A7C15ULL), i);
}

// ---------------------------------------------------------------------------

inline void verify_matrix_core(const VerifyOptions& opt, std::deque<Check>& out) {
  Suite s("matrix_core", out);
  Rng rng(instance_seed(opt.seed, 0, 1));
  Check& p1 = s.add("mobius_inverse_undoes_mobius", 1e-9);
  Check& p2 = s.add("mobius_inverse_right_action", 1e-9);
  Check& p3 = s.add("mobius_inverse_equals_inverse_action", 1e-9);
  Check& left = s.add("mobius_left_action", 1e-9);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index l = 1 + t % 3;
    const CMatrix a = identity(2 * l) + 0.3 * rng.gaussian(2 * l, 2 * l);
    const CMatrix b = identity(2 * l) + 0.3 * rng.gaussian(2 * l, 2 * l);
    const CMatrix z = 0.3 * rng.gaussian(l, l);
    const CMatrix w = mobius(a, z);
    p1.record(rel(mobius_inverse(w, a), z));
    p2.record(rel(mobius_inverse(w, a * b), mobius_inverse(mobius_inverse(w, a), b)));
    p3.record(rel(mobius_inverse(w, a), mobius(a.inverse(), w)));
    left.record(rel(mobius(a * b, z), mobius(a, mobius(b, z))));
  }
  Check& cu = s.add("cayley_unitary", 1e-14);
  Check& cj = s.add("cayley_intertwines_l_and_j", 1e-14);
  Check& disc = s.add("cayley_maps_upper_half_plane_into_disc", 0.0);
  for (Eigen::Index l = 1; l <= 4; ++l) {
    const CMatrix c = cayley(l);
    cu.record(unitarity_defect(c));
    cj.record((c.adjoint() * form_l(l) * c / kI - form_j(l)).norm());
  }
  for (int t = 0; t < 10; ++t) {
    const Eigen::Index l = 1 + t % 3;
    const CMatrix g = rng.gaussian(l, l);
    const CMatrix z = random_hermitian(rng, l) + kI * (g * g.adjoint() + 0.05 * identity(l));
    // i (Z^* - Z) = 2 Im Z > 0 in the matrix upper half-plane convention.
    const bool in_h = in_upper_half_plane(z);
    const bool in_d = in_siegel_disc(mobius(cayley(l), z));
    disc.require(in_h && in_d);
  }
  Check& sq = s.add("hermitian_sqrt_squares_back", 1e-10);
  Check& comm = s.add("hermitian_sqrt_commutes", 1e-10);
  Check& jac = s.add("jacobi_eigenpairs_residual", 1e-10);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index l = 1 + t % 6;
    const CMatrix g = rng.gaussian(l, l);
    const CMatrix m = g * g.adjoint();
    const CMatrix r = hermitian_sqrt(m);
    sq.record(rel(r * r, m));
    comm.record((r * m - m * r).norm() / std::max(1.0, m.norm()));
    const auto e = hermitian_eigen(m);
    jac.record((m * e.vectors - e.vectors * e.values.cast<Complex>().asDiagonal()).norm() / std::max(1.0, m.norm()));
  }
}

inline void verify_scattering(const VerifyOptions& opt, std::deque<Check>& out) {
  Suite s("scattering", out);
  Rng rng(instance_seed(opt.seed, 0, 2));
  std::vector<ScatteringBlock> blocks;
  for (int t = 0; t < 30; ++t) blocks.push_back(random_block(rng, 1 + t % 3, t % 2 ? Ensemble::HaarGauge : Ensemble::Cmv));
  if (opt.inject_fault) {
    // A block whose unitarity is broken at the 1e-3 level.
    const CMatrix m = blocks[3].matrix();
    CMatrix e = rng.gaussian(m.rows(), m.cols());
    e /= e.norm();
    blocks[3] = ScatteringBlock::unchecked(m + 1e-3 * e * m.norm() / std::sqrt(static_cast<double>(m.rows())));
  }
  Check& un = s.add("block_unitary", 1e-10);
  Check& six = s.add("block_relations", 1e-10);
  Check& rt1 = s.add("phi_inverse_of_phi", 1e-9);
  Check& rt2 = s.add("phi_of_phi_inverse", 1e-9);
  Check& lor = s.add("phi_conserves_l_form", 1e-9);
  for (const auto& b : blocks) {
    un.record(unitarity_defect(b.matrix()));
    double worst = 0.0;
    for (double r : block_relation_residuals(b.matrix())) worst = std::max(worst, r);
    six.record(worst);
    const CMatrix t = phi(b);
    lor.record(lorentz_defect(t) / std::max(1.0, t.squaredNorm()));
    try {
      rt1.record(rel(phi_inverse_matrix(t, 1e-6), b.matrix()));
      const CMatrix back = phi_inverse_matrix(t, 1e-6);
      rt2.record(rel(phi(back), t));
    } catch (const Error&) {
      rt1.record(std::numeric_limits<double>::infinity());
      rt2.record(std::numeric_limits<double>::infinity());
    }
  }
  Check& dec = s.add("decompose_recovers_parameters", 1e-9);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (opt.inject_fault && i == 3) continue;
    const auto d = ScatteringBlock::decompose(blocks[i].matrix());
    dec.record(std::max({rel(d.alpha(), blocks[i].alpha()), rel(d.u(), blocks[i].u()), rel(d.v(), blocks[i].v())}));
  }
  // Membership predicates on members and non-members (decoupled channels).
  Check& pred = s.add("membership_predicates_agree", 0.0);
  for (int t = 0; t < 40; ++t) {
    const Eigen::Index l = 1 + t % 3;
    CMatrix alpha = random_contraction(rng, l, 0.95);
    if (t % 2 == 1) {
      // Push one singular value of alpha to 1.
      Eigen::JacobiSVD<CMatrix> svd(alpha, Eigen::ComputeFullU | Eigen::ComputeFullV);
      Eigen::VectorXcd sv = svd.singularValues().cast<Complex>();
      sv(0) = 1.0;
      alpha = svd.matrixU() * sv.asDiagonal() * svd.matrixV().adjoint();
    }
    const CMatrix m = scattering_like(alpha, haar_unitary(rng, l), haar_unitary(rng, l));
    // sigma_min(beta)^2 = 1 - |alpha|^2, so the contraction tests use tol^2.
    const double tol = 1e-6;
    const bool b_inv = smallest_singular_value(block_b(m)) > tol;
    const bool c_inv = smallest_singular_value(block_c(m)) > tol;
    const bool a_con = op_norm(block_a(m)) < 1.0 - tol * tol;
    const bool d_con = op_norm(block_d(m)) < 1.0 - tol * tol;
    pred.require(b_inv == c_inv && c_inv == a_con && a_con == d_con && a_con == (t % 2 == 0));
  }
}

inline void verify_zipper(const VerifyOptions& opt, std::deque<Check>& out) {
  Suite s("zipper", out);
  Check& fu = s.add("finite_operator_unitary", 1e-10);
  Check& f5 = s.add("finite_operator_five_diagonal", 0.0);
  Check& pu = s.add("periodic_operator_unitary", 1e-10);
  Check& p5 = s.add("periodic_operator_five_diagonal", 0.0);
  Check& fib = s.add("fibers_unitary", 1e-10);
  Check& fk = s.add("fiber_depends_on_k_through_phases", 1e-12);
  Check& cnt = s.add("dense_count_is_NL", 0.0);
  auto outside_band = [](const CMatrix& u, Eigen::Index l, int n, bool periodic) {
    double worst = 0.0;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        int d = std::abs(r - c);
        if (periodic) d = std::min(d, n - d);
        if (d > 2) worst = std::max(worst, u.block(r * l, c * l, l, l).cwiseAbs().maxCoeff());
      }
    return worst;
  };
  const auto shapes = desk_shapes();
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto [l, n] = shapes[i];
    const Ensemble e = i % 2 ? Ensemble::HaarGauge : Ensemble::Cmv;
    const Zipper fz = random_finite(l, n, instance_seed(opt.seed, i, 3), e);
    const CMatrix uf = assemble_finite(fz).to_dense();
    fu.record(unitarity_defect(uf));
    f5.record(outside_band(uf, l, n, false));
    cnt.require(dense_spectrum(uf).total == static_cast<int>(n * l));
    const Zipper pz = random_periodic(l, n, instance_seed(opt.seed, i, 4), e);
    const CMatrix up = assemble_periodic(pz).to_dense();
    pu.record(unitarity_defect(up));
    if (n >= 6) p5.record(outside_band(up, l, n, true));
    Rng rng(instance_seed(opt.seed, i, 5));
    for (int t = 0; t < 4; ++t) {
      const double k = kTwoPi * (rng.uniform() - 0.5) / n;
      const CMatrix uk = fiber(pz, k).to_dense();
      fib.record(unitarity_defect(uk));
      // Same operator from the k = 0 blocks with beta, gamma rephased.
      Zipper manual = pz;
      for (auto& [site, b] : manual.blocks) {
        CMatrix m = b.matrix();
        m.topRightCorner(l, l) *= std::polar(1.0, -k);
        m.bottomLeftCorner(l, l) *= std::polar(1.0, k);
        b = ScatteringBlock::unchecked(m);
      }
      fk.record((assemble_periodic(manual).to_dense() - uk).norm());
    }
  }
}

inline void verify_transfer(const VerifyOptions& opt, std::deque<Check>& out) {
  Suite s("transfer", out);
  Rng rng(instance_seed(opt.seed, 0, 6));
  Check& cons = s.add("circle_transfer_conserves_l", 1e-10);
  Check& lag = s.add("circle_frames_lagrangian", 1e-9);
  Check& ren = s.add("renormalized_frame_same_plane", 1e-8);
  const auto shapes = desk_shapes();
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto [l, n] = shapes[i];
    const Zipper zp = random_finite(l, n, instance_seed(opt.seed, i, 7), i % 2 ? Ensemble::HaarGauge : Ensemble::Cmv);
    for (int t = 0; t < 3; ++t) {
      const Complex z = std::polar(1.0, kTwoPi * rng.uniform());
      for (int m = 1; m <= n; ++m) {
        const CMatrix tm = zipper_transfer(zp, m, z);
        cons.record(lorentz_defect(tm) / std::max(1.0, tm.squaredNorm()));
      }
      const SolutionFrame f = propagate(zp, z, n, true);
      lag.record(lagrangian_defect(f.frame));
      const Complex zd = random_point_in_annulus(rng, 0.5, 1.0);
      const SolutionFrame r = propagate(zp, zd, n, true);
      const CMatrix raw = transfer_product(zp, zd, n) * initial_frame(l);
      const CMatrix qr = thin_qr(raw).q;
      // Sines of the principal angles between the two planes.
      ren.record(op_norm(qr - r.frame * (r.frame.adjoint() * qr)));
    }
  }
  Check& step = s.add("single_step_form_identity", 1e-10);
  Check& pos = s.add("p_form_lower_bound", 0.0, false);
  Check& equiv = s.add("scattering_transfer_equivalence", 1e-10);
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index l = 1 + t % 3;
    const ScatteringBlock b = random_block(rng, l, t % 2 ? Ensemble::HaarGauge : Ensemble::Cmv);
    const Complex z = random_point_in_annulus(rng, 0.2, 0.95);
    const CMatrix tz = transfer_at(b, 2, z);
    const CMatrix p = p_matrix(b, z);
    const CMatrix lf = form_l(l);
    step.record(rel(tz.adjoint() * lf * tz, lf + p));
    pos.record(hermitian_eigen(p).values(0) - 0.5 * (1.0 - std::norm(z)) * (1.0 - 1e-12));
    const CVector psi = rng.gaussian_vector(l), psi2 = rng.gaussian_vector(l);
    CVector in(2 * l);
    in << psi, psi2;
    const CVector outv = b.matrix() * in;
    CVector lhs_in(2 * l);
    lhs_in << psi, outv.head(l);
    CVector rhs(2 * l);
    rhs << outv.tail(l), psi2;
    equiv.record((phi(b) * lhs_in - rhs).norm() / std::max(1.0, rhs.norm()));
  }
  Check& q = s.add("summed_form_matches_direct", 1e-9);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto [l, n] = shapes[i];
    const Zipper zp = random_finite(l, n, instance_seed(opt.seed, i, 8));
    const QuadraticForm f = q_form(zp, random_point_in_annulus(rng, 0.5, 0.95), n);
    q.record(f.agreement() / std::max(1.0, f.direct.norm()));
  }
}

inline void verify_weyl(const VerifyOptions& opt, std::deque<Check>& out) {
  Suite s("weyl", out);
  Check& cara = s.add("caratheodory_positive", 0.0, false);
  Check& f0 = s.add("f_at_origin_is_i", 0.0);
  Check& fo = s.add("f_matches_dense_resolvent", 1e-8);
  Check& go = s.add("g_matches_dense_resolvent", 1e-8);
  Check& er = s.add("e_routes_agree", 1e-8);
  Check& nest = s.add("nesting_strictly_inside_previous_disc", 1.0 - 1e-12);
  Check& surf = s.add("f_on_weyl_surface", 1e-7);
  Check& bound = s.add("radius_below_bound", 1.0);
  const auto shapes = desk_shapes();
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto [l, n] = shapes[i];
    const Zipper zp = random_finite(l, n, instance_seed(opt.seed, i, 9), i % 2 ? Ensemble::HaarGauge : Ensemble::Cmv);
    const CMatrix u = assemble_finite(zp).to_dense();
    Rng rng(instance_seed(opt.seed, i, 10));
    f0.record((f_matrix(zp, 0.0) - kI * identity(l)).norm());
    for (int t = 0; t < 20; ++t) {
      const Complex z = random_point_in_annulus(rng, 0.1, 0.9);
      const CMatrix f = f_matrix(zp, z);
      cara.record(hermitian_eigen(kI * (f.adjoint() - f)).values(0));
      fo.record(rel(f, f_dense(u, l, z)));
      go.record(rel(g_matrix(zp, z), g_dense(u, l, z)));
      if (n <= 8) {
        const CMatrix e = e_matrix(zp, z);
        er.record(std::max(rel(e_matrix_closed(zp, z, zp.boundary_v), e), rel(e_matrix_forward(zp, z, zp.boundary_v), e)));
      }
    }
    if (n >= 4) {
      // Away from the circle and the origin the disc radius stays above
      // ~1e-7, below which the surface coordinate loses accuracy.
      const Complex z = random_point_in_annulus(rng, 0.5, 0.9);
      const WeylDisc prev = radial_central(zp, z, n - 2);
      const WeylDisc cur = radial_central(zp, z, n);
      bound.record(op_norm(cur.radius_left) / radius_bound(n, z));
      for (int t = 0; t < 10; ++t) {
        const CMatrix v = haar_unitary(rng, l);
        const CMatrix f = f_matrix(zp, z, v);
        nest.record(op_norm(disc_coordinate(f, prev)));
        const CMatrix w = disc_coordinate(f, cur);
        surf.record((w.adjoint() * w - identity(l)).norm());
      }
    }
  }
}

inline void verify_measures(const VerifyOptions& opt, std::deque<Check>& out) {
  Suite s("measures", out);
  Check& gram = s.add("gram_matrices_identity", 1e-8);
  Check& lead = s.add("leading_structure", 0.0);
  Check& rec = s.add("recursion_residuals", 1e-7);
  Check& rho = s.add("rho_alpha_relations", 1e-8);
  Check& fm = s.add("caratheodory_matches_f", 1e-8);
  Check& alpha = s.add("scalar_cmv_alpha_recovered", 1e-6);
  for (std::size_t i = 0; i < 8; ++i) {
    const Eigen::Index l = 1 + static_cast<Eigen::Index>(i % 2);
    const int n = 4 + 2 * static_cast<int>(i % 3);
    const Ensemble e = l == 1 && i % 4 == 0 ? Ensemble::Cmv : Ensemble::HaarGauge;
    const Zipper zp = random_finite(l, n, instance_seed(opt.seed, i, 11), e);
    const MatrixMeasure mu = spectral_measure_finite(zp);
    const GramSchmidtResult gs = gram_schmidt(mu, zp.boundary_u, n);
    gram.record(orthonormality_defect(gs, mu));
    for (int k = 1; k <= gs.steps; ++k) {
      const auto [lo, hi] = gs.phi[k - 1].support();
      if (k % 2 == 0) {
        const CMatrix& c = gs.phi[k - 1].coeff(-k / 2);
        lead.require(lo == -k / 2 && smallest_singular_value(c) > 1e-10 && rel(c, gs.kappa[k - 1]) < 1e-9);
      } else {
        lead.require(hi == (k - 1) / 2);
      }
    }
    const SzegoData& d = gs.data;
    const CMatrix one = identity(l);
    for (int k = 2; k <= d.last; ++k) {
      const auto r = recursion_residuals(gs, mu, k);
      rec.record(std::max(r[0], r[1]));
      rho.record(std::max((d.rho[k] * d.rho[k].adjoint() + d.alpha[k] * d.alpha[k].adjoint() - one).norm(),
                          (d.rho_tilde[k] * d.rho_tilde[k].adjoint() + d.alpha[k].adjoint() * d.alpha[k] - one).norm()));
    }
    Rng rng(instance_seed(opt.seed, i, 12));
    for (int t = 0; t < 20; ++t) {
      const Complex z = random_point_in_annulus(rng, 0.05, 0.9);
      fm.record(rel(caratheodory(mu, z), f_matrix(zp, z)));
    }
    if (e == Ensemble::Cmv) {
      const Zipper back = zipper_from_measure(mu, zp.boundary_u, n);
      double worst = 0.0;
      for (int k = 2; k <= n; ++k) worst = std::max(worst, (back.block(k).alpha() - zp.block(k).alpha()).norm());
      alpha.record(worst);
    }
  }
}

inline void verify_oscillation(const VerifyOptions& opt, std::deque<Check>& out) {
  Suite s("oscillation", out);
  Rng rng(instance_seed(opt.seed, 0, 13));
  Check& ident = s.add("intersection_characterizations_agree", 0.0);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index l = 1 + t % 4;
    const int k = t % static_cast<int>(l + 1);
    const CMatrix u1 = haar_unitary(rng, l);
    const CMatrix u2 = u1 * unitary_with_fixed_space(rng, l, k);
    const CMatrix x = lagrangian_frame(u1, identity(l) + 0.3 * rng.gaussian(l, l));
    const CMatrix y = lagrangian_frame(u2, identity(l) + 0.3 * rng.gaussian(l, l));
    const int a = intersection_dim_angles(x, y), b = intersection_dim_kernel(x, y), c = intersection_dim_chart(x, y);
    ident.require(a == k && b == k && c == k);
  }
  Check& chart = s.add("chart_of_lagrangian_frame_unitary", 1e-9);
  Check& fact = s.add("frame_factors_through_chart", 1e-9);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index l = 1 + t % 4;
    const CMatrix q = thin_qr(lagrangian_frame(haar_unitary(rng, l), rng.gaussian(l, l))).q * haar_unitary(rng, l);
    const CMatrix p = stereographic(q);
    chart.record(unitarity_defect(p));
    const CMatrix b = q.bottomRows(l);
    fact.record((lagrangian_frame(p, b) - q).norm() + (smallest_singular_value(b) > 1e-10 ? 0.0 : 1.0));
  }
  Check& mono = s.add("branches_monotone", 0.0);
  Check& total = s.add("total_rotation_is_NL", 0.0);
  Check& dense = s.add("crossings_match_dense", 1e-7);
  Check& pos = s.add("rotation_positive", 0.0, false);
  const std::vector<InstanceShape> shapes{{1, 4}, {1, 8}, {2, 4}, {2, 6}, {3, 4}};
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto [l, n] = shapes[i];
    for (bool periodic : {false, true}) {
      const std::uint64_t seed = instance_seed(opt.seed, i, periodic ? 15 : 14);
      const Zipper zp = periodic ? random_periodic(l, n, seed) : random_finite(l, n, seed);
      const OscillationReport rep = periodic ? periodic_report(zp) : oscillation_report(zp);
      mono.record(rep.track.monotonicity_violations);
      total.require(rep.spectrum.total == static_cast<int>(n * l));
      const SpectrumResult ref =
          dense_spectrum(periodic ? assemble_periodic(zp).to_dense() : assemble_finite(zp).to_dense());
      double worst = ref.points.size() == rep.spectrum.points.size() ? 0.0 : 1.0;
      for (std::size_t j = 0; j < ref.points.size() && j < rep.spectrum.points.size(); ++j) {
        const double dphi = std::abs(std::arg(ref.points[j].value / rep.spectrum.points[j].value));
        worst = std::max(worst, dphi + (ref.points[j].multiplicity == rep.spectrum.points[j].multiplicity ? 0.0 : 1.0));
      }
      dense.record(worst);
      for (int t = 0; t < 3; ++t) pos.record(rotation_positivity_check(zp, kTwoPi * rng.uniform()));
    }
  }
}

inline void verify_cli(const VerifyOptions& opt, std::deque<Check>& out) {
  Suite s("cli", out);
  Check& det = s.add("generation_deterministic", 0.0);
  Check& zr = s.add("zipper_json_roundtrip", 0.0);
  Check& mr = s.add("measure_json_roundtrip", 0.0);
  Check& sr = s.add("spectrum_json_roundtrip", 0.0);
  Check& par = s.add("worker_count_does_not_change_output", 0.0);
  for (std::size_t i = 0; i < 6; ++i) {
    const Eigen::Index l = 1 + static_cast<Eigen::Index>(i % 3);
    const std::uint64_t seed = instance_seed(opt.seed, i, 16);
    const Flavor fl = i % 2 ? Flavor::Periodic : Flavor::Finite;
    auto gen = [&] { return fl == Flavor::Periodic ? random_periodic(l, 4, seed) : random_finite(l, 4, seed); };
    const std::string a = zipper_to_json(gen()).dump(2), b = zipper_to_json(gen()).dump(2);
    det.require(a == b);
    const Zipper back = zipper_from_json(parse_json(a));
    zr.require(zipper_to_json(back).dump(2) == a);
    const CMatrix u = fl == Flavor::Periodic ? assemble_periodic(back).to_dense() : assemble_finite(back).to_dense();
    const MatrixMeasure mu = spectral_measure(u, l);
    const std::string ms = measure_to_json(mu).dump();
    mr.require(measure_to_json(measure_from_json(parse_json(ms))).dump() == ms);
    const SpectrumResult sp = dense_spectrum(u);
    const std::string ss = spectrum_to_json(sp).dump();
    sr.require(spectrum_to_json(spectrum_from_json(parse_json(ss))).dump() == ss);
  }
  const Zipper pz = random_periodic(1, 2, instance_seed(opt.seed, 0, 17));
  const BandStructure b1 = bands(pz, 8, 1e-10, 1), b4 = bands(pz, 8, 1e-10, 4);
  bool same = true;
  for (std::size_t j = 0; j < b1.k.size(); ++j) same = same && b1.phases(j) == b4.phases(j);
  par.require(same);
}

}  // namespace detail

/// Runs the selected suites; unknown suite names are a ParseError.
inline VerifyReport run_verify(const VerifyOptions& opt) {
  using Fn = std::function<void(const VerifyOptions&, std::deque<Check>&)>;
  const std::vector<std::pair<std::string, Fn>> suites{
      {"matrix_core", detail::verify_matrix_core}, {"scattering", detail::verify_scattering},
      {"zipper", detail::verify_zipper},           {"transfer", detail::verify_transfer},
      {"weyl", detail::verify_weyl},               {"measures", detail::verify_measures},
      {"oscillation", detail::verify_oscillation}, {"cli", detail::verify_cli}};
  bool known = opt.suite == "all";
  for (const auto& [name, fn] : suites) known = known || name == opt.suite;
  if (!known) throw Error(ErrorCode::ParseError, "unknown verification suite '" + opt.suite + "'");
  VerifyReport rep;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& [name, fn] : suites) {
    if (opt.suite != "all" && opt.suite != name) continue;
    try {
      fn(opt, rep.checks);
    } catch (const std::exception& e) {
      rep.errors.push_back(name + ": " + e.what());
    }
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace scatzip
