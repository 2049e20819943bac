#pragma once

// Command implementations behind the scatzip tool.  Each returns the exact
// text or document the tool writes, so output bytes depend only on the
// configuration.

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "scatzip/io.hpp"
#include "scatzip/verify.hpp"

namespace scatzip {

struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;
  std::string output;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  int grid = 0;     // oscillation grid (0: 8 N L)
  int workers = 0;  // 0: available parallelism
  // gen
  Eigen::Index L = 1;
  int N = 4;
  std::string flavor = "finite";
  std::string ensemble = "haar-gauge";
  // spectrum
  std::string method = "oscillation";
  // weyl
  std::string re_grid = "-0.7,0.5,5";
  std::string im_grid = "-0.7,0.5,5";
  int weyl_n = 0;  // 0: the zipper's N
  // measure
  std::string direction = "roundtrip";
  int n_max = 0;  // 0: enough for the measure's support
  // bands
  int k_grid = 64;
  // verify
  std::string suite = "all";
  bool inject_fault = false;

  int effective_workers() const { return workers > 0 ? workers : default_workers(); }
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitBreakdown = 3;
inline constexpr int kExitVerification = 4;

inline int exit_code_for(const Error& e) { return is_numerical_breakdown(e.code()) ? kExitBreakdown : kExitValidation; }

// ---------------------------------------------------------------------------

inline std::string cmd_gen(const RunConfig& cfg) {
  if (cfg.L < 1) throw Error(ErrorCode::DimensionMismatch, "L must be positive");
  if (cfg.N < 2 || cfg.N % 2 != 0) throw Error(ErrorCode::OddN, "N must be even and at least 2");
  const Ensemble e = parse_ensemble(cfg.ensemble);
  const Flavor f = parse_flavor(cfg.flavor);
  Json j;
  switch (f) {
    case Flavor::Finite: j = zipper_to_json(random_finite(cfg.L, cfg.N, cfg.seed, e)); break;
    case Flavor::Periodic: j = zipper_to_json(random_periodic(cfg.L, cfg.N, cfg.seed, e)); break;
    case Flavor::SemiInfinite: {
      Zipper zp = random_semi_infinite(cfg.L, cfg.seed, e);
      for (int k = 2; k <= cfg.N; ++k) zp.blocks.emplace(k, zp.block(k));
      zp.N = cfg.N;
      j = zipper_to_json(zp);
      j["generator"] = Json{{"seed", cfg.seed}, {"ensemble", to_string(e)}};
      break;
    }
  }
  return j.dump(2) + "\n";
}

struct SpectrumComparison {
  double max_discrepancy = 0.0;
  bool multiplicity_agree = true;
};

/// Matches every point of b to the cyclically nearest point of a.
inline SpectrumComparison compare_spectra(const SpectrumResult& a, const SpectrumResult& b) {
  SpectrumComparison c;
  c.multiplicity_agree = a.points.size() == b.points.size() && a.total == b.total;
  for (const auto& p : b.points) {
    double best = kTwoPi;
    int mult = -1;
    for (const auto& q : a.points) {
      const double d = std::abs(std::arg(p.value / q.value));
      if (d < best) {
        best = d;
        mult = q.multiplicity;
      }
    }
    c.max_discrepancy = std::max(c.max_discrepancy, best);
    if (mult != p.multiplicity) c.multiplicity_agree = false;
  }
  if (a.points.empty() != b.points.empty()) c.max_discrepancy = kTwoPi;
  return c;
}

inline SpectrumResult oscillation_spectrum(const Zipper& zp, const RunConfig& cfg) {
  OscillationOptions opt;
  opt.grid_size = cfg.grid;
  opt.refine_tol = cfg.tol;
  opt.workers = cfg.effective_workers();
  if (zp.flavor == Flavor::Periodic) return periodic_report(zp, opt).spectrum;
  return oscillation_report(zp, opt).spectrum;
}

inline SpectrumResult dense_spectrum_of(const Zipper& zp) {
  if (zp.flavor == Flavor::Periodic) return dense_spectrum(assemble_periodic(zp));
  if (zp.flavor == Flavor::Finite) return dense_spectrum(assemble_finite(zp));
  throw Error(ErrorCode::WrongFlavor, "spectra need a finite or periodic zipper");
}

inline Json cmd_spectrum(const Zipper& zp, const RunConfig& cfg) {
  if (zp.flavor == Flavor::SemiInfinite) throw Error(ErrorCode::WrongFlavor, "spectra need a finite or periodic zipper");
  if (cfg.method == "oscillation") return spectrum_to_json(oscillation_spectrum(zp, cfg));
  if (cfg.method == "dense") return spectrum_to_json(dense_spectrum_of(zp));
  if (cfg.method != "both") throw Error(ErrorCode::ParseError, "method must be oscillation, dense or both");
  const SpectrumResult osc = oscillation_spectrum(zp, cfg);
  const SpectrumResult den = dense_spectrum_of(zp);
  const SpectrumComparison c = compare_spectra(osc, den);
  Json j;
  j["oscillation"] = spectrum_to_json(osc);
  j["dense"] = spectrum_to_json(den);
  j["max_discrepancy"] = c.max_discrepancy;
  j["multiplicity_agree"] = c.multiplicity_agree;
  return j;
}

/// "lo,hi,n": n equally spaced values from lo to hi (lo alone if n = 1).
inline std::vector<double> parse_axis(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "grid axis '" + spec + "' is not lo,hi,n");
    }
  }
  if (parts.size() != 3 || parts[2] < 1 || parts[2] != std::floor(parts[2]))
    throw Error(ErrorCode::ParseError, "grid axis '" + spec + "' is not lo,hi,n");
  const int n = static_cast<int>(parts[2]);
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(n == 1 ? parts[0] : parts[0] + (parts[1] - parts[0]) * i / (n - 1));
  return out;
}

inline std::string weyl_csv_header(Eigen::Index l) {
  std::string h = "re_z,im_z,N,norm_R,norm_R_reflected";
  for (Eigen::Index i = 1; i <= l; ++i)
    for (Eigen::Index k = 1; k <= l; ++k) {
      const std::string ij = std::to_string(i) + std::to_string(k);
      h += ",center_" + ij + "_re,center_" + ij + "_im";
    }
  return h + ",bound";
}

inline std::string cmd_weyl(const Zipper& zp, const RunConfig& cfg) {
  if (zp.flavor == Flavor::Periodic) throw Error(ErrorCode::WrongFlavor, "Weyl discs need a finite or semi-infinite zipper");
  const int n = cfg.weyl_n > 0 ? cfg.weyl_n : zp.N;
  if (n < 2 || n % 2 != 0) throw Error(ErrorCode::OddN, "disc length must be even and at least 2");
  std::vector<Complex> zs;
  for (double re : parse_axis(cfg.re_grid))
    for (double im : parse_axis(cfg.im_grid)) {
      const Complex z(re, im);
      if (!(std::abs(z) < 1.0) || z == Complex(0.0, 0.0))
        throw Error(ErrorCode::GridOutsideDisc, "grid point " + fmt(re) + "+" + fmt(im) + "i is not in the punctured disc");
      zs.push_back(z);
    }
  const std::vector<std::string> rows = parallel_map<std::string>(zs.size(), cfg.effective_workers(), [&](std::size_t i) {
    const Complex z = zs[i];
    const WeylDisc d = radial_central(zp, z, n);
    std::string row = fmt(z.real()) + "," + fmt(z.imag()) + "," + std::to_string(n) + "," + fmt(op_norm(d.radius_left)) +
                      "," + fmt(op_norm(d.radius_right));
    for (Eigen::Index r = 0; r < zp.L; ++r)
      for (Eigen::Index c = 0; c < zp.L; ++c) row += "," + fmt(d.center(r, c).real()) + "," + fmt(d.center(r, c).imag());
    return row + "," + fmt(radius_bound(n, z));
  });
  std::string out = weyl_csv_header(zp.L) + "\n";
  for (const auto& r : rows) out += r + "\n";
  return out;
}

/// Sample points for F comparisons: fixed by the seed, 0.1 <= |z| <= 0.9.
inline std::vector<Complex> sample_points(std::uint64_t seed, int count) {
  Rng rng(mix_seed(seed, 0xF));
  std::vector<Complex> z;
  for (int i = 0; i < count; ++i) z.push_back(detail::random_point_in_annulus(rng, 0.1, 0.9));
  return z;
}

inline int default_n_max(const MatrixMeasure& mu) {
  // At most one orthonormal element per atom in each family.
  const int n = static_cast<int>(mu.atoms.size());
  return std::max(2, n + (n % 2));
}

inline Json cmd_measure(const Json& input, const RunConfig& cfg) {
  if (cfg.direction == "to-measure") {
    const Zipper zp = zipper_from_json(input);
    if (zp.flavor != Flavor::Finite) throw Error(ErrorCode::WrongFlavor, "to-measure needs a finite zipper");
    return measure_to_json(spectral_measure_finite(zp));
  }
  if (cfg.direction == "to-zipper") {
    const MatrixMeasure mu = measure_from_json(input);
    const int n_max = cfg.n_max > 0 ? cfg.n_max : default_n_max(mu);
    const GramSchmidtResult gs = gram_schmidt(mu, identity(mu.L), n_max);
    if (gs.steps < 2) throw Error(ErrorCode::DegenerateGram, gs.stop_reason);
    return zipper_to_json(zipper_from_measure(mu, identity(mu.L), n_max));
  }
  if (cfg.direction != "roundtrip") throw Error(ErrorCode::ParseError, "direction must be to-measure, to-zipper or roundtrip");
  const Zipper zp = zipper_from_json(input);
  if (zp.flavor != Flavor::Finite) throw Error(ErrorCode::WrongFlavor, "roundtrip needs a finite zipper");
  const MatrixMeasure mu = spectral_measure_finite(zp);
  const GramSchmidtResult gs = gram_schmidt(mu, zp.boundary_u, zp.N);
  if (gs.steps < 2) throw Error(ErrorCode::DegenerateGram, gs.stop_reason);
  const Zipper back = zipper_from_measure(mu, zp.boundary_u, zp.N);
  bool cmv = unitarity_defect(zp.boundary_u) < 1e-12 && (zp.boundary_u - identity(zp.L)).norm() < 1e-12;
  double alpha_err = 0.0;
  for (int k = 2; k <= zp.N; ++k) {
    const auto& b = zp.block(k);
    cmv = cmv && (b.u() - identity(zp.L)).norm() < 1e-12 && (b.v() - identity(zp.L)).norm() < 1e-12;
    alpha_err = back.has_block(k) ? std::max(alpha_err, op_norm(back.block(k).alpha() - b.alpha())) : kTwoPi;
  }
  double f_err = 0.0, f_rebuilt = 0.0;
  for (const Complex z : sample_points(cfg.seed, 10)) {
    const CMatrix f = f_matrix(zp, z);
    f_err = std::max(f_err, op_norm(caratheodory(mu, z) - f));
    if (back.flavor == Flavor::Finite) f_rebuilt = std::max(f_rebuilt, op_norm(f_matrix(back, z) - f));
  }
  Json j;
  j["L"] = zp.L;
  j["N"] = zp.N;
  j["atoms"] = mu.atoms.size();
  j["steps"] = gs.steps;
  j["stop_reason"] = gs.stop_reason;
  j["recovered_flavor"] = std::string(to_string(back.flavor));
  j["cmv_gauge"] = cmv;
  j["alpha_error"] = alpha_err;
  j["f_match_error"] = f_err;
  j["rebuilt_f_error"] = back.flavor == Flavor::Finite ? Json(f_rebuilt) : Json(nullptr);
  j["recursion_residual"] = [&] {
    double r = 0.0;
    for (int k = 2; k <= gs.data.last; ++k) {
      const auto res = recursion_residuals(gs, mu, k);
      r = std::max({r, res[0], res[1]});
    }
    return r;
  }();
  return j;
}

inline std::string bands_csv(const BandStructure& b, int count) {
  std::string out = "k";
  for (int i = 1; i <= count; ++i) out += ",theta_" + std::to_string(i);
  out += "\n";
  for (std::size_t j = 0; j < b.k.size(); ++j) {
    out += fmt(b.k[j]);
    for (double p : b.phases(j)) out += "," + fmt(p);
    out += "\n";
  }
  return out;
}

inline std::string cmd_bands(const Zipper& zp, const RunConfig& cfg) {
  if (zp.flavor != Flavor::Periodic) throw Error(ErrorCode::WrongFlavor, "bands need a periodic zipper");
  const BandStructure b = bands(zp, cfg.k_grid, cfg.tol, cfg.effective_workers());
  return bands_csv(b, zp.N * static_cast<int>(zp.L));
}

inline VerifyReport cmd_verify(const RunConfig& cfg) {
  VerifyOptions opt;
  opt.suite = cfg.suite;
  opt.seed = cfg.seed;
  opt.inject_fault = cfg.inject_fault;
  return run_verify(opt);
}

}  // namespace scatzip
