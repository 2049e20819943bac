// scatzip: instance generation, spectra, Weyl-disc sweeps, measure
// roundtrips, band structures and the invariant suite.
//
// Exit codes: 0 success, 2 validation error, 3 numerical breakdown,
// 4 verification failure.

#include <iostream>

#include "CLI11.hpp"
#include "scatzip/cli.hpp"

namespace {

using scatzip::RunConfig;

void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.output.empty())
    std::cout << text;
  else
    scatzip::write_text(cfg.output, text);
}

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--seed", cfg.seed, "Random seed; fixes every sampled quantity")->capture_default_str();
  sub->add_option("--output,-o", cfg.output, "Output file (default: stdout)");
}

void add_input(CLI::App* sub, RunConfig& cfg, const std::string& what) {
  sub->add_option("input", cfg.inputs, what)->required()->expected(1)->check(CLI::ExistingFile);
}

void add_workers(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--workers", cfg.workers, "Worker threads (0: available parallelism)")->capture_default_str();
}

const char* kFooter = R"(Output formats:
  Zipper / measure / spectrum files are JSON; complex numbers are [re, im]
  pairs and matrices row-major nested arrays of them.
  weyl CSV columns, in order:
    re_z, im_z, N, norm_R (operator norm of R_N^z), norm_R_reflected
    (operator norm of R_N^{1/conj z}), center_ij_re, center_ij_im for
    i, j = 1..L row-major (the disc center S_N^z), bound = 8/(N(1-|z|^2)^2)
  bands CSV columns, in order:
    k, theta_1, ..., theta_{N L} (fiber eigenphases in [0, 2 pi), ascending,
    repeated by multiplicity)
Exit codes: 0 success, 2 validation error, 3 numerical breakdown,
  4 verification failure.)";

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Scattering zipper toolkit"};
  app.footer(kFooter);
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Generate a seeded random zipper (JSON)");
  add_common(gen, cfg);
  gen->add_option("--L", cfg.L, "Channels per site")->capture_default_str();
  gen->add_option("--N", cfg.N, "Sites (even); materialized blocks for semi-infinite")->capture_default_str();
  gen->add_option("--flavor", cfg.flavor, "finite | periodic | semi-infinite")
      ->check(CLI::IsMember({"finite", "periodic", "semi-infinite"}))
      ->capture_default_str();
  gen->add_option("--ensemble", cfg.ensemble, "cmv | haar-gauge | free")
      ->check(CLI::IsMember({"cmv", "haar-gauge", "free"}))
      ->capture_default_str();

  auto* spec = app.add_subcommand("spectrum", "Eigenvalues of a finite or periodic zipper (JSON)");
  add_common(spec, cfg);
  add_input(spec, cfg, "Zipper JSON file");
  add_workers(spec, cfg);
  spec->add_option("--method", cfg.method, "oscillation | dense | both")
      ->check(CLI::IsMember({"oscillation", "dense", "both"}))
      ->capture_default_str();
  spec->add_option("--grid", cfg.grid, "Theta grid size for crossing detection (0: 8 N L)")->capture_default_str();
  spec->add_option("--tol", cfg.tol, "Bisection width in theta")->capture_default_str();

  auto* weyl = app.add_subcommand("weyl", "Weyl disc sweep over a grid of z (CSV)");
  add_common(weyl, cfg);
  add_input(weyl, cfg, "Zipper JSON file (finite or semi-infinite)");
  add_workers(weyl, cfg);
  weyl->add_option("--re", cfg.re_grid, "Real axis lo,hi,n")->capture_default_str();
  weyl->add_option("--im", cfg.im_grid, "Imaginary axis lo,hi,n")->capture_default_str();
  weyl->add_option("--N", cfg.weyl_n, "Disc length (0: the zipper's N)")->capture_default_str();

  auto* meas = app.add_subcommand("measure", "Zipper <-> spectral measure (JSON)");
  add_common(meas, cfg);
  add_input(meas, cfg, "Zipper JSON (to-measure, roundtrip) or measure JSON (to-zipper)");
  meas->add_option("--direction", cfg.direction, "to-measure | to-zipper | roundtrip")
      ->check(CLI::IsMember({"to-measure", "to-zipper", "roundtrip"}))
      ->capture_default_str();
  meas->add_option("--n-max", cfg.n_max, "Recursion length for to-zipper (0: from the support)")->capture_default_str();

  auto* band = app.add_subcommand("bands", "Band structure of a periodic zipper (CSV)");
  add_common(band, cfg);
  add_input(band, cfg, "Periodic zipper JSON file");
  add_workers(band, cfg);
  band->add_option("--grid", cfg.k_grid, "Number of Bloch momenta")->capture_default_str();
  band->add_option("--tol", cfg.tol, "Bisection width in theta")->capture_default_str();

  auto* ver = app.add_subcommand("verify", "Run the invariant suites");
  add_common(ver, cfg);
  ver->add_option("--suite", cfg.suite, "all or one module name")->capture_default_str();
  ver->add_flag("--inject-fault", cfg.inject_fault, "Corrupt one scattering block (unitarity broken by 1e-3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return scatzip::kExitValidation;
  }

  try {
    if (gen->parsed()) {
      emit(cfg, scatzip::cmd_gen(cfg));
    } else if (spec->parsed()) {
      emit(cfg, scatzip::cmd_spectrum(scatzip::read_zipper(cfg.inputs[0]), cfg).dump(2) + "\n");
    } else if (weyl->parsed()) {
      emit(cfg, scatzip::cmd_weyl(scatzip::read_zipper(cfg.inputs[0]), cfg));
    } else if (meas->parsed()) {
      const auto doc = scatzip::parse_json(scatzip::read_text(cfg.inputs[0]), cfg.inputs[0]);
      emit(cfg, scatzip::cmd_measure(doc, cfg).dump(2) + "\n");
    } else if (band->parsed()) {
      emit(cfg, scatzip::cmd_bands(scatzip::read_zipper(cfg.inputs[0]), cfg));
    } else if (ver->parsed()) {
      const scatzip::VerifyReport rep = scatzip::cmd_verify(cfg);
      if (cfg.output.empty())
        std::cout << rep.to_text();
      else
        scatzip::write_text(cfg.output, rep.to_json().dump(2) + "\n");
      return rep.ok() ? scatzip::kExitOk : scatzip::kExitVerification;
    }
  } catch (const scatzip::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return scatzip::exit_code_for(e);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: ParseError: " << e.what() << "\n";
    return scatzip::kExitValidation;
  }
  return scatzip::kExitOk;
}
