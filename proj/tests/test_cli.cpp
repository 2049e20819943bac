// Command implementations, JSON documents and the scatzip binary.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

#include "scatzip/cli.hpp"

using namespace scatzip;

namespace {

std::filesystem::path temp_dir() {
  auto p = std::filesystem::temp_directory_path() / ("scatzip_test_" + std::to_string(::getpid()));
  std::filesystem::create_directories(p);
  return p;
}

std::string write_temp(const std::string& name, const std::string& text) {
  const auto p = temp_dir() / name;
  write_text(p.string(), text);
  return p.string();
}

int run_binary(const std::string& args, const std::string& out = "/dev/null") {
  const std::string cmd = std::string(SCATZIP_BIN) + " " + args + " > " + out + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig gen_config(Eigen::Index l, int n, const std::string& flavor, std::uint64_t seed) {
  RunConfig cfg;
  cfg.L = l;
  cfg.N = n;
  cfg.flavor = flavor;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST(Cli, GenerationIsDeterministic) {
  const RunConfig cfg = gen_config(2, 6, "finite", 7);
  EXPECT_EQ(cmd_gen(cfg), cmd_gen(cfg));
  EXPECT_NE(cmd_gen(cfg), cmd_gen(gen_config(2, 6, "finite", 8)));
}

TEST(Cli, ZipperJsonRoundtrip) {
  for (const char* flavor : {"finite", "periodic", "semi-infinite"}) {
    const RunConfig cfg = gen_config(2, 4, flavor, 9);
    const std::string text = cmd_gen(cfg);
    Json doc = parse_json(text);
    const Zipper zp = zipper_from_json(doc);
    doc.erase("generator");
    EXPECT_EQ(zipper_to_json(zp), doc) << flavor;
  }
}

TEST(Cli, SemiInfiniteDocumentExtendsBeyondBlocks) {
  const Zipper zp = zipper_from_json(parse_json(cmd_gen(gen_config(1, 4, "semi-infinite", 10))));
  const Zipper direct = random_semi_infinite(1, 10);
  EXPECT_EQ((zp.block(20).matrix() - direct.block(20).matrix()).norm(), 0.0);
}

TEST(Cli, FreeSpectrum) {
  RunConfig cfg = gen_config(1, 4, "finite", 1);
  cfg.ensemble = "free";
  const Zipper zp = zipper_from_json(parse_json(cmd_gen(cfg)));
  cfg.method = "both";
  const Json j = cmd_spectrum(zp, cfg);
  EXPECT_LT(j["max_discrepancy"].get<double>(), 1e-7);
  EXPECT_TRUE(j["multiplicity_agree"].get<bool>());
  int total = 0;
  for (const auto& p : j["oscillation"]) total += p["multiplicity"].get<int>();
  EXPECT_EQ(total, 4);
}

TEST(Cli, SpectrumJsonRoundtrip) {
  const Zipper zp = random_finite(2, 6, 11);
  const SpectrumResult s = dense_spectrum_of(zp);
  const SpectrumResult back = spectrum_from_json(parse_json(spectrum_to_json(s).dump()));
  const auto c = compare_spectra(s, back);
  EXPECT_LT(c.max_discrepancy, 1e-15);
  EXPECT_TRUE(c.multiplicity_agree);
}

TEST(Cli, MalformedJsonReportsPosition) {
  try {
    parse_json("{\n  \"L\": 1,\n  \"N\": ,\n}", "doc.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("doc.json:3:"), std::string::npos) << e.what();
  }
}

TEST(Cli, MissingFieldsRejected) {
  EXPECT_THROW(zipper_from_json(parse_json(R"({"L": 1, "flavor": "finite"})")), Error);
  EXPECT_THROW(zipper_from_json(parse_json(R"({"L": 1, "flavor": "round", "blocks": []})")), Error);
}

TEST(Cli, WeylCsv) {
  RunConfig cfg;
  cfg.re_grid = "0.5,0.6,2";
  cfg.im_grid = "0.1,0.2,2";
  const std::string csv = cmd_weyl(random_finite(2, 4, 12), cfg);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, weyl_csv_header(2));
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
  cfg.re_grid = "0.0,0.0,1";
  cfg.im_grid = "0.0,0.0,1";
  try {
    cmd_weyl(random_finite(2, 4, 12), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridOutsideDisc);
  }
}

TEST(Cli, MeasureDirections) {
  RunConfig cfg;
  const Json zdoc = zipper_to_json(random_finite(2, 4, 13));
  cfg.direction = "to-measure";
  const Json mdoc = cmd_measure(zdoc, cfg);
  const MatrixMeasure mu = measure_from_json(mdoc);
  EXPECT_EQ(measure_to_json(mu), mdoc);
  cfg.direction = "roundtrip";
  const Json rep = cmd_measure(zdoc, cfg);
  EXPECT_LT(rep["f_match_error"].get<double>(), 1e-8);
  EXPECT_LT(rep["rebuilt_f_error"].get<double>(), 1e-8);
  EXPECT_LT(rep["recursion_residual"].get<double>(), 1e-7);
}

TEST(Cli, TwoAtomMeasureToZipper) {
  RunConfig cfg;
  cfg.direction = "to-zipper";
  const Json mdoc = parse_json(R"({"L": 1, "atoms": [
      {"xi": [1, 0], "weight": [[[0.5, 0]]]},
      {"xi": [-1, 0], "weight": [[[0.5, 0]]]}]})");
  const Zipper zp = zipper_from_json(cmd_measure(mdoc, cfg));
  EXPECT_EQ(zp.flavor, Flavor::Finite);
  EXPECT_EQ(zp.N, 2);
}

TEST(Cli, BandsCsvShape) {
  RunConfig cfg;
  cfg.k_grid = 4;
  const std::string csv = cmd_bands(random_periodic(1, 2, 1, Ensemble::Free), cfg);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "k,theta_1,theta_2");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_THROW(cmd_bands(random_finite(1, 2, 1), cfg), Error);
}

TEST(Cli, VerifySuiteFilteringAndFault) {
  RunConfig cfg;
  cfg.suite = "scattering";
  const VerifyReport ok = cmd_verify(cfg);
  EXPECT_TRUE(ok.ok());
  for (const auto& c : ok.checks) EXPECT_EQ(c.module, "scattering");
  cfg.inject_fault = true;
  const VerifyReport bad = cmd_verify(cfg);
  EXPECT_FALSE(bad.ok());
  EXPECT_FALSE(bad.find("scattering", "block_unitary")->passed());
  cfg.suite = "nonsense";
  EXPECT_THROW(cmd_verify(cfg), Error);
}

TEST(Cli, ExitCodes) {
  const std::string zfile = (temp_dir() / "z.json").string();
  EXPECT_EQ(run_binary("gen --L 1 --N 4 --seed 3 -o " + zfile), 0);
  EXPECT_EQ(run_binary("spectrum --method both " + zfile), 0);
  EXPECT_EQ(run_binary("verify --suite matrix_core"), 0);
  EXPECT_EQ(run_binary("verify --suite scattering --inject-fault"), 4);
  EXPECT_EQ(run_binary("gen --N 3"), 2);
  EXPECT_EQ(run_binary("spectrum " + write_temp("bad.json", "{\"L\": 1,,}")), 2);
  EXPECT_EQ(run_binary("weyl --re 0,0,1 --im 0,0,1 " + zfile), 2);
  EXPECT_EQ(run_binary("bands " + zfile), 2);
  EXPECT_EQ(run_binary("frobnicate"), 2);
  EXPECT_EQ(run_binary("--help"), 0);

  // A structurally valid but non-unitary block: validation error.
  std::string text = read_text(zfile);
  Json doc = parse_json(text);
  doc["blocks"][0]["u"] = Json::array({Json::array({Json::array({2.0, 0.0})})});
  EXPECT_EQ(run_binary("spectrum " + write_temp("nonunitary.json", doc.dump())), 2);
}

TEST(Cli, BinaryOutputMatchesLibrary) {
  const std::string a = (temp_dir() / "a.json").string();
  ASSERT_EQ(run_binary("gen --L 2 --N 6 --seed 5 --flavor periodic", a), 0);
  EXPECT_EQ(read_text(a), cmd_gen(gen_config(2, 6, "periodic", 5)));
}
