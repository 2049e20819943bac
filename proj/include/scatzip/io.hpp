#pragma once

// JSON documents for zippers, measures and spectra; complex numbers are
// [re, im] pairs and matrices are row-major nested arrays of them.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "scatzip/ensembles.hpp"
#include "scatzip/measures.hpp"

namespace scatzip {

using Json = nlohmann::ordered_json;

inline Json complex_to_json(Complex c) { return Json::array({c.real(), c.imag()}); }

inline Complex complex_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(ErrorCode::ParseError, what + ": expected [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Json matrix_to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::ParseError, what + ": expected a non-empty matrix");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) throw Error(ErrorCode::ParseError, what + ": rows must be arrays");
  const std::size_t cols = j[0].size();
  CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw Error(ErrorCode::ParseError, what + ": ragged matrix");
    for (std::size_t k = 0; k < cols; ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = complex_from_json(j[i][k], what);
  }
  return m;
}

/// Parses text, reporting the line and column of a syntax error.
inline Json parse_json(const std::string& text, const std::string& source = "input") {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
  out << text;
}

// ---------------------------------------------------------------------------
// Zippers

inline Json zipper_to_json(const Zipper& zp) {
  Json j;
  j["L"] = zp.L;
  j["N"] = zp.N;
  j["flavor"] = std::string(to_string(zp.flavor));
  if (zp.flavor != Flavor::Periodic) j["boundary_U"] = matrix_to_json(zp.boundary_u);
  if (zp.flavor == Flavor::Finite) j["boundary_V"] = matrix_to_json(zp.boundary_v);
  Json blocks = Json::array();
  for (const auto& [n, b] : zp.blocks) {
    Json e;
    e["n"] = n;
    e["alpha"] = matrix_to_json(b.alpha());
    e["u"] = matrix_to_json(b.u());
    e["v"] = matrix_to_json(b.v());
    blocks.push_back(std::move(e));
  }
  j["blocks"] = std::move(blocks);
  return j;
}

inline Flavor parse_flavor(const std::string& s) {
  if (s == "finite") return Flavor::Finite;
  if (s == "periodic") return Flavor::Periodic;
  if (s == "semi-infinite") return Flavor::SemiInfinite;
  throw Error(ErrorCode::ParseError, "unknown flavor '" + s + "'");
}

/// Semi-infinite documents carry their materialized blocks; an optional
/// "generator": {"seed", "ensemble"} extends them beyond the last one.
inline Zipper zipper_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "zipper document must be an object");
  for (const char* key : {"L", "flavor", "blocks"})
    if (!j.contains(key)) throw Error(ErrorCode::ParseError, std::string("zipper document lacks '") + key + "'");
  if (!j["L"].is_number_integer()) throw Error(ErrorCode::ParseError, "L must be an integer");
  if (!j["flavor"].is_string()) throw Error(ErrorCode::ParseError, "flavor must be a string");
  if (!j["blocks"].is_array()) throw Error(ErrorCode::ParseError, "blocks must be an array");
  const Eigen::Index l = j["L"].get<Eigen::Index>();
  const Flavor flavor = parse_flavor(j["flavor"].get<std::string>());
  std::map<int, ScatteringBlock> blocks;
  for (const auto& e : j["blocks"]) {
    if (!e.is_object() || !e.contains("n") || !e["n"].is_number_integer())
      throw Error(ErrorCode::ParseError, "block entries need an integer 'n'");
    const int n = e["n"].get<int>();
    const std::string where = "block " + std::to_string(n);
    for (const char* key : {"alpha", "u", "v"})
      if (!e.contains(key)) throw Error(ErrorCode::ParseError, where + " lacks '" + key + "'");
    auto b = ScatteringBlock::build(matrix_from_json(e["alpha"], where + " alpha"), matrix_from_json(e["u"], where + " u"),
                                    matrix_from_json(e["v"], where + " v"));
    if (!blocks.emplace(n, std::move(b)).second) throw Error(ErrorCode::ParseError, "duplicate " + where);
  }
  auto boundary = [&](const char* key) {
    if (!j.contains(key)) throw Error(ErrorCode::ParseError, std::string("zipper document lacks '") + key + "'");
    return matrix_from_json(j[key], key);
  };
  Zipper zp;
  switch (flavor) {
    case Flavor::Finite: zp = make_finite(boundary("boundary_U"), boundary("boundary_V"), std::move(blocks)); break;
    case Flavor::Periodic: zp = make_periodic(std::move(blocks)); break;
    case Flavor::SemiInfinite: {
      const CMatrix u = boundary("boundary_U");
      if (j.contains("generator")) {
        const Json& g = j["generator"];
        zp = random_semi_infinite(l, g.at("seed").get<std::uint64_t>(), parse_ensemble(g.at("ensemble").get<std::string>()));
        zp.boundary_u = u;
      } else {
        zp = make_semi_infinite(u, {});
      }
      zp.blocks = std::move(blocks);
      zp.N = zp.blocks.empty() ? 0 : zp.blocks.rbegin()->first;
      break;
    }
  }
  if (zp.L != l) throw Error(ErrorCode::DimensionMismatch, "L differs from the block size");
  if (j.contains("N") && flavor != Flavor::SemiInfinite && j["N"].get<int>() != zp.N)
    throw Error(ErrorCode::DimensionMismatch, "N differs from the largest block index");
  return zp;
}

inline Zipper read_zipper(const std::string& path) { return zipper_from_json(parse_json(read_text(path), path)); }

// ---------------------------------------------------------------------------
// Measures and spectra

inline Json measure_to_json(const MatrixMeasure& mu) {
  Json j;
  j["L"] = mu.L;
  Json atoms = Json::array();
  for (const auto& a : mu.atoms) atoms.push_back(Json{{"xi", complex_to_json(a.xi)}, {"weight", matrix_to_json(a.weight)}});
  j["atoms"] = std::move(atoms);
  return j;
}

inline MatrixMeasure measure_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("L") || !j.contains("atoms") || !j["atoms"].is_array())
    throw Error(ErrorCode::ParseError, "measure document needs 'L' and 'atoms'");
  MatrixMeasure mu;
  mu.L = j["L"].get<Eigen::Index>();
  for (const auto& a : j["atoms"]) {
    if (!a.is_object() || !a.contains("xi") || !a.contains("weight"))
      throw Error(ErrorCode::ParseError, "atoms need 'xi' and 'weight'");
    mu.atoms.push_back({complex_from_json(a["xi"], "xi"), matrix_from_json(a["weight"], "weight")});
  }
  mu.validate();
  return mu;
}

inline Json spectrum_to_json(const SpectrumResult& s) {
  Json arr = Json::array();
  for (const auto& p : s.points) arr.push_back(Json{{"theta", p.theta}, {"multiplicity", p.multiplicity}});
  return arr;
}

inline SpectrumResult spectrum_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "spectrum must be an array");
  SpectrumResult s;
  for (const auto& e : j) {
    SpectralPoint p;
    p.theta = e.at("theta").get<double>();
    p.multiplicity = e.at("multiplicity").get<int>();
    p.value = std::polar(1.0, p.theta);
    s.total += p.multiplicity;
    s.points.push_back(p);
  }
  return s;
}

/// Shortest-round-trip decimal form, used for CSV cells.
inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return Json(x).dump();
}

}  // namespace scatzip
