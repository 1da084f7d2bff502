#pragma once

// Operator files, band summaries, branch CSV and verdicts.
//
// Operator schema: {"p": int, "m": int, "a": [...], "b": [...], "general"?: bool}
// where "a" and "b" hold p matrices, each an m×m array of rows whose entries
// are [re, im] pairs. A flat row-major array of m² pairs is accepted on input.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <unistd.h>

#include "json.hpp"

#include "flb/bands.hpp"
#include "flb/borg.hpp"
#include "flb/error.hpp"
#include "flb/linalg.hpp"
#include "flb/operator.hpp"

namespace flb::io {

using json = nlohmann::json;

struct OperatorFile {
  bool general = false;
  GeneralBlockJacobi coefficients;  // ã_n are positive definite unless `general`
};

namespace detail {

[[noreturn]] inline void fail(const std::string& what) {
  throw Error(ErrorCode::Parse, what);
}

inline Complex complex_from_json(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    fail(where + ": expected [re, im] pair");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

inline Matrix matrix_from_json(const json& v, std::size_t m, const std::string& where) {
  if (!v.is_array()) fail(where + ": expected an array");
  const auto M = static_cast<Eigen::Index>(m);
  Matrix out(M, M);
  if (v.size() == m * m && m > 1 && v[0].is_array() && v[0].size() == 2 && v[0][0].is_number()) {
    for (std::size_t k = 0; k < m * m; ++k) {
      out(static_cast<Eigen::Index>(k / m), static_cast<Eigen::Index>(k % m)) =
          complex_from_json(v[k], where);
    }
    return out;
  }
  if (v.size() != m) fail(where + ": expected " + std::to_string(m) + " rows");
  for (std::size_t i = 0; i < m; ++i) {
    const json& row = v[i];
    if (!row.is_array() || row.size() != m) fail(where + ": row " + std::to_string(i) + " has wrong length");
    for (std::size_t j = 0; j < m; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          complex_from_json(row[j], where + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
  }
  return out;
}

inline json matrix_to_json(const Matrix& A) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    json row = json::array();
    // + 0.0 folds −0 into 0 so equal operators serialize identically
    for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back({A(i, j).real() + 0.0, A(i, j).imag() + 0.0});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::size_t positive_count(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number_integer()) fail(std::string("missing integer field \"") + key + "\"");
  const auto v = doc[key].get<long long>();
  if (v < 1) fail(std::string("field \"") + key + "\" must be >= 1");
  return static_cast<std::size_t>(v);
}

inline std::vector<Matrix> blocks_from_json(const json& doc, const char* key, std::size_t p, std::size_t m) {
  if (!doc.contains(key) || !doc[key].is_array()) fail(std::string("missing array field \"") + key + "\"");
  const json& arr = doc[key];
  if (arr.size() != p) fail(std::string("field \"") + key + "\" must hold p matrices");
  std::vector<Matrix> out;
  out.reserve(p);
  for (std::size_t n = 0; n < p; ++n) {
    out.push_back(matrix_from_json(arr[n], m, std::string(key) + "[" + std::to_string(n) + "]"));
  }
  return out;
}

}  // namespace detail

inline OperatorFile parse_operator(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    detail::fail(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) detail::fail("operator file must be a JSON object");
  OperatorFile out;
  if (doc.contains("general")) {
    if (!doc["general"].is_boolean()) detail::fail("field \"general\" must be a boolean");
    out.general = doc["general"].get<bool>();
  }
  const std::size_t p = detail::positive_count(doc, "p");
  const std::size_t m = detail::positive_count(doc, "m");
  out.coefficients = {p, m, detail::blocks_from_json(doc, "a", p, m), detail::blocks_from_json(doc, "b", p, m)};
  return out;
}

inline BlockJacobiOperator as_jacobi(const OperatorFile& f) {
  const auto& c = f.coefficients;
  return {c.p, c.m, c.a, c.b};
}

template <typename Op>
json operator_to_json(const Op& J, bool general) {
  json doc;
  doc["p"] = J.p;
  doc["m"] = J.m;
  doc["a"] = json::array();
  doc["b"] = json::array();
  for (const Matrix& a : J.a) doc["a"].push_back(detail::matrix_to_json(a));
  for (const Matrix& b : J.b) doc["b"].push_back(detail::matrix_to_json(b));
  if (general) doc["general"] = true;
  return doc;
}

inline json to_json(const BlockJacobiOperator& J) {
  return operator_to_json(J, false);
}

inline json to_json(const GeneralBlockJacobi& G) {
  return operator_to_json(G, true);
}

/// Canonical text: sorted keys, two-space indent, shortest round-trip floats.
inline std::string dump(const json& doc) {
  return doc.dump(2) + "\n";
}

inline json unitaries_to_json(const std::vector<Matrix>& u) {
  json arr = json::array();
  for (const Matrix& x : u) arr.push_back(detail::matrix_to_json(x));
  return json{{"u", std::move(arr)}};
}

inline json to_json(const BandStructure& B) {
  json bands = json::array();
  json gaps = json::array();
  for (const Interval& r : B.bands) bands.push_back({r.lo, r.hi});
  for (const Interval& g : B.gaps) gaps.push_back({g.lo, g.hi});
  return json{{"N", B.N}, {"bands", std::move(bands)}, {"gaps", std::move(gaps)}, {"samples", B.sample_count}};
}

inline json to_json(const DetectionVerdict& v) {
  // JSON has no infinity; unbounded certificates are written as null.
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  json details = json::array();
  for (double d : v.details) details.push_back(num(d));
  return json{{"verdict", v.verdict},
              {"certificate", num(v.certificate)},
              {"direct_residual", num(v.direct_residual)},
              {"details", std::move(details)}};
}

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Header "x,lambda_1,...,lambda_pm", one LF-terminated row per sample.
inline std::string branches_csv(const BranchSamples& s) {
  std::ostringstream out;
  out << "x";
  for (Eigen::Index i = 0; i < s.values.cols(); ++i) out << ",lambda_" << (i + 1);
  out << "\n";
  for (std::size_t k = 0; k < s.x.size(); ++k) {
    out << format_double(s.x[k]);
    for (Eigen::Index i = 0; i < s.values.cols(); ++i) {
      out << "," << format_double(s.values(static_cast<Eigen::Index>(k), i));
    }
    out << "\n";
  }
  return out.str();
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) detail::fail("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to a sibling temporary file, then renames it over `path`.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

}  // namespace flb::io
