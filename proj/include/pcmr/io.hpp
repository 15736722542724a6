#pragma once

// Text formats for comparison matrices.
//
//   dense JSON   [[1,2,4],[0.5,1,2],[0.25,0.5,1]]
//   upper JSON   {"n":3,"upper":[2,4,2]}         (row-major, i < j)
//   CSV          n=3
//                1,2,4
//                1/2,1,2
//                1/4,1/2,1
//
// Entries may be written as fractions "p/q" in CSV and, as strings, in JSON.
// JSON output uses shortest round-trip formatting, CSV uses 17 significant
// digits.

#include <nlohmann/json.hpp>

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pcmr/pcm.hpp"

namespace pcmr {

enum class MatrixFormat { DenseJson, UpperJson, Csv };

inline std::optional<MatrixFormat> parse_format_name(std::string_view name) {
  if (name == "dense" || name == "dense-json" || name == "json")
    return MatrixFormat::DenseJson;
  if (name == "upper" || name == "upper-json") return MatrixFormat::UpperJson;
  if (name == "csv") return MatrixFormat::Csv;
  return std::nullopt;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

/// Parses "x" or "p/q" as a double. Returns nullopt on any trailing junk.
inline std::optional<double> parse_ratio(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  auto parse_real = [](std::string_view s) -> std::optional<double> {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    std::string buf(s);
    char* end = nullptr;
    const double v = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size()) return std::nullopt;
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_real(text);
  auto num = parse_real(text.substr(0, slash));
  auto den = parse_real(text.substr(slash + 1));
  if (!num || !den) return std::nullopt;
  return *num / *den;
}

inline double json_entry(const nlohmann::json& v, int row, int col) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    if (auto r = parse_ratio(v.get<std::string>())) return *r;
  }
  throw Error(ErrorCode::ParseError,
              "cannot read a number at row " + std::to_string(row) +
                  ", column " + std::to_string(col),
              row, col);
}

inline std::string format_double(double v, int digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace detail

/// Reads a matrix from a parsed JSON value: either the dense array-of-rows
/// form or the {"n":..,"upper":[..]} form.
inline ComparisonMatrix matrix_from_json(const nlohmann::json& j,
                                         double tol = kDefaultReciprocityTol) {
  if (j.is_array()) {
    std::vector<std::vector<double>> rows;
    int r = 0;
    for (const auto& row : j) {
      ++r;
      if (!row.is_array())
        throw Error(ErrorCode::ParseError,
                    "row " + std::to_string(r) + " is not an array", r, 0);
      std::vector<double> vals;
      int c = 0;
      for (const auto& v : row) vals.push_back(detail::json_entry(v, r, ++c));
      rows.push_back(std::move(vals));
    }
    return validate(rows, tol);
  }
  if (j.is_object()) {
    if (!j.contains("n") || !j.contains("upper") || !j["n"].is_number_integer() ||
        !j["upper"].is_array())
      throw Error(ErrorCode::ParseError,
                  "upper-triangle form needs integer \"n\" and array \"upper\"");
    const int n = j["n"].get<int>();
    if (n < 3)
      throw Error(ErrorCode::OrderTooSmall,
                  "matrix order must be >= 3, got " + std::to_string(n));
    const auto& up = j["upper"];
    if (up.size() != static_cast<std::size_t>(upper_count(n)))
      throw Error(ErrorCode::ParseError,
                  "\"upper\" must hold " + std::to_string(upper_count(n)) +
                      " entries for n=" + std::to_string(n));
    std::vector<double> vals;
    std::size_t s = 0;
    for (const auto& p : upper_positions(n))
      vals.push_back(detail::json_entry(up[s++], p.i, p.j));
    return ComparisonMatrix::from_upper(n, vals);
  }
  throw Error(ErrorCode::ParseError, "matrix JSON must be an array or object");
}

inline ComparisonMatrix parse_csv(std::string_view text,
                                  double tol = kDefaultReciprocityTol) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = detail::trim(text.substr(start, end - start));
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  if (lines.empty()) throw Error(ErrorCode::ParseError, "empty CSV input");
  auto header = lines.front();
  if (header.substr(0, 2) != "n=")
    throw Error(ErrorCode::ParseError, "CSV must start with a line \"n=<order>\"");
  auto order = detail::parse_ratio(header.substr(2));
  if (!order || *order != static_cast<int>(*order))
    throw Error(ErrorCode::ParseError, "bad order in CSV header");
  const int n = static_cast<int>(*order);
  if (n < 3)
    throw Error(ErrorCode::OrderTooSmall,
                "matrix order must be >= 3, got " + std::to_string(n));
  if (lines.size() - 1 != static_cast<std::size_t>(n))
    throw Error(ErrorCode::ParseError,
                "expected " + std::to_string(n) + " rows, found " +
                    std::to_string(lines.size() - 1),
                static_cast<int>(lines.size()), 0);
  std::vector<std::vector<double>> rows;
  for (int r = 1; r <= n; ++r) {
    std::vector<double> vals;
    auto line = lines[static_cast<std::size_t>(r)];
    int c = 0;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      auto comma = line.find(',', pos);
      if (comma == std::string_view::npos) comma = line.size();
      ++c;
      auto v = detail::parse_ratio(line.substr(pos, comma - pos));
      if (!v)
        throw Error(ErrorCode::ParseError,
                    "cannot read a number at row " + std::to_string(r) +
                        ", column " + std::to_string(c),
                    r, c);
      vals.push_back(*v);
      pos = comma + 1;
    }
    if (c != n)
      throw Error(ErrorCode::ParseError,
                  "row " + std::to_string(r) + " has " + std::to_string(c) +
                      " entries, expected " + std::to_string(n),
                  r, 0);
    rows.push_back(std::move(vals));
  }
  return validate(rows, tol);
}

inline ComparisonMatrix parse_matrix(std::string_view text, MatrixFormat format,
                                     double tol = kDefaultReciprocityTol) {
  if (format == MatrixFormat::Csv) return parse_csv(text, tol);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed JSON: ") + e.what());
  }
  if (format == MatrixFormat::DenseJson && !j.is_array())
    throw Error(ErrorCode::ParseError, "dense JSON matrix must be an array of rows");
  if (format == MatrixFormat::UpperJson && !j.is_object())
    throw Error(ErrorCode::ParseError, "upper-triangle JSON must be an object");
  return matrix_from_json(j, tol);
}

/// Picks the format from the first non-blank character.
inline MatrixFormat detect_format(std::string_view text) {
  auto t = detail::trim(text);
  if (!t.empty() && t.front() == '[') return MatrixFormat::DenseJson;
  if (!t.empty() && t.front() == '{') return MatrixFormat::UpperJson;
  return MatrixFormat::Csv;
}

inline ComparisonMatrix parse_matrix(std::string_view text,
                                     double tol = kDefaultReciprocityTol) {
  return parse_matrix(text, detect_format(text), tol);
}

inline nlohmann::json dense_json(const ComparisonMatrix& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < a.order(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < a.order(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json upper_json(const ComparisonMatrix& a) {
  return {{"n", a.order()}, {"upper", a.upper()}};
}

inline std::string serialize_matrix(const ComparisonMatrix& a,
                                    MatrixFormat format) {
  switch (format) {
    case MatrixFormat::DenseJson: return dense_json(a).dump();
    case MatrixFormat::UpperJson: return upper_json(a).dump();
    case MatrixFormat::Csv: {
      std::ostringstream out;
      out << "n=" << a.order() << '\n';
      for (int i = 0; i < a.order(); ++i) {
        for (int j = 0; j < a.order(); ++j) {
          if (j) out << ',';
          out << detail::format_double(a(i, j));
        }
        out << '\n';
      }
      return out.str();
    }
  }
  return {};
}

}  // namespace pcmr
