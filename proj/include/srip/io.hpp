#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "srip/ensembles.hpp"
#include "srip/error.hpp"
#include "srip/experiments.hpp"
#include "srip/matrix.hpp"
#include "srip/subspace.hpp"

namespace srip::io {

using Json = nlohmann::ordered_json;

/// Text form used for every real number written by the library.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Tables

/// Empty cells (monostate) are blank in CSV and null in JSON.
using Cell = std::variant<std::monostate, bool, std::int64_t, std::uint64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    require(row.size() == columns.size(), ErrorKind::bad_parameters, "row width differs from the header");
    rows.push_back(std::move(row));
  }
};

inline Cell count_cell(std::size_t v) { return static_cast<std::uint64_t>(v); }
inline Cell optional_cell(const std::optional<double>& v) { return v ? Cell(*v) : Cell(); }

inline std::string cell_text(const Cell& c) {
  struct {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(const std::string& s) const { return s; }
  } visit;
  return std::visit(visit, c);
}

inline Json cell_json(const Cell& c) {
  struct {
    Json operator()(std::monostate) const { return nullptr; }
    Json operator()(bool b) const { return b; }
    Json operator()(std::int64_t v) const { return v; }
    Json operator()(std::uint64_t v) const { return v; }
    Json operator()(double v) const {
      if (!std::isfinite(v)) return nullptr;
      // Same 12 significant digits as the CSV form.
      return std::stod(format_number(v));
    }
    Json operator()(const std::string& s) const { return s; }
  } visit;
  return std::visit(visit, c);
}

inline void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << '\n';
  }
}

inline Json to_json(const Table& t) {
  Json arr = Json::array();
  for (const auto& row : t.rows) {
    Json obj = Json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = cell_json(row[i]);
    arr.push_back(std::move(obj));
  }
  return arr;
}

inline void write_json(std::ostream& os, const Table& t) { os << to_json(t).dump(2) << '\n'; }

// ---------------------------------------------------------------------------
// Plain numeric CSV parsing

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> nonblank_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (!t.empty() && t.front() != '#') out.push_back(std::move(t));
  }
  return out;
}

inline double parse_double(const std::string& field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    fail(ErrorKind::parse_error, "not a number: '" + field + "'");
  }
  require(used == field.size(), ErrorKind::parse_error, "not a number: '" + field + "'");
  require(std::isfinite(v), ErrorKind::parse_error, "non-finite value '" + field + "'");
  return v;
}

inline std::size_t parse_count(const std::string& field) {
  const double v = parse_double(field);
  require(v >= 0.0 && v == std::floor(v) && v < 1e15, ErrorKind::parse_error,
          "not a non-negative integer: '" + field + "'");
  return static_cast<std::size_t>(v);
}

inline std::vector<double> parse_row(const std::string& line) {
  std::vector<double> out;
  std::istringstream in(line);
  std::string field;
  while (std::getline(in, field, ',')) out.push_back(parse_double(trim(field)));
  return out;
}

inline std::vector<std::size_t> parse_counts(const std::string& line) {
  std::vector<std::size_t> out;
  std::istringstream in(line);
  std::string field;
  while (std::getline(in, field, ',')) out.push_back(parse_count(trim(field)));
  return out;
}

inline void write_row(std::ostream& os, std::span<const double> v) {
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << format_number(v[i]);
  os << '\n';
}

}  // namespace detail

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::parse_error, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool looks_like_json(std::string_view text) {
  const auto p = text.find_first_not_of(" \t\r\n");
  return p != std::string_view::npos && (text[p] == '{' || text[p] == '[');
}

// ---------------------------------------------------------------------------
// Subspaces: "N,d" then one basis column per line.

inline void write_subspace_csv(std::ostream& os, const Subspace& s) {
  os << s.ambient_dim() << ',' << s.dim() << '\n';
  for (std::size_t j = 0; j < s.dim(); ++j) detail::write_row(os, s.basis().column(j));
}

inline Json subspace_to_json(const Subspace& s) {
  Json basis = Json::array();
  for (std::size_t j = 0; j < s.dim(); ++j) {
    Json col = Json::array();
    for (double v : s.basis().column(j)) col.push_back(std::stod(format_number(v)));
    basis.push_back(std::move(col));
  }
  return Json{{"N", s.ambient_dim()}, {"d", s.dim()}, {"basis", std::move(basis)}};
}

namespace detail {

/// Columns are re-orthonormalized: 12-digit text is orthonormal only to ~1e-12.
inline Subspace subspace_from_columns(std::size_t n, const std::vector<std::vector<double>>& cols) {
  require(!cols.empty() && cols.size() <= n, ErrorKind::parse_error, "subspace dimension must satisfy 1 <= d <= N");
  for (const auto& c : cols)
    require(c.size() == n, ErrorKind::parse_error,
            "basis column has " + std::to_string(c.size()) + " entries, expected " + std::to_string(n));
  const Matrix gen = Matrix::from_columns(cols);
  const Matrix gram = transpose_times(gen, gen);
  require(max_abs_difference(gram, Matrix::identity(cols.size())) <= 1e-6, ErrorKind::parse_error,
          "basis columns are not orthonormal");
  return Subspace::span_of(gen);
}

}  // namespace detail

inline Subspace subspace_from_json(const Json& j) {
  try {
    const std::size_t n = j.at("N").get<std::size_t>();
    const std::size_t d = j.at("d").get<std::size_t>();
    const auto cols = j.at("basis").get<std::vector<std::vector<double>>>();
    require(cols.size() == d, ErrorKind::parse_error, "basis has " + std::to_string(cols.size()) + " columns, d=" +
                                                          std::to_string(d));
    return detail::subspace_from_columns(n, cols);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse_error, std::string("subspace JSON: ") + e.what());
  }
}

inline Subspace parse_subspace(const std::string& text) {
  if (looks_like_json(text)) {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::parse_error, std::string("subspace JSON: ") + e.what());
    }
    return subspace_from_json(j);
  }
  const auto lines = detail::nonblank_lines(text);
  require(!lines.empty(), ErrorKind::parse_error, "empty subspace file");
  const auto header = detail::parse_counts(lines.front());
  require(header.size() == 2, ErrorKind::parse_error, "subspace header must be 'N,d'");
  require(lines.size() == header[1] + 1, ErrorKind::parse_error,
          "expected " + std::to_string(header[1]) + " basis rows, found " + std::to_string(lines.size() - 1));
  std::vector<std::vector<double>> cols;
  for (std::size_t i = 1; i < lines.size(); ++i) cols.push_back(detail::parse_row(lines[i]));
  return detail::subspace_from_columns(header[0], cols);
}

// ---------------------------------------------------------------------------
// Ensemble specs: {family, n, N, params, seed}

inline Json spec_to_json(const EnsembleSpec& s) {
  return Json{{"family", std::string(to_string(s.family))},
              {"n", s.n},
              {"N", s.N},
              {"params",
               {{"nu", s.params.nu},
                {"real_generator", s.params.real_generator},
                {"sign_randomization", s.params.sign_randomization},
                {"unit_scale", s.params.unit_scale},
                {"rows", s.params.rows == RowSelection::prefix ? "prefix" : "random"}}},
              {"seed", s.seed}};
}

inline EnsembleSpec spec_from_json(const Json& j) {
  try {
    EnsembleSpec s;
    s.family = family_from_string(j.at("family").get<std::string>());
    s.n = j.at("n").get<std::size_t>();
    s.N = j.at("N").get<std::size_t>();
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("params")) {
      const Json& p = j.at("params");
      s.params.nu = p.value("nu", s.params.nu);
      s.params.real_generator = p.value("real_generator", s.params.real_generator);
      s.params.sign_randomization = p.value("sign_randomization", s.params.sign_randomization);
      s.params.unit_scale = p.value("unit_scale", s.params.unit_scale);
      const std::string rows = p.value("rows", std::string("random"));
      require(rows == "random" || rows == "prefix", ErrorKind::parse_error, "params.rows must be random or prefix");
      s.params.rows = rows == "prefix" ? RowSelection::prefix : RowSelection::random;
    }
    validate(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse_error, std::string("ensemble spec JSON: ") + e.what());
  }
}

/// Densified operator, one row of Φ per line.
inline void write_operator_csv(std::ostream& os, const ProjectionOperator& op) {
  const Matrix phi = op.densify();
  for (std::size_t i = 0; i < phi.rows(); ++i) detail::write_row(os, phi.row(i));
}

// ---------------------------------------------------------------------------
// Datasets: "N,M,L", then M lines of N coordinates, then an optional line of
// M labels in 1..L.

struct Dataset {
  Matrix points;  // N x M
  std::size_t clusters = 0;
  std::vector<std::size_t> labels;  // 0-based, empty when the file has none
};

inline void write_dataset_csv(std::ostream& os, const Matrix& points, std::size_t clusters,
                              std::span<const std::size_t> labels = {}) {
  os << points.rows() << ',' << points.cols() << ',' << clusters << '\n';
  for (std::size_t j = 0; j < points.cols(); ++j) detail::write_row(os, points.column(j));
  if (!labels.empty()) {
    for (std::size_t j = 0; j < labels.size(); ++j) os << (j ? "," : "") << labels[j] + 1;
    os << '\n';
  }
}

inline Dataset parse_dataset(const std::string& text) {
  const auto lines = detail::nonblank_lines(text);
  require(!lines.empty(), ErrorKind::parse_error, "empty dataset file");
  const auto header = detail::parse_counts(lines.front());
  require(header.size() == 3, ErrorKind::parse_error, "dataset header must be 'N,M,L'");
  const std::size_t n = header[0], m = header[1];
  require(n >= 1 && m >= 1 && header[2] >= 1, ErrorKind::parse_error, "N, M and L must be positive");
  require(lines.size() == m + 1 || lines.size() == m + 2, ErrorKind::parse_error,
          "expected " + std::to_string(m) + " point rows (plus an optional label row), found " +
              std::to_string(lines.size() - 1));
  Dataset ds;
  ds.clusters = header[2];
  ds.points = Matrix(n, m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto row = detail::parse_row(lines[j + 1]);
    require(row.size() == n, ErrorKind::parse_error,
            "point " + std::to_string(j + 1) + " has " + std::to_string(row.size()) + " coordinates, expected " +
                std::to_string(n));
    ds.points.set_column(j, row);
  }
  if (lines.size() == m + 2) {
    const auto labels = detail::parse_counts(lines.back());
    require(labels.size() == m, ErrorKind::parse_error, "label row must have M entries");
    for (std::size_t l : labels) {
      require(l >= 1 && l <= ds.clusters, ErrorKind::parse_error, "labels must lie in 1..L");
      ds.labels.push_back(l - 1);
    }
  }
  return ds;
}

}  // namespace srip::io
