#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "alfs/error.hpp"
#include "alfs/random.hpp"

namespace alfs {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using IndexList = std::vector<Index>;

/// A d x n data matrix (rows = features, columns = samples) with optional
/// per-sample labels. Labels travel with the data but selection methods only
/// ever see `matrix`.
struct Dataset {
  MatrixXd matrix;
  std::vector<std::string> feature_names;
  std::optional<std::vector<std::string>> labels;
  std::string source;

  Index dim() const { return matrix.rows(); }
  Index size() const { return matrix.cols(); }
  bool has_labels() const { return labels.has_value(); }
};

inline void check_dataset(const Dataset& ds) {
  detail::require(ds.dim() >= 1 && ds.size() >= 1, "dataset must have at least one feature and one sample");
  detail::require(static_cast<Index>(ds.feature_names.size()) == ds.dim(),
                  "feature_names length does not match the number of features");
  if (ds.labels)
    detail::require(static_cast<Index>(ds.labels->size()) == ds.size(),
                    "labels length does not match the number of samples");
  for (Index j = 0; j < ds.size(); ++j)
    for (Index i = 0; i < ds.dim(); ++i)
      if (!std::isfinite(ds.matrix(i, j)))
        throw ValidationError("non-finite entry at feature " + std::to_string(i) + ", sample " + std::to_string(j));
}

inline std::vector<std::string> default_feature_names(Index d) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) names.push_back("f" + std::to_string(i));
  return names;
}

/// Builds and validates a dataset; missing feature names become f0, f1, ...
inline Dataset make_dataset(MatrixXd matrix, std::vector<std::string> feature_names = {},
                            std::optional<std::vector<std::string>> labels = std::nullopt,
                            std::string source = "memory") {
  Dataset ds{std::move(matrix), std::move(feature_names), std::move(labels), std::move(source)};
  if (ds.feature_names.empty()) ds.feature_names = default_feature_names(ds.dim());
  check_dataset(ds);
  return ds;
}

// ---------------------------------------------------------------------------
// CSV

enum class Orientation { kRowsAreSamples, kRowsAreFeatures };

struct CsvOptions {
  bool has_header = true;
  std::optional<std::string> label_column;
  Orientation orientation = Orientation::kRowsAreSamples;
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

/// Parses CSV text into the internal d x n orientation. Cell positions in
/// error messages are 1-based file rows/columns.
inline Dataset parse_csv(std::istream& in, const CsvOptions& opts, std::string source = "stream") {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (first && opts.has_header) {
      for (auto& c : cells) c = std::string(detail::trim(c));
      header = std::move(cells);
    } else {
      rows.push_back(std::move(cells));
    }
    first = false;
  }
  if (rows.empty()) throw ValidationError(source + ": no data rows");

  const std::size_t width = opts.has_header ? header.size() : rows.front().size();
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows[r].size() != width)
      throw ValidationError(source + ": ragged row " + std::to_string(r + 1 + (opts.has_header ? 1 : 0)) + " has " +
                            std::to_string(rows[r].size()) + " cells, expected " + std::to_string(width));

  std::optional<std::size_t> label_col;
  if (opts.label_column) {
    if (!opts.has_header) throw ValidationError("label column requires a header row");
    if (opts.orientation != Orientation::kRowsAreSamples)
      throw ValidationError("label column is only supported for rows-are-samples files");
    const auto it = std::find(header.begin(), header.end(), *opts.label_column);
    if (it == header.end()) throw ValidationError(source + ": label column '" + *opts.label_column + "' not found");
    label_col = static_cast<std::size_t>(it - header.begin());
  }

  const std::size_t numeric_cols = width - (label_col ? 1 : 0);
  if (numeric_cols == 0) throw ValidationError(source + ": no numeric columns");
  MatrixXd raw(static_cast<Index>(rows.size()), static_cast<Index>(numeric_cols));
  std::vector<std::string> labels;
  std::vector<std::string> column_names;
  for (std::size_t c = 0; c < width; ++c)
    if (!label_col || c != *label_col) column_names.push_back(opts.has_header ? header[c] : "f" + std::to_string(column_names.size()));

  for (std::size_t r = 0; r < rows.size(); ++r) {
    Index out_c = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (label_col && c == *label_col) {
        labels.emplace_back(detail::trim(rows[r][c]));
        continue;
      }
      const auto value = detail::parse_double(rows[r][c]);
      const std::string where = "row " + std::to_string(r + 1 + (opts.has_header ? 1 : 0)) + ", column " + std::to_string(c + 1);
      if (!value) throw ValidationError(source + ": non-numeric cell at " + where + ": '" + rows[r][c] + "'");
      if (!std::isfinite(*value)) throw ValidationError(source + ": non-finite cell at " + where);
      raw(static_cast<Index>(r), out_c++) = *value;
    }
  }

  Dataset ds;
  ds.source = std::move(source);
  if (opts.orientation == Orientation::kRowsAreSamples) {
    ds.matrix = raw.transpose();
    ds.feature_names = std::move(column_names);
    if (label_col) ds.labels = std::move(labels);
  } else {
    ds.matrix = std::move(raw);
    ds.feature_names = default_feature_names(ds.matrix.rows());
  }
  check_dataset(ds);
  return ds;
}

inline Dataset load_csv(const std::string& path, const CsvOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open data file: " + path);
  return parse_csv(in, opts, path);
}

/// Writes rows-are-samples CSV with a header; labels go to a trailing
/// "label" column. Values use 17 significant digits so they reload exactly.
inline void write_csv(const Dataset& ds, std::ostream& out) {
  for (Index i = 0; i < ds.dim(); ++i) out << (i ? "," : "") << detail::quote_csv(ds.feature_names[static_cast<std::size_t>(i)]);
  if (ds.labels) out << ",label";
  out << '\n';
  for (Index j = 0; j < ds.size(); ++j) {
    for (Index i = 0; i < ds.dim(); ++i) out << (i ? "," : "") << detail::format_double(ds.matrix(i, j));
    if (ds.labels) out << ',' << detail::quote_csv((*ds.labels)[static_cast<std::size_t>(j)]);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Budgets, subsetting, splitting

struct SelectionRequest {
  Index m = 1;  // samples
  Index r = 1;  // features
};

inline void check_request(const SelectionRequest& req, Index d, Index n) {
  detail::require(req.m >= 1 && req.m <= n, "sample budget m=" + std::to_string(req.m) + " outside [1, " + std::to_string(n) + "]");
  detail::require(req.r >= 1 && req.r <= d, "feature budget r=" + std::to_string(req.r) + " outside [1, " + std::to_string(d) + "]");
}

inline Dataset select_samples(const Dataset& ds, const IndexList& cols) {
  Dataset out;
  out.matrix = ds.matrix(Eigen::all, cols);
  out.feature_names = ds.feature_names;
  if (ds.labels) {
    std::vector<std::string> labels;
    labels.reserve(cols.size());
    for (Index c : cols) labels.push_back((*ds.labels)[static_cast<std::size_t>(c)]);
    out.labels = std::move(labels);
  }
  out.source = ds.source;
  return out;
}

inline Dataset select_features(const Dataset& ds, const IndexList& rows) {
  Dataset out;
  out.matrix = ds.matrix(rows, Eigen::all);
  for (Index r : rows) out.feature_names.push_back(ds.feature_names[static_cast<std::size_t>(r)]);
  out.labels = ds.labels;
  out.source = ds.source;
  return out;
}

struct SplitSpec {
  Index n_train = 1;
  std::uint64_t seed = 0;
};

struct Split {
  Dataset train;
  Dataset test;
  IndexList train_columns;  // ascending
  IndexList test_columns;   // ascending
};

/// Random train/test column split, deterministic per seed.
inline Split split(const Dataset& ds, const SplitSpec& spec) {
  const Index n = ds.size();
  detail::require(spec.n_train >= 1 && spec.n_train < n,
                  "n_train=" + std::to_string(spec.n_train) + " outside [1, " + std::to_string(n - 1) + "]");
  Rng rng(spec.seed);
  IndexList perm = random_prefix(rng, n, n);
  IndexList train(perm.begin(), perm.begin() + spec.n_train);
  IndexList test(perm.begin() + spec.n_train, perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  Split out{select_samples(ds, train), select_samples(ds, test), std::move(train), std::move(test)};
  return out;
}

/// Per-feature z-scoring (population standard deviation); constant features
/// are only centred. Opt-in only.
inline Dataset standardize_features(const Dataset& ds) {
  Dataset out = ds;
  for (Index i = 0; i < ds.dim(); ++i) {
    auto row = out.matrix.row(i);
    const double mean = row.mean();
    row.array() -= mean;
    const double sd = std::sqrt(row.squaredNorm() / static_cast<double>(ds.size()));
    if (sd > 0.0) row /= sd;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Diagnostics

struct ValidationReport {
  IndexList zero_columns;
  IndexList constant_features;
  std::vector<std::pair<Index, Index>> duplicate_columns;

  bool clean() const { return zero_columns.empty() && constant_features.empty() && duplicate_columns.empty(); }
};

/// Report-only checks; never throws and never mutates.
inline ValidationReport validate(const Dataset& ds) {
  ValidationReport report;
  const MatrixXd& x = ds.matrix;
  for (Index j = 0; j < x.cols(); ++j)
    if ((x.col(j).array() == 0.0).all()) report.zero_columns.push_back(j);
  if (x.cols() > 1)
    for (Index i = 0; i < x.rows(); ++i)
      if ((x.row(i).array() == x(i, 0)).all()) report.constant_features.push_back(i);
  for (Index a = 0; a < x.cols(); ++a)
    for (Index b = a + 1; b < x.cols(); ++b)
      if (x.col(a) == x.col(b)) report.duplicate_columns.emplace_back(a, b);
  return report;
}

}  // namespace alfs
