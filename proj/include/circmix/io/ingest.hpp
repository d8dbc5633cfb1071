#ifndef CIRCMIX_IO_INGEST_HPP
#define CIRCMIX_IO_INGEST_HPP

// Builds a Dataset from a delimited table: angle columns, numeric covariates and
// reference-coded categorical covariates.

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "circmix/angles.hpp"
#include "circmix/errors.hpp"
#include "circmix/io/table.hpp"
#include "circmix/mixture.hpp"

namespace circmix::io {

enum class AngleUnit { Radians, Degrees };

inline AngleUnit angle_unit_from_string(const std::string& s) {
  if (s == "degrees" || s == "deg") return AngleUnit::Degrees;
  if (s == "radians" || s == "rad") return AngleUnit::Radians;
  throw DomainError("unknown angle unit '" + s + "' (expected degrees or radians)");
}

struct IngestOptions {
  std::string circular_column;
  std::string axial_column;
  AngleUnit unit = AngleUnit::Degrees;
  std::vector<std::string> covariates;            // in design-matrix order
  std::map<std::string, std::string> categorical; // column -> reference level
  char delimiter = ',';
};

struct IngestResult {
  Dataset data;
  std::size_t rows_read = 0;
  std::vector<std::size_t> dropped_lines;  // rows with a missing value in a used column
  std::vector<std::size_t> source_lines;   // source line of each kept row
};

inline bool is_missing(const std::string& s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "."; }

inline double parse_number(const std::string& s, std::size_t lineno, const std::string& column) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw DataError("line " + std::to_string(lineno) + ": column '" + column + "': cannot parse '" + s + "' as a number");
  }
  return v;
}

inline IngestResult ingest(const Table& t, const IngestOptions& opt) {
  if (opt.circular_column.empty() || opt.axial_column.empty()) {
    throw DomainError("ingest: circular and axial column names are required");
  }
  for (const auto& [col, ref] : opt.categorical) {
    if (std::find(opt.covariates.begin(), opt.covariates.end(), col) == opt.covariates.end()) {
      throw DomainError("ingest: categorical column '" + col + "' is not listed among the covariates");
    }
  }
  const std::size_t cx = t.column(opt.circular_column);
  const std::size_t cy = t.column(opt.axial_column);
  std::vector<std::size_t> cov_cols;
  for (const auto& c : opt.covariates) cov_cols.push_back(t.column(c));

  IngestResult out;
  out.rows_read = t.rows.size();
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    bool missing = is_missing(t.rows[r][cx]) || is_missing(t.rows[r][cy]);
    for (std::size_t c : cov_cols) missing = missing || is_missing(t.rows[r][c]);
    if (missing) {
      out.dropped_lines.push_back(t.line[r]);
    } else {
      keep.push_back(r);
    }
  }
  if (keep.empty()) throw DataError("no complete rows in the input");

  // Design columns: intercept, then each covariate in order; categorical ones
  // expand into one indicator per non-reference level, levels sorted.
  std::vector<std::string> names{"(intercept)"};
  struct Block {
    std::size_t column;
    bool categorical;
    std::vector<std::string> levels;
  };
  std::vector<Block> blocks;
  for (std::size_t k = 0; k < opt.covariates.size(); ++k) {
    const auto& name = opt.covariates[k];
    const auto it = opt.categorical.find(name);
    if (it == opt.categorical.end()) {
      blocks.push_back({cov_cols[k], false, {}});
      names.push_back(name);
      continue;
    }
    std::set<std::string> levels;
    for (std::size_t r : keep) levels.insert(t.rows[r][cov_cols[k]]);
    if (!levels.count(it->second)) {
      throw DataError("categorical column '" + name + "': reference level '" + it->second + "' does not occur");
    }
    Block b{cov_cols[k], true, {}};
    for (const auto& l : levels) {
      if (l == it->second) continue;
      b.levels.push_back(l);
      names.push_back(name + l);
    }
    blocks.push_back(std::move(b));
  }

  const auto n = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd z(n, static_cast<Eigen::Index>(names.size()));
  std::vector<double> x(keep.size()), y(keep.size());
  const double scale = opt.unit == AngleUnit::Degrees ? kPi / 180.0 : 1.0;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto& row = t.rows[keep[i]];
    const std::size_t lineno = t.line[keep[i]];
    x[i] = wrap_circular(parse_number(row[cx], lineno, opt.circular_column) * scale);
    y[i] = wrap_axial(parse_number(row[cy], lineno, opt.axial_column) * scale);
    Eigen::Index c = 0;
    const auto ii = static_cast<Eigen::Index>(i);
    z(ii, c++) = 1.0;
    for (const auto& b : blocks) {
      if (!b.categorical) {
        z(ii, c++) = parse_number(row[b.column], lineno, t.header[b.column]);
        continue;
      }
      for (const auto& l : b.levels) z(ii, c++) = row[b.column] == l ? 1.0 : 0.0;
    }
    out.source_lines.push_back(lineno);
  }
  out.data = Dataset::make(std::move(x), std::move(y), std::move(z), std::move(names));
  return out;
}

inline IngestResult ingest(const std::string& path, const IngestOptions& opt) {
  return ingest(read_table(path, opt.delimiter), opt);
}

}  // namespace circmix::io

#endif  // CIRCMIX_IO_INGEST_HPP
