#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hte/csv.hpp"
#include "hte/errors.hpp"
#include "hte/random.hpp"
#include "hte/schema.hpp"

namespace hte {

// Pre-expansion column content: continuous values, or level indices into the
// schema's declared levels.
using RawColumn = std::variant<std::vector<double>, std::vector<int>>;

// Immutable typed dataset: expanded covariate matrix (column-major), outcome,
// and 0/1 treatment indicator. Safe to share across concurrent workers.
class Dataset {
 public:
  Dataset(CovariateSchema schema, std::vector<RawColumn> columns, std::vector<double> y,
          std::vector<std::uint8_t> d)
      : schema_(std::move(schema)), y_(std::move(y)), d_(std::move(d)) {
    if (columns.size() != schema_.size()) {
      throw validation_error("dataset: column count does not match schema");
    }
    n_ = y_.size();
    if (n_ == 0) throw validation_error("dataset: needs at least one row");
    if (d_.size() != n_) throw validation_error("dataset: treatment length mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
      if (!std::isfinite(y_[i])) {
        throw validation_error("dataset: non-finite outcome at row " + std::to_string(i + 1));
      }
      if (d_[i] > 1) throw validation_error("dataset: treatment must be 0 or 1");
    }

    p_ = schema_.width();
    x_.assign(static_cast<std::size_t>(p_) * n_, 0.0);
    for (std::size_t v = 0; v < schema_.size(); ++v) {
      const auto& var = schema_.var(v);
      const int offset = schema_.offset(v);
      if (var.kind == VarKind::Continuous) {
        const auto* values = std::get_if<std::vector<double>>(&columns[v]);
        if (!values || values->size() != n_) {
          throw validation_error("dataset: bad continuous column \"" + var.name + "\"");
        }
        for (std::size_t i = 0; i < n_; ++i) {
          if (!std::isfinite((*values)[i])) {
            throw validation_error("dataset: non-finite value in \"" + var.name + "\" at row " +
                                   std::to_string(i + 1));
          }
          x_[static_cast<std::size_t>(offset) * n_ + i] = (*values)[i];
        }
      } else {
        const auto* levels = std::get_if<std::vector<int>>(&columns[v]);
        if (!levels || levels->size() != n_) {
          throw validation_error("dataset: bad categorical column \"" + var.name + "\"");
        }
        const int q = static_cast<int>(var.levels.size());
        for (std::size_t i = 0; i < n_; ++i) {
          const int l = (*levels)[i];
          if (l < 0 || l >= q) {
            throw validation_error("dataset: level index out of range in \"" + var.name +
                                   "\" at row " + std::to_string(i + 1));
          }
          x_[static_cast<std::size_t>(offset + l) * n_ + i] = 1.0;
        }
      }
    }
  }

  std::size_t n() const { return n_; }
  int width() const { return p_; }
  const CovariateSchema& schema() const { return schema_; }

  double x(std::size_t row, int col) const { return x_[static_cast<std::size_t>(col) * n_ + row]; }
  double y(std::size_t row) const { return y_[row]; }
  bool treated(std::size_t row) const { return d_[row] != 0; }
  std::uint8_t d(std::size_t row) const { return d_[row]; }

  const std::vector<double>& outcomes() const { return y_; }
  const std::vector<std::uint8_t>& treatments() const { return d_; }

  // Contiguous expanded column (length n); rows ascending.
  std::span<const double> column(int col) const {
    return {x_.data() + static_cast<std::size_t>(col) * n_, n_};
  }

  std::vector<double> row(std::size_t i) const {
    std::vector<double> r(static_cast<std::size_t>(p_));
    for (int j = 0; j < p_; ++j) r[static_cast<std::size_t>(j)] = x(i, j);
    return r;
  }

  std::size_t num_treated() const {
    std::size_t c = 0;
    for (auto v : d_) c += v;
    return c;
  }

  // Constant propensity: explicit override, else the sample proportion of
  // treated rows. Must lie strictly inside (0, 1) to be usable.
  double propensity() const {
    double p = propensity_override_
                   ? *propensity_override_
                   : static_cast<double>(num_treated()) / static_cast<double>(n_);
    if (!(p > 0.0 && p < 1.0)) {
      throw validation_error("dataset: propensity must lie in (0,1); got " + format_double(p));
    }
    return p;
  }

  void set_propensity(double p) {
    if (!(p > 0.0 && p < 1.0)) throw validation_error("propensity must lie in (0,1)");
    propensity_override_ = p;
  }

  void set_row_propensities(std::vector<double> p) {
    if (p.size() != n_) throw validation_error("row propensities: length mismatch");
    for (double v : p) {
      if (!(v > 0.0 && v < 1.0)) throw validation_error("row propensity must lie in (0,1)");
    }
    row_propensity_ = std::move(p);
  }

  bool has_row_propensities() const { return !row_propensity_.empty(); }

  double row_propensity(std::size_t i) const {
    return row_propensity_.empty() ? propensity() : row_propensity_[i];
  }

  Dataset with_outcome(std::vector<double> y) const {
    Dataset copy(*this);
    if (y.size() != n_) throw validation_error("with_outcome: length mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
      if (!std::isfinite(y[i])) throw validation_error("with_outcome: non-finite outcome");
    }
    copy.y_ = std::move(y);
    return copy;
  }

  Dataset subset(std::span<const std::uint32_t> rows) const {
    if (rows.empty()) throw validation_error("subset: empty index set");
    Dataset out;
    out.schema_ = schema_;
    out.n_ = rows.size();
    out.p_ = p_;
    out.x_.resize(static_cast<std::size_t>(p_) * rows.size());
    out.y_.resize(rows.size());
    out.d_.resize(rows.size());
    for (int j = 0; j < p_; ++j) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        out.x_[static_cast<std::size_t>(j) * rows.size() + i] = x(rows[i], j);
      }
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.y_[i] = y_[rows[i]];
      out.d_[i] = d_[rows[i]];
    }
    out.propensity_override_ = propensity_override_;
    if (!row_propensity_.empty()) {
      out.row_propensity_.resize(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row_propensity_[i] = row_propensity_[rows[i]];
      }
    }
    return out;
  }

  // Writes header plus one row per observation: schema variables in declared
  // order (categoricals as level strings reconstructed from the indicator
  // block), then outcome and treatment. Numbers use shortest round-trip
  // formatting so a reload reproduces x, y, d bit-exactly.
  void write_csv(const std::string& path, const std::string& outcome_col,
                 const std::string& treatment_col) const {
    CsvWriter w(path);
    std::vector<std::string> header;
    for (const auto& v : schema_.vars()) header.push_back(v.name);
    header.push_back(outcome_col);
    header.push_back(treatment_col);
    w.row(header);
    std::vector<std::string> fields;
    for (std::size_t i = 0; i < n_; ++i) {
      fields.clear();
      for (std::size_t v = 0; v < schema_.size(); ++v) {
        const auto& var = schema_.var(v);
        const int offset = schema_.offset(v);
        if (var.kind == VarKind::Continuous) {
          fields.push_back(format_double(x(i, offset)));
        } else {
          int level = -1;
          for (std::size_t l = 0; l < var.levels.size(); ++l) {
            if (x(i, offset + static_cast<int>(l)) == 1.0) {
              level = static_cast<int>(l);
              break;
            }
          }
          fields.push_back(var.levels[static_cast<std::size_t>(level)]);
        }
      }
      fields.push_back(format_double(y_[i]));
      fields.push_back(d_[i] ? "1" : "0");
      w.row(fields);
    }
  }

 private:
  Dataset() = default;

  CovariateSchema schema_{std::vector<Variable>{}};
  std::vector<double> x_;  // column-major, p columns of length n
  std::vector<double> y_;
  std::vector<std::uint8_t> d_;
  std::optional<double> propensity_override_;
  std::vector<double> row_propensity_;
  std::size_t n_ = 0;
  int p_ = 0;
};

// Parses a CSV file against a declared schema. Rows keep file order; every
// parse failure is reported with its 1-based line and column name.
inline Dataset load_csv(const std::string& path, const CovariateSchema& schema,
                        const std::string& outcome_col, const std::string& treatment_col) {
  const CsvTable table = read_csv(path);
  if (table.rows.empty()) throw validation_error("no data rows in " + path);

  std::vector<std::size_t> var_cols(schema.size());
  for (std::size_t v = 0; v < schema.size(); ++v) var_cols[v] = table.column(schema.var(v).name);
  const std::size_t y_col = table.column(outcome_col);
  const std::size_t d_col = table.column(treatment_col);

  const std::size_t n = table.rows.size();
  std::vector<RawColumn> columns;
  columns.reserve(schema.size());
  for (std::size_t v = 0; v < schema.size(); ++v) {
    if (schema.var(v).kind == VarKind::Continuous) {
      columns.emplace_back(std::vector<double>(n));
    } else {
      columns.emplace_back(std::vector<int>(n));
    }
  }
  std::vector<double> y(n);
  std::vector<std::uint8_t> d(n);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    const std::string line = "row " + std::to_string(i + 2);  // 1-based line incl. header
    if (row.size() != table.header.size()) {
      throw validation_error(line + ": expected " + std::to_string(table.header.size()) +
                             " fields, got " + std::to_string(row.size()));
    }
    for (std::size_t v = 0; v < schema.size(); ++v) {
      const auto& var = schema.var(v);
      const std::string& cell = row[var_cols[v]];
      if (var.kind == VarKind::Continuous) {
        std::get<std::vector<double>>(columns[v])[i] =
            parse_double(cell, line + ", column \"" + var.name + "\"");
      } else {
        const int l = schema.level_index(v, cell);
        if (l < 0) {
          throw validation_error("unknown categorical level \"" + cell + "\" at " + line +
                                 ", column \"" + var.name + "\"");
        }
        std::get<std::vector<int>>(columns[v])[i] = l;
      }
    }
    y[i] = parse_double(row[y_col], line + ", column \"" + outcome_col + "\"");
    const double dv = parse_double(row[d_col], line + ", column \"" + treatment_col + "\"");
    if (dv != 0.0 && dv != 1.0) {
      throw validation_error("treatment must be 0 or 1 at " + line + ", column \"" + treatment_col +
                             "\"");
    }
    d[i] = dv == 1.0 ? 1 : 0;
  }

  return Dataset(schema, std::move(columns), std::move(y), std::move(d));
}

// Disjoint index halves of sizes (ceil(n/2), floor(n/2)), drawn uniformly.
inline std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> split_half_indices(
    std::size_t n, SeededRng& rng) {
  if (n < 2) throw validation_error("split_half: needs at least 2 rows");
  auto perm = rng.permutation(static_cast<std::uint32_t>(n));
  const std::size_t first_size = (n + 1) / 2;
  std::vector<std::uint32_t> first(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(first_size));
  std::vector<std::uint32_t> second(perm.begin() + static_cast<std::ptrdiff_t>(first_size), perm.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {std::move(first), std::move(second)};
}

inline std::pair<Dataset, Dataset> split_half(const Dataset& data, SeededRng& rng) {
  auto [first, second] = split_half_indices(data.n(), rng);
  return {data.subset(first), data.subset(second)};
}

// floor(fraction*n) distinct row indices drawn uniformly without replacement,
// returned in ascending order.
inline std::vector<std::uint32_t> subsample(std::size_t n, double fraction, SeededRng& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw validation_error("subsample: fraction must lie in (0,1]");
  }
  const auto k = static_cast<std::uint32_t>(std::floor(fraction * static_cast<double>(n)));
  if (k < 2) throw validation_error("subsample: floor(fraction*n) must be at least 2");
  auto out = rng.sample_without_replacement(static_cast<std::uint32_t>(n), k);
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<std::uint32_t> subsample(const Dataset& data, double fraction, SeededRng& rng) {
  return subsample(data.n(), fraction, rng);
}

}  // namespace hte
