#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "hte/csv.hpp"
#include "hte/errors.hpp"

namespace hte {

enum class VarKind { Continuous, Categorical };

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  std::vector<std::string> levels;  // categorical only, declared order
};

// Ordered covariate catalogue. A continuous variable occupies one matrix
// column; a categorical variable with q levels expands to q binary indicator
// columns in declared level order.
class CovariateSchema {
 public:
  explicit CovariateSchema(std::vector<Variable> vars) : vars_(std::move(vars)) {
    std::unordered_set<std::string> seen;
    offsets_.reserve(vars_.size());
    int offset = 0;
    for (const auto& v : vars_) {
      if (v.name.empty()) throw validation_error("schema: empty variable name");
      if (!seen.insert(v.name).second) {
        throw validation_error("schema: duplicate variable name \"" + v.name + "\"");
      }
      offsets_.push_back(offset);
      if (v.kind == VarKind::Categorical) {
        if (v.levels.size() < 2) {
          throw validation_error("schema: categorical \"" + v.name + "\" needs at least 2 levels");
        }
        std::unordered_set<std::string> level_seen;
        for (const auto& l : v.levels) {
          if (!level_seen.insert(l).second) {
            throw validation_error("schema: duplicate level \"" + l + "\" in \"" + v.name + "\"");
          }
        }
        offset += static_cast<int>(v.levels.size());
      } else {
        if (!v.levels.empty()) {
          throw validation_error("schema: continuous \"" + v.name + "\" must not declare levels");
        }
        offset += 1;
      }
    }
    width_ = offset;
    column_var_.resize(static_cast<std::size_t>(width_));
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      const int w = column_span(static_cast<int>(i));
      for (int c = 0; c < w; ++c) {
        column_var_[static_cast<std::size_t>(offsets_[i] + c)] = static_cast<int>(i);
      }
    }
  }

  std::size_t size() const { return vars_.size(); }
  const Variable& var(std::size_t i) const { return vars_[i]; }
  const std::vector<Variable>& vars() const { return vars_; }

  // Width of the expanded matrix.
  int width() const { return width_; }

  // First expanded column of variable i.
  int offset(std::size_t i) const { return offsets_[i]; }

  int column_span(int i) const {
    const auto& v = vars_[static_cast<std::size_t>(i)];
    return v.kind == VarKind::Categorical ? static_cast<int>(v.levels.size()) : 1;
  }

  // Variable owning an expanded column.
  int column_variable(int col) const { return column_var_[static_cast<std::size_t>(col)]; }

  int variable_index(const std::string& name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i].name == name) return static_cast<int>(i);
    }
    throw validation_error("schema: unknown variable \"" + name + "\"");
  }

  std::vector<std::string> expanded_names() const {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(width_));
    for (const auto& v : vars_) {
      if (v.kind == VarKind::Categorical) {
        for (const auto& l : v.levels) names.push_back(v.name + "=" + l);
      } else {
        names.push_back(v.name);
      }
    }
    return names;
  }

  int level_index(std::size_t var, const std::string& cell) const {
    const auto& levels = vars_[var].levels;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      if (levels[l] == cell) return static_cast<int>(l);
    }
    return -1;
  }

  bool operator==(const CovariateSchema& other) const {
    if (vars_.size() != other.vars_.size()) return false;
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i].name != other.vars_[i].name || vars_[i].kind != other.vars_[i].kind ||
          vars_[i].levels != other.vars_[i].levels) {
        return false;
      }
    }
    return true;
  }

  // Sidecar format, one variable per line:
  //   name,continuous
  //   name,categorical,level1,level2,...
  static CovariateSchema load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open schema file: " + path);
    std::vector<Variable> vars;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      auto fields = detail::split_csv_line(line, line_no);
      if (fields.size() < 2) {
        throw validation_error("schema file line " + std::to_string(line_no) + ": expected name,kind");
      }
      Variable v;
      v.name = fields[0];
      if (fields[1] == "continuous") {
        v.kind = VarKind::Continuous;
        if (fields.size() > 2) {
          throw validation_error("schema file line " + std::to_string(line_no) +
                                 ": continuous variable must not list levels");
        }
      } else if (fields[1] == "categorical") {
        v.kind = VarKind::Categorical;
        v.levels.assign(fields.begin() + 2, fields.end());
      } else {
        throw validation_error("schema file line " + std::to_string(line_no) + ": unknown kind \"" +
                               fields[1] + "\"");
      }
      vars.push_back(std::move(v));
    }
    return CovariateSchema(std::move(vars));
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open schema file for writing: " + path);
    for (const auto& v : vars_) {
      std::vector<std::string> fields{v.name,
                                      v.kind == VarKind::Categorical ? "categorical" : "continuous"};
      fields.insert(fields.end(), v.levels.begin(), v.levels.end());
      out << join_csv_row(fields) << '\n';
    }
  }

 private:
  std::vector<Variable> vars_;
  std::vector<int> offsets_;
  std::vector<int> column_var_;
  int width_ = 0;
};

}  // namespace hte
