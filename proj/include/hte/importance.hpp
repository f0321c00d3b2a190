#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hte/dataset.hpp"
#include "hte/errors.hpp"
#include "hte/forest.hpp"
#include "hte/parallel.hpp"
#include "hte/random.hpp"

namespace hte {

inline constexpr int kImportanceMaxDepth = 4;

struct VariableImportance {
  std::string variable;
  double raw = 0.0;     // depth-weighted split proportion, in [0,1]
  double scaled = 0.0;  // 100 * raw / max(raw)
  std::optional<double> p_value;
};

struct ImportanceReport {
  std::vector<VariableImportance> variables;  // schema order (pre-expansion)

  const VariableImportance& operator[](const std::string& name) const {
    for (const auto& v : variables) {
      if (v.variable == name) return v;
    }
    throw validation_error("importance report: unknown variable \"" + name + "\"");
  }
};

namespace detail {

// Depth-weighted split proportions per expanded column:
//   imp(col) = sum_{k=1..4} [fraction of depth-k splits on col] * k^-2
//              / sum_{k=1..4} k^-2
// with depths counted across the whole forest and a depth contributing zero
// when the forest has no splits there.
inline std::vector<double> column_importances(const CausalForest& forest) {
  const int width = forest.width();
  std::array<double, kImportanceMaxDepth> depth_totals{};
  std::vector<std::array<double, kImportanceMaxDepth>> counts(
      static_cast<std::size_t>(width), std::array<double, kImportanceMaxDepth>{});

  for (const auto& ft : forest.trees()) {
    for (const auto& node : ft.tree.nodes) {
      if (node.is_leaf() || node.depth > kImportanceMaxDepth) continue;
      const auto k = static_cast<std::size_t>(node.depth - 1);
      depth_totals[k] += 1.0;
      counts[static_cast<std::size_t>(node.split.feature)][k] += 1.0;
    }
  }

  double weight_sum = 0.0;
  std::array<double, kImportanceMaxDepth> weights{};
  for (int k = 1; k <= kImportanceMaxDepth; ++k) {
    weights[static_cast<std::size_t>(k - 1)] = 1.0 / (static_cast<double>(k) * k);
    weight_sum += weights[static_cast<std::size_t>(k - 1)];
  }

  std::vector<double> importances(static_cast<std::size_t>(width), 0.0);
  for (int col = 0; col < width; ++col) {
    double num = 0.0;
    for (std::size_t k = 0; k < kImportanceMaxDepth; ++k) {
      if (depth_totals[k] > 0.0) {
        num += counts[static_cast<std::size_t>(col)][k] / depth_totals[k] * weights[k];
      }
    }
    importances[static_cast<std::size_t>(col)] = num / weight_sum;
  }
  return importances;
}

inline std::vector<double> variable_importances(const CausalForest& forest) {
  const auto per_column = column_importances(forest);
  const auto& schema = forest.schema();
  std::vector<double> per_var(schema.size(), 0.0);
  for (int col = 0; col < forest.width(); ++col) {
    per_var[static_cast<std::size_t>(schema.column_variable(col))] +=
        per_column[static_cast<std::size_t>(col)];
  }
  return per_var;
}

inline ImportanceReport report_from_raw(const CovariateSchema& schema,
                                        const std::vector<double>& raw) {
  double max_raw = 0.0;
  for (double r : raw) max_raw = std::max(max_raw, r);
  ImportanceReport report;
  report.variables.reserve(schema.size());
  for (std::size_t v = 0; v < schema.size(); ++v) {
    VariableImportance vi;
    vi.variable = schema.var(v).name;
    vi.raw = raw[v];
    vi.scaled = max_raw > 0.0 ? 100.0 * raw[v] / max_raw : 0.0;
    report.variables.push_back(std::move(vi));
  }
  return report;
}

}  // namespace detail

// Importance of a categorical variable is the sum over its indicator
// columns; p_value is absent.
inline ImportanceReport split_frequency_importance(const CausalForest& forest) {
  return detail::report_from_raw(forest.schema(), detail::variable_importances(forest));
}

struct PermutationTestConfig {
  int num_permutations = 1000;
  ForestParams forest_params;
  std::uint64_t seed = 0;
  // Default p-value: #{replicates with strictly greater importance} / R.
  // The smoothed alternative (count+1)/(R+1) never reports an exact zero.
  bool smoothed_pvalues = false;

  void validate() const {
    if (num_permutations < 1) {
      throw validation_error("permutation test: num_permutations must be >= 1");
    }
    forest_params.validate();
  }
};

struct PermutationTestDetail {
  std::vector<double> reference_raw;               // per variable
  std::vector<std::vector<double>> replicate_raw;  // [replicate][variable]
};

// Fits a reference causal forest on the original outcome, then refits on
// `num_permutations` outcome permutations (covariates and treatment fixed)
// and reports, per variable, the fraction of permuted forests whose
// importance exceeds the reference importance.
inline ImportanceReport permutation_pvalues(const Dataset& data,
                                            const PermutationTestConfig& config, int workers = 1,
                                            PermutationTestDetail* detail_out = nullptr) {
  config.validate();
  const std::size_t num_vars = data.schema().size();

  ForestParams ref_params = config.forest_params;
  {
    SeededRng rng(config.seed, make_stream(streams::kReferenceFit));
    ref_params.seed = rng.next_u64();
  }
  const CausalForest reference = fit_causal_forest(data, ref_params, workers);
  const std::vector<double> ref_raw = detail::variable_importances(reference);

  const auto R = static_cast<std::size_t>(config.num_permutations);
  std::vector<std::vector<double>> replicate_raw(R);

  parallel_for(R, workers, [&](std::size_t r) {
    SeededRng perm_rng(config.seed, make_stream(streams::kPermutation, r));
    const auto order = perm_rng.permutation(static_cast<std::uint32_t>(data.n()));
    std::vector<double> permuted(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) permuted[i] = data.y(order[i]);

    ForestParams fit_params = config.forest_params;
    SeededRng fit_seed_rng(config.seed, make_stream(streams::kPermutedFit, r));
    fit_params.seed = fit_seed_rng.next_u64();

    const Dataset permuted_data = data.with_outcome(std::move(permuted));
    const CausalForest forest = fit_causal_forest(permuted_data, fit_params, /*workers=*/1);
    replicate_raw[r] = detail::variable_importances(forest);
  });

  ImportanceReport report = detail::report_from_raw(data.schema(), ref_raw);
  for (std::size_t v = 0; v < num_vars; ++v) {
    std::size_t exceed = 0;
    for (const auto& rep : replicate_raw) {
      if (rep[v] > ref_raw[v]) ++exceed;
    }
    report.variables[v].p_value =
        config.smoothed_pvalues
            ? static_cast<double>(exceed + 1) / static_cast<double>(R + 1)
            : static_cast<double>(exceed) / static_cast<double>(R);
  }

  if (detail_out) {
    detail_out->reference_raw = ref_raw;
    detail_out->replicate_raw = std::move(replicate_raw);
  }
  return report;
}

}  // namespace hte
