#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hte/dataset.hpp"
#include "hte/errors.hpp"
#include "hte/forest.hpp"
#include "hte/ols.hpp"
#include "hte/parallel.hpp"
#include "hte/random.hpp"
#include "hte/stats.hpp"

namespace hte {

// One main/auxiliary data split with proxy effect scores S(Z) and baseline
// outcome scores B(Z) evaluated on the main rows only.
struct SplitRun {
  std::vector<std::uint32_t> main_rows;
  std::vector<std::uint32_t> aux_rows;
  std::vector<double> proxy_scores;     // S(Z), aligned with main_rows
  std::vector<double> baseline_scores;  // B(Z), aligned with main_rows
};

// Median-of-splits aggregate: the final upper bound is the lower median of
// the per-split upper bounds, the final lower bound the upper median of the
// per-split lower bounds, and the point the midpoint of the lower and upper
// medians of the per-split estimates. Per-split intervals are at 95%, the
// aggregated interval is reported at 90%.
struct MedianAggregate {
  double point = std::numeric_limits<double>::quiet_NaN();
  double ci_low = std::numeric_limits<double>::quiet_NaN();
  double ci_high = std::numeric_limits<double>::quiet_NaN();
  double per_split_level = 0.95;
  double reported_level = 0.90;
  int num_valid_splits = 0;
  bool has_bounds = false;

  bool excludes_zero() const { return has_bounds && (ci_low > 0.0 || ci_high < 0.0); }
  bool covers_zero() const { return has_bounds && ci_low <= 0.0 && 0.0 <= ci_high; }
};

inline MedianAggregate median_aggregate(const std::vector<double>& points,
                                        const std::vector<double>& lows,
                                        const std::vector<double>& highs) {
  if (points.empty()) throw degeneracy_error("median_aggregate: no valid splits");
  MedianAggregate out;
  out.num_valid_splits = static_cast<int>(points.size());
  out.point = 0.5 * (lower_median(points) + upper_median(points));
  if (!lows.empty() && lows.size() == highs.size()) {
    out.ci_low = upper_median(lows);
    out.ci_high = lower_median(highs);
    out.has_bounds = true;
  }
  return out;
}

struct InferenceParams {
  int num_splits = 1000;
  ForestParams forest_params;
  std::uint64_t seed = 0;
  int num_groups = 4;  // K for GATE/CLAN quantile groups
  // When set, GATE regresses the outcome on the group indicators themselves
  // instead of their interactions with the centered treatment indicator.
  bool gate_printed_form = false;

  void validate() const {
    if (num_splits < 1) throw validation_error("inference: num_splits must be >= 1");
    if (num_groups < 2) throw validation_error("inference: num_groups must be >= 2");
    forest_params.validate();
  }
};

// Halves the data, trains a causal forest on the auxiliary half and a
// regression forest on its untreated rows, and scores the main half.
inline SplitRun make_split_run(const Dataset& data, const ForestParams& forest_params,
                               SeededRng& rng, int workers = 1) {
  SplitRun run;
  auto [main_rows, aux_rows] = split_half_indices(data.n(), rng);
  run.main_rows = std::move(main_rows);
  run.aux_rows = std::move(aux_rows);

  const Dataset aux = data.subset(run.aux_rows);

  std::vector<std::uint32_t> untreated;
  for (std::uint32_t i = 0; i < aux.n(); ++i) {
    if (!aux.treated(i)) untreated.push_back(i);
  }
  if (untreated.empty()) {
    throw degeneracy_error("make_split_run: auxiliary half has no untreated rows");
  }
  const Dataset aux_untreated = aux.subset(untreated);

  ForestParams cf_params = forest_params;
  cf_params.seed = rng.next_u64();
  ForestParams rf_params = forest_params;
  rf_params.seed = rng.next_u64();

  const CausalForest cf = fit_causal_forest(aux, cf_params, workers);
  const CausalForest rf = fit_regression_forest(aux_untreated, rf_params, workers);

  run.proxy_scores.resize(run.main_rows.size());
  run.baseline_scores.resize(run.main_rows.size());
  for (std::size_t i = 0; i < run.main_rows.size(); ++i) {
    const auto row = data.row(run.main_rows[i]);
    run.proxy_scores[i] = predict_value(cf, row);
    run.baseline_scores[i] = predict_value(rf, row);
  }
  return run;
}

// Quantile-block labels 0..K-1 over the scores; block 0 holds the lowest
// scores. Ties are broken by row index so the partition is deterministic and
// depends on score ranks only.
inline std::vector<int> group_partition(const std::vector<double>& scores,
                                        const std::vector<std::uint32_t>& row_ids, int num_groups) {
  const std::size_t m = scores.size();
  if (row_ids.size() != m) throw validation_error("group_partition: size mismatch");
  if (m < static_cast<std::size_t>(num_groups)) {
    throw degeneracy_error("group_partition: fewer rows than groups");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return row_ids[a] < row_ids[b];
  });
  std::vector<int> labels(m, 0);
  for (int g = 0; g < num_groups; ++g) {
    const std::size_t begin = m * static_cast<std::size_t>(g) / static_cast<std::size_t>(num_groups);
    const std::size_t end =
        m * static_cast<std::size_t>(g + 1) / static_cast<std::size_t>(num_groups);
    for (std::size_t i = begin; i < end; ++i) labels[order[i]] = g;
  }
  return labels;
}

namespace detail {

struct IntervalEstimate {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool has_bounds = true;
};

inline IntervalEstimate interval_from_fit(const WlsFit& fit, int j) {
  IntervalEstimate e;
  e.estimate = fit.beta(j);
  const auto [lo, hi] = fit.confidence_interval(j, 0.95);
  e.ci_low = lo;
  e.ci_high = hi;
  return e;
}

inline IntervalEstimate contrast_from_fit(const WlsFit& fit, int a, int b) {
  IntervalEstimate e;
  e.estimate = fit.beta(a) - fit.beta(b);
  const double var =
      fit.covariance(a, a) + fit.covariance(b, b) - 2.0 * fit.covariance(a, b);
  const double z = normal_quantile(0.975);
  const double half = z * std::sqrt(std::max(0.0, var));
  e.ci_low = e.estimate - half;
  e.ci_high = e.estimate + half;
  return e;
}

struct RegressionInputs {
  Eigen::VectorXd y;
  Eigen::VectorXd weights;
  std::vector<double> centered_treatment;  // D_i - p(Z_i) over main rows
};

inline RegressionInputs regression_inputs(const Dataset& data, const SplitRun& run) {
  const std::size_t m = run.main_rows.size();
  RegressionInputs in;
  in.y.resize(static_cast<Eigen::Index>(m));
  in.weights.resize(static_cast<Eigen::Index>(m));
  in.centered_treatment.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::uint32_t row = run.main_rows[i];
    const double p = data.row_propensity(row);
    in.y(static_cast<Eigen::Index>(i)) = data.y(row);
    in.weights(static_cast<Eigen::Index>(i)) = 1.0 / (p * (1.0 - p));
    in.centered_treatment[i] = static_cast<double>(data.d(row)) - p;
  }
  return in;
}

inline MedianAggregate aggregate_intervals(const std::vector<IntervalEstimate>& estimates) {
  std::vector<double> points;
  std::vector<double> lows;
  std::vector<double> highs;
  points.reserve(estimates.size());
  for (const auto& e : estimates) {
    points.push_back(e.estimate);
    if (e.has_bounds) {
      lows.push_back(e.ci_low);
      highs.push_back(e.ci_high);
    }
  }
  return median_aggregate(points, lows, highs);
}

}  // namespace detail

struct BlpSplitEstimate {
  detail::IntervalEstimate beta1;
  detail::IntervalEstimate beta2;
};

// Weighted regression of the outcome on [1, B(Z), D-p, (D-p)(S - mean(S))]
// over the main rows, weights {p(1-p)}^-1, HC1 intervals. Returns nothing
// when the design is rank deficient (e.g. zero-variance proxy scores).
inline std::optional<BlpSplitEstimate> blp_on_split(const Dataset& data, const SplitRun& run) {
  const std::size_t m = run.main_rows.size();
  if (run.proxy_scores.size() != m || run.baseline_scores.size() != m) {
    throw validation_error("blp_on_split: scores misaligned with main rows");
  }
  const auto in = detail::regression_inputs(data, run);
  const double s_mean = mean(run.proxy_scores);

  Eigen::MatrixXd design(static_cast<Eigen::Index>(m), 4);
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    design(r, 0) = 1.0;
    design(r, 1) = run.baseline_scores[i];
    design(r, 2) = in.centered_treatment[i];
    design(r, 3) = in.centered_treatment[i] * (run.proxy_scores[i] - s_mean);
  }

  try {
    const WlsFit fit = weighted_ols(design, in.y, in.weights);
    return BlpSplitEstimate{detail::interval_from_fit(fit, 2), detail::interval_from_fit(fit, 3)};
  } catch (const degeneracy_error&) {
    return std::nullopt;
  }
}

struct GateSplitEstimate {
  std::vector<detail::IntervalEstimate> gamma;  // group 1..K
  detail::IntervalEstimate top_minus_bottom;    // gamma_K - gamma_1
};

inline std::optional<GateSplitEstimate> gate_on_split(const Dataset& data, const SplitRun& run,
                                                      int num_groups, bool printed_form) {
  const std::size_t m = run.main_rows.size();
  std::vector<int> labels;
  try {
    labels = group_partition(run.proxy_scores, run.main_rows, num_groups);
  } catch (const degeneracy_error&) {
    return std::nullopt;
  }
  std::vector<int> group_sizes(static_cast<std::size_t>(num_groups), 0);
  for (int g : labels) ++group_sizes[static_cast<std::size_t>(g)];
  for (int size : group_sizes) {
    if (size == 0) return std::nullopt;
  }

  const auto in = detail::regression_inputs(data, run);
  const int k = num_groups;
  // Interacted form: [1, B, (D-p) * 1(G_g)] estimates per-group treatment
  // effects. Printed form: [B, 1(G_g)] with the intercept absorbed by the
  // exhaustive group indicators.
  const int cols = printed_form ? 1 + k : 2 + k;
  const int gamma_offset = printed_form ? 1 : 2;
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), cols);
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (printed_form) {
      design(r, 0) = run.baseline_scores[i];
      design(r, 1 + labels[i]) = 1.0;
    } else {
      design(r, 0) = 1.0;
      design(r, 1) = run.baseline_scores[i];
      design(r, 2 + labels[i]) = in.centered_treatment[i];
    }
  }

  try {
    const WlsFit fit = weighted_ols(design, in.y, in.weights);
    GateSplitEstimate est;
    est.gamma.reserve(static_cast<std::size_t>(k));
    for (int g = 0; g < k; ++g) {
      est.gamma.push_back(detail::interval_from_fit(fit, gamma_offset + g));
    }
    est.top_minus_bottom =
        detail::contrast_from_fit(fit, gamma_offset + k - 1, gamma_offset);
    return est;
  } catch (const degeneracy_error&) {
    return std::nullopt;
  }
}

// A covariate/outcome functional evaluated per row for CLAN.
struct Functional {
  std::string name;
  std::function<double(const Dataset&, std::uint32_t)> fn;
};

inline Functional column_functional(const Dataset& data, const std::string& expanded_name) {
  const auto names = data.schema().expanded_names();
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (names[c] == expanded_name) {
      const int col = static_cast<int>(c);
      return Functional{expanded_name,
                        [col](const Dataset& d, std::uint32_t row) { return d.x(row, col); }};
    }
  }
  throw validation_error("clan: unknown column \"" + expanded_name + "\"");
}

inline Functional outcome_functional(const std::string& name = "outcome") {
  return Functional{name, [](const Dataset& d, std::uint32_t row) { return d.y(row); }};
}

struct ClanSplitEstimate {
  detail::IntervalEstimate low_group;   // E[g | G_1]
  detail::IntervalEstimate high_group;  // E[g | G_K]
  detail::IntervalEstimate difference;  // G_1 mean minus G_K mean
};

// Group means of a functional in the extreme quantile groups with two-sample
// normal intervals. A group with zero within-group variance contributes its
// point estimate but no bounds, as does the difference when both groups are
// degenerate.
inline std::optional<std::vector<ClanSplitEstimate>> clan_on_split(
    const Dataset& data, const SplitRun& run, int num_groups,
    const std::vector<Functional>& functionals) {
  std::vector<int> labels;
  try {
    labels = group_partition(run.proxy_scores, run.main_rows, num_groups);
  } catch (const degeneracy_error&) {
    return std::nullopt;
  }

  std::vector<std::uint32_t> low_rows;
  std::vector<std::uint32_t> high_rows;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0) low_rows.push_back(run.main_rows[i]);
    if (labels[i] == num_groups - 1) high_rows.push_back(run.main_rows[i]);
  }
  if (low_rows.empty() || high_rows.empty()) return std::nullopt;

  const double z = normal_quantile(0.975);
  std::vector<ClanSplitEstimate> out;
  out.reserve(functionals.size());
  for (const auto& fn : functionals) {
    std::vector<double> low_vals;
    std::vector<double> high_vals;
    low_vals.reserve(low_rows.size());
    high_vals.reserve(high_rows.size());
    for (auto r : low_rows) low_vals.push_back(fn.fn(data, r));
    for (auto r : high_rows) high_vals.push_back(fn.fn(data, r));

    const double m_low = mean(low_vals);
    const double m_high = mean(high_vals);
    const double v_low = sample_variance(low_vals);
    const double v_high = sample_variance(high_vals);
    const double se_low = std::sqrt(v_low / static_cast<double>(low_vals.size()));
    const double se_high = std::sqrt(v_high / static_cast<double>(high_vals.size()));
    const double se_diff = std::sqrt(se_low * se_low + se_high * se_high);

    ClanSplitEstimate est;
    est.low_group = {m_low, m_low - z * se_low, m_low + z * se_low, v_low > 0.0};
    est.high_group = {m_high, m_high - z * se_high, m_high + z * se_high, v_high > 0.0};
    est.difference = {m_low - m_high, m_low - m_high - z * se_diff, m_low - m_high + z * se_diff,
                      se_diff > 0.0};
    out.push_back(est);
  }
  return out;
}

struct BlpResult {
  MedianAggregate beta1;  // average treatment effect
  MedianAggregate beta2;  // heterogeneity loading on the proxy score
};

struct GateResult {
  std::vector<MedianAggregate> gamma;  // group 1..K
  MedianAggregate top_minus_bottom;    // gamma_K - gamma_1
  MedianAggregate bottom_minus_top;    // gamma_1 - gamma_K
};

struct ClanResult {
  struct PerFunctional {
    std::string name;
    MedianAggregate low_group;
    MedianAggregate high_group;
    MedianAggregate difference;
  };
  std::vector<PerFunctional> functionals;
};

namespace detail {

inline std::vector<SplitRun> make_runs(const Dataset& data, const InferenceParams& params,
                                       int workers) {
  params.validate();
  data.propensity();  // validated once up front
  std::vector<SplitRun> runs(static_cast<std::size_t>(params.num_splits));
  parallel_for(runs.size(), workers, [&](std::size_t s) {
    SeededRng rng(params.seed, make_stream(streams::kInferenceSplit, s));
    runs[s] = make_split_run(data, params.forest_params, rng, /*workers=*/1);
  });
  return runs;
}

}  // namespace detail

inline BlpResult blp_from_runs(const Dataset& data, const std::vector<SplitRun>& runs) {
  std::vector<detail::IntervalEstimate> b1;
  std::vector<detail::IntervalEstimate> b2;
  for (const auto& run : runs) {
    if (const auto est = blp_on_split(data, run)) {
      b1.push_back(est->beta1);
      b2.push_back(est->beta2);
    }
  }
  if (b1.empty()) throw degeneracy_error("blp: every split was rank deficient");
  return BlpResult{detail::aggregate_intervals(b1), detail::aggregate_intervals(b2)};
}

inline GateResult gate_from_runs(const Dataset& data, const std::vector<SplitRun>& runs,
                                 int num_groups, bool printed_form) {
  std::vector<std::vector<detail::IntervalEstimate>> gammas(
      static_cast<std::size_t>(num_groups));
  std::vector<detail::IntervalEstimate> top_bottom;
  for (const auto& run : runs) {
    if (const auto est = gate_on_split(data, run, num_groups, printed_form)) {
      for (int g = 0; g < num_groups; ++g) gammas[static_cast<std::size_t>(g)].push_back(est->gamma[static_cast<std::size_t>(g)]);
      top_bottom.push_back(est->top_minus_bottom);
    }
  }
  if (top_bottom.empty()) throw degeneracy_error("gate: no valid splits");
  GateResult out;
  for (int g = 0; g < num_groups; ++g) {
    out.gamma.push_back(detail::aggregate_intervals(gammas[static_cast<std::size_t>(g)]));
  }
  out.top_minus_bottom = detail::aggregate_intervals(top_bottom);
  std::vector<detail::IntervalEstimate> flipped = top_bottom;
  for (auto& e : flipped) {
    e = detail::IntervalEstimate{-e.estimate, -e.ci_high, -e.ci_low, e.has_bounds};
  }
  out.bottom_minus_top = detail::aggregate_intervals(flipped);
  return out;
}

inline ClanResult clan_from_runs(const Dataset& data, const std::vector<SplitRun>& runs,
                                 int num_groups, const std::vector<Functional>& functionals) {
  std::vector<std::vector<detail::IntervalEstimate>> low(functionals.size());
  std::vector<std::vector<detail::IntervalEstimate>> high(functionals.size());
  std::vector<std::vector<detail::IntervalEstimate>> diff(functionals.size());
  for (const auto& run : runs) {
    if (const auto est = clan_on_split(data, run, num_groups, functionals)) {
      for (std::size_t f = 0; f < functionals.size(); ++f) {
        low[f].push_back((*est)[f].low_group);
        high[f].push_back((*est)[f].high_group);
        diff[f].push_back((*est)[f].difference);
      }
    }
  }
  ClanResult out;
  for (std::size_t f = 0; f < functionals.size(); ++f) {
    if (low[f].empty()) throw degeneracy_error("clan: no valid splits");
    ClanResult::PerFunctional pf;
    pf.name = functionals[f].name;
    pf.low_group = detail::aggregate_intervals(low[f]);
    pf.high_group = detail::aggregate_intervals(high[f]);
    pf.difference = detail::aggregate_intervals(diff[f]);
    out.functionals.push_back(std::move(pf));
  }
  return out;
}

// Repeated-sample-splitting drivers: each split trains fresh forests on the
// auxiliary half and evaluates on the main half; aggregates use the median
// rules above. Splits whose regression is rank deficient are dropped and
// excluded from num_valid_splits.
inline BlpResult blp(const Dataset& data, const InferenceParams& params, int workers = 1) {
  return blp_from_runs(data, detail::make_runs(data, params, workers));
}

inline GateResult gate(const Dataset& data, const InferenceParams& params, int workers = 1) {
  return gate_from_runs(data, detail::make_runs(data, params, workers), params.num_groups,
                        params.gate_printed_form);
}

inline ClanResult clan(const Dataset& data, const std::vector<Functional>& functionals,
                       const InferenceParams& params, int workers = 1) {
  return clan_from_runs(data, detail::make_runs(data, params, workers), params.num_groups,
                        functionals);
}

}  // namespace hte
