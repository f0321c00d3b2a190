#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hte/dataset.hpp"
#include "hte/errors.hpp"
#include "hte/importance.hpp"
#include "hte/random.hpp"

namespace hte {

// Shared covariate layout of the synthetic designs: one standard normal
// variable and four equiprobable categoricals with 2, 4, 10, and 20 levels.
struct SimRow {
  double x1 = 0.0;
  int x2 = 0;
  int x3 = 0;
  int x4 = 0;
  int x5 = 0;
};

struct SimDesign {
  int design = 1;  // 1, 2, or 3
  int n = 500;
  std::uint64_t seed = 0;
};

struct SimTruth {
  std::vector<double> tau;  // per-row true treatment effect
  double ate = 0.0;         // population average effect
};

namespace detail {

inline CovariateSchema sim_schema() {
  auto levels = [](int k) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int l = 0; l < k; ++l) out.push_back(std::to_string(l));
    return out;
  };
  return CovariateSchema({Variable{"x1", VarKind::Continuous, {}},
                          Variable{"x2", VarKind::Categorical, levels(2)},
                          Variable{"x3", VarKind::Categorical, levels(4)},
                          Variable{"x4", VarKind::Categorical, levels(10)},
                          Variable{"x5", VarKind::Categorical, levels(20)}});
}

}  // namespace detail

// Template generator:
//   Y = eta(X) + (1/2) * (2*treatment - 1) * kappa(X) + noise,  noise ~ N(0,1)
// with treatment a fair Bernoulli draw per row and categorical values coded
// by their level index 0..k-1 inside eta and kappa.
inline std::pair<Dataset, SimTruth> simulate_template(
    int n, std::uint64_t seed, const std::function<double(const SimRow&)>& eta,
    const std::function<double(const SimRow&)>& kappa, double true_ate) {
  if (n < 10) throw validation_error("simulate: n must be at least 10");
  SeededRng rng(seed, make_stream(streams::kSimulation));

  std::vector<double> x1(static_cast<std::size_t>(n));
  std::vector<int> x2(static_cast<std::size_t>(n));
  std::vector<int> x3(static_cast<std::size_t>(n));
  std::vector<int> x4(static_cast<std::size_t>(n));
  std::vector<int> x5(static_cast<std::size_t>(n));
  std::vector<double> y(static_cast<std::size_t>(n));
  std::vector<std::uint8_t> d(static_cast<std::size_t>(n));
  SimTruth truth;
  truth.tau.resize(static_cast<std::size_t>(n));
  truth.ate = true_ate;

  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    SimRow row;
    row.x1 = rng.next_normal();
    row.x2 = static_cast<int>(rng.next_below(2));
    row.x3 = static_cast<int>(rng.next_below(4));
    row.x4 = static_cast<int>(rng.next_below(10));
    row.x5 = static_cast<int>(rng.next_below(20));
    const auto t = static_cast<std::uint8_t>(rng.next_below(2));
    const double noise = rng.next_normal();

    x1[i] = row.x1;
    x2[i] = row.x2;
    x3[i] = row.x3;
    x4[i] = row.x4;
    x5[i] = row.x5;
    d[i] = t;
    const double k = kappa(row);
    y[i] = eta(row) + 0.5 * (2.0 * t - 1.0) * k + noise;
    truth.tau[i] = k;
  }

  Dataset data(detail::sim_schema(),
               {RawColumn{std::move(x1)}, RawColumn{std::move(x2)}, RawColumn{std::move(x3)},
                RawColumn{std::move(x4)}, RawColumn{std::move(x5)}},
               std::move(y), std::move(d));
  return {std::move(data), std::move(truth)};
}

// Design 1: pure noise outcome, no covariate effects. Designs 2 and 3 share
// kappa(X) = X2; design 3 adds the baseline eta(X) = X1/2 + X2. With the 0/1
// coding of X2 the true ATE of designs 2 and 3 is 1/2.
inline std::pair<Dataset, SimTruth> simulate(const SimDesign& design) {
  switch (design.design) {
    case 1:
      return simulate_template(
          design.n, design.seed, [](const SimRow&) { return 0.0; },
          [](const SimRow&) { return 0.0; }, 0.0);
    case 2:
      return simulate_template(
          design.n, design.seed, [](const SimRow&) { return 0.0; },
          [](const SimRow& r) { return static_cast<double>(r.x2); }, 0.5);
    case 3:
      return simulate_template(
          design.n, design.seed,
          [](const SimRow& r) { return 0.5 * r.x1 + static_cast<double>(r.x2); },
          [](const SimRow& r) { return static_cast<double>(r.x2); }, 0.5);
    default:
      throw validation_error("simulate: design must be 1, 2, or 3");
  }
}

struct BenchmarkParams {
  std::vector<int> designs{1, 2, 3};
  int iterations = 20;
  int permutations = 100;
  int n = 500;
  ForestParams forest_params = [] {
    ForestParams p;
    p.num_trees = 500;
    return p;
  }();
  std::uint64_t seed = 0;

  void validate() const {
    if (iterations < 1) throw validation_error("benchmark: iterations must be >= 1");
    if (permutations < 1) throw validation_error("benchmark: permutations must be >= 1");
    for (int d : designs) {
      if (d < 1 || d > 3) throw validation_error("benchmark: designs must be 1, 2, or 3");
    }
    forest_params.validate();
  }
};

struct BenchmarkRow {
  int design = 0;
  int iteration = 0;
  std::string variable;
  double raw_importance = 0.0;
  double scaled_importance = 0.0;
  double p_value = 0.0;
};

// Repeats each design: simulate, fit the reference forest, run the
// permutation test, and emit one row per (design, iteration, variable) with
// the unpermuted importance and the permutation p-value. Rows are ordered by
// design, then iteration, then schema position.
inline std::vector<BenchmarkRow> run_appendix_benchmark(const BenchmarkParams& params,
                                                        int workers = 1) {
  params.validate();
  std::vector<BenchmarkRow> rows;
  for (int design : params.designs) {
    for (int iter = 0; iter < params.iterations; ++iter) {
      const std::uint64_t iter_key =
          make_stream(streams::kBenchmark,
                      static_cast<std::uint64_t>(design) << 32 | static_cast<std::uint64_t>(iter));
      SeededRng key_rng(params.seed, iter_key);

      SimDesign sim{design, params.n, key_rng.next_u64()};
      const auto [data, truth] = simulate(sim);

      PermutationTestConfig config;
      config.num_permutations = params.permutations;
      config.forest_params = params.forest_params;
      config.seed = key_rng.next_u64();
      const ImportanceReport report = permutation_pvalues(data, config, workers);

      for (const auto& v : report.variables) {
        BenchmarkRow row;
        row.design = design;
        row.iteration = iter;
        row.variable = v.variable;
        row.raw_importance = v.raw;
        row.scaled_importance = v.scaled;
        row.p_value = v.p_value.value_or(1.0);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace hte
