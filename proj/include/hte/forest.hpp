#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hte/dataset.hpp"
#include "hte/errors.hpp"
#include "hte/parallel.hpp"
#include "hte/random.hpp"
#include "hte/stats.hpp"
#include "hte/tree.hpp"

namespace hte {

inline constexpr double kVarianceFloor = 1e-12;

struct ForestParams {
  int num_trees = 15000;
  double sample_fraction = 0.5;
  double mtry_fraction = 1.0 / 3.0;  // features per split = max(1, floor(p * mtry_fraction))
  TreeParams tree_params;
  int bag_size = 10;  // trees per half-sample bag, for the variance estimator
  std::uint64_t seed = 0;

  void validate() const {
    if (num_trees < 1) throw validation_error("forest params: num_trees must be >= 1");
    if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) {
      throw validation_error("forest params: sample_fraction must lie in (0,1]");
    }
    if (!(mtry_fraction > 0.0 && mtry_fraction <= 1.0)) {
      throw validation_error("forest params: mtry_fraction must lie in (0,1]");
    }
    if (bag_size < 2) throw validation_error("forest params: bag_size must be >= 2");
    // A forest smaller than one bag collapses to a single bag; otherwise the
    // bag size must divide the tree count so bags are balanced.
    if (num_trees >= bag_size && num_trees % bag_size != 0) {
      throw validation_error("forest params: bag_size must divide num_trees");
    }
    tree_params.validate();
  }

  int effective_bag_size() const { return std::min(bag_size, num_trees); }

  int mtry(int width) const {
    return std::max(1, static_cast<int>(std::floor(width * mtry_fraction)));
  }
};

struct ForestTree {
  Tree tree;
  std::vector<std::uint32_t> rows;  // without-replacement subsample behind this tree
  int bag = 0;
};

struct ItePrediction {
  double tau_hat = 0.0;
  double variance = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double level = 0.90;
};

// Subsampled ensemble of honest trees; `causal()` distinguishes treatment
// effect forests from outcome (regression) forests. Immutable after fit.
class CausalForest {
 public:
  CausalForest(ForestParams params, CovariateSchema schema, bool causal,
               std::vector<ForestTree> trees)
      : params_(std::move(params)),
        schema_(std::move(schema)),
        causal_(causal),
        trees_(std::move(trees)) {}

  const ForestParams& params() const { return params_; }
  const CovariateSchema& schema() const { return schema_; }
  bool causal() const { return causal_; }
  const std::vector<ForestTree>& trees() const { return trees_; }
  int width() const { return trees_.front().tree.width; }
  int num_bags() const { return trees_.back().bag + 1; }

 private:
  ForestParams params_;
  CovariateSchema schema_;
  bool causal_;
  std::vector<ForestTree> trees_;
};

// Per-tree split audit records, for verifying mtry discipline.
struct ForestAudit {
  std::vector<SplitAudit> trees;
};

namespace detail {

inline CausalForest fit_forest(const Dataset& data, const ForestParams& params, bool causal,
                               int workers, ForestAudit* audit) {
  params.validate();
  const std::size_t n = data.n();
  const auto subsample_size =
      static_cast<std::uint32_t>(std::floor(params.sample_fraction * static_cast<double>(n)));
  if (subsample_size < 2) {
    throw validation_error("forest: floor(sample_fraction*n) must be at least 2");
  }

  const int bag_size = params.effective_bag_size();
  const int num_bags = (params.num_trees + bag_size - 1) / bag_size;

  // Trees in one bag subsample from a shared half-sample parent so the
  // grouped variance estimator applies. When the subsample cannot fit inside
  // a half sample, every bag parent is the full row set (no half-sample
  // variance structure; CI validity needs sample_fraction <= 0.5).
  const auto half_size = static_cast<std::uint32_t>((n + 1) / 2);
  const bool use_half_parents = subsample_size <= half_size;
  std::vector<std::vector<std::uint32_t>> parents(static_cast<std::size_t>(num_bags));
  for (int g = 0; g < num_bags; ++g) {
    if (use_half_parents) {
      SeededRng bag_rng(params.seed, make_stream(streams::kBag, static_cast<std::uint64_t>(g)));
      parents[static_cast<std::size_t>(g)] =
          bag_rng.sample_without_replacement(static_cast<std::uint32_t>(n), half_size);
      std::sort(parents[static_cast<std::size_t>(g)].begin(),
                parents[static_cast<std::size_t>(g)].end());
    } else {
      parents[static_cast<std::size_t>(g)].resize(n);
      std::iota(parents[static_cast<std::size_t>(g)].begin(),
                parents[static_cast<std::size_t>(g)].end(), 0u);
    }
  }

  std::vector<ForestTree> trees(static_cast<std::size_t>(params.num_trees));
  if (audit) audit->trees.assign(static_cast<std::size_t>(params.num_trees), SplitAudit{});
  const int mtry = params.mtry(data.width());

  parallel_for(static_cast<std::size_t>(params.num_trees), workers, [&](std::size_t t) {
    SeededRng rng(params.seed, make_stream(streams::kTree, t));
    const int bag = static_cast<int>(t) / bag_size;
    const auto& parent = parents[static_cast<std::size_t>(bag)];

    auto positions = rng.sample_without_replacement(static_cast<std::uint32_t>(parent.size()),
                                                    subsample_size);
    std::vector<std::uint32_t> rows(subsample_size);
    for (std::uint32_t i = 0; i < subsample_size; ++i) rows[i] = parent[positions[i]];
    std::sort(rows.begin(), rows.end());

    TreeFitter fitter(data, params.tree_params, causal);
    fitter.set_mtry(mtry);
    if (audit) fitter.set_audit(&audit->trees[t]);
    trees[t].tree = fitter.fit(rows, rng);
    trees[t].rows = std::move(rows);
    trees[t].bag = bag;
  });

  return CausalForest(params, data.schema(), causal, std::move(trees));
}

}  // namespace detail

// Each tree is fit on an independent without-replacement subsample with a
// fresh random feature subset drawn at every split; honest splitting per
// tree_params. Deterministic given the seed, for any worker count.
inline CausalForest fit_causal_forest(const Dataset& data, const ForestParams& params,
                                      int workers = 1, ForestAudit* audit = nullptr) {
  const auto mtc = static_cast<std::size_t>(params.tree_params.min_treat_control_per_leaf);
  const std::size_t nt = data.num_treated();
  if (nt < mtc || data.n() - nt < mtc) {
    throw validation_error("fit_causal_forest: needs treated and control rows");
  }
  return detail::fit_forest(data, params, /*causal=*/true, workers, audit);
}

// Same ensemble mechanics with sum-of-squares splitting and outcome-mean
// leaves.
inline CausalForest fit_regression_forest(const Dataset& data, const ForestParams& params,
                                          int workers = 1, ForestAudit* audit = nullptr) {
  if (data.n() < 2 * static_cast<std::size_t>(params.tree_params.min_leaf)) {
    throw validation_error("fit_regression_forest: needs at least 2*min_leaf rows");
  }
  return detail::fit_forest(data, params, /*causal=*/false, workers, audit);
}

// Point prediction: arithmetic mean of per-tree predictions in tree order.
inline double predict_value(const CausalForest& forest, std::span<const double> row) {
  const TreeTarget target = forest.causal() ? TreeTarget::Effect : TreeTarget::Outcome;
  double sum = 0.0;
  for (const auto& ft : forest.trees()) sum += predict_tree(ft.tree, row, target);
  return sum / static_cast<double>(forest.trees().size());
}

// Point prediction with a grouped half-sample ("little bags") variance
// estimate: between-bag variance of bag-mean predictions minus within-bag
// variance divided by the bag size, floored at a small positive value.
inline ItePrediction predict_ite(const CausalForest& forest, std::span<const double> row,
                                 double level = 0.90) {
  if (!(level > 0.0 && level < 1.0)) throw validation_error("predict_ite: level must lie in (0,1)");
  const TreeTarget target = forest.causal() ? TreeTarget::Effect : TreeTarget::Outcome;

  const auto& trees = forest.trees();
  const int num_bags = forest.num_bags();
  std::vector<double> bag_sum(static_cast<std::size_t>(num_bags), 0.0);
  std::vector<double> bag_sum2(static_cast<std::size_t>(num_bags), 0.0);
  std::vector<int> bag_count(static_cast<std::size_t>(num_bags), 0);

  double total = 0.0;
  for (const auto& ft : trees) {
    const double pred = predict_tree(ft.tree, row, target);
    total += pred;
    const auto g = static_cast<std::size_t>(ft.bag);
    bag_sum[g] += pred;
    bag_sum2[g] += pred * pred;
    ++bag_count[g];
  }

  ItePrediction out;
  out.level = level;
  out.tau_hat = total / static_cast<double>(trees.size());

  double between = 0.0;
  double within = 0.0;
  if (num_bags >= 2) {
    double mean_of_bags = 0.0;
    for (int g = 0; g < num_bags; ++g) mean_of_bags += bag_sum[static_cast<std::size_t>(g)] / bag_count[static_cast<std::size_t>(g)];
    mean_of_bags /= num_bags;
    for (int g = 0; g < num_bags; ++g) {
      const auto gi = static_cast<std::size_t>(g);
      const double m = bag_sum[gi] / bag_count[gi];
      between += (m - mean_of_bags) * (m - mean_of_bags);
      if (bag_count[gi] >= 2) {
        const double ss = bag_sum2[gi] - bag_sum[gi] * bag_sum[gi] / bag_count[gi];
        within += std::max(0.0, ss) / (bag_count[gi] - 1);
      }
    }
    between /= num_bags - 1;
    within /= num_bags;
  }

  const int s = forest.params().effective_bag_size();
  out.variance = std::max(kVarianceFloor, between - within / s);
  const double z = normal_quantile(0.5 + level / 2.0);
  const double half_width = z * std::sqrt(out.variance);
  out.ci_low = out.tau_hat - half_width;
  out.ci_high = out.tau_hat + half_width;
  return out;
}

struct AteEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Difference in group means with the two-sample (Welch) standard error.
inline AteEstimate ate_difference_in_means(const Dataset& data) {
  std::size_t nt = 0;
  std::size_t nc = 0;
  double st = 0.0;
  double sc = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (data.treated(i)) {
      ++nt;
      st += data.y(i);
    } else {
      ++nc;
      sc += data.y(i);
    }
  }
  if (nt == 0 || nc == 0) throw degeneracy_error("ate_difference_in_means: empty group");
  const double mt = st / static_cast<double>(nt);
  const double mc = sc / static_cast<double>(nc);
  double vt = 0.0;
  double vc = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double dev = data.y(i) - (data.treated(i) ? mt : mc);
    (data.treated(i) ? vt : vc) += dev * dev;
  }
  vt = nt > 1 ? vt / static_cast<double>(nt - 1) : 0.0;
  vc = nc > 1 ? vc / static_cast<double>(nc - 1) : 0.0;
  AteEstimate out;
  out.estimate = mt - mc;
  out.std_error = std::sqrt(vt / static_cast<double>(nt) + vc / static_cast<double>(nc));
  return out;
}

inline nlohmann::json forest_to_json(const CausalForest& forest) {
  nlohmann::json schema = nlohmann::json::array();
  for (const auto& v : forest.schema().vars()) {
    nlohmann::json var{{"name", v.name},
                       {"kind", v.kind == VarKind::Categorical ? "categorical" : "continuous"}};
    if (v.kind == VarKind::Categorical) var["levels"] = v.levels;
    schema.push_back(std::move(var));
  }
  const auto& p = forest.params();
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& ft : forest.trees()) {
    trees.push_back({{"bag", ft.bag}, {"rows", ft.rows}, {"tree", tree_to_json(ft.tree)}});
  }
  return {{"format", "hte.forest"},
          {"version", 1},
          {"causal", forest.causal()},
          {"params",
           {{"num_trees", p.num_trees},
            {"sample_fraction", p.sample_fraction},
            {"mtry_fraction", p.mtry_fraction},
            {"bag_size", p.bag_size},
            {"seed", p.seed},
            {"min_leaf", p.tree_params.min_leaf},
            {"min_treat_control_per_leaf", p.tree_params.min_treat_control_per_leaf},
            {"honest", p.tree_params.honest},
            {"max_depth", p.tree_params.max_depth}}},
          {"schema", std::move(schema)},
          {"trees", std::move(trees)}};
}

inline CausalForest forest_from_json(const nlohmann::json& j) {
  if (!j.contains("format") || j.at("format") != "hte.forest") {
    throw io_error("not a forest file");
  }
  if (j.at("version").get<int>() != 1) throw io_error("unsupported forest format version");

  std::vector<Variable> vars;
  for (const auto& vj : j.at("schema")) {
    Variable v;
    v.name = vj.at("name").get<std::string>();
    v.kind = vj.at("kind") == "categorical" ? VarKind::Categorical : VarKind::Continuous;
    if (v.kind == VarKind::Categorical) v.levels = vj.at("levels").get<std::vector<std::string>>();
    vars.push_back(std::move(v));
  }

  const auto& pj = j.at("params");
  ForestParams params;
  params.num_trees = pj.at("num_trees").get<int>();
  params.sample_fraction = pj.at("sample_fraction").get<double>();
  params.mtry_fraction = pj.at("mtry_fraction").get<double>();
  params.bag_size = pj.at("bag_size").get<int>();
  params.seed = pj.at("seed").get<std::uint64_t>();
  params.tree_params.min_leaf = pj.at("min_leaf").get<int>();
  params.tree_params.min_treat_control_per_leaf = pj.at("min_treat_control_per_leaf").get<int>();
  params.tree_params.honest = pj.at("honest").get<bool>();
  params.tree_params.max_depth = pj.at("max_depth").get<int>();

  std::vector<ForestTree> trees;
  for (const auto& tj : j.at("trees")) {
    ForestTree ft;
    ft.bag = tj.at("bag").get<int>();
    ft.rows = tj.at("rows").get<std::vector<std::uint32_t>>();
    ft.tree = tree_from_json(tj.at("tree"));
    trees.push_back(std::move(ft));
  }
  const bool causal = j.at("causal").get<bool>();
  return CausalForest(params, CovariateSchema(std::move(vars)), causal, std::move(trees));
}

inline void save_forest(const CausalForest& forest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open forest file for writing: " + path);
  out << forest_to_json(forest).dump() << '\n';
  if (!out) throw io_error("forest write failed");
}

inline CausalForest load_forest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open forest file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("forest parse error: ") + e.what());
  }
  return forest_from_json(j);
}

}  // namespace hte
