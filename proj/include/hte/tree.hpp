#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hte/dataset.hpp"
#include "hte/errors.hpp"
#include "hte/random.hpp"

namespace hte {

inline constexpr int kUnlimitedDepth = std::numeric_limits<int>::max();

// Causal splits apply the node-size minimum per treatment group: each child
// needs min_treat_control_per_leaf treated AND control rows on the structure
// sample. Regression splits use min_leaf alone.
struct TreeParams {
  int min_leaf = 5;                    // minimum rows per child (structure sample)
  int min_treat_control_per_leaf = 5;  // causal splits: minimum treated and control per child
  bool honest = true;
  int max_depth = kUnlimitedDepth;  // number of split levels; 0 forces a stump

  void validate() const {
    if (min_leaf < 1) throw validation_error("tree params: min_leaf must be >= 1");
    if (min_treat_control_per_leaf < 1) {
      throw validation_error("tree params: min_treat_control_per_leaf must be >= 1");
    }
    if (max_depth < 0) throw validation_error("tree params: max_depth must be >= 0");
  }
};

// Rows with x[feature] <= threshold go left, the complement right.
struct SplitRule {
  int feature = -1;
  double threshold = 0.0;
};

struct LeafStats {
  int n_total = 0;
  int n_treated = 0;
  int n_control = 0;
  double mean_treated = std::numeric_limits<double>::quiet_NaN();
  double mean_control = std::numeric_limits<double>::quiet_NaN();
  double tau_hat = std::numeric_limits<double>::quiet_NaN();  // defined iff both groups present
  double mean_y = std::numeric_limits<double>::quiet_NaN();
};

struct TreeNode {
  SplitRule split;  // feature < 0 marks a leaf
  int left = -1;
  int right = -1;
  int parent = -1;
  int depth = 1;  // root has depth 1
  LeafStats stats;  // estimation-side statistics of rows routed through this node
  double effect = std::numeric_limits<double>::quiet_NaN();  // ancestor-fallback resolved
  double value = std::numeric_limits<double>::quiet_NaN();   // ancestor-fallback resolved

  bool is_leaf() const { return split.feature < 0; }
};

enum class TreeTarget { Outcome, Effect };

struct Tree {
  std::vector<TreeNode> nodes;  // pre-order; parent index always before children
  int width = 0;
  bool causal = false;
  std::vector<std::uint32_t> structure_rows;   // rows that chose the splits
  std::vector<std::uint32_t> estimation_rows;  // rows behind the leaf statistics

  const TreeNode& root() const { return nodes.front(); }
};

// Optional per-node record of the candidate feature set offered to the split
// search, for auditing mtry discipline.
struct SplitAudit {
  struct NodeRecord {
    int node = -1;
    std::vector<int> candidates;
    int chosen = -1;  // -1 when the node became a leaf
  };
  std::vector<NodeRecord> records;
};

namespace detail {

struct ScanEntry {
  double value;
  double y;
  std::uint8_t treated;
};

struct BestSplit {
  bool valid = false;
  int feature = -1;
  double threshold = 0.0;
  double criterion = 0.0;
};

// Recursive-partitioning engine shared by regression and causal trees.
// Scratch buffers live here so one fitter can be reused across many trees.
class TreeFitter {
 public:
  TreeFitter(const Dataset& data, const TreeParams& params, bool causal)
      : data_(data), params_(params), causal_(causal) {}

  void set_fixed_features(std::vector<int> features) {
    fixed_features_ = std::move(features);
    std::sort(fixed_features_.begin(), fixed_features_.end());
    mtry_ = 0;
  }

  void set_mtry(int mtry) { mtry_ = mtry; }
  void set_audit(SplitAudit* audit) { audit_ = audit; }

  Tree fit(std::vector<std::uint32_t> fit_rows, SeededRng& rng) {
    rng_ = &rng;
    Tree tree;
    tree.width = data_.width();
    tree.causal = causal_;

    if (params_.honest && fit_rows.size() >= 2) {
      std::vector<std::uint32_t> shuffled = fit_rows;
      rng.shuffle(shuffled);
      const std::size_t s_size = (shuffled.size() + 1) / 2;
      tree.structure_rows.assign(shuffled.begin(),
                                 shuffled.begin() + static_cast<std::ptrdiff_t>(s_size));
      tree.estimation_rows.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(s_size),
                                  shuffled.end());
      std::sort(tree.structure_rows.begin(), tree.structure_rows.end());
      std::sort(tree.estimation_rows.begin(), tree.estimation_rows.end());
    } else {
      tree.structure_rows = fit_rows;
      tree.estimation_rows = std::move(fit_rows);
    }

    nodes_.clear();
    rows_ = tree.structure_rows;
    build(0, rows_.size(), 1, -1);
    tree.nodes = std::move(nodes_);

    estimate(tree);
    return tree;
  }

 private:
  int build(std::size_t begin, std::size_t end, int depth, int parent) {
    const int idx = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[static_cast<std::size_t>(idx)].depth = depth;
    nodes_[static_cast<std::size_t>(idx)].parent = parent;

    const std::size_t m = end - begin;
    NodeAggregates agg = aggregate(begin, end);

    bool try_split = depth <= params_.max_depth &&
                     m >= 2 * static_cast<std::size_t>(params_.min_leaf);
    if (causal_) {
      const int mtc = params_.min_treat_control_per_leaf;
      try_split = try_split && agg.n_treated >= 2 * mtc && agg.n_control >= 2 * mtc;
    }
    if (!try_split) {
      record_audit(idx, {}, -1);
      return idx;
    }

    std::span<const int> features;
    if (mtry_ > 0) {
      const auto draw = rng_->sample_without_replacement(
          static_cast<std::uint32_t>(data_.width()),
          static_cast<std::uint32_t>(std::min(mtry_, data_.width())));
      feature_buf_.assign(draw.begin(), draw.end());
      std::sort(feature_buf_.begin(), feature_buf_.end());
      features = feature_buf_;
    } else {
      features = fixed_features_;
    }

    const BestSplit best = scan_features(begin, end, features, agg);
    if (!best.valid) {
      record_audit(idx, features, -1);
      return idx;
    }

    record_audit(idx, features, best.feature);
    const std::size_t mid = partition(begin, end, best.feature, best.threshold);
    const int left = build(begin, mid, depth + 1, idx);
    const int right = build(mid, end, depth + 1, idx);
    auto& node = nodes_[static_cast<std::size_t>(idx)];
    node.split.feature = best.feature;
    node.split.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return idx;
  }

  struct NodeAggregates {
    std::size_t n = 0;
    int n_treated = 0;
    int n_control = 0;
    double sum_y = 0.0;
    double sum_y2 = 0.0;
    double sum_treated = 0.0;
    double sum_control = 0.0;

    double tau() const {
      return sum_treated / static_cast<double>(n_treated) -
             sum_control / static_cast<double>(n_control);
    }
  };

  NodeAggregates aggregate(std::size_t begin, std::size_t end) const {
    NodeAggregates agg;
    agg.n = end - begin;
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint32_t row = rows_[i];
      const double y = data_.y(row);
      agg.sum_y += y;
      agg.sum_y2 += y * y;
      if (data_.treated(row)) {
        ++agg.n_treated;
        agg.sum_treated += y;
      } else {
        ++agg.n_control;
        agg.sum_control += y;
      }
    }
    return agg;
  }

  static double clamped_sse(double sum_y2, double sum_y, double n) {
    return std::max(0.0, sum_y2 - (sum_y * sum_y) / n);
  }

  BestSplit scan_features(std::size_t begin, std::size_t end, std::span<const int> features,
                          const NodeAggregates& agg) {
    BestSplit best;
    if (causal_) {
      const double parent = static_cast<double>(agg.n) * agg.tau() * agg.tau();
      best.criterion = parent;  // strict improvement required
      for (int f : features) scan_causal(begin, end, f, agg, best);
    } else {
      const double parent = clamped_sse(agg.sum_y2, agg.sum_y, static_cast<double>(agg.n));
      best.criterion = parent;
      for (int f : features) scan_regression(begin, end, f, agg, best);
    }
    return best;
  }

  // Equal values sort in an implementation-defined but input-determined
  // order; tied blocks are fully accumulated before any threshold is
  // evaluated, so split choices never depend on it.
  void load_scan(std::size_t begin, std::size_t end, int feature) {
    scan_.resize(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint32_t row = rows_[i];
      scan_[i - begin] = ScanEntry{data_.x(row, feature), data_.y(row), data_.d(row)};
    }
    std::sort(scan_.begin(), scan_.end(),
              [](const ScanEntry& a, const ScanEntry& b) { return a.value < b.value; });
  }

  // Candidate thresholds are midpoints between consecutive distinct sorted
  // values; the midpoint is snapped down if rounding would land it on the
  // right value, so the <= rule reproduces the scanned prefix exactly.
  static double midpoint(double lo, double hi) {
    double mid = 0.5 * (lo + hi);
    if (!(mid < hi)) mid = lo;
    return mid;
  }

  void scan_regression(std::size_t begin, std::size_t end, int feature,
                       const NodeAggregates& agg, BestSplit& best) {
    load_scan(begin, end, feature);
    const std::size_t m = scan_.size();
    const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
    double sum_l = 0.0;
    double sum2_l = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      sum_l += scan_[i].y;
      sum2_l += scan_[i].y * scan_[i].y;
      if (!(scan_[i].value < scan_[i + 1].value)) continue;
      const std::size_t n_l = i + 1;
      const std::size_t n_r = m - n_l;
      if (n_l < min_leaf || n_r < min_leaf) continue;
      const double sse = clamped_sse(sum2_l, sum_l, static_cast<double>(n_l)) +
                         clamped_sse(agg.sum_y2 - sum2_l, agg.sum_y - sum_l,
                                     static_cast<double>(n_r));
      if (sse < best.criterion) {
        best.valid = true;
        best.criterion = sse;
        best.feature = feature;
        best.threshold = midpoint(scan_[i].value, scan_[i + 1].value);
      }
    }
  }

  // Causal split criterion: maximize n_L*tau_L^2 + n_R*tau_R^2 subject to the
  // treated/control minima on the structure sample.
  void scan_causal(std::size_t begin, std::size_t end, int feature, const NodeAggregates& agg,
                   BestSplit& best) {
    load_scan(begin, end, feature);
    const std::size_t m = scan_.size();
    const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
    const int mtc = params_.min_treat_control_per_leaf;
    int nt_l = 0;
    int nc_l = 0;
    double st_l = 0.0;
    double sc_l = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      if (scan_[i].treated) {
        ++nt_l;
        st_l += scan_[i].y;
      } else {
        ++nc_l;
        sc_l += scan_[i].y;
      }
      if (!(scan_[i].value < scan_[i + 1].value)) continue;
      const std::size_t n_l = i + 1;
      const std::size_t n_r = m - n_l;
      if (n_l < min_leaf || n_r < min_leaf) continue;
      const int nt_r = agg.n_treated - nt_l;
      const int nc_r = agg.n_control - nc_l;
      if (nt_l < mtc || nc_l < mtc || nt_r < mtc || nc_r < mtc) continue;
      const double tau_l = st_l / nt_l - sc_l / nc_l;
      const double tau_r = (agg.sum_treated - st_l) / nt_r - (agg.sum_control - sc_l) / nc_r;
      const double crit = static_cast<double>(n_l) * tau_l * tau_l +
                          static_cast<double>(n_r) * tau_r * tau_r;
      if (crit > best.criterion) {
        best.valid = true;
        best.criterion = crit;
        best.feature = feature;
        best.threshold = midpoint(scan_[i].value, scan_[i + 1].value);
      }
    }
  }

  // Stable partition of rows_[begin,end) by the split rule; returns the first
  // right-child position.
  std::size_t partition(std::size_t begin, std::size_t end, int feature, double threshold) {
    partition_buf_.clear();
    std::size_t write = begin;
    for (std::size_t i = begin; i < end; ++i) {
      if (data_.x(rows_[i], feature) <= threshold) {
        rows_[write++] = rows_[i];
      } else {
        partition_buf_.push_back(rows_[i]);
      }
    }
    const std::size_t mid = write;
    for (std::uint32_t r : partition_buf_) rows_[write++] = r;
    return mid;
  }

  // Routes estimation rows down the fixed structure, fills per-node
  // statistics, and resolves leaf effects/values with the ancestor fallback.
  void estimate(Tree& tree) {
    const std::size_t count = tree.nodes.size();
    agg_.assign(count, NodeAggregates{});
    route_rows_ = tree.estimation_rows;
    route(tree, 0, 0, route_rows_.size());

    // Pooled fallback over all fit rows, for a root whose estimation half
    // lacks a group (or, for outcome means, has no rows).
    double pooled_value = std::numeric_limits<double>::quiet_NaN();
    double pooled_effect = std::numeric_limits<double>::quiet_NaN();
    {
      std::size_t n = 0;
      int nt = 0;
      int nc = 0;
      double st = 0.0;
      double sc = 0.0;
      auto absorb = [&](std::span<const std::uint32_t> rs) {
        for (std::uint32_t r : rs) {
          ++n;
          if (data_.treated(r)) {
            ++nt;
            st += data_.y(r);
          } else {
            ++nc;
            sc += data_.y(r);
          }
        }
      };
      absorb(tree.structure_rows);
      if (tree.estimation_rows != tree.structure_rows) absorb(tree.estimation_rows);
      if (n > 0) pooled_value = (st + sc) / static_cast<double>(n);
      if (nt > 0 && nc > 0) pooled_effect = st / nt - sc / nc;
    }

    for (std::size_t i = 0; i < count; ++i) {
      auto& node = tree.nodes[i];
      const NodeAggregates& a = agg_[i];
      LeafStats& s = node.stats;
      s.n_total = static_cast<int>(a.n);
      s.n_treated = a.n_treated;
      s.n_control = a.n_control;
      if (a.n > 0) s.mean_y = a.sum_y / static_cast<double>(a.n);
      if (a.n_treated > 0) s.mean_treated = a.sum_treated / a.n_treated;
      if (a.n_control > 0) s.mean_control = a.sum_control / a.n_control;
      if (a.n_treated > 0 && a.n_control > 0) s.tau_hat = s.mean_treated - s.mean_control;

      const TreeNode* up = node.parent >= 0 ? &tree.nodes[static_cast<std::size_t>(node.parent)]
                                            : nullptr;
      node.value = a.n > 0 ? s.mean_y : (up ? up->value : pooled_value);
      if (causal_) {
        node.effect = (a.n_treated > 0 && a.n_control > 0)
                          ? s.tau_hat
                          : (up ? up->effect : pooled_effect);
      }
    }
  }

  void route(Tree& tree, int node, std::size_t begin, std::size_t end) {
    NodeAggregates& a = agg_[static_cast<std::size_t>(node)];
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint32_t row = route_rows_[i];
      const double y = data_.y(row);
      ++a.n;
      a.sum_y += y;
      if (data_.treated(row)) {
        ++a.n_treated;
        a.sum_treated += y;
      } else {
        ++a.n_control;
        a.sum_control += y;
      }
    }
    const TreeNode& tn = tree.nodes[static_cast<std::size_t>(node)];
    if (tn.is_leaf()) return;

    partition_buf_.clear();
    std::size_t write = begin;
    for (std::size_t i = begin; i < end; ++i) {
      if (data_.x(route_rows_[i], tn.split.feature) <= tn.split.threshold) {
        route_rows_[write++] = route_rows_[i];
      } else {
        partition_buf_.push_back(route_rows_[i]);
      }
    }
    const std::size_t mid = write;
    for (std::uint32_t r : partition_buf_) route_rows_[write++] = r;
    route(tree, tn.left, begin, mid);
    route(tree, tn.right, mid, end);
  }

  void record_audit(int idx, std::span<const int> features, int chosen) {
    if (!audit_) return;
    SplitAudit::NodeRecord rec;
    rec.node = idx;
    rec.candidates.assign(features.begin(), features.end());
    rec.chosen = chosen;
    audit_->records.push_back(std::move(rec));
  }

  const Dataset& data_;
  TreeParams params_;
  bool causal_;
  std::vector<int> fixed_features_;
  int mtry_ = 0;
  SeededRng* rng_ = nullptr;
  SplitAudit* audit_ = nullptr;

  std::vector<TreeNode> nodes_;
  std::vector<std::uint32_t> rows_;
  std::vector<std::uint32_t> route_rows_;
  std::vector<std::uint32_t> partition_buf_;
  std::vector<ScanEntry> scan_;
  std::vector<int> feature_buf_;
  std::vector<NodeAggregates> agg_;
};

inline std::vector<std::uint32_t> all_rows(const Dataset& data) {
  std::vector<std::uint32_t> rows(data.n());
  std::iota(rows.begin(), rows.end(), 0u);
  return rows;
}

inline std::vector<int> normalize_features(const Dataset& data, std::span<const int> candidates) {
  std::vector<int> features(candidates.begin(), candidates.end());
  if (features.empty()) {
    features.resize(static_cast<std::size_t>(data.width()));
    std::iota(features.begin(), features.end(), 0);
  }
  for (int f : features) {
    if (f < 0 || f >= data.width()) throw validation_error("candidate feature out of range");
  }
  return features;
}

}  // namespace detail

// Standard regression tree: each split exactly minimizes the two-child sum of
// squared deviations from child means over the candidate features and all
// midpoints between consecutive distinct sorted values. Ties break toward the
// lowest feature index, then the lowest threshold. An empty candidate set
// means all columns.
inline Tree fit_regression_tree(const Dataset& data, const TreeParams& params,
                                std::span<const int> candidate_features, SeededRng& rng,
                                SplitAudit* audit = nullptr) {
  params.validate();
  if (data.n() < 2 * static_cast<std::size_t>(params.min_leaf)) {
    throw validation_error("fit_regression_tree: needs at least 2*min_leaf rows");
  }
  detail::TreeFitter fitter(data, params, /*causal=*/false);
  fitter.set_fixed_features(detail::normalize_features(data, candidate_features));
  fitter.set_audit(audit);
  return fitter.fit(detail::all_rows(data), rng);
}

// Honest causal tree: with honest=true the rows are split into a structure
// half that chooses the splits and an estimation half that alone determines
// the leaf effects. An estimation leaf missing either group falls back to the
// nearest ancestor with both.
inline Tree fit_causal_tree(const Dataset& data, const TreeParams& params,
                            std::span<const int> candidate_features, SeededRng& rng,
                            SplitAudit* audit = nullptr) {
  params.validate();
  const auto mtc = static_cast<std::size_t>(params.min_treat_control_per_leaf);
  const std::size_t nt = data.num_treated();
  if (nt < mtc || data.n() - nt < mtc) {
    throw validation_error("fit_causal_tree: needs at least min_treat_control_per_leaf rows per group");
  }
  detail::TreeFitter fitter(data, params, /*causal=*/true);
  fitter.set_fixed_features(detail::normalize_features(data, candidate_features));
  fitter.set_audit(audit);
  return fitter.fit(detail::all_rows(data), rng);
}

// Routes a covariate vector to its unique leaf; a value exactly on a
// threshold goes left.
inline const TreeNode& route_to_leaf(const Tree& tree, std::span<const double> row) {
  if (static_cast<int>(row.size()) != tree.width) {
    throw validation_error("predict_tree: row width " + std::to_string(row.size()) +
                           " does not match training width " + std::to_string(tree.width));
  }
  const TreeNode* node = &tree.nodes.front();
  while (!node->is_leaf()) {
    node = row[static_cast<std::size_t>(node->split.feature)] <= node->split.threshold
               ? &tree.nodes[static_cast<std::size_t>(node->left)]
               : &tree.nodes[static_cast<std::size_t>(node->right)];
  }
  return *node;
}

inline double predict_tree(const Tree& tree, std::span<const double> row, TreeTarget target) {
  if (target == TreeTarget::Effect && !tree.causal) {
    throw validation_error("predict_tree: regression tree has no effect estimates");
  }
  const TreeNode& leaf = route_to_leaf(tree, row);
  return target == TreeTarget::Effect ? leaf.effect : leaf.value;
}

// Topology, split features, and thresholds only; independent of every
// estimation-side quantity.
inline std::string structural_signature(const Tree& tree) {
  std::string sig;
  sig.reserve(tree.nodes.size() * 8);
  for (const auto& node : tree.nodes) {
    if (node.is_leaf()) {
      sig += "L;";
    } else {
      char buf[48];
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(node.split.threshold));
      std::memcpy(&bits, &node.split.threshold, sizeof(bits));
      std::snprintf(buf, sizeof(buf), "S%d:%016llx;", node.split.feature,
                    static_cast<unsigned long long>(bits));
      sig += buf;
    }
  }
  return sig;
}

namespace detail {

inline nlohmann::json json_number(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

inline double number_or_nan(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline nlohmann::json stats_to_json(const LeafStats& s) {
  return {{"n", s.n_total},
          {"n_treated", s.n_treated},
          {"n_control", s.n_control},
          {"mean_treated", json_number(s.mean_treated)},
          {"mean_control", json_number(s.mean_control)},
          {"tau_hat", json_number(s.tau_hat)},
          {"mean_y", json_number(s.mean_y)}};
}

inline LeafStats stats_from_json(const nlohmann::json& j) {
  LeafStats s;
  s.n_total = j.at("n").get<int>();
  s.n_treated = j.at("n_treated").get<int>();
  s.n_control = j.at("n_control").get<int>();
  s.mean_treated = number_or_nan(j.at("mean_treated"));
  s.mean_control = number_or_nan(j.at("mean_control"));
  s.tau_hat = number_or_nan(j.at("tau_hat"));
  s.mean_y = number_or_nan(j.at("mean_y"));
  return s;
}

inline nlohmann::json node_to_json(const Tree& tree, int idx) {
  const TreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
  nlohmann::json j{{"depth", node.depth},
                   {"stats", stats_to_json(node.stats)},
                   {"effect", json_number(node.effect)},
                   {"value", json_number(node.value)}};
  if (!node.is_leaf()) {
    j["feature"] = node.split.feature;
    j["threshold"] = node.split.threshold;
    j["left"] = node_to_json(tree, node.left);
    j["right"] = node_to_json(tree, node.right);
  }
  return j;
}

inline int node_from_json(const nlohmann::json& j, Tree& tree, int parent) {
  const int idx = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  {
    auto& node = tree.nodes.back();
    node.parent = parent;
    node.depth = j.at("depth").get<int>();
    node.stats = stats_from_json(j.at("stats"));
    node.effect = number_or_nan(j.at("effect"));
    node.value = number_or_nan(j.at("value"));
  }
  if (j.contains("feature")) {
    const int left = node_from_json(j.at("left"), tree, idx);
    const int right = node_from_json(j.at("right"), tree, idx);
    auto& node = tree.nodes[static_cast<std::size_t>(idx)];
    node.split.feature = j.at("feature").get<int>();
    node.split.threshold = j.at("threshold").get<double>();
    node.left = left;
    node.right = right;
  }
  return idx;
}

}  // namespace detail

inline nlohmann::json tree_to_json(const Tree& tree) {
  return {{"causal", tree.causal},
          {"width", tree.width},
          {"structure_rows", tree.structure_rows},
          {"estimation_rows", tree.estimation_rows},
          {"root", detail::node_to_json(tree, 0)}};
}

inline Tree tree_from_json(const nlohmann::json& j) {
  Tree tree;
  tree.causal = j.at("causal").get<bool>();
  tree.width = j.at("width").get<int>();
  tree.structure_rows = j.at("structure_rows").get<std::vector<std::uint32_t>>();
  tree.estimation_rows = j.at("estimation_rows").get<std::vector<std::uint32_t>>();
  detail::node_from_json(j.at("root"), tree, -1);
  return tree;
}

}  // namespace hte
