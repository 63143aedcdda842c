#pragma once

// CART-style classification tree (Gini criterion) used to reconstruct the
// confidence assignment rule from physical features.
//
// Fitting keeps one index array per feature, presorted by that feature. A
// node owns the same contiguous slice of every array, and a split stably
// partitions each slice, so every level of the tree costs O(features * rows)
// with no re-sorting.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "firmsaudit/error.hpp"
#include "firmsaudit/random.hpp"
#include "firmsaudit/records.hpp"

namespace firmsaudit {

inline constexpr std::size_t kFeatureCount = 5;
inline constexpr std::size_t kClassCount = 3;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{"brightness", "scan", "track", "frp",
                                                                           "is_night"};

struct FeatureRow {
  /// brightness (K), scan (km), track (km), frp (MW), is_night (0/1)
  std::array<double, kFeatureCount> features{};
  Confidence label{Confidence::Nominal};

  [[nodiscard]] bool is_night() const noexcept { return features[4] != 0.0; }

  static FeatureRow from(const FireDetection& r) {
    return {{r.bright_ti4, r.scan, r.track, r.frp, r.is_night() ? 1.0 : 0.0}, r.confidence};
  }
};

using ClassCounts = std::array<std::uint64_t, kClassCount>;

inline double gini(const ClassCounts& c) {
  const double n = static_cast<double>(c[0] + c[1] + c[2]);
  if (n == 0) return 0.0;
  double sq = 0.0;
  for (auto k : c) sq += static_cast<double>(k) * static_cast<double>(k);
  return 1.0 - sq / (n * n);
}

struct TreeParams {
  /// std::nullopt grows until leaves are pure or limited by sample counts.
  std::optional<std::size_t> max_depth = 10;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::size_t depth = 0;
  ClassCounts class_counts{};
  double impurity = 0.0;
  /// n * impurity - n_left * impurity_left - n_right * impurity_right
  double weighted_impurity_decrease = 0.0;

  [[nodiscard]] bool is_leaf() const noexcept { return feature < 0; }
  [[nodiscard]] std::uint64_t samples() const noexcept { return class_counts[0] + class_counts[1] + class_counts[2]; }
};

class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, TreeParams params) : nodes_(std::move(nodes)), params_(params) {}

  [[nodiscard]] const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] const TreeParams& params() const noexcept { return params_; }

  [[nodiscard]] const TreeNode& leaf_for(const std::array<double, kFeatureCount>& x) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
      const auto& n = nodes_[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right);
    }
    return nodes_[i];
  }

  /// Majority class at the reached leaf; ties go to the lower class (h < l < n).
  [[nodiscard]] Confidence predict(const std::array<double, kFeatureCount>& x) const {
    const auto& c = leaf_for(x).class_counts;
    std::size_t best = 0;
    for (std::size_t k = 1; k < kClassCount; ++k) {
      if (c[k] > c[best]) best = k;
    }
    return static_cast<Confidence>(best);
  }
  [[nodiscard]] Confidence predict(const FeatureRow& row) const { return predict(row.features); }

  [[nodiscard]] std::size_t depth() const {
    std::size_t d = 0;
    for (const auto& n : nodes_) d = std::max(d, n.depth);
    return d;
  }

  [[nodiscard]] std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
  }

 private:
  std::vector<TreeNode> nodes_;
  TreeParams params_;
};

// ---------------------------------------------------------------------------
// Splitting data

/// Per-class test counts are round(count * test_fraction); within a class the
/// test members are picked by a seeded partial Fisher-Yates shuffle. Both
/// outputs keep the input order.
inline std::pair<std::vector<FeatureRow>, std::vector<FeatureRow>> stratified_split(std::span<const FeatureRow> rows,
                                                                                    double test_fraction,
                                                                                    std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) {
    throw AuditError(ErrorCode::InvalidArgument, "test fraction must lie in [0, 1]");
  }
  std::array<std::vector<std::size_t>, kClassCount> by_class;
  for (std::size_t i = 0; i < rows.size(); ++i) by_class[index_of(rows[i].label)].push_back(i);

  std::vector<std::uint8_t> in_test(rows.size(), 0);
  for (std::size_t k = 0; k < kClassCount; ++k) {
    auto& members = by_class[k];
    if (members.empty()) continue;
    if (members.size() < 2 && test_fraction > 0.0) {
      throw AuditError(ErrorCode::ClassTooSmall,
                       std::string("class '") + to_char(static_cast<Confidence>(k)) + "' has fewer than 2 rows");
    }
    const auto want = static_cast<std::size_t>(std::llround(static_cast<double>(members.size()) * test_fraction));
    Rng rng(seed, k);
    for (std::size_t i = 0; i < want; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(members.size() - i));
      std::swap(members[i], members[j]);
      in_test[members[i]] = 1;
    }
  }
  std::pair<std::vector<FeatureRow>, std::vector<FeatureRow>> out;
  for (std::size_t i = 0; i < rows.size(); ++i) (in_test[i] ? out.second : out.first).push_back(rows[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Fitting

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(std::span<const FeatureRow> rows, const TreeParams& params) : rows_(rows), params_(params) {
    const auto n = static_cast<std::uint32_t>(rows.size());
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      auto& order = order_[f];
      order.resize(n);
      std::iota(order.begin(), order.end(), 0u);
      std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return rows_[a].features[f] < rows_[b].features[f];
      });
    }
    goes_left_.assign(n, 0);
    scratch_.resize(n);
  }

  std::vector<TreeNode> build() {
    struct Pending {
      std::size_t node;
      std::size_t begin;
      std::size_t end;
    };
    nodes_.push_back(make_node(0, rows_.size(), 0));
    std::vector<Pending> stack{{0, 0, rows_.size()}};
    while (!stack.empty()) {
      const auto [id, begin, end] = stack.back();
      stack.pop_back();
      const auto split = best_split(nodes_[id], begin, end);
      if (!split) continue;

      const std::size_t n_left = partition(split->feature, split->threshold, begin, end);
      const std::size_t depth = nodes_[id].depth + 1;
      const auto left_id = nodes_.size();
      nodes_.push_back(make_node(begin, begin + n_left, depth));
      const auto right_id = nodes_.size();
      nodes_.push_back(make_node(begin + n_left, end, depth));

      auto& node = nodes_[id];
      node.feature = static_cast<int>(split->feature);
      node.threshold = split->threshold;
      node.left = static_cast<std::int32_t>(left_id);
      node.right = static_cast<std::int32_t>(right_id);
      const auto& l = nodes_[left_id];
      const auto& r = nodes_[right_id];
      node.weighted_impurity_decrease = static_cast<double>(node.samples()) * node.impurity -
                                        static_cast<double>(l.samples()) * l.impurity -
                                        static_cast<double>(r.samples()) * r.impurity;
      // Right pushed first so the left subtree is expanded first.
      stack.push_back({right_id, begin + n_left, end});
      stack.push_back({left_id, begin, begin + n_left});
    }
    return std::move(nodes_);
  }

 private:
  struct Split {
    std::size_t feature;
    double threshold;
  };

  TreeNode make_node(std::size_t begin, std::size_t end, std::size_t depth) const {
    TreeNode node;
    node.depth = depth;
    for (std::size_t i = begin; i < end; ++i) ++node.class_counts[index_of(rows_[order_[0][i]].label)];
    node.impurity = gini(node.class_counts);
    return node;
  }

  static double sum_sq_over_n(const ClassCounts& c, std::uint64_t n) {
    double s = 0.0;
    for (auto k : c) s += static_cast<double>(k) * static_cast<double>(k);
    return s / static_cast<double>(n);
  }

  // Maximizing sum_children(sum_k c_k^2 / n_child) is equivalent to minimizing
  // weighted child Gini. Scanning features in index order and thresholds in
  // ascending order while accepting only strict improvements yields the
  // lower-feature, lower-threshold tie-break.
  std::optional<Split> best_split(const TreeNode& node, std::size_t begin, std::size_t end) const {
    const std::size_t n = end - begin;
    if (params_.max_depth && node.depth >= *params_.max_depth) return std::nullopt;
    if (n < params_.min_samples_split || n < 2 * params_.min_samples_leaf) return std::nullopt;
    if (node.impurity == 0.0) return std::nullopt;

    const double parent_score = sum_sq_over_n(node.class_counts, n);
    double best_score = parent_score + 1e-12 * static_cast<double>(n);
    std::optional<Split> best;
    const std::size_t min_leaf = std::max<std::size_t>(1, params_.min_samples_leaf);

    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const auto& order = order_[f];
      ClassCounts left{};
      for (std::size_t i = begin; i + 1 < end; ++i) {
        const auto& row = rows_[order[i]];
        ++left[index_of(row.label)];
        const std::size_t n_left = i + 1 - begin;
        const double x = row.features[f];
        const double x_next = rows_[order[i + 1]].features[f];
        if (x_next == x) continue;
        if (n_left < min_leaf) continue;
        const std::size_t n_right = n - n_left;
        if (n_right < min_leaf) break;
        ClassCounts right{};
        for (std::size_t k = 0; k < kClassCount; ++k) right[k] = node.class_counts[k] - left[k];
        const double score = sum_sq_over_n(left, n_left) + sum_sq_over_n(right, n_right);
        if (score > best_score) {
          best_score = score;
          double mid = x + (x_next - x) / 2.0;
          if (!(mid > x)) mid = x_next;
          best = Split{f, mid};
        }
      }
    }
    return best;
  }

  // Stable partition of every feature slice by (value < threshold); returns
  // the left count.
  std::size_t partition(std::size_t feature, double threshold, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto r = order_[0][i];
      goes_left_[r] = rows_[r].features[feature] < threshold ? 1 : 0;
    }
    std::size_t n_left = 0;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      auto& order = order_[f];
      std::size_t l = begin;
      std::size_t r = 0;
      for (std::size_t i = begin; i < end; ++i) {
        const auto idx = order[i];
        if (goes_left_[idx]) {
          order[l++] = idx;
        } else {
          scratch_[r++] = idx;
        }
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r), order.begin() + static_cast<std::ptrdiff_t>(l));
      n_left = l - begin;
    }
    return n_left;
  }

  std::span<const FeatureRow> rows_;
  TreeParams params_;
  std::array<std::vector<std::uint32_t>, kFeatureCount> order_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> scratch_;
  std::vector<TreeNode> nodes_;
};

}  // namespace detail

/// Greedy recursive partitioning on weighted Gini impurity. Candidate
/// thresholds are midpoints between consecutive distinct feature values;
/// rows with value < threshold go left.
inline DecisionTree fit_tree(std::span<const FeatureRow> train, const TreeParams& params = {}) {
  if (train.empty()) throw AuditError(ErrorCode::EmptyTrainingSet, "no training rows");
  if (train.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw AuditError(ErrorCode::InvalidArgument, "training set too large");
  }
  return DecisionTree(detail::TreeBuilder(train, params).build(), params);
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvalMetrics {
  double accuracy = 0.0;
  std::uint64_t total = 0;
  std::uint64_t correct = 0;
  /// confusion[true][predicted], class order h, l, n
  std::array<std::array<std::uint64_t, kClassCount>, kClassCount> confusion{};
  /// Absent when the denominator is zero.
  std::array<std::optional<double>, kClassCount> precision{};
  std::array<std::optional<double>, kClassCount> recall{};
};

inline EvalMetrics evaluate(const DecisionTree& tree, std::span<const FeatureRow> test) {
  if (test.empty()) throw AuditError(ErrorCode::EmptyTestSet, "no test rows");
  EvalMetrics m;
  for (const auto& row : test) {
    const auto pred = tree.predict(row);
    ++m.confusion[index_of(row.label)][index_of(pred)];
    if (pred == row.label) ++m.correct;
  }
  m.total = test.size();
  m.accuracy = static_cast<double>(m.correct) / static_cast<double>(m.total);
  for (std::size_t k = 0; k < kClassCount; ++k) {
    std::uint64_t predicted = 0;
    std::uint64_t actual = 0;
    for (std::size_t j = 0; j < kClassCount; ++j) {
      predicted += m.confusion[j][k];
      actual += m.confusion[k][j];
    }
    if (predicted) m.precision[k] = static_cast<double>(m.confusion[k][k]) / static_cast<double>(predicted);
    if (actual) m.recall[k] = static_cast<double>(m.confusion[k][k]) / static_cast<double>(actual);
  }
  return m;
}

/// Normalized Gini importances, in feature order.
inline std::array<double, kFeatureCount> feature_importances(const DecisionTree& tree) {
  std::array<double, kFeatureCount> imp{};
  double total = 0.0;
  for (const auto& n : tree.nodes()) {
    if (n.is_leaf()) continue;
    imp[static_cast<std::size_t>(n.feature)] += n.weighted_impurity_decrease;
    total += n.weighted_impurity_decrease;
  }
  if (tree.nodes().size() <= 1 || !(total > 0)) {
    throw AuditError(ErrorCode::SingleLeafTree, "tree has no splits");
  }
  for (auto& v : imp) v /= total;
  return imp;
}

/// Night rows the tree labels low confidence.
inline std::uint64_t night_constraint_probe(const DecisionTree& tree, std::span<const FeatureRow> rows) {
  std::uint64_t n = 0;
  for (const auto& r : rows) {
    if (r.is_night() && tree.predict(r) == Confidence::Low) ++n;
  }
  return n;
}

/// Share of the most frequent label, the accuracy of a constant classifier.
inline double majority_baseline(std::span<const FeatureRow> rows) {
  if (rows.empty()) return 0.0;
  ClassCounts c{};
  for (const auto& r : rows) ++c[index_of(r.label)];
  return static_cast<double>(*std::max_element(c.begin(), c.end())) / static_cast<double>(rows.size());
}

}  // namespace firmsaudit
