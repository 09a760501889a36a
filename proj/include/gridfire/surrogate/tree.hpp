#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "gridfire/core/error.hpp"
#include "gridfire/core/rng.hpp"
#include "gridfire/dataset/dataset.hpp"

namespace gridfire::surrogate {

using dataset::Features;
using dataset::kFeatureCount;

// Column-friendly copy of the rows a model is fitted on.
struct TrainingSet {
  std::vector<Features> x;
  std::vector<double> y;

  std::size_t size() const { return y.size(); }

  static TrainingSet from(const dataset::Dataset& ds) {
    TrainingSet t;
    t.x.reserve(ds.size());
    t.y.reserve(ds.size());
    for (const auto& r : ds.rows) {
      t.x.push_back(r.features);
      t.y.push_back(r.score);
    }
    return t;
  }
};

struct TreeParams {
  std::size_t max_depth = 24;
  double min_samples_leaf = 2;
  std::size_t features_per_split = 3;
};

struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;
  std::int32_t feature = kLeaf;
  double threshold = 0.0;  // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;      // mean target of the node's samples
  double weight = 0.0;     // (bootstrap-weighted) sample count
  double gain = 0.0;       // decrease in squared error achieved by the split
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(const Features& x) const {
    std::size_t i = 0;
    while (nodes[i].feature != TreeNode::kLeaf)
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                       ? nodes[i].left
                                       : nodes[i].right);
    return nodes[i].value;
  }

  std::size_t depth() const {
    std::size_t best = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [i, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      if (nodes[i].feature != TreeNode::kLeaf) {
        stack.push_back({static_cast<std::size_t>(nodes[i].left), d + 1});
        stack.push_back({static_cast<std::size_t>(nodes[i].right), d + 1});
      }
    }
    return best;
  }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature == TreeNode::kLeaf; }));
  }

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

// Sorted distinct values of every feature and each row's position among them.
// Candidate thresholds only ever fall between consecutive distinct values, so
// split search can run on these ranks.
class FeatureBins {
 public:
  explicit FeatureBins(const TrainingSet& data) {
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      std::vector<double> v(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) v[i] = data.x[i][f];
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      values_[f] = std::move(v);
      rank_[f].resize(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) {
        rank_[f][i] = static_cast<std::uint32_t>(
            std::lower_bound(values_[f].begin(), values_[f].end(), data.x[i][f]) - values_[f].begin());
      }
    }
  }

  std::size_t bins(std::size_t f) const { return values_[f].size(); }
  std::uint32_t rank(std::size_t f, std::size_t row) const { return rank_[f][row]; }
  double value(std::size_t f, std::size_t bin) const { return values_[f][bin]; }

 private:
  std::array<std::vector<double>, kFeatureCount> values_;
  std::array<std::vector<std::uint32_t>, kFeatureCount> rank_;
};

namespace detail {

struct SplitCandidate {
  bool valid = false;
  std::size_t feature = 0;
  std::uint32_t left_bin = 0;   // last bin going left
  std::uint32_t right_bin = 0;  // first non-empty bin going right
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& data, const FeatureBins& bins, const TreeParams& params, std::uint64_t seed)
      : data_(data), bins_(bins), params_(params), rng_(seed) {
    std::size_t max_bins = 0;
    for (std::size_t f = 0; f < kFeatureCount; ++f) max_bins = std::max(max_bins, bins.bins(f));
    hist_weight_.assign(max_bins, 0.0);
    hist_sum_.assign(max_bins, 0.0);
  }

  // `weights[i]` is the multiplicity of row i (0 = absent).
  RegressionTree build(const std::vector<double>& weights) {
    rows_.clear();
    for (std::size_t i = 0; i < weights.size(); ++i)
      if (weights[i] > 0) rows_.push_back(static_cast<std::uint32_t>(i));
    if (rows_.empty()) throw EmptyTrainingSet("empty training set");
    weights_ = &weights;
    RegressionTree tree;
    struct Task {
      std::size_t begin, end, depth;
      std::int32_t node;
    };
    tree.nodes.push_back({});
    std::vector<Task> stack{{0, rows_.size(), 0, 0}};
    while (!stack.empty()) {
      const Task t = stack.back();
      stack.pop_back();
      double w = 0, s = 0, q = 0;
      for (std::size_t k = t.begin; k < t.end; ++k) {
        const double wi = weights[rows_[k]], yi = data_.y[rows_[k]];
        w += wi;
        s += wi * yi;
        q += wi * yi * yi;
      }
      TreeNode& node = tree.nodes[static_cast<std::size_t>(t.node)];
      node.value = s / w;
      node.weight = w;
      const double sse = q - s * s / w;
      if (t.depth >= params_.max_depth || w < 2 * params_.min_samples_leaf || sse <= 1e-12 * std::max(1.0, q))
        continue;
      const SplitCandidate best = find_split(t.begin, t.end, w, s);
      if (!best.valid) continue;

      const double threshold =
          0.5 * (bins_.value(best.feature, best.left_bin) + bins_.value(best.feature, best.right_bin));
      auto mid = std::stable_partition(rows_.begin() + static_cast<std::ptrdiff_t>(t.begin),
                                       rows_.begin() + static_cast<std::ptrdiff_t>(t.end), [&](std::uint32_t r) {
                                         return bins_.rank(best.feature, r) <= best.left_bin;
                                       });
      const auto split_at = static_cast<std::size_t>(mid - rows_.begin());
      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.push_back({});
      tree.nodes.push_back({});
      TreeNode& parent = tree.nodes[static_cast<std::size_t>(t.node)];
      parent.feature = static_cast<std::int32_t>(best.feature);
      parent.threshold = threshold;
      parent.left = left;
      parent.right = left + 1;
      parent.gain = best.gain;
      // Right pushed first so the left subtree is built first.
      stack.push_back({split_at, t.end, t.depth + 1, left + 1});
      stack.push_back({t.begin, split_at, t.depth + 1, left});
    }
    return tree;
  }

 private:
  SplitCandidate find_split(std::size_t begin, std::size_t end, double w, double s) {
    std::array<std::size_t, kFeatureCount> order;
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = kFeatureCount; i > 1; --i) std::swap(order[i - 1], order[rng_.below(i)]);
    const std::size_t wanted = std::clamp<std::size_t>(params_.features_per_split, 1, kFeatureCount);
    SplitCandidate best;
    // Keep drawing features past the quota until some valid split exists.
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      if (k >= wanted && best.valid) break;
      const SplitCandidate c = best_split_on(order[k], begin, end, w, s);
      if (c.valid && (!best.valid || c.gain > best.gain)) best = c;
    }
    return best;
  }

  SplitCandidate best_split_on(std::size_t f, std::size_t begin, std::size_t end, double w, double s) {
    const std::size_t n = end - begin;
    const std::size_t nb = bins_.bins(f);
    SplitCandidate best;
    best.feature = f;
    const double base = s * s / w;
    double wl = 0, sl = 0;
    std::uint32_t last_bin = 0;
    bool have_left = false;
    auto consider = [&](std::uint32_t next_bin) {
      const double wr = w - wl;
      if (wl >= params_.min_samples_leaf && wr >= params_.min_samples_leaf) {
        const double sr = s - sl;
        const double gain = sl * sl / wl + sr * sr / wr - base;
        if (gain > 1e-12 * std::max(1.0, base) && (!best.valid || gain > best.gain)) {
          best = {true, f, last_bin, next_bin, gain};
        }
      }
    };
    const auto& wt = *weights_;
    if (n * 4 < nb) {
      scratch_.clear();
      for (std::size_t k = begin; k < end; ++k) scratch_.push_back(rows_[k]);
      std::sort(scratch_.begin(), scratch_.end(), [&](std::uint32_t a, std::uint32_t b) {
        const auto ra = bins_.rank(f, a), rb = bins_.rank(f, b);
        return ra != rb ? ra < rb : a < b;
      });
      for (std::size_t k = 0; k < scratch_.size(); ++k) {
        const std::uint32_t r = scratch_[k];
        const std::uint32_t bin = bins_.rank(f, r);
        if (have_left && bin != last_bin) consider(bin);
        wl += wt[r];
        sl += wt[r] * data_.y[r];
        last_bin = bin;
        have_left = true;
      }
    } else {
      std::fill_n(hist_weight_.begin(), nb, 0.0);
      std::fill_n(hist_sum_.begin(), nb, 0.0);
      for (std::size_t k = begin; k < end; ++k) {
        const std::uint32_t r = rows_[k];
        const std::uint32_t bin = bins_.rank(f, r);
        hist_weight_[bin] += wt[r];
        hist_sum_[bin] += wt[r] * data_.y[r];
      }
      for (std::uint32_t bin = 0; bin < nb; ++bin) {
        if (hist_weight_[bin] == 0.0) continue;
        if (have_left) consider(bin);
        wl += hist_weight_[bin];
        sl += hist_sum_[bin];
        last_bin = bin;
        have_left = true;
      }
    }
    return best;
  }

  const TrainingSet& data_;
  const FeatureBins& bins_;
  TreeParams params_;
  Rng rng_;
  const std::vector<double>* weights_ = nullptr;
  std::vector<std::uint32_t> rows_;
  std::vector<std::uint32_t> scratch_;
  std::vector<double> hist_weight_, hist_sum_;
};

}  // namespace detail

// Variance-reduction CART on all rows with unit weight.
inline RegressionTree train_tree(const TrainingSet& data, const TreeParams& params, std::uint64_t seed) {
  if (data.size() == 0) throw EmptyTrainingSet("empty training set");
  if (static_cast<double>(data.size()) < params.min_samples_leaf)
    throw EmptyTrainingSet("fewer training rows than min_samples_leaf");
  const FeatureBins bins(data);
  detail::TreeBuilder builder(data, bins, params, seed);
  return builder.build(std::vector<double>(data.size(), 1.0));
}

}  // namespace gridfire::surrogate
