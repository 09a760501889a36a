#pragma once

#include <array>
#include <numeric>

#include "gridfire/surrogate/ensemble.hpp"

namespace gridfire::surrogate {

// Mean-decrease-in-impurity share of each feature.
struct ImportanceReport {
  std::array<double, kFeatureCount> share{};

  // Feature indices ordered by decreasing share (ties by index).
  std::array<std::size_t, kFeatureCount> ranking() const {
    std::array<std::size_t, kFeatureCount> r;
    std::iota(r.begin(), r.end(), std::size_t{0});
    std::stable_sort(r.begin(), r.end(), [&](std::size_t a, std::size_t b) { return share[a] > share[b]; });
    return r;
  }
};

// Squared-error decrease of every split, as a fraction of the tree's root
// sample weight, summed per feature over the ensemble and normalised.
inline ImportanceReport mdi_importance(const Ensemble& ens) {
  ImportanceReport rep;
  for (const auto& tree : ens.trees) {
    const double root = tree.nodes.front().weight;
    for (const auto& node : tree.nodes) {
      if (node.feature != TreeNode::kLeaf) rep.share[static_cast<std::size_t>(node.feature)] += node.gain / root;
    }
  }
  const double total = std::accumulate(rep.share.begin(), rep.share.end(), 0.0);
  if (total > 0) {
    for (double& s : rep.share) s /= total;
  } else {
    // No split anywhere: nothing distinguishes the features.
    rep.share.fill(1.0 / static_cast<double>(kFeatureCount));
  }
  return rep;
}

}  // namespace gridfire::surrogate
