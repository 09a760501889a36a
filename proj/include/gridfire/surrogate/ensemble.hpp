#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "gridfire/core/parallel.hpp"
#include "gridfire/surrogate/tree.hpp"

namespace gridfire::surrogate {

struct EnsembleParams {
  std::size_t n_trees = 100;
  TreeParams tree;
  bool bootstrap = true;
  std::size_t threads = 1;
};

// Bagged regression trees; tree k is grown from bootstrap seed + k.
struct Ensemble {
  std::vector<RegressionTree> trees;
  std::uint64_t bootstrap_seed = 0;
  EnsembleParams params;

  // Mean of the tree predictions, unclamped.
  double predict_raw(const Features& x) const {
    double s = 0;
    for (const auto& t : trees) s += t.predict(x);
    return s / static_cast<double>(trees.size());
  }

  double predict(const Features& x) const { return std::clamp(predict_raw(x), 0.0, 1.0); }
};

inline Ensemble train_ensemble(const TrainingSet& data, const EnsembleParams& params, std::uint64_t seed) {
  if (params.n_trees < 1) throw InvalidArgument("ensemble needs at least one tree");
  if (data.size() == 0) throw EmptyTrainingSet("empty training set");
  if (static_cast<double>(data.size()) < params.tree.min_samples_leaf)
    throw EmptyTrainingSet("fewer training rows than min_samples_leaf");
  const FeatureBins bins(data);
  Ensemble ens;
  ens.bootstrap_seed = seed;
  ens.params = params;
  ens.trees.resize(params.n_trees);
  parallel_for(params.n_trees, params.threads, [&](std::size_t k) {
    const std::uint64_t tree_seed = seed + k;
    std::vector<double> weights(data.size(), 1.0);
    // Without bootstrap the split RNG starts from the tree seed, as in train_tree.
    std::uint64_t split_seed = tree_seed;
    if (params.bootstrap) {
      Rng rng(tree_seed);
      std::fill(weights.begin(), weights.end(), 0.0);
      for (std::size_t i = 0; i < data.size(); ++i) weights[rng.below(data.size())] += 1.0;
      split_seed = rng.next();
    }
    detail::TreeBuilder builder(data, bins, params.tree, split_seed);
    ens.trees[k] = builder.build(weights);
  });
  return ens;
}

}  // namespace gridfire::surrogate
