#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include "gridfire/core/error.hpp"
#include "gridfire/core/rng.hpp"
#include "gridfire/surrogate/ensemble.hpp"
#include "gridfire/surrogate/importance.hpp"
#include "gridfire/surrogate/linear.hpp"
#include "gridfire/surrogate/metrics.hpp"
#include "gridfire/surrogate/model.hpp"
#include "gridfire/surrogate/pipeline.hpp"
#include "gridfire/surrogate/tree.hpp"

using namespace gridfire;
using namespace gridfire::surrogate;
using dataset::Features;
using dataset::kFeatureCount;

namespace {

// Nonlinear target on random unit-cube features, on a 1/20 lattice unless
// `continuous` (which makes equal-gain splits improbable).
TrainingSet synthetic(std::size_t n, std::uint64_t seed, bool continuous = false) {
  Rng rng(seed);
  TrainingSet t;
  for (std::size_t i = 0; i < n; ++i) {
    Features x;
    for (double& v : x) v = continuous ? rng.uniform() : std::round(rng.uniform() * 20.0) / 20.0;
    t.x.push_back(x);
    t.y.push_back(std::clamp(0.6 * x[2] * x[2] + 0.3 * (x[4] < 0.5 ? 1.0 : 0.0) * x[0] + 0.05 * x[5], 0.0, 1.0));
  }
  return t;
}

double training_mse(const RegressionTree& tree, const TrainingSet& t) {
  double s = 0;
  for (std::size_t i = 0; i < t.size(); ++i) s += std::pow(tree.predict(t.x[i]) - t.y[i], 2);
  return s / static_cast<double>(t.size());
}

// Exhaustive single split: the lowest two-leaf MSE over every feature and cut.
double best_stump_mse(const TrainingSet& t) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    for (std::size_t c = 0; c < t.size(); ++c) {
      const double cut = t.x[c][f];
      double sl = 0, sr = 0, nl = 0, nr = 0;
      for (std::size_t i = 0; i < t.size(); ++i) (t.x[i][f] <= cut ? (sl += t.y[i], nl += 1) : (sr += t.y[i], nr += 1));
      if (nl == 0 || nr == 0) continue;
      double e = 0;
      for (std::size_t i = 0; i < t.size(); ++i) e += std::pow(t.y[i] - (t.x[i][f] <= cut ? sl / nl : sr / nr), 2);
      best = std::min(best, e / static_cast<double>(t.size()));
    }
  }
  return best;
}

dataset::Dataset to_dataset(const TrainingSet& t) {
  dataset::Dataset ds;
  for (std::size_t i = 0; i < t.size(); ++i) ds.rows.push_back({t.x[i], t.y[i]});
  return ds;
}

SurrogateModel small_model() {
  const TrainingSet t = synthetic(300, 5);
  SurrogateModel m;
  EnsembleParams p;
  p.n_trees = 8;
  m.body = train_ensemble(t, p, 11);
  for (std::size_t j = 0; j < kFeatureCount; ++j) m.stats.min[j] = 0.0, m.stats.max[j] = 1.0 + j;
  return m;
}

}  // namespace

TEST(Tree, ConstantTargetIsSingleLeaf) {
  TrainingSet t = synthetic(40, 1);
  std::fill(t.y.begin(), t.y.end(), 0.37);
  const RegressionTree tree = train_tree(t, TreeParams{}, 1);
  ASSERT_EQ(tree.nodes.size(), 1u);
  EXPECT_NEAR(tree.predict(t.x[3]), 0.37, 1e-12);
  EXPECT_NEAR(tree.predict(Features{9, 9, 9, 9, 9, 9}), 0.37, 1e-12);
}

TEST(Tree, SeparableBinaryFeatureGivesStump) {
  TrainingSet t;
  for (int i = 0; i < 20; ++i) {
    Features x{};
    x[3] = i % 2;
    t.x.push_back(x);
    t.y.push_back(i % 2 ? 0.9 : 0.1);
  }
  const RegressionTree tree = train_tree(t, TreeParams{24, 1, 6}, 3);
  EXPECT_EQ(tree.depth(), 1u);
  EXPECT_NEAR(training_mse(tree, t), 0.0, 1e-24);
}

TEST(Tree, BeatsBestExhaustiveSingleSplit) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const TrainingSet t = synthetic(50, seed);
    const RegressionTree tree = train_tree(t, TreeParams{24, 1, 3}, seed);
    EXPECT_LE(training_mse(tree, t), best_stump_mse(t) + 1e-15);
    const RegressionTree stump = train_tree(t, TreeParams{1, 1, 6}, seed);
    EXPECT_NEAR(training_mse(stump, t), best_stump_mse(t), 1e-12);
  }
}

TEST(Tree, RespectsDepthAndLeafSize) {
  const TrainingSet t = synthetic(200, 4);
  EXPECT_LE(train_tree(t, TreeParams{3, 2, 3}, 1).depth(), 3u);
  const RegressionTree tree = train_tree(t, TreeParams{24, 10, 3}, 1);
  for (const TreeNode& n : tree.nodes)
    if (n.feature == TreeNode::kLeaf) {
      EXPECT_GE(n.weight, 10.0);
    }
}

TEST(Tree, EmptyTrainingSetRejected) {
  EXPECT_THROW(train_tree(TrainingSet{}, TreeParams{}, 1), EmptyTrainingSet);
  EXPECT_THROW(train_ensemble(TrainingSet{}, EnsembleParams{}, 1), EmptyTrainingSet);
}

TEST(Ensemble, SingleUnbootstrappedTreeEqualsTrainTree) {
  const TrainingSet t = synthetic(120, 6);
  EnsembleParams p;
  p.n_trees = 1;
  p.bootstrap = false;
  const Ensemble ens = train_ensemble(t, p, 42);
  EXPECT_EQ(ens.trees.front(), train_tree(t, p.tree, 42));
}

TEST(Ensemble, PredictionsWithinTargetRange) {
  const TrainingSet t = synthetic(150, 7);
  EnsembleParams p;
  p.n_trees = 15;
  const Ensemble ens = train_ensemble(t, p, 3);
  const auto [lo, hi] = std::minmax_element(t.y.begin(), t.y.end());
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    Features x;
    for (double& v : x) v = rng.uniform() * 1.4 - 0.2;
    EXPECT_GE(ens.predict_raw(x), *lo);
    EXPECT_LE(ens.predict_raw(x), *hi);
  }
}

TEST(Ensemble, SameSeedSameEnsembleAnyThreadCount) {
  const TrainingSet t = synthetic(150, 8);
  EnsembleParams p;
  p.n_trees = 6;
  const Ensemble a = train_ensemble(t, p, 5);
  p.threads = 3;
  const Ensemble b = train_ensemble(t, p, 5);
  EXPECT_EQ(a.trees, b.trees);
  EXPECT_NE(train_ensemble(t, p, 6).trees, a.trees);
}

TEST(Predict, SingleLeafAndDimensionCheck) {
  TrainingSet t = synthetic(10, 1);
  std::fill(t.y.begin(), t.y.end(), 0.25);
  SurrogateModel m;
  EnsembleParams p;
  p.n_trees = 1;
  m.body = train_ensemble(t, p, 1);
  const std::vector<double> x(kFeatureCount, 0.3);
  EXPECT_DOUBLE_EQ(predict(m, x), 0.25);
  EXPECT_THROW(predict(m, std::vector<double>(5, 0.3)), InvalidArgument);
}

TEST(Predict, LinearOutputClamped) {
  LinearModel lm;
  lm.intercept = 3.0;
  EXPECT_EQ(lm.predict(Features{}), 1.0);
  lm.intercept = -2.0;
  EXPECT_EQ(lm.predict(Features{}), 0.0);
}

TEST(Importance, SingleInformativeFeatureTakesAll) {
  TrainingSet t;
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    Features x{};
    x[1] = rng.uniform();
    t.x.push_back(x);
    t.y.push_back(x[1] * x[1]);
  }
  EnsembleParams p;
  p.n_trees = 5;
  const ImportanceReport r = mdi_importance(train_ensemble(t, p, 1));
  EXPECT_NEAR(r.share[1], 1.0, 1e-12);
  for (std::size_t j = 0; j < kFeatureCount; ++j)
    if (j != 1) {
      EXPECT_EQ(r.share[j], 0.0);
    }
  EXPECT_EQ(r.ranking()[0], 1u);
}

TEST(Importance, SharesSumToOne) {
  EnsembleParams p;
  p.n_trees = 10;
  const ImportanceReport r = mdi_importance(train_ensemble(synthetic(200, 3), p, 4));
  double s = 0;
  for (double v : r.share) {
    EXPECT_GE(v, 0.0);
    s += v;
  }
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Importance, PermutationConsistent) {
  const TrainingSet t = synthetic(400, 12, true);
  const std::array<std::size_t, kFeatureCount> perm{5, 2, 0, 4, 1, 3};
  TrainingSet u = t;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < kFeatureCount; ++j) u.x[i][perm[j]] = t.x[i][j];
  EnsembleParams p;
  p.n_trees = 10;
  p.tree.features_per_split = kFeatureCount;  // exhaustive search: no feature sampling order to permute
  // Large leaves keep two features from inducing the same partition, the one
  // case where the tie-break depends on column order.
  p.tree.min_samples_leaf = 20;
  p.bootstrap = false;
  const ImportanceReport a = mdi_importance(train_ensemble(t, p, 1));
  const ImportanceReport b = mdi_importance(train_ensemble(u, p, 1));
  for (std::size_t j = 0; j < kFeatureCount; ++j) EXPECT_NEAR(a.share[j], b.share[perm[j]], 1e-12);
}

TEST(Linear, ExactFitWithoutPenalty) {
  TrainingSet t = synthetic(30, 2);
  for (std::size_t i = 0; i < t.size(); ++i) t.y[i] = 2.0 * t.x[i][0] + 1.0;
  const LinearModel m = train_linear(t, 0.0);
  EXPECT_NEAR(m.weights[0], 2.0, 1e-8);
  for (std::size_t j = 1; j < kFeatureCount; ++j) EXPECT_NEAR(m.weights[j], 0.0, 1e-8);
  EXPECT_NEAR(m.intercept, 1.0, 1e-8);
}

TEST(Linear, SingularDesignRejected) {
  TrainingSet t = synthetic(30, 2);
  for (auto& x : t.x) x[4] = 0.5;
  EXPECT_THROW(train_linear(t, 0.0), SingularDesign);
}

TEST(Linear, HugePenaltyGivesMean) {
  const TrainingSet t = synthetic(40, 3);
  const LinearModel m = train_linear(t, 1e6);
  for (double w : m.weights) EXPECT_EQ(w, 0.0);
  double mean = 0;
  for (double y : t.y) mean += y;
  EXPECT_NEAR(m.intercept, mean / static_cast<double>(t.size()), 1e-12);
}

TEST(Linear, LassoMatchesGridSearchOracle) {
  // Five points where only two features vary; the rest stay zero.
  TrainingSet t;
  const double x0[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  const double x1[] = {0.2, 0.9, 0.4, 0.1, 0.6};
  const double y[] = {0.1, 0.5, 0.45, 0.5, 0.95};
  for (int i = 0; i < 5; ++i) {
    Features x{};
    x[0] = x0[i];
    x[1] = x1[i];
    t.x.push_back(x);
    t.y.push_back(y[i]);
  }
  const double penalty = 0.01;
  const LinearModel m = train_linear(t, penalty);
  for (std::size_t j = 2; j < kFeatureCount; ++j) EXPECT_EQ(m.weights[j], 0.0);
  // Grid over (w0, w1) with the intercept solved exactly.
  double best = std::numeric_limits<double>::infinity(), bw0 = 0, bw1 = 0;
  for (double w0 = -2; w0 <= 2; w0 += 0.0005)
    for (double w1 = -2; w1 <= 2; w1 += 0.005) {
      LinearModel c;
      c.l1_penalty = penalty;
      c.weights[0] = w0;
      c.weights[1] = w1;
      double b = 0;
      for (int i = 0; i < 5; ++i) b += y[i] - w0 * x0[i] - w1 * x1[i];
      c.intercept = b / 5;
      const double f = lasso_objective(t, c);
      if (f < best) best = f, bw0 = w0, bw1 = w1;
    }
  EXPECT_LE(lasso_objective(t, m), best + 1e-9);
  EXPECT_NEAR(m.weights[0], bw0, 1e-3);
  EXPECT_NEAR(m.weights[1], bw1, 1e-2);
}

TEST(Metrics, PerfectPredictions) {
  const std::vector<double> y{0.1, 0.4, 0.9};
  const Metrics m = compute_metrics(y, y);
  EXPECT_EQ(m.mae, 0.0);
  EXPECT_EQ(m.rmse, 0.0);
  EXPECT_EQ(*m.relative_mae, 0.0);
  EXPECT_EQ(*m.relative_rmse_maxmin, 0.0);
}

TEST(Metrics, MeanPredictorOnBinaryTargets) {
  const std::vector<double> y{0.0, 1.0}, p{0.5, 0.5};
  const Metrics m = compute_metrics(y, p);
  EXPECT_DOUBLE_EQ(m.mae, 0.5);
  EXPECT_DOUBLE_EQ(m.rmse, 0.5);
  EXPECT_DOUBLE_EQ(*m.relative_mae, 1.0);
  EXPECT_DOUBLE_EQ(*m.relative_rmse_maxmin, 0.5);
}

TEST(Metrics, ZeroNormalizersAreNotApplicable) {
  const std::vector<double> y{0.0, 0.0}, p{0.1, 0.0};
  const Metrics m = compute_metrics(y, p);
  EXPECT_FALSE(m.relative_mae.has_value());
  EXPECT_FALSE(m.relative_rmse_mean.has_value());
  EXPECT_FALSE(m.relative_rmse_maxmin.has_value());
  EXPECT_NEAR(m.mae, 0.05, 1e-15);
}

TEST(Model, SerializeRoundTripPredictsIdentically) {
  const SurrogateModel m = small_model();
  const SurrogateModel back = deserialize(serialize(m));
  EXPECT_EQ(serialize(back), serialize(m));
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    Features x;
    for (double& v : x) v = rng.uniform() * 5;
    EXPECT_EQ(back.predict_field_units(x), m.predict_field_units(x));
  }
  SurrogateModel lin;
  LinearModel lm;
  lm.weights = {0.1, -0.2, 0.3, 0, 0, 0.05};
  lm.intercept = 0.4;
  lm.l1_penalty = 1e-4;
  lin.body = lm;
  EXPECT_EQ(serialize(deserialize(serialize(lin))), serialize(lin));
}

TEST(Model, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "gridfire_model_roundtrip.bin";
  const SurrogateModel m = small_model();
  save_model(m, path.string());
  EXPECT_EQ(serialize(load_model(path.string())), serialize(m));
  std::filesystem::remove(path);
}

TEST(Model, CorruptionDetected) {
  auto bytes = serialize(small_model());
  bytes[bytes.size() / 2] ^= 0x5a;
  EXPECT_THROW(deserialize(bytes), ModelFormatError);
  auto truncated = serialize(small_model());
  truncated.resize(truncated.size() - 9);
  EXPECT_THROW(deserialize(truncated), ModelFormatError);
  EXPECT_THROW(deserialize(std::vector<char>(4, 'x')), ModelFormatError);
}

TEST(Model, VersionMismatchReported) {
  auto bytes = serialize(small_model());
  bytes[sizeof kModelMagic] = 7;
  try {
    deserialize(bytes);
    FAIL() << "expected ModelFormatError";
  } catch (const ModelFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(Pipeline, SeededTrainingIsReproducible) {
  const dataset::Dataset ds = to_dataset(synthetic(400, 21));
  TrainConfig cfg;
  cfg.ensemble.n_trees = 10;
  cfg.split.seed = 3;
  cfg.seed = 9;
  cfg.cross_validate = true;
  const TrainReport a = train_surrogate(ds, cfg);
  const TrainReport b = train_surrogate(ds, cfg);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(serialize(a.model), serialize(b.model));
  EXPECT_EQ(a.folds.size(), 5u);
  EXPECT_EQ(a.test_rows, 80u);
  EXPECT_EQ(a.train_rows, 320u);
  ASSERT_TRUE(a.importance.has_value());
}

TEST(Pipeline, EnsembleBeatsLinearBaselinesOnNonlinearTarget) {
  const dataset::Dataset ds = to_dataset(synthetic(600, 31));
  TrainConfig cfg;
  cfg.ensemble.n_trees = 30;
  const double ens = train_surrogate(ds, cfg).test.mae;
  cfg.kind = ModelKind::Mlr;
  const double mlr = train_surrogate(ds, cfg).test.mae;
  cfg.kind = ModelKind::Lasso;
  const double lasso = train_surrogate(ds, cfg).test.mae;
  EXPECT_LT(ens, mlr);
  EXPECT_LT(ens, lasso);
}

TEST(Pipeline, ModelKindNames) {
  EXPECT_EQ(parse_model_kind("ensemble"), ModelKind::Ensemble);
  EXPECT_EQ(parse_model_kind("mlr"), ModelKind::Mlr);
  EXPECT_EQ(parse_model_kind("lasso"), ModelKind::Lasso);
  EXPECT_THROW(parse_model_kind("svm"), InvalidArgument);
}
