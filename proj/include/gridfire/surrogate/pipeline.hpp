#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gridfire/dataset/dataset.hpp"
#include "gridfire/surrogate/ensemble.hpp"
#include "gridfire/surrogate/importance.hpp"
#include "gridfire/surrogate/linear.hpp"
#include "gridfire/surrogate/metrics.hpp"
#include "gridfire/surrogate/model.hpp"

namespace gridfire::surrogate {

enum class ModelKind { Ensemble, Mlr, Lasso };

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "ensemble") return ModelKind::Ensemble;
  if (s == "mlr") return ModelKind::Mlr;
  if (s == "lasso") return ModelKind::Lasso;
  throw InvalidArgument("unknown model kind '" + s + "' (expected ensemble, mlr or lasso)");
}

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Ensemble: return "ensemble";
    case ModelKind::Mlr: return "mlr";
    case ModelKind::Lasso: return "lasso";
  }
  return "?";
}

struct TrainConfig {
  ModelKind kind = ModelKind::Ensemble;
  EnsembleParams ensemble;
  double lasso_penalty = 1e-4;
  dataset::SplitSpec split;   // split.seed fixes the partition
  std::uint64_t seed = 0;     // model seed
  bool cross_validate = false;
};

// Scores a model on rows given in field units.
inline Metrics evaluate(const SurrogateModel& model, const dataset::Dataset& rows) {
  if (rows.normalized) throw InvalidArgument("evaluate expects rows in field units");
  std::vector<double> truth, pred;
  truth.reserve(rows.size());
  pred.reserve(rows.size());
  for (const auto& r : rows.rows) {
    truth.push_back(r.score);
    pred.push_back(model.predict_field_units(r.features));
  }
  return compute_metrics(truth, pred);
}

inline SurrogateModel fit(const dataset::Dataset& normalized_train, ModelKind kind, const TrainConfig& cfg) {
  const TrainingSet data = TrainingSet::from(normalized_train);
  SurrogateModel m;
  m.stats = normalized_train.stats;
  switch (kind) {
    case ModelKind::Ensemble: m.body = train_ensemble(data, cfg.ensemble, cfg.seed); break;
    case ModelKind::Mlr: m.body = train_linear(data, 0.0); break;
    case ModelKind::Lasso: m.body = train_linear(data, cfg.lasso_penalty); break;
  }
  return m;
}

struct TrainReport {
  SurrogateModel model;
  Metrics test;
  std::vector<Metrics> folds;  // filled when cross-validating
  std::optional<ImportanceReport> importance;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
};

// Normalizes over the whole corpus, holds out the test fraction, optionally
// cross-validates on the remainder, then fits on all training rows.
inline TrainReport train_surrogate(const dataset::Dataset& raw, const TrainConfig& cfg) {
  const dataset::Dataset norm = dataset::normalize(raw);
  const dataset::Split sp = dataset::split(norm, cfg.split);
  TrainReport rep;
  rep.train_rows = sp.train.size();
  rep.test_rows = sp.test.size();
  if (cfg.cross_validate) {
    for (const auto& fold : dataset::kfold(sp, cfg.split)) {
      const SurrogateModel m = fit(norm.subset(fold.train), cfg.kind, cfg);
      rep.folds.push_back(evaluate(m, dataset::denormalize(norm.subset(fold.validation))));
    }
  }
  rep.model = fit(norm.subset(sp.train), cfg.kind, cfg);
  rep.test = evaluate(rep.model, dataset::denormalize(norm.subset(sp.test)));
  if (const auto* ens = std::get_if<Ensemble>(&rep.model.body)) rep.importance = mdi_importance(*ens);
  return rep;
}

inline nlohmann::json to_json(const Metrics& m) {
  nlohmann::json j;
  j["samples"] = m.samples;
  j["mae"] = m.mae;
  j["rmse"] = m.rmse;
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  j["relative_mae"] = opt(m.relative_mae);
  j["relative_rmse_mean"] = opt(m.relative_rmse_mean);
  j["relative_rmse_maxmin"] = opt(m.relative_rmse_maxmin);
  return j;
}

inline nlohmann::json to_json(const ImportanceReport& r) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t f = 0; f < kFeatureCount; ++f) j[dataset::kFeatureNames[f]] = r.share[f];
  return j;
}

inline nlohmann::json to_json(const TrainReport& rep) {
  nlohmann::json j;
  j["model"] = rep.model.kind();
  j["train_rows"] = rep.train_rows;
  j["test_rows"] = rep.test_rows;
  j["test"] = to_json(rep.test);
  j["folds"] = nlohmann::json::array();
  for (const auto& f : rep.folds) j["folds"].push_back(to_json(f));
  if (rep.importance) j["importance"] = to_json(*rep.importance);
  return j;
}

}  // namespace gridfire::surrogate
