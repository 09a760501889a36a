#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gridfire/core/error.hpp"
#include "gridfire/core/rng.hpp"
#include "gridfire/core/text.hpp"

namespace gridfire::dataset {

inline constexpr std::size_t kFeatureCount = 6;
using Features = std::array<double, kFeatureCount>;

// Column order shared by grids, rows, CSV files and models.
enum Feature : std::size_t { Span = 0, Diameter, WindSpeed, WindGust, Clearance, Direction };

inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "span_ft", "diameter_mm", "wind_speed_mps", "wind_gust_mps", "clearance_ft", "direction_deg"};
inline constexpr std::array<const char*, kFeatureCount> kFeatureLabels = {
    "Span of line", "Conductor diameter", "Wind speed", "Wind gust", "Phase clearance", "Wind direction"};
inline constexpr const char* kCsvHeader =
    "span_ft,diameter_mm,wind_speed_mps,wind_gust_mps,clearance_ft,direction_deg,score";

struct Row {
  Features features{};  // field units: ft, mm, m/s, m/s, ft, deg
  double score = 0.0;
  friend bool operator==(const Row&, const Row&) = default;
};

struct NormalizationStats {
  Features min{};
  Features max{};
  friend bool operator==(const NormalizationStats&, const NormalizationStats&) = default;

  Features apply(const Features& x) const {
    Features out;
    for (std::size_t j = 0; j < kFeatureCount; ++j) out[j] = (x[j] - min[j]) / (max[j] - min[j]);
    return out;
  }
  Features invert(const Features& x) const {
    Features out;
    for (std::size_t j = 0; j < kFeatureCount; ++j) out[j] = min[j] + x[j] * (max[j] - min[j]);
    return out;
  }
};

struct Dataset {
  std::vector<Row> rows;
  bool normalized = false;
  NormalizationStats stats;  // meaningful once normalized

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }

  Dataset subset(const std::vector<std::size_t>& idx) const {
    Dataset d{{}, normalized, stats};
    d.rows.reserve(idx.size());
    for (std::size_t i : idx) d.rows.push_back(rows.at(i));
    return d;
  }
};

// Per-feature observed range of a dataset.
inline NormalizationStats feature_ranges(const Dataset& ds) {
  if (ds.empty()) throw InvalidArgument("feature ranges of an empty dataset");
  NormalizationStats s{ds.rows.front().features, ds.rows.front().features};
  for (const Row& r : ds.rows) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      s.min[j] = std::min(s.min[j], r.features[j]);
      s.max[j] = std::max(s.max[j], r.features[j]);
    }
  }
  return s;
}

// Min-max scales every feature to [0, 1]; scores are left untouched.
inline Dataset normalize(const Dataset& ds) {
  if (ds.normalized) throw InvalidArgument("dataset is already normalized");
  const NormalizationStats s = feature_ranges(ds);
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    if (!(s.max[j] > s.min[j]))
      throw DegenerateFeature(std::string("feature '") + kFeatureNames[j] + "' is constant");
  }
  Dataset out{{}, true, s};
  out.rows.reserve(ds.size());
  for (const Row& r : ds.rows) out.rows.push_back({s.apply(r.features), r.score});
  return out;
}

inline Dataset denormalize(const Dataset& ds) {
  if (!ds.normalized) throw InvalidArgument("dataset is not normalized");
  Dataset out;
  out.rows.reserve(ds.size());
  for (const Row& r : ds.rows) out.rows.push_back({ds.stats.invert(r.features), r.score});
  return out;
}

struct SplitSpec {
  double test_fraction = 0.2;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
};

inline void validate(const SplitSpec& s) {
  if (!(s.test_fraction > 0 && s.test_fraction < 1)) throw InvalidArgument("test fraction must lie in (0, 1)");
  if (s.folds < 2) throw InvalidArgument("fold count must be >= 2");
}

// Row indices of a seeded train/test partition.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

inline Split split(const Dataset& ds, const SplitSpec& spec) {
  validate(spec);
  std::vector<std::size_t> idx = iota_indices(ds.size());
  Rng rng(spec.seed);
  rng.shuffle(idx);
  const auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(ds.size())));
  Split s;
  s.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  return s;
}

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// K contiguous folds over the (already shuffled) training indices of `split`.
inline std::vector<Fold> kfold(const Split& s, const SplitSpec& spec) {
  validate(spec);
  const std::size_t n = s.train.size();
  if (n < spec.folds) throw InvalidArgument("fewer training rows than folds");
  std::vector<Fold> folds(spec.folds);
  std::size_t start = 0;
  for (std::size_t k = 0; k < spec.folds; ++k) {
    const std::size_t len = n / spec.folds + (k < n % spec.folds ? 1 : 0);
    for (std::size_t i = 0; i < n; ++i) {
      (i >= start && i < start + len ? folds[k].validation : folds[k].train).push_back(s.train[i]);
    }
    start += len;
  }
  return folds;
}

inline std::string format_row(const Row& r) {
  std::string line;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    line += text::shortest(r.features[j]);
    line += ',';
  }
  line += text::fixed(r.score, 6);
  return line;
}

inline void write_csv(const Dataset& ds, std::ostream& out) {
  if (ds.normalized) throw InvalidArgument("denormalize before saving");
  out << kCsvHeader << '\n';
  for (const Row& r : ds.rows) {
    if (!(r.score >= 0.0 && r.score <= 1.0)) throw InvalidArgument("score outside [0, 1] cannot be persisted");
    out << format_row(r) << '\n';
  }
}

inline void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_csv(ds, out);
  if (!out) throw Error("write to '" + path + "' failed");
}

inline Dataset read_csv(std::istream& in) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty dataset file", 1);
  ++line_no;
  if (text::trim(line) != kCsvHeader) throw ParseError("unexpected header", line_no);
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(text::trim(line), ',');
    if (fields.size() != kFeatureCount + 1)
      throw ParseError("expected " + std::to_string(kFeatureCount + 1) + " fields", line_no);
    Row r;
    for (std::size_t j = 0; j < kFeatureCount; ++j) r.features[j] = text::parse_double(fields[j], line_no);
    r.score = text::parse_double(fields[kFeatureCount], line_no);
    if (!(r.score >= 0.0 && r.score <= 1.0)) throw ParseError("score outside [0, 1]", line_no);
    ds.rows.push_back(r);
  }
  return ds;
}

inline Dataset load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_csv(in);
}

}  // namespace gridfire::dataset
