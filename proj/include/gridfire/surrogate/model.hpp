#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gridfire/core/error.hpp"
#include "gridfire/core/text.hpp"
#include "gridfire/dataset/dataset.hpp"
#include "gridfire/surrogate/ensemble.hpp"
#include "gridfire/surrogate/linear.hpp"

namespace gridfire::surrogate {

// A fitted regressor together with the feature scaling it was trained under.
struct SurrogateModel {
  std::variant<Ensemble, LinearModel> body;
  dataset::NormalizationStats stats;

  const char* kind() const { return std::holds_alternative<Ensemble>(body) ? "ensemble" : "linear"; }

  // Expects features already scaled with `stats`; clamped to [0, 1].
  double predict(const Features& normalized) const {
    return std::visit([&](const auto& m) { return m.predict(normalized); }, body);
  }

  // Accepts features in field units (ft, mm, m/s, m/s, ft, deg).
  double predict_field_units(const Features& raw) const { return predict(stats.apply(raw)); }
};

inline double predict(const SurrogateModel& model, std::span<const double> normalized) {
  if (normalized.size() != kFeatureCount)
    throw InvalidArgument("expected " + std::to_string(kFeatureCount) + " features, got " +
                          std::to_string(normalized.size()));
  Features x;
  std::copy(normalized.begin(), normalized.end(), x.begin());
  return model.predict(x);
}

inline constexpr std::uint32_t kModelFormatVersion = 1;
inline constexpr char kModelMagic[8] = {'G', 'R', 'I', 'D', 'F', 'I', 'R', 'E'};

namespace detail {

static_assert(std::endian::native == std::endian::little, "model files are little-endian");

class ByteWriter {
 public:
  template <class T>
  void put(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  ByteReader(const char* data, std::size_t size) : data_(data), size_(size) {}
  template <class T>
  T get() {
    if (pos_ + sizeof(T) > size_) throw ModelFormatError("model file is truncated");
    T v;
    std::memcpy(&v, data_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  bool done() const { return pos_ == size_; }

 private:
  const char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Layout: magic, version, kind, normalisation stats, payload, FNV-1a checksum
// of everything before it.
inline std::vector<char> serialize(const SurrogateModel& model) {
  detail::ByteWriter w;
  w.raw(kModelMagic, sizeof kModelMagic);
  w.put(kModelFormatVersion);
  w.put(static_cast<std::uint32_t>(model.body.index() + 1));
  for (double v : model.stats.min) w.put(v);
  for (double v : model.stats.max) w.put(v);
  if (const auto* ens = std::get_if<Ensemble>(&model.body)) {
    w.put(ens->bootstrap_seed);
    w.put(static_cast<std::uint64_t>(ens->params.n_trees));
    w.put(static_cast<std::uint64_t>(ens->params.tree.max_depth));
    w.put(ens->params.tree.min_samples_leaf);
    w.put(static_cast<std::uint64_t>(ens->params.tree.features_per_split));
    w.put(static_cast<std::uint8_t>(ens->params.bootstrap));
    w.put(static_cast<std::uint64_t>(ens->trees.size()));
    for (const auto& tree : ens->trees) {
      w.put(static_cast<std::uint64_t>(tree.nodes.size()));
      for (const auto& n : tree.nodes) {
        w.put(n.feature);
        w.put(n.threshold);
        w.put(n.left);
        w.put(n.right);
        w.put(n.value);
        w.put(n.weight);
        w.put(n.gain);
      }
    }
  } else {
    const auto& lin = std::get<LinearModel>(model.body);
    for (double v : lin.weights) w.put(v);
    w.put(lin.intercept);
    w.put(lin.l1_penalty);
  }
  const auto& b = w.bytes();
  const std::uint64_t sum = text::fnv1a(std::string_view(b.data(), b.size()));
  w.put(sum);
  return w.bytes();
}

inline SurrogateModel deserialize(const std::vector<char>& bytes) {
  if (bytes.size() < sizeof kModelMagic + 16 || std::memcmp(bytes.data(), kModelMagic, sizeof kModelMagic) != 0)
    throw ModelFormatError("not a gridfire model file");
  const std::size_t body = bytes.size() - sizeof(std::uint64_t);
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body, sizeof stored);
  detail::ByteReader r(bytes.data() + sizeof kModelMagic, body - sizeof kModelMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFormatVersion)
    throw ModelFormatError("unsupported model format version " + std::to_string(version) + " (expected " +
                           std::to_string(kModelFormatVersion) + ")");
  if (text::fnv1a(std::string_view(bytes.data(), body)) != stored)
    throw ModelFormatError("model file failed its integrity check");
  const auto kind = r.get<std::uint32_t>();
  SurrogateModel model;
  for (double& v : model.stats.min) v = r.get<double>();
  for (double& v : model.stats.max) v = r.get<double>();
  if (kind == 1) {
    Ensemble ens;
    ens.bootstrap_seed = r.get<std::uint64_t>();
    ens.params.n_trees = r.get<std::uint64_t>();
    ens.params.tree.max_depth = r.get<std::uint64_t>();
    ens.params.tree.min_samples_leaf = r.get<double>();
    ens.params.tree.features_per_split = r.get<std::uint64_t>();
    ens.params.bootstrap = r.get<std::uint8_t>() != 0;
    const auto n_trees = r.get<std::uint64_t>();
    ens.trees.resize(n_trees);
    for (auto& tree : ens.trees) {
      tree.nodes.resize(r.get<std::uint64_t>());
      for (auto& n : tree.nodes) {
        n.feature = r.get<std::int32_t>();
        n.threshold = r.get<double>();
        n.left = r.get<std::int32_t>();
        n.right = r.get<std::int32_t>();
        n.value = r.get<double>();
        n.weight = r.get<double>();
        n.gain = r.get<double>();
      }
      if (tree.nodes.empty()) throw ModelFormatError("model contains an empty tree");
      const auto count = static_cast<std::int32_t>(tree.nodes.size());
      for (const auto& n : tree.nodes) {
        if (n.feature != TreeNode::kLeaf &&
            (n.feature < 0 || n.feature >= static_cast<std::int32_t>(kFeatureCount) || n.left <= 0 ||
             n.right <= 0 || n.left >= count || n.right >= count))
          throw ModelFormatError("model contains a malformed tree");
      }
    }
    if (ens.trees.empty()) throw ModelFormatError("ensemble without trees");
    model.body = std::move(ens);
  } else if (kind == 2) {
    LinearModel lin;
    for (double& v : lin.weights) v = r.get<double>();
    lin.intercept = r.get<double>();
    lin.l1_penalty = r.get<double>();
    model.body = lin;
  } else {
    throw ModelFormatError("unknown model kind " + std::to_string(kind));
  }
  if (!r.done()) throw ModelFormatError("trailing bytes in model file");
  return model;
}

inline void save_model(const SurrogateModel& model, const std::string& path) {
  const auto bytes = serialize(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write to '" + path + "' failed");
}

inline SurrogateModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace gridfire::surrogate
