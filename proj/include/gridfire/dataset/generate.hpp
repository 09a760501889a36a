#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "gridfire/core/error.hpp"
#include "gridfire/core/parallel.hpp"
#include "gridfire/dataset/dataset.hpp"
#include "gridfire/risk/clash.hpp"

namespace gridfire::dataset {

// Cartesian sweep of the six features, in field units.
struct FeatureGrid {
  std::array<std::vector<double>, kFeatureCount> axes;

  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.size();
    return n;
  }

  // Odometer decoding: the last axis turns fastest.
  Features point(std::size_t index) const {
    Features x{};
    for (std::size_t j = kFeatureCount; j-- > 0;) {
      x[j] = axes[j][index % axes[j].size()];
      index /= axes[j].size();
    }
    return x;
  }
};

inline void validate(const FeatureGrid& g) {
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    const auto& a = g.axes[j];
    if (a.empty()) throw InvalidArgument(std::string("grid axis '") + kFeatureNames[j] + "' is empty");
    for (std::size_t i = 1; i < a.size(); ++i) {
      if (!(a[i] > a[i - 1]))
        throw InvalidArgument(std::string("grid axis '") + kFeatureNames[j] + "' must be strictly increasing");
    }
  }
}

// n points from lo to hi, rounded to `decimals` so they print as typed.
inline std::vector<double> linspace(double lo, double hi, std::size_t n, int decimals) {
  std::vector<double> v(n);
  const double scale = std::pow(10.0, decimals);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    v[i] = std::round(x * scale) / scale;
  }
  return v;
}

// 11 x 10 x 11 x 10 x 6 x 6 = 435,600 points.
inline FeatureGrid default_grid() {
  FeatureGrid g;
  g.axes[Span] = {300, 350, 400, 450, 500, 550, 600, 700, 800, 900, 1000};
  g.axes[Diameter] = linspace(31.05, 34.02, 10, 2);
  g.axes[WindSpeed] = linspace(10, 30, 11, 0);
  g.axes[WindGust] = linspace(12, 30, 10, 0);
  g.axes[Clearance] = {0.5, 0.7, 0.9, 1.1, 1.3, 1.5};
  g.axes[Direction] = {0, 45, 90, 180, 270, 315};
  return g;
}

inline risk::ScoreRequest request_for(const Features& x) {
  return risk::ScoreRequest::from_field_units(x[Span], x[Diameter], x[WindSpeed], x[WindGust], x[Clearance],
                                              x[Direction]);
}

inline std::string describe(const Features& x) {
  std::string s;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    if (j) s += ", ";
    s += std::string(kFeatureNames[j]) + "=" + text::shortest(x[j]);
  }
  return s;
}

struct GenerateOptions {
  risk::SimConfig sim;
  std::size_t threads = default_threads();
};

// Scores every grid point. The trajectory of a span does not depend on its
// phase clearance, and mirror-image wind directions load it identically, so
// each distinct (span, diameter, wind, gust, |sin|, |cos|) response is
// integrated once and shared.
inline Dataset generate(const FeatureGrid& grid, const GenerateOptions& opt = {}) {
  validate(grid);
  const std::size_t n = grid.size();

  using Key = std::array<double, 6>;
  std::map<Key, std::size_t> key_index;
  std::vector<std::size_t> first_point;
  std::vector<std::size_t> point_key(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Features x = grid.point(i);
    const auto [s, c] = cable::direction_factors(x[Direction]);
    const Key key{x[Span], x[Diameter], x[WindSpeed], x[WindGust], s, c};
    auto [it, inserted] = key_index.emplace(key, first_point.size());
    if (inserted) first_point.push_back(i);
    point_key[i] = it->second;
  }

  std::vector<risk::PeakResponse> peaks(first_point.size());
  const cable::SagExtensibleProvider provider;
  parallel_for(first_point.size(), opt.threads, [&](std::size_t k) {
    const Features x = grid.point(first_point[k]);
    const risk::ScoreRequest req = request_for(x);
    try {
      risk::validate(req);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("grid point (" + describe(x) + "): " + e.what());
    }
    try {
      peaks[k] = risk::peak_response(risk::conductor_for(req, opt.sim.conductor), risk::wind_for(req, opt.sim),
                                     opt.sim.integration, provider);
    } catch (const DivergenceError& e) {
      throw ScoreUnavailable("grid point (" + describe(x) + "): " + e.what());
    }
  });

  Dataset ds;
  ds.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Features x = grid.point(i);
    const risk::ScoreRequest req = request_for(x);
    const cable::ConductorSpec spec = risk::conductor_for(req, opt.sim.conductor);
    ds.rows[i] = {x, risk::score_from_peak(spec, peaks[point_key[i]], opt.sim.segments, opt.sim.threshold_rule).value};
  }
  return ds;
}

}  // namespace gridfire::dataset
