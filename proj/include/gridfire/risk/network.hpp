#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "gridfire/core/parallel.hpp"
#include "gridfire/core/text.hpp"
#include "gridfire/grid/case.hpp"
#include "gridfire/risk/clash.hpp"
#include "gridfire/surrogate/model.hpp"

namespace gridfire::risk {

// psi[l][t] for every line of a case over its horizon.
struct RiskMatrix {
  std::vector<std::string> line_ids;
  std::size_t hours = 0;
  std::vector<double> values;  // row-major by line

  std::size_t lines() const { return line_ids.size(); }
  double at(std::size_t l, std::size_t t) const { return values[l * hours + t]; }
  double& at(std::size_t l, std::size_t t) { return values[l * hours + t]; }
  double total() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  friend bool operator==(const RiskMatrix&, const RiskMatrix&) = default;
};

inline RiskMatrix zero_risk(const grid::NetworkCase& c) {
  RiskMatrix m;
  for (const auto& l : c.lines) m.line_ids.push_back(l.id);
  m.hours = c.horizon();
  m.values.assign(m.line_ids.size() * m.hours, 0.0);
  return m;
}

// Wind bearing relative to the conductor axis, in [0, 360).
inline double relative_direction(double wind_deg, double azimuth_deg) {
  double d = std::fmod(wind_deg - azimuth_deg, 360.0);
  if (d < 0) d += 360.0;
  return d >= 360.0 ? 0.0 : d;
}

inline ScoreRequest request_for(const grid::Line& line, const grid::WeatherHour& w) {
  return {line.span, line.diameter, w.speed, w.gust, line.clearance, relative_direction(w.direction_deg, line.azimuth_deg)};
}

inline dataset::Features field_features(const ScoreRequest& r) {
  return {units::meters_to_feet(r.span), units::meters_to_mm(r.diameter), r.wind_speed,
          r.wind_gust,                   units::meters_to_feet(r.phase_clearance), r.direction_deg};
}

// Where scores come from: the trained surrogate when `model` is set,
// otherwise the simulator.
struct RiskSource {
  std::shared_ptr<const surrogate::SurrogateModel> model;
  SimConfig sim;
  std::size_t threads = 1;

  double score(const ScoreRequest& r) const {
    if (model) {
      validate(r);
      return model->predict_field_units(field_features(r));
    }
    return score_line(r, sim).value;
  }

  std::string fingerprint() const {
    if (model) {
      const auto bytes = surrogate::serialize(*model);
      return "model:" + text::hex64(text::fnv1a(std::string_view(bytes.data(), bytes.size())));
    }
    std::string s = "sim";
    const auto& c = sim.conductor;
    for (double v : {sim.integration.step, sim.integration.horizon, sim.integration.divergence_guard, c.effective_density,
                     c.effective_modulus, c.reference_tension, c.reference_span, c.tension_exponent, c.damping_ratio,
                     c.shape_factor, sim.gust_length, sim.air_density, sim.in_plane_coupling})
      s += ":" + text::shortest(v);
    s += ":" + std::to_string(sim.segments) + ":" + std::to_string(static_cast<int>(sim.threshold_rule)) + ":" +
         std::to_string(static_cast<int>(c.adjacency));
    return s;
  }
};

// Scores every (line, hour) pair. Unbound lines are all reported together.
inline RiskMatrix score_network(const grid::NetworkCase& c, const RiskSource& source) {
  const std::size_t H = c.horizon();
  std::string missing;
  for (const auto& l : c.lines) {
    auto it = c.weather.find(l.station);
    if (it == c.weather.end() || it->second.size() < H) missing += (missing.empty() ? "" : ", ") + l.id;
  }
  if (!missing.empty()) throw MissingWeather("no weather covering the horizon for line(s): " + missing);
  RiskMatrix m = zero_risk(c);
  parallel_for(c.lines.size() * H, source.threads, [&](std::size_t k) {
    const std::size_t l = k / H, t = k % H;
    const auto& line = c.lines[l];
    try {
      m.values[k] = source.score(request_for(line, c.weather.at(line.station)[t]));
    } catch (const ScoreUnavailable& e) {
      throw ScoreUnavailable("line '" + line.id + "' hour " + std::to_string(t) + ": " + e.what());
    }
  });
  return m;
}

// Memoizes score_network by (case hash, weather hash, source fingerprint).
class RiskCache {
 public:
  RiskMatrix get(const grid::NetworkCase& c, const RiskSource& source) {
    const std::string key = text::hex64(grid::case_hash(c)) + "/" + text::hex64(grid::weather_hash(c)) + "/" +
                            source.fingerprint();
    {
      std::lock_guard lock(mu_);
      if (auto it = entries_.find(key); it != entries_.end()) {
        ++hits_;
        return it->second;
      }
    }
    RiskMatrix m = score_network(c, source);
    std::lock_guard lock(mu_);
    return entries_.emplace(key, std::move(m)).first->second;
  }
  std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }
  std::size_t hits() const {
    std::lock_guard lock(mu_);
    return hits_;
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, RiskMatrix> entries_;
  std::size_t hits_ = 0;
};

inline RiskMatrix bind_risk(const grid::NetworkCase& c, const RiskSource& source, RiskCache* cache = nullptr) {
  return cache ? cache->get(c, source) : score_network(c, source);
}

inline void write_risk_csv(const RiskMatrix& m, std::ostream& out) {
  out << "line_id,hour,score\n";
  for (std::size_t l = 0; l < m.lines(); ++l)
    for (std::size_t t = 0; t < m.hours; ++t) out << m.line_ids[l] << ',' << t << ',' << text::fixed(m.at(l, t), 6) << '\n';
}

inline void save_risk_csv(const RiskMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_risk_csv(m, out);
}

// Reads a line_id,hour,score file back against the case's line order.
inline RiskMatrix read_risk_csv(const grid::NetworkCase& c, std::istream& in) {
  RiskMatrix m = zero_risk(c);
  std::vector<std::uint8_t> seen(m.values.size(), 0);
  std::map<std::string, std::size_t> index;
  for (std::size_t l = 0; l < m.lines(); ++l) index[m.line_ids[l]] = l;
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || text::trim(line) != "line_id,hour,score") throw ParseError("expected header line_id,hour,score", 1);
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto f = text::split(text::trim(line), ',');
    if (f.size() != 3) throw ParseError("expected 3 fields", lineno);
    auto it = index.find(std::string(text::trim(f[0])));
    if (it == index.end()) throw ParseError("unknown line '" + std::string(f[0]) + "'", lineno);
    const double hour = text::parse_double(f[1], lineno);
    if (hour < 0 || hour != std::floor(hour) || hour >= static_cast<double>(m.hours))
      throw ParseError("hour outside the horizon", lineno);
    const double v = text::parse_double(f[2], lineno);
    if (!(v >= 0 && v <= 1)) throw ParseError("score outside [0, 1]", lineno);
    const std::size_t k = it->second * m.hours + static_cast<std::size_t>(hour);
    m.values[k] = v;
    seen[k] = 1;
  }
  for (std::size_t k = 0; k < seen.size(); ++k)
    if (!seen[k]) throw MissingWeather("risk file lacks line '" + m.line_ids[k / m.hours] + "' hour " + std::to_string(k % m.hours));
  return m;
}

inline RiskMatrix load_risk_csv(const grid::NetworkCase& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_risk_csv(c, in);
}

}  // namespace gridfire::risk
