#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "gridfire/core/error.hpp"
#include "gridfire/core/text.hpp"
#include "gridfire/core/units.hpp"

namespace gridfire::grid {

using json = nlohmann::json;

struct Bus {
  std::string id;
  std::vector<double> demand;  // MW per hour
  std::string region;
};

struct CostSegment {
  double capacity = 0.0;  // MW
  double cost = 0.0;      // $/MWh
};

struct Generator {
  std::string id;
  std::string bus;
  double p_min = 0.0;  // MW
  double p_max = 0.0;  // MW
  std::vector<CostSegment> segments;
};

struct Line {
  std::string id;
  std::string from;
  std::string to;
  double reactance = 0.0;    // p.u. on the case base
  double capacity = 0.0;     // MW
  double span = 0.0;         // m
  double diameter = 0.0;     // m
  double clearance = 0.0;    // m
  double azimuth_deg = 0.0;  // compass bearing of the conductor axis
  std::string station;
  double risk_cost = 0.0;    // $ per unit clash score per hour
  std::string region;
};

struct WeatherHour {
  double speed = 0.0;          // m/s
  double gust = 0.0;           // m/s
  double direction_deg = 0.0;  // compass bearing the wind blows from
};

using WeatherMap = std::map<std::string, std::vector<WeatherHour>>;

struct PlanConfig {
  double shed_penalty = 1000.0;  // $/MWh of unserved demand
  double alpha = 0.0;            // served fraction floor per bus
  std::size_t horizon = 24;
  std::string reference_bus;     // first bus when empty
  double base_mva = 100.0;
  std::vector<std::string> high_risk_regions;
  double psps_gust_threshold = 22.8;  // m/s
};

struct NetworkCase {
  std::string name;
  std::vector<Bus> buses;
  std::vector<Generator> generators;
  std::vector<Line> lines;
  WeatherMap weather;
  PlanConfig config;

  std::size_t bus_index(const std::string& id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
      if (buses[i].id == id) return i;
    throw InvalidArgument("unknown bus '" + id + "'");
  }
  std::size_t reference_index() const {
    return config.reference_bus.empty() ? 0 : bus_index(config.reference_bus);
  }
  std::size_t horizon() const { return config.horizon; }
  double total_demand(std::size_t hour) const {
    double d = 0.0;
    for (const auto& b : buses) d += b.demand[hour];
    return d;
  }
  bool high_risk(const Line& l) const {
    const auto& r = config.high_risk_regions;
    return std::find(r.begin(), r.end(), l.region) != r.end();
  }
};

namespace detail {

inline std::string child(const std::string& ptr, const std::string& key) {
  std::string escaped;
  for (char c : key) {
    if (c == '~') escaped += "~0";
    else if (c == '/') escaped += "~1";
    else escaped += c;
  }
  return ptr + "/" + escaped;
}
inline std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

inline const json& object_at(const json& v, const std::string& ptr) {
  if (!v.is_object()) throw SchemaError(ptr, "expected an object");
  return v;
}
inline const json& array_at(const json& v, const std::string& ptr) {
  if (!v.is_array()) throw SchemaError(ptr, "expected an array");
  return v;
}
inline const json& require(const json& obj, const std::string& ptr, const std::string& key) {
  object_at(obj, ptr);
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(child(ptr, key), "missing required field");
  return *it;
}
inline double number(const json& v, const std::string& ptr) {
  if (!v.is_number()) throw SchemaError(ptr, "expected a number");
  return v.get<double>();
}
inline std::string identifier(const json& v, const std::string& ptr) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw SchemaError(ptr, "expected a string or integer id");
}
inline double number_or(const json& obj, const std::string& ptr, const std::string& key, double fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : number(*it, child(ptr, key));
}
inline std::string string_or(const json& obj, const std::string& ptr, const std::string& key,
                             std::string fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) throw SchemaError(child(ptr, key), "expected a string");
  return it->get<std::string>();
}

inline WeatherHour parse_weather_hour(const json& v, const std::string& ptr) {
  object_at(v, ptr);
  return {number(require(v, ptr, "speed_mps"), child(ptr, "speed_mps")),
          number(require(v, ptr, "gust_mps"), child(ptr, "gust_mps")),
          number_or(v, ptr, "direction_deg", 90.0)};
}

}  // namespace detail

// Parses a case document. Structural problems throw SchemaError at the first
// offending JSON pointer; semantic checks run afterwards via validate().
inline NetworkCase parse_case(const json& doc) {
  using namespace detail;
  NetworkCase c;
  object_at(doc, "");
  c.name = string_or(doc, "", "name", "");

  if (auto it = doc.find("config"); it != doc.end()) {
    const std::string p = "/config";
    object_at(*it, p);
    c.config.shed_penalty = number_or(*it, p, "shed_penalty_per_mwh", c.config.shed_penalty);
    c.config.alpha = number_or(*it, p, "alpha", c.config.alpha);
    const double horizon = number_or(*it, p, "horizon_hours", 24.0);
    if (horizon < 1 || horizon != std::floor(horizon) || horizon > 1e6)
      throw SchemaError(child(p, "horizon_hours"), "expected a positive integer");
    c.config.horizon = static_cast<std::size_t>(horizon);
    if (auto r = it->find("reference_bus"); r != it->end())
      c.config.reference_bus = identifier(*r, child(p, "reference_bus"));
    c.config.base_mva = number_or(*it, p, "base_mva", c.config.base_mva);
    c.config.psps_gust_threshold = number_or(*it, p, "psps_gust_threshold_mps", c.config.psps_gust_threshold);
    if (auto r = it->find("high_risk_regions"); r != it->end()) {
      const std::string rp = child(p, "high_risk_regions");
      array_at(*r, rp);
      for (std::size_t i = 0; i < r->size(); ++i) c.config.high_risk_regions.push_back(identifier((*r)[i], child(rp, i)));
    }
  }

  const json& buses = require(doc, "", "buses");
  array_at(buses, "/buses");
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const std::string p = child("/buses", i);
    const json& b = object_at(buses[i], p);
    Bus bus;
    bus.id = identifier(require(b, p, "id"), child(p, "id"));
    bus.region = string_or(b, p, "region", "");
    const json& d = require(b, p, "demand_mw");
    if (d.is_number()) {
      bus.demand.assign(c.config.horizon, d.get<double>());
    } else {
      array_at(d, child(p, "demand_mw"));
      for (std::size_t t = 0; t < d.size(); ++t) bus.demand.push_back(number(d[t], child(child(p, "demand_mw"), t)));
    }
    c.buses.push_back(std::move(bus));
  }

  const json& gens = require(doc, "", "generators");
  array_at(gens, "/generators");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string p = child("/generators", i);
    const json& g = object_at(gens[i], p);
    Generator gen;
    gen.id = identifier(require(g, p, "id"), child(p, "id"));
    gen.bus = identifier(require(g, p, "bus"), child(p, "bus"));
    gen.p_min = number_or(g, p, "p_min_mw", 0.0);
    gen.p_max = number(require(g, p, "p_max_mw"), child(p, "p_max_mw"));
    const std::string sp = child(p, "segments");
    const json& segs = array_at(require(g, p, "segments"), sp);
    for (std::size_t s = 0; s < segs.size(); ++s) {
      const std::string q = child(sp, s);
      object_at(segs[s], q);
      gen.segments.push_back({number(require(segs[s], q, "capacity_mw"), child(q, "capacity_mw")),
                              number(require(segs[s], q, "cost_per_mwh"), child(q, "cost_per_mwh"))});
    }
    c.generators.push_back(std::move(gen));
  }

  const json& lines = require(doc, "", "lines");
  array_at(lines, "/lines");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string p = child("/lines", i);
    const json& l = object_at(lines[i], p);
    Line line;
    line.id = identifier(require(l, p, "id"), child(p, "id"));
    line.from = identifier(require(l, p, "from"), child(p, "from"));
    line.to = identifier(require(l, p, "to"), child(p, "to"));
    line.reactance = number(require(l, p, "reactance_pu"), child(p, "reactance_pu"));
    line.capacity = number(require(l, p, "capacity_mw"), child(p, "capacity_mw"));
    line.span = units::feet_to_meters(number(require(l, p, "span_ft"), child(p, "span_ft")));
    line.diameter = units::mm_to_meters(number(require(l, p, "diameter_mm"), child(p, "diameter_mm")));
    line.clearance = units::feet_to_meters(number(require(l, p, "clearance_ft"), child(p, "clearance_ft")));
    line.azimuth_deg = number_or(l, p, "azimuth_deg", 0.0);
    line.station = identifier(require(l, p, "station"), child(p, "station"));
    line.region = string_or(l, p, "region", "");
    if (l.contains("risk_cost")) {
      line.risk_cost = number(l["risk_cost"], child(p, "risk_cost"));
    } else if (l.contains("cost_per_acre") && l.contains("expected_burn_acres")) {
      line.risk_cost = number(l["cost_per_acre"], child(p, "cost_per_acre")) *
                       number(l["expected_burn_acres"], child(p, "expected_burn_acres"));
    } else {
      throw SchemaError(child(p, "risk_cost"), "missing risk_cost (or cost_per_acre with expected_burn_acres)");
    }
    c.lines.push_back(std::move(line));
  }

  if (auto it = doc.find("weather"); it != doc.end()) {
    object_at(*it, "/weather");
    for (const auto& [station, series] : it->items()) {
      const std::string p = child("/weather", station);
      array_at(series, p);
      auto& hours = c.weather[station];
      for (std::size_t t = 0; t < series.size(); ++t) hours.push_back(parse_weather_hour(series[t], child(p, t)));
    }
  }
  return c;
}

// Semantic checks; every violation is collected before throwing.
// `require_weather` demands a full-horizon series for every line's station.
inline std::vector<std::string> violations(const NetworkCase& c, bool require_weather) {
  std::vector<std::string> out;
  const auto& cfg = c.config;
  const std::size_t H = cfg.horizon;
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) out.push_back("config: alpha must lie in [0, 1]");
  if (!(cfg.shed_penalty >= 0.0)) out.push_back("config: shed penalty must be >= 0");
  if (!(cfg.base_mva > 0.0)) out.push_back("config: base_mva must be > 0");
  if (!(cfg.psps_gust_threshold >= 0.0)) out.push_back("config: PSPS gust threshold must be >= 0");
  if (c.buses.empty()) out.push_back("case has no buses");

  std::unordered_map<std::string, std::size_t> bus_ids;
  for (const auto& b : c.buses) {
    if (!bus_ids.emplace(b.id, 0).second) out.push_back("bus '" + b.id + "': duplicate id");
    if (b.demand.size() != H)
      out.push_back("bus '" + b.id + "': demand profile has " + std::to_string(b.demand.size()) +
                    " values, horizon is " + std::to_string(H));
    for (double d : b.demand)
      if (!(std::isfinite(d) && d >= 0)) {
        out.push_back("bus '" + b.id + "': demand must be finite and >= 0");
        break;
      }
  }
  if (!cfg.reference_bus.empty() && !bus_ids.contains(cfg.reference_bus))
    out.push_back("config: reference bus '" + cfg.reference_bus + "' does not exist");

  std::unordered_map<std::string, int> gen_ids;
  for (const auto& g : c.generators) {
    const std::string tag = "generator '" + g.id + "': ";
    if (!gen_ids.emplace(g.id, 0).second) out.push_back(tag + "duplicate id");
    if (!bus_ids.contains(g.bus)) out.push_back(tag + "bus '" + g.bus + "' does not exist");
    if (!(g.p_min >= 0 && g.p_min <= g.p_max && std::isfinite(g.p_max)))
      out.push_back(tag + "requires 0 <= p_min <= p_max");
    if (g.segments.empty()) out.push_back(tag + "needs at least one cost segment");
    double cap = 0.0;
    for (std::size_t s = 0; s < g.segments.size(); ++s) {
      const auto& seg = g.segments[s];
      if (!(seg.capacity > 0 && std::isfinite(seg.capacity))) out.push_back(tag + "segment capacity must be > 0");
      if (!std::isfinite(seg.cost)) out.push_back(tag + "segment cost must be finite");
      if (s > 0 && seg.cost < g.segments[s - 1].cost) out.push_back(tag + "segment costs must be non-decreasing");
      cap += seg.capacity;
    }
    if (cap < g.p_max) out.push_back(tag + "segment capacities sum below p_max");
  }

  std::unordered_map<std::string, int> line_ids;
  for (const auto& l : c.lines) {
    const std::string tag = "line '" + l.id + "': ";
    if (!line_ids.emplace(l.id, 0).second) out.push_back(tag + "duplicate id");
    if (!bus_ids.contains(l.from)) out.push_back(tag + "from-bus '" + l.from + "' does not exist");
    if (!bus_ids.contains(l.to)) out.push_back(tag + "to-bus '" + l.to + "' does not exist");
    if (l.from == l.to) out.push_back(tag + "connects a bus to itself");
    if (!(l.reactance > 0 && std::isfinite(l.reactance))) out.push_back(tag + "reactance must be > 0");
    if (!(l.capacity > 0 && std::isfinite(l.capacity))) out.push_back(tag + "capacity must be > 0");
    if (!(l.span > 0 && l.diameter > 0 && l.clearance > 0)) out.push_back(tag + "structural fields must be > 0");
    if (!(l.azimuth_deg >= 0 && l.azimuth_deg < 360)) out.push_back(tag + "azimuth must lie in [0, 360)");
    if (!(l.risk_cost >= 0 && std::isfinite(l.risk_cost))) out.push_back(tag + "risk cost must be >= 0");
    if (require_weather) {
      auto it = c.weather.find(l.station);
      if (it == c.weather.end()) out.push_back(tag + "station '" + l.station + "' has no weather series");
      else if (it->second.size() < H) out.push_back(tag + "station '" + l.station + "' does not cover the horizon");
    }
  }
  for (const auto& [station, hours] : c.weather)
    for (const auto& w : hours)
      if (!(w.speed >= 0 && w.gust >= 0 && w.direction_deg >= 0 && w.direction_deg < 360 &&
            std::isfinite(w.speed) && std::isfinite(w.gust))) {
        out.push_back("station '" + station + "': speeds and gusts must be >= 0, direction in [0, 360)");
        break;
      }
  return out;
}

inline void validate(const NetworkCase& c, bool require_weather = true) {
  auto v = violations(c, require_weather);
  if (!v.empty()) throw ValidationError(std::move(v));
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path + "' is not valid JSON: " + e.what());
  }
}

// Loads and validates a case file. Without a "weather" section the weather
// binding check is deferred until a series is attached.
inline NetworkCase load_case(const std::string& path) {
  const json doc = read_json_file(path);
  NetworkCase c = parse_case(doc);
  validate(c, doc.contains("weather"));
  return c;
}

// Weather CSV: station_id,hour,speed_mps,gust_mps,direction_deg with hours
// 0-based and contiguous per station.
inline WeatherMap read_weather_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty weather file", 1);
  ++lineno;
  if (text::trim(line) != "station_id,hour,speed_mps,gust_mps,direction_deg")
    throw ParseError("unexpected weather header '" + std::string(text::trim(line)) + "'", lineno);
  std::map<std::string, std::map<std::size_t, WeatherHour>> staged;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto f = text::split(text::trim(line), ',');
    if (f.size() != 5) throw ParseError("expected 5 fields, got " + std::to_string(f.size()), lineno);
    const double hour = text::parse_double(f[1], lineno);
    if (hour < 0 || hour != std::floor(hour)) throw ParseError("hour must be a non-negative integer", lineno);
    const WeatherHour w{text::parse_double(f[2], lineno), text::parse_double(f[3], lineno),
                        text::parse_double(f[4], lineno)};
    if (!(w.speed >= 0 && w.gust >= 0 && w.direction_deg >= 0 && w.direction_deg < 360))
      throw ParseError("speed/gust must be >= 0 and direction in [0, 360)", lineno);
    const std::string station(text::trim(f[0]));
    if (!staged[station].emplace(static_cast<std::size_t>(hour), w).second)
      throw ParseError("duplicate hour for station '" + station + "'", lineno);
  }
  WeatherMap out;
  for (auto& [station, hours] : staged) {
    auto& series = out[station];
    for (auto& [h, w] : hours) {
      if (h != series.size()) throw ParseError("station '" + station + "' is missing hour " + std::to_string(series.size()));
      series.push_back(w);
    }
  }
  return out;
}

inline WeatherMap load_weather_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_weather_csv(in);
}

inline void attach_weather(NetworkCase& c, WeatherMap weather) {
  for (auto& [station, series] : weather) c.weather[station] = std::move(series);
  validate(c, true);
}

// Canonical JSON form. Map-like sections are key-sorted, so the dump (and
// any hash of it) does not depend on the order they were written in.
inline json to_json(const NetworkCase& c, bool include_weather = true) {
  json doc;
  doc["name"] = c.name;
  json cfg;
  cfg["shed_penalty_per_mwh"] = c.config.shed_penalty;
  cfg["alpha"] = c.config.alpha;
  cfg["horizon_hours"] = c.config.horizon;
  cfg["reference_bus"] = c.config.reference_bus;
  cfg["base_mva"] = c.config.base_mva;
  auto regions = c.config.high_risk_regions;
  std::sort(regions.begin(), regions.end());
  cfg["high_risk_regions"] = regions;
  cfg["psps_gust_threshold_mps"] = c.config.psps_gust_threshold;
  doc["config"] = cfg;
  doc["buses"] = json::array();
  for (const auto& b : c.buses) doc["buses"].push_back({{"id", b.id}, {"region", b.region}, {"demand_mw", b.demand}});
  doc["generators"] = json::array();
  for (const auto& g : c.generators) {
    json segs = json::array();
    for (const auto& s : g.segments) segs.push_back({{"capacity_mw", s.capacity}, {"cost_per_mwh", s.cost}});
    doc["generators"].push_back(
        {{"id", g.id}, {"bus", g.bus}, {"p_min_mw", g.p_min}, {"p_max_mw", g.p_max}, {"segments", segs}});
  }
  doc["lines"] = json::array();
  for (const auto& l : c.lines)
    doc["lines"].push_back({{"id", l.id},
                            {"from", l.from},
                            {"to", l.to},
                            {"reactance_pu", l.reactance},
                            {"capacity_mw", l.capacity},
                            {"span_ft", units::meters_to_feet(l.span)},
                            {"diameter_mm", units::meters_to_mm(l.diameter)},
                            {"clearance_ft", units::meters_to_feet(l.clearance)},
                            {"azimuth_deg", l.azimuth_deg},
                            {"station", l.station},
                            {"risk_cost", l.risk_cost},
                            {"region", l.region}});
  if (include_weather) {
    json w = json::object();
    for (const auto& [station, hours] : c.weather) {
      json series = json::array();
      for (const auto& h : hours)
        series.push_back({{"speed_mps", h.speed}, {"gust_mps", h.gust}, {"direction_deg", h.direction_deg}});
      w[station] = series;
    }
    doc["weather"] = w;
  }
  return doc;
}

inline std::uint64_t case_hash(const NetworkCase& c) { return text::fnv1a(to_json(c, false).dump()); }

inline std::uint64_t weather_hash(const NetworkCase& c) {
  std::uint64_t h = text::fnv1a("weather");
  for (const auto& [station, hours] : c.weather) {
    h = text::fnv1a(station, h);
    for (const auto& w : hours)
      for (double v : {w.speed, w.gust, w.direction_deg}) h = text::fnv1a(text::shortest(v), text::fnv1a(",", h));
    h = text::fnv1a(";", h);
  }
  return h;
}

struct ConnectivityReport {
  std::vector<std::vector<std::string>> components;  // bus ids; the reference bus's component first
  std::vector<std::string> islanded_buses;           // outside the reference component
  std::vector<std::string> islanded_generators;
  bool connected() const { return components.size() <= 1; }
};

inline ConnectivityReport validate_connectivity(const NetworkCase& c) {
  const std::size_t n = c.buses.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& l : c.lines) {
    const std::size_t a = find(c.bus_index(l.from)), b = find(c.bus_index(l.to));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  ConnectivityReport report;
  if (n == 0) return report;
  const std::size_t ref_root = find(c.reference_index());
  std::map<std::size_t, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(c.buses[i].id);
  report.components.push_back(groups[ref_root]);
  for (auto& [root, ids] : groups) {
    if (root == ref_root) continue;
    report.components.push_back(ids);
    report.islanded_buses.insert(report.islanded_buses.end(), ids.begin(), ids.end());
  }
  for (const auto& g : c.generators)
    if (find(c.bus_index(g.bus)) != ref_root) report.islanded_generators.push_back(g.id);
  return report;
}

// mask[l][t] = 1 when line l stays energized in hour t. A line is off all
// horizon when its station's peak gust exceeds the threshold.
using LineMask = std::vector<std::vector<std::uint8_t>>;

inline LineMask naive_psps_mask(const NetworkCase& c, double gust_threshold) {
  const std::size_t H = c.horizon();
  LineMask mask(c.lines.size(), std::vector<std::uint8_t>(H, 1));
  for (std::size_t l = 0; l < c.lines.size(); ++l) {
    auto it = c.weather.find(c.lines[l].station);
    if (it == c.weather.end() || it->second.size() < H)
      throw MissingWeather("line '" + c.lines[l].id + "' has no weather covering the horizon");
    double peak = 0.0;
    for (std::size_t t = 0; t < H; ++t) peak = std::max(peak, it->second[t].gust);
    if (peak > gust_threshold) std::fill(mask[l].begin(), mask[l].end(), std::uint8_t{0});
  }
  return mask;
}

}  // namespace gridfire::grid
