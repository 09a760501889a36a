#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gridfire/core/rng.hpp"
#include "gridfire/grid/case.hpp"
#include "gridfire/risk/network.hpp"
#include "gridfire/wrap/program.hpp"

namespace gridfire::fixtures {

inline std::string data_path(const std::string& name) { return std::string(GRIDFIRE_DATA_DIR) + "/" + name; }

// Generator bus "A" feeding a single load bus "B" over line "L" at `demand` MW
// every hour, with calm weather on the line's station.
inline grid::NetworkCase two_bus_case(double risk_cost, double gen_cost, double demand = 10.0,
                                      std::size_t hours = 1, double shed_penalty = 1000.0) {
  grid::NetworkCase c;
  c.name = "two-bus";
  c.config.horizon = hours;
  c.config.shed_penalty = shed_penalty;
  c.buses.push_back({"A", std::vector<double>(hours, 0.0), "r"});
  c.buses.push_back({"B", std::vector<double>(hours, demand), "r"});
  grid::Generator g;
  g.id = "G";
  g.bus = "A";
  g.p_max = 1000.0;
  g.segments = {{1000.0, gen_cost}};
  c.generators.push_back(g);
  grid::Line l;
  l.id = "L";
  l.from = "A";
  l.to = "B";
  l.reactance = 0.1;
  l.capacity = 100.0;
  l.span = 182.88;
  l.diameter = 0.03303;
  l.clearance = 0.1524;
  l.station = "s";
  l.risk_cost = risk_cost;
  l.region = "r";
  c.lines.push_back(l);
  c.weather["s"] = std::vector<grid::WeatherHour>(hours, grid::WeatherHour{0.0, 0.0, 90.0});
  return c;
}

inline risk::RiskMatrix constant_risk(const grid::NetworkCase& c, double value) {
  risk::RiskMatrix m = risk::zero_risk(c);
  for (double& v : m.values) v = value;
  return m;
}

// Small random mixed-binary program: up to 12 binaries and 2 bounded
// continuous columns, integer data, rows built around a random point so most
// instances are feasible.
inline wrap::MixedIntegerProgram random_milp(Rng& rng, std::size_t max_binaries = 12) {
  wrap::MixedIntegerProgram p;
  const std::size_t nb = 1 + rng.below(max_binaries);
  const std::size_t nc = rng.below(3);
  const std::size_t m = 1 + rng.below(6);
  auto integer = [&](int lo, int hi) { return static_cast<double>(lo + static_cast<int>(rng.below(hi - lo + 1))); };
  std::vector<double> ref;
  for (std::size_t j = 0; j < nb; ++j) {
    p.add_int_var(0.0, 1.0, integer(-10, 10));
    ref.push_back(static_cast<double>(rng.below(2)));
  }
  for (std::size_t j = 0; j < nc; ++j) {
    const double ub = integer(1, 10);
    p.add_var(0.0, ub, integer(-10, 10));
    ref.push_back(ub * rng.uniform());
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<std::pair<std::size_t, double>> terms;
    double lhs = 0.0;
    for (std::size_t j = 0; j < nb + nc; ++j) {
      if (rng.below(3) == 0) continue;
      const double a = integer(-5, 5);
      if (a == 0.0) continue;
      terms.push_back({j, a});
      lhs += a * ref[j];
    }
    const auto kind = rng.below(5);
    const wrap::Sense s = kind < 2 ? wrap::Sense::LessEqual : kind < 4 ? wrap::Sense::GreaterEqual : wrap::Sense::Equal;
    const double slack = integer(0, 3);
    double rhs = s == wrap::Sense::LessEqual ? std::ceil(lhs) + slack
                 : s == wrap::Sense::GreaterEqual ? std::floor(lhs) - slack
                                                  : lhs;
    if (s == wrap::Sense::Equal) rhs = std::round(rhs * 4.0) / 4.0;
    p.add_row(std::move(terms), s, rhs);
  }
  return p;
}

struct OracleResult {
  bool feasible = false;
  double objective = std::numeric_limits<double>::infinity();
};

// Exhaustive oracle: every binary assignment, with the continuous part (at most
// two bounded columns) solved by enumerating the vertices of its polygon.
inline OracleResult enumerate_milp(const wrap::MixedIntegerProgram& p) {
  std::vector<std::size_t> bins, conts;
  for (std::size_t j = 0; j < p.num_vars(); ++j) (p.is_integer(j) ? bins : conts).push_back(j);
  if (conts.size() > 2) throw InvalidArgument("oracle handles at most two continuous columns");
  constexpr double tol = 1e-9;
  OracleResult best;
  std::vector<double> x(p.num_vars(), 0.0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bins.size()); ++mask) {
    for (std::size_t q = 0; q < bins.size(); ++q) x[bins[q]] = static_cast<double>((mask >> q) & 1u);
    // Candidate hyperplanes a.y = b over the continuous columns.
    std::vector<std::pair<std::array<double, 2>, double>> planes;
    for (std::size_t k = 0; k < conts.size(); ++k) {
      std::array<double, 2> e{0.0, 0.0};
      e[k] = 1.0;
      planes.push_back({e, p.lower[conts[k]]});
      planes.push_back({e, p.upper[conts[k]]});
    }
    for (const auto& row : p.rows) {
      std::array<double, 2> a{0.0, 0.0};
      double b = row.rhs;
      for (const auto& [j, v] : row.terms) {
        bool cont = false;
        for (std::size_t k = 0; k < conts.size(); ++k)
          if (conts[k] == j) a[k] += v, cont = true;
        if (!cont) b -= v * x[j];
      }
      planes.push_back({a, b});
    }
    auto consider = [&](double y0, double y1) {
      if (!conts.empty()) x[conts[0]] = y0;
      if (conts.size() > 1) x[conts[1]] = y1;
      if (p.max_violation(x) > tol) return;
      best.feasible = true;
      best.objective = std::min(best.objective, p.objective(x));
    };
    if (conts.empty()) {
      consider(0, 0);
    } else if (conts.size() == 1) {
      for (const auto& [a, b] : planes)
        if (std::abs(a[0]) > 0) consider(b / a[0], 0);
    } else {
      for (std::size_t u = 0; u < planes.size(); ++u)
        for (std::size_t v = u + 1; v < planes.size(); ++v) {
          const auto& [a, b] = planes[u];
          const auto& [c, d] = planes[v];
          const double det = a[0] * c[1] - a[1] * c[0];
          if (std::abs(det) < 1e-12) continue;
          consider((b * c[1] - a[1] * d) / det, (a[0] * d - b * c[0]) / det);
        }
    }
  }
  return best;
}

}  // namespace gridfire::fixtures
