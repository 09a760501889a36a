#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "gridfire/core/error.hpp"
#include "gridfire/grid/case.hpp"
#include "gridfire/risk/network.hpp"
#include "gridfire/wrap/program.hpp"

namespace gridfire::wrap {

inline constexpr double kAngleLimit = std::numbers::pi / 2;

// Column indices of one hour's variables inside a program.
struct HourIndex {
  std::vector<std::size_t> status;                // I_l
  std::vector<std::size_t> flow;                  // P_l, MW
  std::vector<std::size_t> angle;                 // theta_i, rad
  std::vector<std::size_t> served;                // P_{i,d}, MW
  std::vector<std::size_t> gen;                   // P_g, MW
  std::vector<std::vector<std::size_t>> segment;  // P_{g,s}, MW
};

// Per-line, per-hour objective weight on I_l^t.
using StatusCost = std::vector<std::vector<double>>;

inline StatusCost risk_cost(const grid::NetworkCase& c, const risk::RiskMatrix& psi) {
  if (psi.lines() != c.lines.size() || psi.hours < c.horizon())
    throw InvalidArgument("risk matrix does not cover every line and hour of the case");
  StatusCost k(c.lines.size(), std::vector<double>(c.horizon()));
  for (std::size_t l = 0; l < c.lines.size(); ++l)
    for (std::size_t t = 0; t < c.horizon(); ++t) k[l][t] = c.lines[l].risk_cost * psi.at(l, t);
  return k;
}

// Switching big-M: the widest angle-driven flow plus the thermal limit.
inline double big_m(const grid::NetworkCase& c, const grid::Line& l) {
  return c.config.base_mva * 2 * kAngleLimit / l.reactance + l.capacity;
}

inline void check_supply(const grid::NetworkCase& c, double alpha) {
  double pmax = 0.0, pmin = 0.0;
  for (const auto& g : c.generators) {
    pmax += g.p_max;
    pmin += g.p_min;
  }
  for (std::size_t t = 0; t < c.horizon(); ++t) {
    const double demand = c.total_demand(t);
    if (alpha * demand > pmax + 1e-9)
      throw InfeasibleError("infeasible by construction: hour " + std::to_string(t) + " must serve " +
                            text::shortest(alpha * demand) + " MW but capacity is " + text::shortest(pmax) + " MW");
    if (pmin > demand + 1e-9)
      throw InfeasibleError("infeasible by construction: hour " + std::to_string(t) + " minimum generation " +
                            text::shortest(pmin) + " MW exceeds demand " + text::shortest(demand) + " MW");
  }
}

// Appends hour t of the planning model to `p`.
//
// `fixed`, when given, pins line statuses: an energized line gets the DC
// law as an equality, a de-energized one zero flow and no angle coupling.
// That is the big-M model with I substituted, written in a better-scaled form.
inline HourIndex append_hour(MixedIntegerProgram& p, const grid::NetworkCase& c, std::size_t t,
                             const std::vector<double>& status_cost, double alpha,
                             const std::vector<std::uint8_t>* fixed = nullptr) {
  const auto& cfg = c.config;
  const std::string h = "_" + std::to_string(t);
  HourIndex ix;
  const std::size_t ref = c.reference_index();
  for (std::size_t l = 0; l < c.lines.size(); ++l) {
    const auto& line = c.lines[l];
    const double lo = fixed ? (*fixed)[l] : 0.0, hi = fixed ? (*fixed)[l] : 1.0;
    ix.status.push_back(p.add_int_var(lo, hi, status_cost[l], "I_" + line.id + h));
  }
  for (std::size_t l = 0; l < c.lines.size(); ++l) {
    const auto& line = c.lines[l];
    const double cap = fixed && !(*fixed)[l] ? 0.0 : line.capacity;
    ix.flow.push_back(p.add_var(-cap, cap, 0.0, "P_" + line.id + h));
  }
  for (std::size_t i = 0; i < c.buses.size(); ++i) {
    const double lim = i == ref ? 0.0 : kAngleLimit;
    ix.angle.push_back(p.add_var(-lim, lim, 0.0, "theta_" + c.buses[i].id + h));
  }
  for (std::size_t i = 0; i < c.buses.size(); ++i) {
    const double d = c.buses[i].demand[t];
    ix.served.push_back(p.add_var(alpha * d, d, -cfg.shed_penalty, "Pd_" + c.buses[i].id + h));
    p.objective_offset += cfg.shed_penalty * d;
  }
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    const auto& gen = c.generators[g];
    ix.gen.push_back(p.add_var(gen.p_min, gen.p_max, 0.0, "Pg_" + gen.id + h));
    ix.segment.emplace_back();
    for (std::size_t s = 0; s < gen.segments.size(); ++s)
      ix.segment.back().push_back(p.add_var(0.0, gen.segments[s].capacity, gen.segments[s].cost,
                                            "Pgs_" + gen.id + "_" + std::to_string(s) + h));
  }

  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    std::vector<std::pair<std::size_t, double>> terms{{ix.gen[g], 1.0}};
    for (std::size_t col : ix.segment[g]) terms.push_back({col, -1.0});
    p.add_row(std::move(terms), Sense::Equal, 0.0, "segsum_" + c.generators[g].id + h);
  }
  for (std::size_t i = 0; i < c.buses.size(); ++i) {
    std::vector<std::pair<std::size_t, double>> terms;
    for (std::size_t g = 0; g < c.generators.size(); ++g)
      if (c.generators[g].bus == c.buses[i].id) terms.push_back({ix.gen[g], 1.0});
    for (std::size_t l = 0; l < c.lines.size(); ++l) {
      if (c.lines[l].from == c.buses[i].id) terms.push_back({ix.flow[l], -1.0});
      if (c.lines[l].to == c.buses[i].id) terms.push_back({ix.flow[l], 1.0});
    }
    terms.push_back({ix.served[i], -1.0});
    p.add_row(std::move(terms), Sense::Equal, 0.0, "balance_" + c.buses[i].id + h);
  }
  for (std::size_t l = 0; l < c.lines.size(); ++l) {
    const auto& line = c.lines[l];
    const double k = cfg.base_mva / line.reactance;
    const std::size_t fi = ix.angle[c.bus_index(line.from)], ti = ix.angle[c.bus_index(line.to)];
    const double M = big_m(c, line);
    if (fixed) {
      if ((*fixed)[l])
        p.add_row({{ix.flow[l], 1.0}, {fi, -k}, {ti, k}}, Sense::Equal, 0.0, "dclaw_" + line.id + h);
      continue;
    }
    p.add_row({{ix.flow[l], 1.0}, {fi, -k}, {ti, k}, {ix.status[l], M}}, Sense::LessEqual, M,
              "dcup_" + line.id + h);
    p.add_row({{ix.flow[l], 1.0}, {fi, -k}, {ti, k}, {ix.status[l], -M}}, Sense::GreaterEqual, -M,
              "dclo_" + line.id + h);
    p.add_row({{ix.flow[l], 1.0}, {ix.status[l], -line.capacity}}, Sense::LessEqual, 0.0, "capup_" + line.id + h);
    p.add_row({{ix.flow[l], 1.0}, {ix.status[l], line.capacity}}, Sense::GreaterEqual, 0.0, "caplo_" + line.id + h);
  }
  return ix;
}

// Valid inequalities for the search, not part of the model: a bus whose
// served-load floor exceeds its local generation must import, so at least one
// incident line is on and the energized capacity covers the shortfall.
inline void append_cover_cuts(MixedIntegerProgram& p, const grid::NetworkCase& c, std::size_t t, const HourIndex& ix,
                              double alpha) {
  for (std::size_t i = 0; i < c.buses.size(); ++i) {
    double need = alpha * c.buses[i].demand[t];
    for (const auto& g : c.generators)
      if (g.bus == c.buses[i].id) need -= g.p_max;
    if (need <= 1e-9) continue;
    std::vector<std::pair<std::size_t, double>> count, cap;
    for (std::size_t l = 0; l < c.lines.size(); ++l)
      if (c.lines[l].from == c.buses[i].id || c.lines[l].to == c.buses[i].id) {
        count.push_back({ix.status[l], 1.0});
        cap.push_back({ix.status[l], c.lines[l].capacity});
      }
    const std::string h = c.buses[i].id + "_" + std::to_string(t);
    p.add_row(std::move(count), Sense::GreaterEqual, 1.0, "cover_" + h);
    p.add_row(std::move(cap), Sense::GreaterEqual, need, "covercap_" + h);
  }
}

// The full multi-hour planning program. Hours share no constraints, so the
// planners solve `hour_program` blocks independently; this assembled form is
// what gets exported and counted.
struct PlanProblem {
  MixedIntegerProgram program;
  std::vector<HourIndex> hours;
  std::vector<double> big_m;
  double alpha = 0.0;
  std::size_t num_binaries() const { return program.num_integer(); }
};

inline PlanProblem build_problem(const grid::NetworkCase& c, const StatusCost& status_cost, double alpha) {
  if (!(alpha >= 0 && alpha <= 1)) throw InvalidArgument("alpha must lie in [0, 1]");
  check_supply(c, alpha);
  PlanProblem pp;
  pp.alpha = alpha;
  for (const auto& l : c.lines) pp.big_m.push_back(big_m(c, l));
  for (std::size_t t = 0; t < c.horizon(); ++t) {
    std::vector<double> k(c.lines.size());
    for (std::size_t l = 0; l < c.lines.size(); ++l) k[l] = status_cost[l][t];
    pp.hours.push_back(append_hour(pp.program, c, t, k, alpha));
  }
  return pp;
}

inline PlanProblem build_problem(const grid::NetworkCase& c, const risk::RiskMatrix& psi) {
  return build_problem(c, risk_cost(c, psi), c.config.alpha);
}

}  // namespace gridfire::wrap
