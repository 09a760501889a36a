#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gridfire/core/parallel.hpp"
#include "gridfire/core/text.hpp"
#include "gridfire/grid/case.hpp"
#include "gridfire/risk/network.hpp"
#include "gridfire/wrap/milp.hpp"
#include "gridfire/wrap/problem.hpp"

namespace gridfire::wrap {

struct CostBreakdown {
  double risk_cost = 0.0;  // sum K_l psi_l^t I_l^t
  double shed_cost = 0.0;  // K_d times unserved MWh
  double gen_cost = 0.0;   // piecewise generation cost
  double total() const { return risk_cost + shed_cost + gen_cost; }
};

struct SolverStats {
  std::size_t nodes = 0;
  std::size_t lp_iterations = 0;
  double gap = 0.0;         // worst hourly relative gap
  bool limit_hit = false;   // some hour stopped at the node limit
};

struct PlanSolution {
  std::string planner;
  double alpha = 0.0;
  std::vector<std::string> line_ids, bus_ids, gen_ids;
  std::vector<std::vector<std::uint8_t>> status;            // [line][hour]
  std::vector<std::vector<double>> flow;                    // [line][hour], MW
  std::vector<std::vector<double>> angle;                   // [bus][hour], rad
  std::vector<std::vector<double>> served;                  // [bus][hour], MW
  std::vector<std::vector<double>> dispatch;                // [gen][hour], MW
  std::vector<std::vector<std::vector<double>>> segments;   // [gen][segment][hour], MW
  CostBreakdown cost;
  double objective = 0.0;
  double total_risk = 0.0;
  double demand_mwh = 0.0;
  double served_mwh = 0.0;
  double shed_mwh = 0.0;
  double shed_percent = 0.0;
  SolverStats stats;

  std::size_t hours() const { return status.empty() ? 0 : status.front().size(); }
  std::size_t energized_hours(std::size_t l) const {
    return static_cast<std::size_t>(std::count(status[l].begin(), status[l].end(), 1));
  }
};

struct PlanOptions {
  std::optional<double> alpha;  // defaults to the case's alpha
  MilpOptions milp;
  bool prefer_energized = true;  // among optimal plans, keep cost-free lines on
  std::size_t threads = 1;
};

namespace detail {

struct HourResult {
  std::vector<double> x;
  HourIndex index;
  std::size_t nodes = 0, iterations = 0;
  double gap = 0.0;
  bool limit_hit = false;
};

inline std::vector<std::uint8_t> statuses(const std::vector<double>& x, const HourIndex& ix) {
  std::vector<std::uint8_t> s;
  for (std::size_t col : ix.status) s.push_back(x[col] > 0.5 ? 1 : 0);
  return s;
}

// Solves one hour: branch and bound on the switching model, then (if asked)
// energizes cost-free lines wherever that keeps the optimum, then re-solves
// the dispatch with statuses substituted for an accurately scaled answer.
inline HourResult solve_hour(const grid::NetworkCase& c, std::size_t t, const std::vector<double>& status_cost,
                             double alpha, const std::vector<std::uint8_t>* forced, const PlanOptions& opt) {
  HourResult hr;
  std::vector<std::uint8_t> status;
  if (forced) {
    status = *forced;
  } else {
    MixedIntegerProgram p;
    const HourIndex ix = append_hour(p, c, t, status_cost, alpha);
    append_cover_cuts(p, c, t, ix, alpha);
    // Seeds: every line on, and every priced line off.
    std::vector<std::vector<double>> starts(2, std::vector<double>(p.num_vars(), 0.0));
    for (std::size_t l = 0; l < ix.status.size(); ++l) {
      starts[0][ix.status[l]] = 1.0;
      starts[1][ix.status[l]] = status_cost[l] > 0.0 ? 0.0 : 1.0;
    }
    // Priced lines decide the risk trade-off; branch on them before the
    // zero-cost ones, whose statuses only reshape flows.
    MilpOptions mo = opt.milp;
    mo.priority.assign(p.num_vars(), 0);
    for (std::size_t l = 0; l < ix.status.size(); ++l) mo.priority[ix.status[l]] = status_cost[l] > 0.0 ? 1 : 0;
    const MilpResult r = branch_and_bound(p, mo, std::move(starts));
    hr.nodes = r.nodes;
    hr.iterations = r.lp_iterations;
    if (r.status == MilpStatus::Infeasible)
      throw InfeasibleError("hour " + std::to_string(t) + ": no switching plan meets the served-load floor");
    if (r.status == MilpStatus::Unbounded) throw InfeasibleError("hour " + std::to_string(t) + ": unbounded model");
    if (!r.has_solution())
      throw InfeasibleError("hour " + std::to_string(t) + ": node limit reached without a feasible plan");
    hr.limit_hit = r.status == MilpStatus::NodeLimit;
    hr.gap = r.gap;
    status = statuses(r.x, ix);

    if (opt.prefer_energized) {
      SimplexSolver s(p, opt.milp.lp);
      for (std::size_t l = 0; l < status.size(); ++l) s.set_bounds(ix.status[l], status[l], status[l]);
      if (s.solve() == LpStatus::Optimal) {
        double best = s.objective();
        for (std::size_t l = 0; l < status.size(); ++l) {
          if (status[l] || status_cost[l] != 0.0) continue;
          s.set_bounds(ix.status[l], 1.0, 1.0);
          const LpStatus ls = s.reoptimize();
          if (ls == LpStatus::Optimal && s.objective() <= best + 1e-9 * std::max(1.0, std::abs(best))) {
            status[l] = 1;
            best = std::min(best, s.objective());
          } else {
            s.set_bounds(ix.status[l], 0.0, 0.0);
            s.reoptimize();
          }
        }
        hr.iterations += s.iterations();
      }
    }
  }
  MixedIntegerProgram fixed;
  hr.index = append_hour(fixed, c, t, status_cost, alpha, &status);
  const LpResult lp = solve_lp(fixed, opt.milp.lp);
  hr.iterations += lp.iterations;
  if (lp.status != LpStatus::Optimal)
    throw InfeasibleError("hour " + std::to_string(t) + ": dispatch with the chosen line statuses is " +
                          to_string(lp.status));
  hr.x = lp.x;
  return hr;
}

}  // namespace detail

// Recomputes every reported aggregate from the decisions and case data.
inline void summarize(PlanSolution& s, const grid::NetworkCase& c, const risk::RiskMatrix& psi) {
  s.cost = {};
  s.total_risk = s.demand_mwh = s.served_mwh = 0.0;
  const std::size_t H = s.hours();
  for (std::size_t l = 0; l < c.lines.size(); ++l)
    for (std::size_t t = 0; t < H; ++t)
      if (s.status[l][t]) {
        s.total_risk += psi.at(l, t);
        s.cost.risk_cost += c.lines[l].risk_cost * psi.at(l, t);
      }
  for (std::size_t i = 0; i < c.buses.size(); ++i)
    for (std::size_t t = 0; t < H; ++t) {
      s.demand_mwh += c.buses[i].demand[t];
      s.served_mwh += s.served[i][t];
    }
  s.shed_mwh = std::max(0.0, s.demand_mwh - s.served_mwh);
  s.cost.shed_cost = c.config.shed_penalty * s.shed_mwh;
  for (std::size_t g = 0; g < c.generators.size(); ++g)
    for (std::size_t k = 0; k < c.generators[g].segments.size(); ++k)
      for (std::size_t t = 0; t < H; ++t) s.cost.gen_cost += c.generators[g].segments[k].cost * s.segments[g][k][t];
  s.objective = s.cost.total();
  s.shed_percent = s.demand_mwh > 0 ? 100.0 * s.shed_mwh / s.demand_mwh : 0.0;
}

// Shared driver: hour-by-hour solves under a status cost, optionally with
// statuses forced by a mask.
inline PlanSolution solve_plan(const grid::NetworkCase& c, const risk::RiskMatrix& psi, const StatusCost& status_cost,
                               const grid::LineMask* forced, const std::string& planner, const PlanOptions& opt) {
  const double alpha = opt.alpha.value_or(c.config.alpha);
  if (!(alpha >= 0 && alpha <= 1)) throw InvalidArgument("alpha must lie in [0, 1]");
  if (psi.lines() != c.lines.size() || psi.hours < c.horizon())
    throw InvalidArgument("risk matrix does not cover every line and hour of the case");
  check_supply(c, alpha);
  const std::size_t H = c.horizon();
  std::vector<detail::HourResult> hours(H);
  parallel_for(H, opt.threads, [&](std::size_t t) {
    std::vector<double> k(c.lines.size());
    std::vector<std::uint8_t> mask;
    for (std::size_t l = 0; l < c.lines.size(); ++l) {
      k[l] = status_cost[l][t];
      if (forced) mask.push_back((*forced)[l][t]);
    }
    hours[t] = detail::solve_hour(c, t, k, alpha, forced ? &mask : nullptr, opt);
  });

  PlanSolution s;
  s.planner = planner;
  s.alpha = alpha;
  for (const auto& l : c.lines) s.line_ids.push_back(l.id);
  for (const auto& b : c.buses) s.bus_ids.push_back(b.id);
  for (const auto& g : c.generators) s.gen_ids.push_back(g.id);
  s.status.assign(c.lines.size(), std::vector<std::uint8_t>(H, 0));
  s.flow.assign(c.lines.size(), std::vector<double>(H, 0.0));
  s.angle.assign(c.buses.size(), std::vector<double>(H, 0.0));
  s.served.assign(c.buses.size(), std::vector<double>(H, 0.0));
  s.dispatch.assign(c.generators.size(), std::vector<double>(H, 0.0));
  for (const auto& g : c.generators) s.segments.emplace_back(g.segments.size(), std::vector<double>(H, 0.0));
  for (std::size_t t = 0; t < H; ++t) {
    const auto& hr = hours[t];
    const auto& ix = hr.index;
    for (std::size_t l = 0; l < c.lines.size(); ++l) {
      s.status[l][t] = hr.x[ix.status[l]] > 0.5 ? 1 : 0;
      s.flow[l][t] = s.status[l][t] ? hr.x[ix.flow[l]] : 0.0;
    }
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
      s.angle[i][t] = hr.x[ix.angle[i]];
      s.served[i][t] = hr.x[ix.served[i]];
    }
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
      s.dispatch[g][t] = hr.x[ix.gen[g]];
      for (std::size_t k = 0; k < ix.segment[g].size(); ++k) s.segments[g][k][t] = hr.x[ix.segment[g][k]];
    }
    s.stats.nodes += hr.nodes;
    s.stats.lp_iterations += hr.iterations;
    s.stats.gap = std::max(s.stats.gap, hr.gap);
    s.stats.limit_hit = s.stats.limit_hit || hr.limit_hit;
  }
  summarize(s, c, psi);
  return s;
}

inline PlanSolution plan_wrap(const grid::NetworkCase& c, const risk::RiskMatrix& psi, const PlanOptions& opt = {}) {
  return solve_plan(c, psi, risk_cost(c, psi), nullptr, "wrap", opt);
}

// Lines whose station gusts above the threshold at any hour stay off all day;
// the rest stay on. Only dispatch and shedding are optimized.
inline PlanSolution plan_naive_psps(const grid::NetworkCase& c, const risk::RiskMatrix& psi,
                                    std::optional<double> gust_threshold = std::nullopt,
                                    const PlanOptions& opt = {}) {
  const grid::LineMask mask = grid::naive_psps_mask(c, gust_threshold.value_or(c.config.psps_gust_threshold));
  return solve_plan(c, psi, risk_cost(c, psi), &mask, "naive_psps", opt);
}

// Regional comparator: a static 0/1 indicator per line (1 inside a
// designated high-risk region) priced at `weight` per energized line-hour
// stands in for the hourly clash score. Reported risk uses the true scores.
inline PlanSolution plan_relative_risk(const grid::NetworkCase& c, const risk::RiskMatrix& psi, double weight,
                                       const PlanOptions& opt = {}) {
  if (!(weight >= 0) || std::isnan(weight)) throw InvalidArgument("relative-risk weight must be >= 0");
  StatusCost k(c.lines.size(), std::vector<double>(c.horizon(), 0.0));
  for (std::size_t l = 0; l < c.lines.size(); ++l)
    if (c.high_risk(c.lines[l])) std::fill(k[l].begin(), k[l].end(), weight);
  auto s = solve_plan(c, psi, k, nullptr, "relative_risk", opt);
  return s;
}

struct TuningPoint {
  double weight = 0.0;
  double shed_percent = 0.0;
  double shed_mwh = 0.0;
  double risk = 0.0;
};

struct TuningCurve {
  std::vector<TuningPoint> points;
  std::size_t best = 0;  // lowest shed among zero-risk points, else lowest risk
};

inline TuningCurve tune_relative_risk(const grid::NetworkCase& c, const risk::RiskMatrix& psi,
                                      const std::vector<double>& weights, const PlanOptions& opt = {}) {
  if (weights.empty()) throw InvalidArgument("no relative-risk weights to try");
  TuningCurve curve;
  for (double w : weights) {
    const auto s = plan_relative_risk(c, psi, w, opt);
    curve.points.push_back({w, s.shed_percent, s.shed_mwh, s.total_risk});
  }
  auto key = [](const TuningPoint& p) { return std::pair{p.risk > 1e-9 ? p.risk : 0.0, p.shed_mwh}; };
  for (std::size_t i = 1; i < curve.points.size(); ++i)
    if (key(curve.points[i]) < key(curve.points[curve.best])) curve.best = i;
  return curve;
}

inline std::vector<double> default_tuning_weights() {
  return {0.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8};
}

struct SweepPoint {
  double alpha = 0.0;
  double shed_mwh = 0.0;
  double risk = 0.0;
  double objective = 0.0;
};

inline std::vector<SweepPoint> alpha_sweep(const grid::NetworkCase& c, const risk::RiskMatrix& psi,
                                           const std::vector<double>& alphas, PlanOptions opt = {}) {
  std::vector<SweepPoint> out;
  for (double a : alphas) {
    opt.alpha = a;
    const auto s = plan_wrap(c, psi, opt);
    out.push_back({a, s.shed_mwh, s.total_risk, s.objective});
  }
  return out;
}

inline std::vector<double> default_alphas() { return {0.0, 0.01, 0.1, 0.5, 0.8, 1.0}; }

struct AuditReport {
  double max_violation = 0.0;
  std::vector<std::string> issues;  // constraints violated beyond the tolerance
  bool ok() const { return issues.empty(); }
};

// Independent check of a plan against the switching model, written directly
// from the case data rather than from any assembled program.
inline AuditReport audit(const grid::NetworkCase& c, const risk::RiskMatrix& psi, const PlanSolution& s,
                         double tol = 1e-6) {
  AuditReport rep;
  auto check = [&](double violation, const std::string& what) {
    rep.max_violation = std::max(rep.max_violation, violation);
    if (violation > tol) rep.issues.push_back(what + " violated by " + text::shortest(violation));
  };
  const std::size_t H = c.horizon();
  if (s.hours() != H || s.status.size() != c.lines.size()) {
    rep.issues.push_back("solution shape does not match the case");
    return rep;
  }
  const double alpha = s.alpha;
  const std::size_t ref = c.reference_index();
  for (std::size_t t = 0; t < H; ++t) {
    const std::string h = " hour " + std::to_string(t);
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
      const auto& gen = c.generators[g];
      double sum = 0.0;
      for (std::size_t k = 0; k < gen.segments.size(); ++k) {
        const double v = s.segments[g][k][t];
        check(std::max(-v, v - gen.segments[k].capacity), "segment bound " + gen.id + h);
        sum += v;
      }
      check(std::abs(s.dispatch[g][t] - sum), "segment sum " + gen.id + h);
      check(std::max(gen.p_min - s.dispatch[g][t], s.dispatch[g][t] - gen.p_max), "generation limits " + gen.id + h);
    }
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
      const auto& bus = c.buses[i];
      double net = -s.served[i][t];
      for (std::size_t g = 0; g < c.generators.size(); ++g)
        if (c.generators[g].bus == bus.id) net += s.dispatch[g][t];
      for (std::size_t l = 0; l < c.lines.size(); ++l) {
        if (c.lines[l].from == bus.id) net -= s.flow[l][t];
        if (c.lines[l].to == bus.id) net += s.flow[l][t];
      }
      check(std::abs(net), "power balance " + bus.id + h);
      const double d = bus.demand[t];
      check(std::max(alpha * d - s.served[i][t], s.served[i][t] - d), "served-load bounds " + bus.id + h);
      check(std::abs(s.angle[i][t]) - kAngleLimit, "angle limit " + bus.id + h);
    }
    check(std::abs(s.angle[ref][t]), "reference angle" + h);
    for (std::size_t l = 0; l < c.lines.size(); ++l) {
      const auto& line = c.lines[l];
      const int I = s.status[l][t];
      if (I != 0 && I != 1) rep.issues.push_back("status not binary " + line.id + h);
      const double dc = s.flow[l][t] - c.config.base_mva *
                                           (s.angle[c.bus_index(line.from)][t] - s.angle[c.bus_index(line.to)][t]) /
                                           line.reactance;
      check(std::abs(dc) - (1 - I) * big_m(c, line), "switched DC law " + line.id + h);
      check(std::abs(s.flow[l][t]) - I * line.capacity, "flow limit " + line.id + h);
    }
  }
  double risk = 0.0;
  for (std::size_t l = 0; l < c.lines.size(); ++l)
    for (std::size_t t = 0; t < H; ++t) risk += psi.at(l, t) * s.status[l][t];
  check(std::abs(risk - s.total_risk), "risk accounting");
  check(std::abs(s.objective - s.cost.total()) / std::max(1.0, std::abs(s.objective)), "objective breakdown");
  return rep;
}

// Plan JSON. Numbers use shortest round-trip text, so equal plans give
// byte-equal files.
inline nlohmann::json to_json(const PlanSolution& s) {
  nlohmann::json j;
  j["planner"] = s.planner;
  j["alpha"] = s.alpha;
  j["objective"] = s.objective;
  j["objective_breakdown"] = {
      {"risk_cost", s.cost.risk_cost}, {"shed_cost", s.cost.shed_cost}, {"gen_cost", s.cost.gen_cost}};
  j["total_risk"] = s.total_risk;
  j["demand_mwh"] = s.demand_mwh;
  j["served_mwh"] = s.served_mwh;
  j["shed_mwh"] = s.shed_mwh;
  j["shed_percent"] = s.shed_percent;
  j["solver"] = {{"nodes", s.stats.nodes},
                 {"lp_iterations", s.stats.lp_iterations},
                 {"gap", s.stats.gap},
                 {"limit_hit", s.stats.limit_hit}};
  auto& lines = j["lines"] = nlohmann::json::array();
  for (std::size_t l = 0; l < s.line_ids.size(); ++l)
    lines.push_back({{"id", s.line_ids[l]}, {"energized", s.status[l]}, {"flow_mw", s.flow[l]}});
  auto& buses = j["buses"] = nlohmann::json::array();
  for (std::size_t i = 0; i < s.bus_ids.size(); ++i)
    buses.push_back({{"id", s.bus_ids[i]}, {"angle_rad", s.angle[i]}, {"served_mw", s.served[i]}});
  auto& gens = j["generators"] = nlohmann::json::array();
  for (std::size_t g = 0; g < s.gen_ids.size(); ++g)
    gens.push_back({{"id", s.gen_ids[g]}, {"dispatch_mw", s.dispatch[g]}, {"segments_mw", s.segments[g]}});
  return j;
}

// Line-status timeline: one row per line-hour.
inline void write_gantt_csv(const PlanSolution& s, const risk::RiskMatrix& psi, std::ostream& out) {
  out << "line_id,hour,energized,score\n";
  for (std::size_t l = 0; l < s.line_ids.size(); ++l)
    for (std::size_t t = 0; t < s.hours(); ++t)
      out << s.line_ids[l] << ',' << t << ',' << int(s.status[l][t]) << ',' << text::fixed(psi.at(l, t), 6) << '\n';
}

inline void write_sweep_csv(const std::vector<SweepPoint>& pts, std::ostream& out) {
  out << "alpha,shed_mwh,risk,objective\n";
  for (const auto& p : pts)
    out << text::shortest(p.alpha) << ',' << text::fixed(p.shed_mwh, 6) << ',' << text::fixed(p.risk, 6) << ','
        << text::fixed(p.objective, 6) << '\n';
}

inline void write_tuning_csv(const TuningCurve& curve, std::ostream& out) {
  out << "weight,shed_percent,risk\n";
  for (const auto& p : curve.points)
    out << text::shortest(p.weight) << ',' << text::fixed(p.shed_percent, 6) << ',' << text::fixed(p.risk, 6) << '\n';
}

struct Comparison {
  PlanSolution wrap, naive, relative;
  TuningCurve tuning;
};

inline Comparison compare_planners(const grid::NetworkCase& c, const risk::RiskMatrix& psi,
                                   const std::vector<double>& weights, const PlanOptions& opt = {}) {
  Comparison cmp{plan_wrap(c, psi, opt), plan_naive_psps(c, psi, std::nullopt, opt), {}, {}};
  cmp.tuning = tune_relative_risk(c, psi, weights, opt);
  cmp.relative = plan_relative_risk(c, psi, cmp.tuning.points[cmp.tuning.best].weight, opt);
  return cmp;
}

inline void write_comparison_table(const Comparison& cmp, std::ostream& out) {
  const PlanSolution* cols[] = {&cmp.naive, &cmp.relative, &cmp.wrap};
  auto row = [&](const char* label, auto field, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-28s", label);
    out << buf;
    for (const auto* s : cols) {
      std::snprintf(buf, sizeof buf, "%18s", text::fixed(field(*s), decimals).c_str());
      out << buf;
    }
    out << '\n';
  };
  char head[128];
  std::snprintf(head, sizeof head, "%-28s%18s%18s%18s\n", "", "naive_psps", "relative_risk", "wrap");
  out << head;
  row("Total wildfire risk", [](const PlanSolution& s) { return s.total_risk; }, 4);
  row("Risk cost ($)", [](const PlanSolution& s) { return s.cost.risk_cost; }, 2);
  row("Served load (MWh)", [](const PlanSolution& s) { return s.served_mwh; }, 2);
  row("Load shedding (%)", [](const PlanSolution& s) { return s.shed_percent; }, 2);
  row("Generation cost ($)", [](const PlanSolution& s) { return s.cost.gen_cost; }, 2);
  row("Total operation cost ($)", [](const PlanSolution& s) { return s.objective; }, 2);
}

inline nlohmann::json to_json(const Comparison& cmp) {
  nlohmann::json j;
  auto summary = [](const PlanSolution& s) {
    return nlohmann::json{{"total_risk", s.total_risk},   {"risk_cost", s.cost.risk_cost},
                          {"served_mwh", s.served_mwh},   {"shed_percent", s.shed_percent},
                          {"gen_cost", s.cost.gen_cost},  {"objective", s.objective}};
  };
  j["naive_psps"] = summary(cmp.naive);
  j["relative_risk"] = summary(cmp.relative);
  j["relative_risk"]["weight"] = cmp.tuning.points[cmp.tuning.best].weight;
  j["wrap"] = summary(cmp.wrap);
  auto& curve = j["relative_risk_tuning"] = nlohmann::json::array();
  for (const auto& p : cmp.tuning.points)
    curve.push_back({{"weight", p.weight}, {"shed_percent", p.shed_percent}, {"risk", p.risk}});
  return j;
}

}  // namespace gridfire::wrap
