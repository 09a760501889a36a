#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <vector>

#include "gridfire/wrap/program.hpp"
#include "gridfire/wrap/simplex.hpp"

namespace gridfire::wrap {

enum class MilpStatus : std::uint8_t { Optimal, Infeasible, Unbounded, NodeLimit };

inline const char* to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::Optimal: return "optimal";
    case MilpStatus::Infeasible: return "infeasible";
    case MilpStatus::Unbounded: return "unbounded";
    case MilpStatus::NodeLimit: return "node_limit";
  }
  return "?";
}

struct MilpOptions {
  double gap_tol = 1e-6;          // on (incumbent - bound) / max(1, |incumbent|)
  double integrality_tol = 1e-6;
  std::size_t node_limit = 200000;
  bool rounding_heuristic = true;
  // Optional per-column branching class; fractional columns of the highest
  // class are branched first. Empty means one class.
  std::vector<int> priority;
  SimplexOptions lp;
};

struct MilpResult {
  MilpStatus status = MilpStatus::Infeasible;
  std::vector<double> x;  // integer columns exactly integral
  double objective = kInf;
  double bound = -kInf;
  double gap = kInf;
  std::size_t nodes = 0;
  std::size_t lp_iterations = 0;
  bool has_solution() const { return !x.empty(); }
};

namespace detail {

struct BnbNode {
  double bound = -kInf;
  std::size_t id = 0;
  std::size_t depth = 0;
  std::vector<double> int_lo, int_hi;  // bounds of the integer columns
  std::vector<double> x;               // LP optimum at this node
  BasisHint basis;
};

struct NodeOrder {
  bool operator()(const std::shared_ptr<BnbNode>& a, const std::shared_ptr<BnbNode>& b) const {
    if (a->bound != b->bound) return a->bound > b->bound;
    return a->id > b->id;
  }
};

}  // namespace detail

// Exact LP-based branch and bound. Best-first by LP bound, branching on the
// most fractional integer column with ties to the lowest index. Until an
// incumbent exists the search dives into the better child instead. Children
// are warm-started from the parent's optimal basis by the dual simplex.
//
// `starts` are candidate assignments (full-length vectors; only integer
// entries are read) completed by an LP and kept as incumbents when feasible.
class BranchAndBound {
 public:
  BranchAndBound(const MixedIntegerProgram& p, MilpOptions opt = {}, std::vector<std::vector<double>> starts = {})
      : p_(p), opt_(opt), root_(p, opt.lp), starts_(std::move(starts)) {
    if (!opt_.priority.empty() && opt_.priority.size() != p.num_vars())
      throw InvalidArgument("branching priority length differs from the column count");
    for (std::size_t j = 0; j < p.num_vars(); ++j)
      if (p.is_integer(j)) ints_.push_back(j);
  }

  MilpResult run() {
    MilpResult res;
    auto root = std::make_shared<detail::BnbNode>();
    for (std::size_t j : ints_) {
      root->int_lo.push_back(std::ceil(p_.lower[j] - opt_.integrality_tol));
      root->int_hi.push_back(std::floor(p_.upper[j] + opt_.integrality_tol));
      if (root->int_lo.back() > root->int_hi.back()) return finish(res, MilpStatus::Infeasible);
    }
    SimplexSolver& s = root_;
    for (std::size_t q = 0; q < ints_.size(); ++q) s.set_bounds(ints_[q], root->int_lo[q], root->int_hi[q]);
    const LpStatus rs = s.solve();
    res.nodes = 1;
    if (rs == LpStatus::Infeasible) return finish(res, MilpStatus::Infeasible);
    if (rs == LpStatus::Unbounded) return finish(res, MilpStatus::Unbounded);
    if (rs != LpStatus::Optimal) return finish(res, MilpStatus::NodeLimit);
    root->bound = s.objective();
    root->x = s.solution();
    root->basis = s.basis();
    if (integral(root->x)) {
      accept(res, root->x);
      res.bound = res.objective;
      return finish(res, MilpStatus::Optimal);
    }
    if (opt_.rounding_heuristic) try_rounding(res, *root, s);
    for (const auto& start : starts_) try_start(res, *root, start, s);

    std::priority_queue<std::shared_ptr<detail::BnbNode>, std::vector<std::shared_ptr<detail::BnbNode>>,
                        detail::NodeOrder>
        open;
    open.push(root);
    std::size_t next_id = 1;
    std::shared_ptr<detail::BnbNode> dive;
    while (dive || !open.empty()) {
      std::shared_ptr<detail::BnbNode> node;
      if (dive) {
        node = std::move(dive);
        dive.reset();
        if (res.has_solution() && !improves(node->bound, res.objective)) continue;
      } else {
        node = open.top();
        if (res.has_solution() && !improves(node->bound, res.objective)) break;
        open.pop();
      }
      if (res.nodes >= opt_.node_limit) {
        res.bound = open.empty() ? node->bound : std::min(node->bound, open.top()->bound);
        return finish(res, MilpStatus::NodeLimit);
      }
      std::shared_ptr<detail::BnbNode> kept[2];
      const std::size_t q = branch_column(node->x);
      const double v = node->x[ints_[q]];
      for (int side = 0; side < 2; ++side) {
        auto child = std::make_shared<detail::BnbNode>();
        child->id = next_id++;
        child->depth = node->depth + 1;
        child->int_lo = node->int_lo;
        child->int_hi = node->int_hi;
        if (side == 0) child->int_hi[q] = std::floor(v);
        else child->int_lo[q] = std::ceil(v);
        ++res.nodes;
        SimplexSolver& w = root_;
        w.load_basis(node->basis);  // on failure the next solve starts cold
        for (std::size_t k = 0; k < ints_.size(); ++k) w.set_bounds(ints_[k], child->int_lo[k], child->int_hi[k]);
        const LpStatus cs = w.reoptimize();
        if (cs == LpStatus::Infeasible) continue;
        if (cs != LpStatus::Optimal) {
          res.bound = open.empty() ? node->bound : std::min(node->bound, open.top()->bound);
          return finish(res, MilpStatus::NodeLimit);
        }
        child->bound = std::max(w.objective(), node->bound);
        if (res.has_solution() && !improves(child->bound, res.objective)) continue;
        child->x = w.solution();
        if (integral(child->x)) {
          accept(res, child->x);
          continue;
        }
        child->basis = w.basis();
        kept[side] = std::move(child);
      }
      if (!res.has_solution() && (kept[0] || kept[1])) {
        const int pick = !kept[0] ? 1 : !kept[1] ? 0 : (detail::NodeOrder{}(kept[0], kept[1]) ? 1 : 0);
        dive = std::move(kept[pick]);
      }
      for (auto& k : kept)
        if (k) open.push(std::move(k));
    }
    if (!res.has_solution()) return finish(res, MilpStatus::Infeasible);
    res.bound = open.empty() ? res.objective : std::min(open.top()->bound, res.objective);
    return finish(res, MilpStatus::Optimal);
  }

 private:
  bool integral(const std::vector<double>& x) const {
    for (std::size_t j : ints_)
      if (std::abs(x[j] - std::round(x[j])) > opt_.integrality_tol) return false;
    return true;
  }

  bool improves(double bound, double incumbent) const {
    return incumbent - bound > opt_.gap_tol * std::max(1.0, std::abs(incumbent));
  }

  std::size_t branch_column(const std::vector<double>& x) const {
    std::size_t best = 0;
    double score = -1.0;
    int best_class = std::numeric_limits<int>::min();
    for (std::size_t q = 0; q < ints_.size(); ++q) {
      const double v = x[ints_[q]];
      const double f = v - std::floor(v);
      const double s = std::min(f, 1.0 - f);
      if (s <= opt_.integrality_tol) continue;
      const int cls = opt_.priority.empty() ? 0 : opt_.priority[ints_[q]];
      if (cls > best_class || (cls == best_class && s > score + 1e-12)) {
        best_class = cls;
        score = s;
        best = q;
      }
    }
    return best;
  }

  // Integer columns are snapped and the objective re-evaluated from the program.
  void accept(MilpResult& res, std::vector<double> x) {
    for (std::size_t j : ints_) x[j] = std::round(x[j]);
    const double value = p_.objective(x);
    if (!res.has_solution() || value < res.objective) {
      res.x = std::move(x);
      res.objective = value;
    }
  }

  // Fixes integer columns at rounded LP values (up, then nearest) and keeps
  // any feasible completion as an incumbent.
  void try_rounding(MilpResult& res, const detail::BnbNode& node, SimplexSolver& s) {
    for (int mode = 0; mode < 2; ++mode) {
      s.load_basis(node.basis);
      for (std::size_t q = 0; q < ints_.size(); ++q) {
        const double v = node.x[ints_[q]];
        double r = mode == 0 ? std::ceil(v - opt_.integrality_tol) : std::round(v);
        r = std::clamp(r, node.int_lo[q], node.int_hi[q]);
        s.set_bounds(ints_[q], r, r);
      }
      if (s.reoptimize() == LpStatus::Optimal) accept(res, s.solution());
    }
  }

  void try_start(MilpResult& res, const detail::BnbNode& node, const std::vector<double>& start, SimplexSolver& s) {
    if (start.size() != p_.num_vars()) throw InvalidArgument("start vector length differs from the column count");
    s.load_basis(node.basis);
    for (std::size_t q = 0; q < ints_.size(); ++q) {
      const double r = std::clamp(std::round(start[ints_[q]]), node.int_lo[q], node.int_hi[q]);
      s.set_bounds(ints_[q], r, r);
    }
    if (s.reoptimize() == LpStatus::Optimal) accept(res, s.solution());
  }

  MilpResult& finish(MilpResult& res, MilpStatus status) {
    res.status = status;
    res.lp_iterations = root_.iterations();
    if (res.has_solution()) {
      if (status == MilpStatus::Optimal && res.bound > res.objective) res.bound = res.objective;
      res.gap = std::max(0.0, res.objective - res.bound) / std::max(1.0, std::abs(res.objective));
    }
    return res;
  }

  const MixedIntegerProgram& p_;
  MilpOptions opt_;
  SimplexSolver root_;
  std::vector<std::vector<double>> starts_;
  std::vector<std::size_t> ints_;
};

inline MilpResult branch_and_bound(const MixedIntegerProgram& p, MilpOptions opt = {},
                                   std::vector<std::vector<double>> starts = {}) {
  BranchAndBound bb(p, opt, std::move(starts));
  return bb.run();
}

}  // namespace gridfire::wrap
