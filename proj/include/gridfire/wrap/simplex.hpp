#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "gridfire/wrap/program.hpp"

namespace gridfire::wrap {

enum class LpStatus : std::uint8_t { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
  }
  return "?";
}

struct SimplexOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-7;
  double pivot_tol = 1e-9;
  std::size_t refactor_interval = 64;
  std::size_t degenerate_limit = 50;  // consecutive stalls before Bland's rule
  std::size_t max_iterations = 0;     // 0 picks a size-based limit
};

// Nonbasic columns sit at a bound; Zero marks a free column parked at 0.
enum class VarState : std::uint8_t { Basic, Lower, Upper, Zero };

struct BasisHint {
  std::vector<std::size_t> basic;
  std::vector<VarState> state;
  bool empty() const { return basic.empty(); }
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t iterations = 0;
};

// Dense bounded-variable simplex over the tableau B^-1 [A | I | artificials].
//
// Columns: structural [0, n), one slack per row [n, n+m) whose bounds encode
// the row sense, then phase-one artificials. Rows are scaled to unit max
// coefficient and costs to unit max magnitude; results are reported unscaled.
class SimplexSolver {
 public:
  explicit SimplexSolver(const LinearProgram& lp, SimplexOptions opt = {}) : opt_(opt) {
    lp.check();
    n_ = lp.num_vars();
    m_ = lp.num_rows();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(n_ + m_));
    b_.resize(static_cast<Eigen::Index>(m_));
    lo_.assign(n_ + m_, 0.0);
    hi_.assign(n_ + m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& row = lp.rows[i];
      double scale = 0.0;
      for (const auto& [j, v] : row.terms) {
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += v;
      }
      for (std::size_t j = 0; j < n_; ++j) scale = std::max(scale, std::abs(a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
      if (scale == 0.0) scale = 1.0;
      a.row(static_cast<Eigen::Index>(i)) /= scale;
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n_ + i)) = 1.0;
      b_(static_cast<Eigen::Index>(i)) = row.rhs / scale;
      // a x + s = b: s >= 0 for <=, s <= 0 for >=, s = 0 for =.
      lo_[n_ + i] = row.sense == Sense::GreaterEqual ? -kInf : 0.0;
      hi_[n_ + i] = row.sense == Sense::LessEqual ? kInf : 0.0;
    }
    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = lp.lower[j];
      hi_[j] = lp.upper[j];
    }
    base_ = std::make_shared<const Eigen::MatrixXd>(std::move(a));
    cost_scale_ = 1.0;
    for (double c : lp.cost) cost_scale_ = std::max(cost_scale_, std::abs(c));
    cost_.assign(lp.cost.begin(), lp.cost.end());
    offset_ = lp.objective_offset;
    cold_ = true;
  }

  std::size_t num_structural() const { return n_; }
  std::size_t num_rows() const { return m_; }
  std::size_t iterations() const { return iterations_; }
  bool used_bland() const { return bland_used_; }

  double lower(std::size_t j) const { return lo_[j]; }
  double upper(std::size_t j) const { return hi_[j]; }

  // Changes bounds of a structural column, keeping the basis. A nonbasic
  // column moves to the bound its reduced cost favours.
  void set_bounds(std::size_t j, double lo, double hi) {
    lo_[j] = lo;
    hi_[j] = hi;
    if (cold_ || state_[j] == VarState::Basic) return;
    place_nonbasic(j);
  }

  LpStatus solve() {
    if (cold_) return cold_solve();
    return reoptimize();
  }

  // Re-solves after bound changes from the current (dual feasible) basis.
  LpStatus reoptimize() {
    if (cold_) return cold_solve();
    const bool primal_ok = primal_infeasibility() <= opt_.feasibility_tol;
    const bool dual_ok = dual_infeasibility() <= opt_.optimality_tol;
    LpStatus s = LpStatus::Optimal;
    if (primal_ok && dual_ok) {
      status_ = LpStatus::Optimal;
      return status_;
    }
    if (dual_ok) {
      s = dual_simplex();
      if (s == LpStatus::Infeasible || s == LpStatus::IterationLimit) return status_ = s;
      return status_ = finish();
    }
    if (primal_ok) return status_ = finish();
    return cold_solve();
  }

  LpStatus status() const { return status_; }

  std::vector<double> solution() const { return {x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_)}; }

  double objective() const {
    double v = offset_;
    for (std::size_t j = 0; j < n_; ++j) v += cost_[j] * x_[j];
    return v;
  }

  BasisHint basis() const { return {basis_, state_}; }

  // Installs a basis from an earlier solve of the same program. Returns false
  // (and falls back to a cold start on the next solve) if it is unusable.
  bool load_basis(const BasisHint& h) {
    if (h.basic.size() != m_ || h.state.size() != total()) {
      cold_ = true;
      return false;
    }
    basis_ = h.basic;
    state_ = h.state;
    for (std::size_t j = 0; j < total(); ++j)
      if (state_[j] != VarState::Basic) place_nonbasic(j, /*shift_basics=*/false);
    cur_ = phase_two_costs();
    if (!refactor()) {
      cold_ = true;
      return false;
    }
    cold_ = false;
    return true;
  }

  LpResult result() const {
    LpResult r;
    r.status = status_;
    r.iterations = iterations_;
    if (status_ == LpStatus::Optimal) {
      r.x = solution();
      r.objective = objective();
    }
    return r;
  }

 private:
  std::size_t total() const { return lo_.size(); }
  const Eigen::MatrixXd& A() const { return *base_; }
  Eigen::Index ix(std::size_t i) const { return static_cast<Eigen::Index>(i); }

  std::size_t iteration_limit() const {
    return opt_.max_iterations ? opt_.max_iterations : 50 * (m_ + total()) + 10000;
  }

  Eigen::VectorXd phase_two_costs() const {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(ix(total()));
    for (std::size_t j = 0; j < n_; ++j) c(ix(j)) = cost_[j] / cost_scale_;
    return c;
  }

  // Moves nonbasic column j onto a bound consistent with its reduced cost.
  void place_nonbasic(std::size_t j, bool shift_basics = true) {
    const bool lo_fin = std::isfinite(lo_[j]), hi_fin = std::isfinite(hi_[j]);
    const double dj = d_.size() == ix(total()) ? d_(ix(j)) : 0.0;
    VarState s = state_[j];
    if (!lo_fin && !hi_fin) s = VarState::Zero;
    else if (lo_fin && hi_fin) {
      if (s == VarState::Zero) s = dj < 0 ? VarState::Upper : VarState::Lower;
      if (lo_[j] == hi_[j]) s = dj < 0 ? VarState::Upper : VarState::Lower;
    } else s = lo_fin ? VarState::Lower : VarState::Upper;
    const double v = s == VarState::Lower ? lo_[j] : s == VarState::Upper ? hi_[j] : 0.0;
    state_[j] = s;
    if (shift_basics && T_.cols() == ix(total())) {
      const double delta = v - x_[j];
      if (delta != 0.0)
        for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] -= T_(ix(i), ix(j)) * delta;
    }
    x_[j] = v;
  }

  bool refactor() {
    Eigen::MatrixXd B(ix(m_), ix(m_));
    for (std::size_t i = 0; i < m_; ++i) B.col(ix(i)) = A().col(ix(basis_[i]));
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    if (m_ > 0) {
      lu.compute(B);
      if (!(lu.rcond() > 1e-13)) return false;
      T_ = lu.solve(A());
    } else {
      T_.resize(0, ix(total()));
    }
    Eigen::VectorXd rhs = b_;
    for (std::size_t j = 0; j < total(); ++j)
      if (state_[j] != VarState::Basic && x_[j] != 0.0) rhs -= A().col(ix(j)) * x_[j];
    if (m_ > 0) {
      const Eigen::VectorXd xb = lu.solve(rhs);
      for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] = xb(ix(i));
    }
    recompute_duals();
    since_refactor_ = 0;
    return true;
  }

  void recompute_duals() {
    Eigen::VectorXd cb(ix(m_));
    for (std::size_t i = 0; i < m_; ++i) cb(ix(i)) = cur_(ix(basis_[i]));
    d_ = cur_ - (cb.transpose() * T_).transpose();
    for (std::size_t i = 0; i < m_; ++i) d_(ix(basis_[i])) = 0.0;
  }

  // Column j enters at row r; the leaving column takes `leaving_state`.
  void pivot(std::size_t r, std::size_t j, VarState leaving_state) {
    const double piv = T_(ix(r), ix(j));
    const Eigen::RowVectorXd row = T_.row(ix(r)) / piv;
    const Eigen::VectorXd col = T_.col(ix(j));
    T_.noalias() -= col * row;
    T_.row(ix(r)) = row;
    d_ -= d_(ix(j)) * row.transpose();
    d_(ix(j)) = 0.0;
    state_[basis_[r]] = leaving_state;
    basis_[r] = j;
    state_[j] = VarState::Basic;
    ++iterations_;
    if (++since_refactor_ >= opt_.refactor_interval) refactor();
  }

  double primal_infeasibility() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t k = basis_[i];
      worst = std::max({worst, lo_[k] - x_[k], x_[k] - hi_[k]});
    }
    return worst;
  }

  double dual_infeasibility() const {
    double worst = 0.0;
    for (std::size_t j = 0; j < total(); ++j) {
      if (state_[j] == VarState::Basic || lo_[j] == hi_[j]) continue;
      const double dj = d_(ix(j));
      if (state_[j] == VarState::Lower) worst = std::max(worst, -dj);
      else if (state_[j] == VarState::Upper) worst = std::max(worst, dj);
      else worst = std::max(worst, std::abs(dj));
    }
    return worst;
  }

  void note_progress(bool degenerate) {
    if (degenerate) {
      if (++stalls_ > opt_.degenerate_limit) {
        bland_ = true;
        bland_used_ = true;
      }
    } else {
      stalls_ = 0;
      bland_ = false;
    }
  }

  // Primal simplex from a primal feasible basis under costs cur_.
  LpStatus primal() {
    const std::size_t limit = iteration_limit();
    for (std::size_t guard = 0;; ++guard) {
      if (guard > limit) return LpStatus::IterationLimit;
      std::size_t enter = total();
      int dir = 0;
      double best = 0.0;
      for (std::size_t j = 0; j < total(); ++j) {
        if (state_[j] == VarState::Basic || lo_[j] == hi_[j]) continue;
        const double dj = d_(ix(j));
        int dj_dir = 0;
        if (state_[j] == VarState::Lower && dj < -opt_.optimality_tol) dj_dir = 1;
        else if (state_[j] == VarState::Upper && dj > opt_.optimality_tol) dj_dir = -1;
        else if (state_[j] == VarState::Zero && std::abs(dj) > opt_.optimality_tol) dj_dir = dj < 0 ? 1 : -1;
        if (!dj_dir) continue;
        if (bland_) {
          enter = j;
          dir = dj_dir;
          break;
        }
        if (std::abs(dj) > best) {
          best = std::abs(dj);
          enter = j;
          dir = dj_dir;
        }
      }
      if (enter == total()) return LpStatus::Optimal;

      double step = kInf;
      std::size_t leave_row = m_;
      double leave_alpha = 0.0;
      if (std::isfinite(lo_[enter]) && std::isfinite(hi_[enter])) step = hi_[enter] - lo_[enter];
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = dir * T_(ix(i), ix(enter));
        const std::size_t k = basis_[i];
        double lim;
        if (a > opt_.pivot_tol && std::isfinite(lo_[k])) lim = std::max(0.0, (x_[k] - lo_[k]) / a);
        else if (a < -opt_.pivot_tol && std::isfinite(hi_[k])) lim = std::max(0.0, (hi_[k] - x_[k]) / -a);
        else continue;
        bool take = lim < step - 1e-12;
        if (!take && lim <= step + 1e-12 && leave_row < m_)
          take = bland_ ? k < basis_[leave_row] : std::abs(a) > std::abs(leave_alpha);
        if (take) {
          step = lim;
          leave_row = i;
          leave_alpha = a;
        }
      }
      if (!std::isfinite(step)) return LpStatus::Unbounded;
      note_progress(step <= 1e-12);

      x_[enter] += dir * step;
      if (step != 0.0)
        for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] -= dir * step * T_(ix(i), ix(enter));
      if (leave_row == m_) {
        state_[enter] = state_[enter] == VarState::Lower ? VarState::Upper : VarState::Lower;
        x_[enter] = state_[enter] == VarState::Lower ? lo_[enter] : hi_[enter];
        ++iterations_;
        continue;
      }
      const std::size_t k = basis_[leave_row];
      const bool to_lower = leave_alpha > 0;
      x_[k] = to_lower ? lo_[k] : hi_[k];
      pivot(leave_row, enter, to_lower ? VarState::Lower : VarState::Upper);
    }
  }

  // Dual simplex from a dual feasible basis under costs cur_.
  LpStatus dual_simplex() {
    const std::size_t limit = iteration_limit();
    for (std::size_t guard = 0;; ++guard) {
      if (guard > limit) return LpStatus::IterationLimit;
      std::size_t r = m_;
      double worst = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const std::size_t k = basis_[i];
        const double v = std::max(lo_[k] - x_[k], x_[k] - hi_[k]);
        if (v <= opt_.feasibility_tol) continue;
        if (bland_ ? (r == m_ || k < basis_[r]) : v > worst) {
          worst = v;
          r = i;
        }
      }
      if (r == m_) return LpStatus::Optimal;
      const std::size_t k = basis_[r];
      const bool raise = x_[k] < lo_[k];
      const double target = raise ? lo_[k] : hi_[k];

      std::size_t enter = total();
      double best_ratio = kInf, best_alpha = 0.0;
      for (std::size_t j = 0; j < total(); ++j) {
        if (state_[j] == VarState::Basic || lo_[j] == hi_[j]) continue;
        const double a = T_(ix(r), ix(j));
        if (std::abs(a) <= opt_.pivot_tol) continue;
        // x_k moves by -a * dx_j; raising x_k needs a*dx_j < 0.
        bool ok;
        if (state_[j] == VarState::Lower) ok = raise ? a < 0 : a > 0;
        else if (state_[j] == VarState::Upper) ok = raise ? a > 0 : a < 0;
        else ok = true;
        if (!ok) continue;
        const double ratio = std::abs(d_(ix(j))) / std::abs(a);
        const bool better = ratio < best_ratio - 1e-12 ||
                            (ratio <= best_ratio + 1e-12 && (bland_ ? j < enter : std::abs(a) > std::abs(best_alpha)));
        if (better) {
          best_ratio = ratio;
          best_alpha = a;
          enter = j;
        }
      }
      if (enter == total()) return LpStatus::Infeasible;
      note_progress(best_ratio <= 1e-12);

      const double dx = (x_[k] - target) / best_alpha;
      x_[enter] += dx;
      for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] -= T_(ix(i), ix(enter)) * dx;
      x_[k] = target;
      pivot(r, enter, raise ? VarState::Lower : VarState::Upper);
    }
  }

  // Primal simplex to optimality followed by a refactor and accuracy checks.
  LpStatus finish() {
    for (int attempt = 0; attempt < 4; ++attempt) {
      const LpStatus s = primal();
      if (s != LpStatus::Optimal) return s;
      if (!refactor()) return cold_solve();
      const bool primal_ok = primal_infeasibility() <= opt_.feasibility_tol;
      const bool dual_ok = dual_infeasibility() <= opt_.optimality_tol;
      if (primal_ok && dual_ok) return LpStatus::Optimal;
      if (!primal_ok && dual_ok) {
        const LpStatus ds = dual_simplex();
        if (ds != LpStatus::Optimal) return ds;
      }
    }
    return primal_infeasibility() <= 10 * opt_.feasibility_tol ? LpStatus::Optimal : LpStatus::IterationLimit;
  }

  LpStatus cold_solve() {
    // Drop artificials from any earlier cold start.
    const std::size_t base_cols = n_ + m_;
    if (A().cols() != ix(base_cols)) {
      base_ = std::make_shared<const Eigen::MatrixXd>(A().leftCols(ix(base_cols)));
      lo_.resize(base_cols);
      hi_.resize(base_cols);
    }
    x_.assign(base_cols, 0.0);
    state_.assign(base_cols, VarState::Lower);
    d_.resize(0);
    T_.resize(0, 0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (lo_[j] > hi_[j]) return status_ = LpStatus::Infeasible;
      place_nonbasic(j, false);
    }
    basis_.resize(m_);
    std::vector<std::size_t> artificial_rows;
    std::vector<double> artificial_sign;
    for (std::size_t i = 0; i < m_; ++i) {
      double s = b_(ix(i));
      for (std::size_t j = 0; j < n_; ++j)
        if (x_[j] != 0.0) s -= A()(ix(i), ix(j)) * x_[j];
      const std::size_t sk = n_ + i;
      if (s >= lo_[sk] - opt_.feasibility_tol && s <= hi_[sk] + opt_.feasibility_tol) {
        basis_[i] = sk;
        state_[sk] = VarState::Basic;
        x_[sk] = s;
      } else {
        const double parked = s < lo_[sk] ? lo_[sk] : hi_[sk];
        state_[sk] = s < lo_[sk] ? VarState::Lower : VarState::Upper;
        x_[sk] = parked;
        artificial_rows.push_back(i);
        artificial_sign.push_back(s - parked > 0 ? 1.0 : -1.0);
      }
    }
    if (!artificial_rows.empty()) {
      Eigen::MatrixXd a(ix(m_), ix(base_cols + artificial_rows.size()));
      a.leftCols(ix(base_cols)) = A();
      a.rightCols(ix(artificial_rows.size())).setZero();
      for (std::size_t q = 0; q < artificial_rows.size(); ++q) {
        const std::size_t col = base_cols + q, i = artificial_rows[q];
        a(ix(i), ix(col)) = artificial_sign[q];
        lo_.push_back(0.0);
        hi_.push_back(kInf);
        state_.push_back(VarState::Basic);
        x_.push_back(0.0);
        basis_[i] = col;
      }
      base_ = std::make_shared<const Eigen::MatrixXd>(std::move(a));
      cur_ = Eigen::VectorXd::Zero(ix(total()));
      for (std::size_t q = 0; q < artificial_rows.size(); ++q) cur_(ix(base_cols + q)) = 1.0;
      if (!refactor()) return status_ = LpStatus::IterationLimit;
      cold_ = false;
      const LpStatus p1 = primal();
      if (p1 != LpStatus::IterationLimit) refactor();
      double residual = 0.0;
      for (std::size_t q = 0; q < artificial_rows.size(); ++q) residual += std::abs(x_[base_cols + q]);
      // Artificials stay in the column set but are pinned to zero on every
      // exit, so a later warm start can never use them to absorb residuals.
      for (std::size_t q = 0; q < artificial_rows.size(); ++q) {
        const std::size_t col = base_cols + q;
        hi_[col] = 0.0;
        if (state_[col] != VarState::Basic) {
          state_[col] = VarState::Lower;
          x_[col] = 0.0;
        }
      }
      if (p1 == LpStatus::IterationLimit) return status_ = p1;
      if (residual > 10 * opt_.feasibility_tol * std::max(1.0, b_.cwiseAbs().maxCoeff()))
        return status_ = LpStatus::Infeasible;
    }
    cur_ = phase_two_costs();
    if (!refactor()) return status_ = LpStatus::IterationLimit;
    cold_ = false;
    return status_ = finish();
  }

  SimplexOptions opt_;
  std::size_t n_ = 0, m_ = 0;
  std::shared_ptr<const Eigen::MatrixXd> base_;
  Eigen::VectorXd b_;
  std::vector<double> cost_;
  double cost_scale_ = 1.0;
  double offset_ = 0.0;
  std::vector<double> lo_, hi_, x_;
  std::vector<VarState> state_;
  std::vector<std::size_t> basis_;
  Eigen::MatrixXd T_;
  Eigen::VectorXd cur_, d_;
  bool cold_ = true;
  bool bland_ = false;
  bool bland_used_ = false;
  std::size_t stalls_ = 0;
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;
  LpStatus status_ = LpStatus::Infeasible;
};

inline LpResult solve_lp(const LinearProgram& lp, SimplexOptions opt = {}) {
  SimplexSolver s(lp, opt);
  s.solve();
  return s.result();
}

}  // namespace gridfire::wrap
