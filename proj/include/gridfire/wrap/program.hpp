#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gridfire/core/error.hpp"

namespace gridfire::wrap {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense : std::uint8_t { LessEqual, GreaterEqual, Equal };

struct Constraint {
  std::vector<std::pair<std::size_t, double>> terms;  // (column, coefficient)
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
  std::string name;
};

// min c'x + offset  s.t.  rows,  lower <= x <= upper.
struct LinearProgram {
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> names;
  std::vector<Constraint> rows;
  double objective_offset = 0.0;

  std::size_t num_vars() const { return cost.size(); }
  std::size_t num_rows() const { return rows.size(); }

  std::size_t add_var(double lo, double hi, double c, std::string name = {}) {
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    names.push_back(std::move(name));
    return cost.size() - 1;
  }
  std::size_t add_row(std::vector<std::pair<std::size_t, double>> terms, Sense sense, double rhs,
                      std::string name = {}) {
    rows.push_back({std::move(terms), sense, rhs, std::move(name)});
    return rows.size() - 1;
  }

  double objective(const std::vector<double>& x) const {
    double v = objective_offset;
    for (std::size_t j = 0; j < cost.size(); ++j) v += cost[j] * x[j];
    return v;
  }

  // Largest bound or row violation at x (0 when feasible).
  double max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < cost.size(); ++j)
      worst = std::max({worst, lower[j] - x[j], x[j] - upper[j]});
    for (const auto& r : rows) {
      double lhs = 0.0;
      for (const auto& [j, a] : r.terms) lhs += a * x[j];
      if (r.sense != Sense::GreaterEqual) worst = std::max(worst, lhs - r.rhs);
      if (r.sense != Sense::LessEqual) worst = std::max(worst, r.rhs - lhs);
    }
    return worst;
  }

  void check() const {
    const std::size_t n = cost.size();
    if (lower.size() != n || upper.size() != n || names.size() != n)
      throw InvalidArgument("linear program: column arrays differ in length");
    for (std::size_t j = 0; j < n; ++j)
      if (std::isnan(lower[j]) || std::isnan(upper[j]) || !std::isfinite(cost[j]) || lower[j] == kInf ||
          upper[j] == -kInf)
        throw InvalidArgument("linear program: bad bounds or cost on column " + std::to_string(j));
    for (const auto& r : rows) {
      if (!std::isfinite(r.rhs)) throw InvalidArgument("linear program: non-finite right-hand side");
      for (const auto& [j, a] : r.terms)
        if (j >= n || !std::isfinite(a)) throw InvalidArgument("linear program: bad row term");
    }
  }
};

// A linear program whose flagged columns must take integer values.
struct MixedIntegerProgram : LinearProgram {
  std::vector<std::uint8_t> integer;

  std::size_t add_int_var(double lo, double hi, double c, std::string name = {}) {
    const std::size_t j = add_var(lo, hi, c, std::move(name));
    integer.resize(num_vars(), 0);
    integer[j] = 1;
    return j;
  }
  std::size_t add_var(double lo, double hi, double c, std::string name = {}) {
    const std::size_t j = LinearProgram::add_var(lo, hi, c, std::move(name));
    integer.resize(num_vars(), 0);
    return j;
  }
  std::size_t num_integer() const { return static_cast<std::size_t>(std::count(integer.begin(), integer.end(), 1)); }
  bool is_integer(std::size_t j) const { return j < integer.size() && integer[j]; }
};

}  // namespace gridfire::wrap
