#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include "gridfire/cable/conductor.hpp"

namespace gridfire::cable {

// Discrete 1-cosine gust speed at travelled distance x.
inline double gust_velocity(const GustProfile& gust, double x) {
  const double xi = x - gust.onset;
  if (xi < 0.0) return 0.0;
  if (xi > gust.length) return gust.amplitude;
  return 0.5 * gust.amplitude * (1.0 - std::cos(std::numbers::pi * xi / gust.length));
}

// |sin| and |cos| of a direction in degrees. The angle is folded into
// [0, 90] first so mirror-image directions (45 and 315, 90 and 270) yield
// bit-identical factors and multiples of 90 degrees are exact.
inline std::pair<double, double> direction_factors(double direction_deg) {
  double a = std::fmod(direction_deg, 360.0);
  if (a < 0) a += 360.0;
  if (a > 180.0) a = 360.0 - a;
  if (a > 90.0) a = 180.0 - a;
  if (a == 0.0) return {0.0, 1.0};
  if (a == 90.0) return {1.0, 0.0};
  const double r = a * std::numbers::pi / 180.0;
  return {std::sin(r), std::cos(r)};
}

struct WindComponents {
  double in_plane = 0.0;   // v_ax
  double out_plane = 0.0;  // v_az
};

// Splits the total wind (sustained + gust at x_travel) into the axis
// components that load the conductor.
inline WindComponents wind_components(const WindCondition& cond, double x_travel) {
  const double total = cond.sustained_speed + gust_velocity(cond.gust, x_travel);
  const auto [s, c] = direction_factors(cond.direction_deg);
  return {total * c * cond.in_plane_coupling, total * s};
}

}  // namespace gridfire::cable
