#pragma once

#include <numbers>

namespace gridfire::units {

inline constexpr double kMetersPerFoot = 0.3048;
inline constexpr double kMetersPerSecondPerMph = 0.44704;

constexpr double feet_to_meters(double ft) { return ft * kMetersPerFoot; }
constexpr double meters_to_feet(double m) { return m / kMetersPerFoot; }
constexpr double mm_to_meters(double mm) { return mm / 1000.0; }
constexpr double meters_to_mm(double m) { return m * 1000.0; }
constexpr double mph_to_mps(double mph) { return mph * kMetersPerSecondPerMph; }
constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace gridfire::units
