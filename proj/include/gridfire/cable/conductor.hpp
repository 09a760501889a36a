#pragma once

#include <cmath>
#include <string>

#include "gridfire/core/error.hpp"

namespace gridfire::cable {

// Which neighbouring phase a conductor can clash with. Horizontally adjacent
// phases meet through out-of-plane swing, vertically adjacent ones through
// in-plane motion.
enum class Adjacency { HorizontalNeighbor, VerticalNeighbor };

// Structural description of one span. All quantities SI.
struct ConductorSpec {
  double span = 0.0;                // m
  double diameter = 0.0;            // m, width facing the wind
  double phase_clearance = 0.0;     // m, centre-to-centre
  double mass_per_length = 0.0;     // kg/m
  double horizontal_tension = 0.0;  // N
  double damping_ratio = 0.0;       // structural, fraction of critical
  double shape_factor = 1.0;        // drag shape factor C_D
  double axial_rigidity = 0.0;      // EA in N; 0 disables stretching terms
  Adjacency adjacency = Adjacency::HorizontalNeighbor;
};

inline void validate(const ConductorSpec& s) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("ConductorSpec: ") + what);
  };
  require(std::isfinite(s.span) && s.span > 0, "span must be > 0");
  require(std::isfinite(s.diameter) && s.diameter > 0, "diameter must be > 0");
  require(std::isfinite(s.phase_clearance) && s.phase_clearance > 0, "phase clearance must be > 0");
  require(std::isfinite(s.mass_per_length) && s.mass_per_length > 0, "mass per length must be > 0");
  require(std::isfinite(s.horizontal_tension) && s.horizontal_tension > 0,
          "horizontal tension must be > 0");
  require(s.damping_ratio >= 0 && s.damping_ratio < 1, "damping ratio must lie in [0, 1)");
  require(s.shape_factor > 0 && s.shape_factor <= 3, "shape factor must lie in (0, 3]");
  require(std::isfinite(s.axial_rigidity) && s.axial_rigidity >= 0, "axial rigidity must be >= 0");
}

// One-minus-cosine discrete gust. `length` is the build-up distance and
// `onset` the travelled distance at which the build-up starts.
struct GustProfile {
  double amplitude = 0.0;  // m/s
  double length = 100.0;   // m
  double onset = 0.0;      // m
};

struct WindCondition {
  double sustained_speed = 0.0;  // m/s
  GustProfile gust;
  double direction_deg = 90.0;   // from the conductor axis, horizontal plane
  double air_density = 1.225;    // kg/m^3
  double in_plane_coupling = 0.0;  // share of the axial component loading in-plane
};

inline void validate(const WindCondition& w) {
  if (!(std::isfinite(w.sustained_speed) && w.sustained_speed >= 0))
    throw InvalidArgument("WindCondition: sustained speed must be >= 0");
  if (!(std::isfinite(w.gust.amplitude) && w.gust.amplitude >= 0))
    throw InvalidArgument("WindCondition: gust amplitude must be >= 0");
  if (!(std::isfinite(w.gust.length) && w.gust.length > 0))
    throw InvalidArgument("WindCondition: gust length must be > 0");
  if (!(std::isfinite(w.air_density) && w.air_density > 0))
    throw InvalidArgument("WindCondition: air density must be > 0");
  if (!std::isfinite(w.direction_deg)) throw InvalidArgument("WindCondition: direction must be finite");
  if (!(w.in_plane_coupling >= 0 && w.in_plane_coupling <= 1))
    throw InvalidArgument("WindCondition: in-plane coupling must lie in [0, 1]");
}

}  // namespace gridfire::cable
