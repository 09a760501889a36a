#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>

#include "gridfire/cable/coefficients.hpp"
#include "gridfire/cable/dynamics.hpp"
#include "gridfire/core/error.hpp"
#include "gridfire/core/units.hpp"

namespace gridfire::risk {

// One line/weather combination in the units practitioners quote. Stored SI.
struct ScoreRequest {
  double span = 0.0;             // m
  double diameter = 0.0;         // m
  double wind_speed = 0.0;       // m/s, sustained
  double wind_gust = 0.0;        // m/s, gust amplitude
  double phase_clearance = 0.0;  // m
  double direction_deg = 0.0;    // [0, 360)

  static ScoreRequest from_field_units(double span_ft, double diameter_mm, double wind_mps, double gust_mps,
                                       double clearance_ft, double direction_deg) {
    return {units::feet_to_meters(span_ft), units::mm_to_meters(diameter_mm), wind_mps, gust_mps,
            units::feet_to_meters(clearance_ft), direction_deg};
  }
};

inline void validate(const ScoreRequest& r) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0; };
  auto nonneg = [](double v) { return std::isfinite(v) && v >= 0; };
  if (!positive(r.span)) throw InvalidArgument("ScoreRequest: span must be > 0");
  if (!positive(r.diameter)) throw InvalidArgument("ScoreRequest: diameter must be > 0");
  if (!positive(r.phase_clearance)) throw InvalidArgument("ScoreRequest: phase clearance must be > 0");
  if (!nonneg(r.wind_speed)) throw InvalidArgument("ScoreRequest: wind speed must be >= 0");
  if (!nonneg(r.wind_gust)) throw InvalidArgument("ScoreRequest: wind gust must be >= 0");
  if (!(r.direction_deg >= 0 && r.direction_deg < 360))
    throw InvalidArgument("ScoreRequest: direction must lie in [0, 360)");
}

// Default structural properties assigned to a span from its geometry.
//
// Mass and axial rigidity scale with the conductor cross-section. Tension
// follows a stringing rule H = H_ref * (L / L_ref)^p; with p > 2 the static
// sag shrinks with span, so longer spans are stiffer against blow-out. The
// constants are calibrated so that moderate winds leave the reference
// conductor clear of a 0.5 ft phase clearance and storm winds do not.
struct ConductorDefaults {
  double effective_density = 2100.0;    // kg/m^3 over the full circular section
  double effective_modulus = 50e9;      // Pa
  double reference_tension = 175e3;     // N
  double reference_span = units::feet_to_meters(300.0);
  double tension_exponent = 2.5;
  double damping_ratio = 0.02;
  double shape_factor = 1.0;
  cable::Adjacency adjacency = cable::Adjacency::HorizontalNeighbor;
};

enum class ThresholdRule { ClearanceMinusDiameter, Clearance };

struct SimConfig {
  cable::IntegrationSettings integration;
  ConductorDefaults conductor;
  double gust_length = 3000.0;     // m
  double air_density = 1.225;      // kg/m^3
  double in_plane_coupling = 0.0;  // wind loads only out-of-plane by default
  std::size_t segments = 20;
  ThresholdRule threshold_rule = ThresholdRule::ClearanceMinusDiameter;
};

inline cable::ConductorSpec conductor_for(const ScoreRequest& r, const ConductorDefaults& d) {
  const double area = std::numbers::pi * r.diameter * r.diameter / 4.0;
  cable::ConductorSpec s;
  s.span = r.span;
  s.diameter = r.diameter;
  s.phase_clearance = r.phase_clearance;
  s.mass_per_length = d.effective_density * area;
  s.axial_rigidity = d.effective_modulus * area;
  s.horizontal_tension = d.reference_tension * std::pow(r.span / d.reference_span, d.tension_exponent);
  s.damping_ratio = d.damping_ratio;
  s.shape_factor = d.shape_factor;
  s.adjacency = d.adjacency;
  return s;
}

inline cable::WindCondition wind_for(const ScoreRequest& r, const SimConfig& cfg) {
  cable::WindCondition w;
  w.sustained_speed = r.wind_speed;
  w.gust = {r.wind_gust, cfg.gust_length, 0.0};
  w.direction_deg = r.direction_deg;
  w.air_density = cfg.air_density;
  w.in_plane_coupling = cfg.in_plane_coupling;
  return w;
}

// Displacement beyond which adjacent phases are taken to touch: clearance
// less the conductor width, floored at a tenth of the clearance.
inline double clash_threshold(const cable::ConductorSpec& spec,
                              ThresholdRule rule = ThresholdRule::ClearanceMinusDiameter) {
  if (rule == ThresholdRule::Clearance) return spec.phase_clearance;
  return std::max(spec.phase_clearance - spec.diameter, 0.1 * spec.phase_clearance);
}

// Largest absolute generalized coordinates reached over the horizon.
struct PeakResponse {
  double in_plane = 0.0;
  double out_plane = 0.0;
  friend bool operator==(const PeakResponse&, const PeakResponse&) = default;
};

inline PeakResponse peak_response(const cable::ConductorSpec& spec, const cable::WindCondition& wind,
                                  const cable::IntegrationSettings& settings,
                                  const cable::CoefficientProvider& provider) {
  const cable::WindComponents peak_wind =
      cable::wind_components(wind, std::numeric_limits<double>::infinity());
  // Unloaded span at rest stays at equilibrium.
  if (peak_wind.in_plane == 0.0 && peak_wind.out_plane == 0.0) return {};
  const cable::ModalCoefficients coeffs = provider.coefficients(spec);
  PeakResponse peak;
  cable::integrate_rk4_visit(spec, wind, coeffs, cable::ModalState{}, settings, [&](const cable::ModalState& s) {
    peak.in_plane = std::max(peak.in_plane, std::abs(s.in_plane));
    peak.out_plane = std::max(peak.out_plane, std::abs(s.out_plane));
  });
  return peak;
}

struct ClashScore {
  double value = 0.0;
  std::size_t clashed_segments = 0;
  std::size_t total_segments = 0;
  friend bool operator==(const ClashScore&, const ClashScore&) = default;
};

// Counts segments whose midpoint displacement envelope exceeds the threshold.
inline ClashScore score_from_peak(const cable::ConductorSpec& spec, const PeakResponse& peak, std::size_t segments,
                                  ThresholdRule rule = ThresholdRule::ClearanceMinusDiameter) {
  if (segments < 2) throw InvalidArgument("segment count must be >= 2");
  const double amplitude =
      spec.adjacency == cable::Adjacency::HorizontalNeighbor ? peak.out_plane : peak.in_plane;
  const double threshold = clash_threshold(spec, rule);
  ClashScore score{0.0, 0, segments};
  for (std::size_t k = 0; k < segments; ++k) {
    const double y = (static_cast<double>(k) + 0.5) / static_cast<double>(segments) * spec.span;
    if (cable::mode_shape(y, spec.span) * amplitude > threshold) ++score.clashed_segments;
  }
  score.value = static_cast<double>(score.clashed_segments) / static_cast<double>(segments);
  return score;
}

inline ClashScore score_line(const ScoreRequest& req, const SimConfig& cfg = {},
                             const cable::CoefficientProvider& provider = cable::SagExtensibleProvider{}) {
  validate(req);
  const cable::ConductorSpec spec = conductor_for(req, cfg.conductor);
  try {
    const PeakResponse peak = peak_response(spec, wind_for(req, cfg), cfg.integration, provider);
    return score_from_peak(spec, peak, cfg.segments, cfg.threshold_rule);
  } catch (const DivergenceError& e) {
    throw ScoreUnavailable(std::string("score unavailable: ") + e.what());
  }
}

}  // namespace gridfire::risk
