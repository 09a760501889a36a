#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "gridfire/cable/coefficients.hpp"
#include "gridfire/cable/conductor.hpp"
#include "gridfire/cable/rk4.hpp"
#include "gridfire/cable/wind.hpp"
#include "gridfire/core/error.hpp"

namespace gridfire::cable {

// First-order state of one span: generalized coordinates and their rates.
struct ModalState {
  double in_plane = 0.0;        // m
  double in_plane_rate = 0.0;   // m/s
  double out_plane = 0.0;       // m
  double out_plane_rate = 0.0;  // m/s
  double time = 0.0;            // s

  std::array<double, 4> vec() const { return {in_plane, in_plane_rate, out_plane, out_plane_rate}; }
  static ModalState from(const std::array<double, 4>& y, double t) { return {y[0], y[1], y[2], y[3], t}; }
  friend bool operator==(const ModalState&, const ModalState&) = default;
};

struct ModalForcing {
  double in_plane = 0.0;
  double out_plane = 0.0;
};

// Distributed wind load per unit length (N/m).
struct DistributedLoad {
  double in_plane = 0.0;   // P(x, t)
  double out_plane = 0.0;  // P(z, t)
};

// Drag load from the wind speed relative to the midspan conductor velocity.
// The square keeps the sign of the relative speed, so a conductor moving
// faster than the air is pushed back.
inline DistributedLoad excitation(const ConductorSpec& spec, const WindCondition& cond,
                                  const ModalState& state, double x_travel) {
  const WindComponents v = wind_components(cond, x_travel);
  const double k = 0.5 * cond.air_density * spec.diameter * spec.shape_factor;
  // The mode shape is 1 at midspan, so midspan velocities equal the modal rates.
  const double rel_x = v.in_plane - state.in_plane_rate;
  const double rel_z = v.out_plane - state.out_plane_rate;
  return {k * rel_x * std::abs(rel_x), k * rel_z * std::abs(rel_z)};
}

// Projects a uniform load onto the sin(pi*y/L) mode: integral over the span.
inline ModalForcing modal_forcing(double load_in_plane, double load_out_plane, const ConductorSpec& spec) {
  const double projection = 2.0 * spec.span / std::numbers::pi;
  return {load_in_plane * projection, load_out_plane * projection};
}

inline std::array<double, 4> ode_rhs(const std::array<double, 4>& y, const ModalCoefficients& c,
                                     const ModalForcing& p) {
  const double q = y[0], dq = y[1], w = y[2], dw = y[3];
  const InPlaneTerms& a = c.in_plane;
  const OutOfPlaneTerms& b = c.out_plane;
  const double ddq = (p.in_plane - a.linear * q - a.quadratic * q * q - a.quadratic_coupling * w * w -
                      a.cubic * q * q * q - a.cubic_coupling * w * w * q - a.damping * dq) /
                     a.inertia;
  const double ddw = (p.out_plane - b.linear * w - b.quadratic_coupling * q * w -
                      b.cubic_coupling * q * q * w - b.cubic * w * w * w - b.damping * dw) /
                     b.inertia;
  return {dq, ddq, dw, ddw};
}

inline std::array<double, 4> ode_rhs(const ModalState& s, const ModalCoefficients& c, const ModalForcing& p) {
  return ode_rhs(s.vec(), c, p);
}

struct IntegrationSettings {
  double step = 0.01;              // s
  double horizon = 60.0;           // s
  double divergence_guard = 1e3;   // bound on |state component|
};

inline void validate(const IntegrationSettings& s) {
  if (!(s.step > 0 && std::isfinite(s.step))) throw InvalidArgument("integration step must be > 0");
  if (!(s.horizon >= s.step && std::isfinite(s.horizon)))
    throw InvalidArgument("integration horizon must be >= step");
  if (!(s.divergence_guard > 0)) throw InvalidArgument("divergence guard must be > 0");
}

// Full right-hand side with forcing re-evaluated from the current state and
// the gust position, which advances with the sustained wind.
struct CableSystem {
  const ConductorSpec& spec;
  const WindCondition& wind;
  const ModalCoefficients& coeffs;

  std::array<double, 4> operator()(double t, const std::array<double, 4>& y) const {
    const ModalState s = ModalState::from(y, t);
    const DistributedLoad load = excitation(spec, wind, s, wind.sustained_speed * t);
    return ode_rhs(y, coeffs, modal_forcing(load.in_plane, load.out_plane, spec));
  }
};

namespace detail {
inline void check_state(const std::array<double, 4>& y, double t, double guard) {
  for (double v : y) {
    if (!std::isfinite(v) || std::abs(v) > guard)
      throw DivergenceError("modal state left the admissible region at t=" + std::to_string(t) + " s");
  }
}
}  // namespace detail

// Streams every state of the trajectory to `observe` without storing it.
template <class Observer>
void integrate_rk4_visit(const ConductorSpec& spec, const WindCondition& cond, const ModalCoefficients& coeffs,
                         const ModalState& y0, const IntegrationSettings& settings, Observer&& observe) {
  validate(settings);
  validate(coeffs);
  const CableSystem system{spec, cond, coeffs};
  const std::size_t steps = step_count(settings.step, settings.horizon);
  rk4_integrate(system, y0.vec(), y0.time, settings.step, steps,
                [&](double t, const std::array<double, 4>& y) {
                  detail::check_state(y, t, settings.divergence_guard);
                  observe(ModalState::from(y, t));
                });
}

// Trajectory of floor(T/h) + 1 states starting at y0.
inline std::vector<ModalState> integrate_rk4(const ConductorSpec& spec, const WindCondition& cond,
                                             const ModalCoefficients& coeffs, const ModalState& y0,
                                             const IntegrationSettings& settings) {
  std::vector<ModalState> traj;
  traj.reserve(step_count(settings.step, settings.horizon) + 1);
  integrate_rk4_visit(spec, cond, coeffs, y0, settings, [&](const ModalState& s) { traj.push_back(s); });
  return traj;
}

struct Displacement {
  double time = 0.0;
  double in_plane = 0.0;   // m
  double out_plane = 0.0;  // m
};

// Mode-shape factor sin(pi*y/L) at position y along the span.
inline double mode_shape(double y, double span) {
  if (!(y >= 0.0 && y <= span)) throw InvalidArgument("position must lie within [0, span]");
  if (y == 0.0 || y == span) return 0.0;
  return std::sin(std::numbers::pi * y / span);
}

// Physical displacement at position y for every state of a trajectory.
inline std::vector<Displacement> displacement_field(const std::vector<ModalState>& traj, double y,
                                                    const ConductorSpec& spec) {
  const double phi = mode_shape(y, spec.span);
  std::vector<Displacement> out;
  out.reserve(traj.size());
  for (const ModalState& s : traj) out.push_back({s.time, phi * s.in_plane, phi * s.out_plane});
  return out;
}

}  // namespace gridfire::cable
