#pragma once

#include <cmath>
#include <memory>
#include <numbers>

#include "gridfire/cable/conductor.hpp"

namespace gridfire::cable {

inline constexpr double kGravity = 9.80665;

// Terms of the in-plane modal equation
//   inertia*q'' + linear*q + quadratic*q^2 + quadratic_coupling*w^2
//   + cubic*q^3 + cubic_coupling*w^2*q + damping*q' = P
// where q is the in-plane and w the out-of-plane generalized coordinate.
struct InPlaneTerms {
  double inertia = 0, linear = 0, quadratic = 0, quadratic_coupling = 0;
  double cubic = 0, cubic_coupling = 0, damping = 0;
};

// Terms of the out-of-plane modal equation
//   inertia*w'' + linear*w + quadratic_coupling*q*w + cubic_coupling*q^2*w
//   + cubic*w^3 + damping*w' = P
struct OutOfPlaneTerms {
  double inertia = 0, linear = 0, quadratic_coupling = 0, cubic_coupling = 0;
  double cubic = 0, damping = 0;
};

struct ModalCoefficients {
  InPlaneTerms in_plane;
  OutOfPlaneTerms out_plane;
};

inline void validate(const ModalCoefficients& c) {
  if (!(c.in_plane.inertia > 0 && c.out_plane.inertia > 0))
    throw InvalidArgument("ModalCoefficients: inertia terms must be > 0");
  if (!(c.in_plane.damping >= 0 && c.out_plane.damping >= 0))
    throw InvalidArgument("ModalCoefficients: damping terms must be >= 0");
}

// Static sag of a parabolic span under self weight.
inline double static_sag(const ConductorSpec& s) {
  return s.mass_per_length * kGravity * s.span * s.span / (8.0 * s.horizontal_tension);
}

// Maps a conductor to the coefficients of its two coupled modal equations.
class CoefficientProvider {
 public:
  virtual ~CoefficientProvider() = default;
  virtual ModalCoefficients coefficients(const ConductorSpec& spec) const = 0;
};

// First symmetric mode sin(pi*y/L) of a shallow, extensible, sagging cable.
// The linear out-of-plane stiffness is the taut-string value; the in-plane
// one carries the elastic sag correction. Quadratic and cubic terms come from
// the dynamic tension increment EA/L * integral(z0'v' + (v'^2 + w'^2)/2),
// with z0 the parabolic static profile, so the restoring forces derive from
// a potential.
class SagExtensibleProvider final : public CoefficientProvider {
 public:
  ModalCoefficients coefficients(const ConductorSpec& spec) const override {
    validate(spec);
    constexpr double pi = std::numbers::pi;
    const double L = spec.span;
    const double H = spec.horizontal_tension;
    const double EA = spec.axial_rigidity;
    const double sag = static_sag(spec);
    const double L3 = L * L * L;

    ModalCoefficients c;
    const double inertia = spec.mass_per_length * L / 2.0;
    const double string_stiffness = H * pi * pi / L / 2.0;

    c.in_plane.inertia = inertia;
    c.in_plane.linear = string_stiffness + 256.0 * EA * sag * sag / (pi * pi * L3);
    c.in_plane.quadratic = 12.0 * pi * EA * sag / L3;
    c.in_plane.quadratic_coupling = 4.0 * pi * EA * sag / L3;
    c.in_plane.cubic = std::pow(pi, 4) * EA / (8.0 * L3);
    c.in_plane.cubic_coupling = c.in_plane.cubic;
    c.in_plane.damping = 2.0 * spec.damping_ratio * std::sqrt(inertia * c.in_plane.linear);

    c.out_plane.inertia = inertia;
    c.out_plane.linear = string_stiffness;
    c.out_plane.quadratic_coupling = 8.0 * pi * EA * sag / L3;
    c.out_plane.cubic_coupling = c.in_plane.cubic;
    c.out_plane.cubic = c.in_plane.cubic;
    c.out_plane.damping = 2.0 * spec.damping_ratio * std::sqrt(inertia * string_stiffness);
    return c;
  }
};

inline ModalCoefficients derive_coefficients(const ConductorSpec& spec) {
  return SagExtensibleProvider{}.coefficients(spec);
}

}  // namespace gridfire::cable
