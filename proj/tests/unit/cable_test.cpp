#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "gridfire/cable/coefficients.hpp"
#include "gridfire/cable/conductor.hpp"
#include "gridfire/cable/dynamics.hpp"
#include "gridfire/cable/rk4.hpp"
#include "gridfire/cable/wind.hpp"
#include "gridfire/core/error.hpp"
#include "gridfire/risk/clash.hpp"

using namespace gridfire;
using namespace gridfire::cable;

namespace {

ConductorSpec default_spec(double span_ft = 300.0) {
  const auto req = risk::ScoreRequest::from_field_units(span_ft, 33.03, 20, 20, 0.5, 90);
  return risk::conductor_for(req, risk::ConductorDefaults{});
}

// Damped linear oscillator x'' + 2 z w x' + w^2 x = 0, x(0) = 1, x'(0) = 0.
struct Oscillator {
  double w = 2.0, z = 0.1;
  std::array<double, 2> operator()(double, const std::array<double, 2>& y) const {
    return {y[1], -2.0 * z * w * y[1] - w * w * y[0]};
  }
  double exact(double t) const {
    const double wd = w * std::sqrt(1 - z * z);
    return std::exp(-z * w * t) * (std::cos(wd * t) + z * w / wd * std::sin(wd * t));
  }
};

double oscillator_error(double h, double T) {
  Oscillator f;
  const auto steps = step_count(h, T);
  const auto y = rk4_integrate(f, std::array<double, 2>{1.0, 0.0}, 0.0, h, steps, [](double, const auto&) {});
  return std::abs(y[0] - f.exact(static_cast<double>(steps) * h));
}

}  // namespace

TEST(Gust, BranchValues) {
  const GustProfile g{10.0, 100.0, 0.0};
  EXPECT_DOUBLE_EQ(gust_velocity(g, -5.0), 0.0);
  EXPECT_NEAR(gust_velocity(g, 50.0), 5.0, 1e-12);
  EXPECT_DOUBLE_EQ(gust_velocity(g, 250.0), 10.0);
}

TEST(Gust, ContinuousAtBranchBoundaries) {
  const GustProfile g{17.0, 321.0, 12.5};
  for (double x : {g.onset, g.onset + g.length}) {
    EXPECT_LE(std::abs(gust_velocity(g, std::nextafter(x, -1e9)) - gust_velocity(g, x)), 1e-12);
    EXPECT_LE(std::abs(gust_velocity(g, std::nextafter(x, 1e9)) - gust_velocity(g, x)), 1e-12);
  }
}

TEST(Gust, StaysWithinAmplitude) {
  const GustProfile g{8.0, 40.0, 3.0};
  for (double x = -20; x <= 80; x += 0.37) {
    const double v = gust_velocity(g, x);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 8.0);
  }
}

TEST(Wind, ComponentExamples) {
  WindCondition w;
  w.sustained_speed = 20.0;
  w.direction_deg = 90.0;
  auto v = wind_components(w, 0.0);
  EXPECT_DOUBLE_EQ(v.in_plane, 0.0);
  EXPECT_DOUBLE_EQ(v.out_plane, 20.0);
  w.direction_deg = 0.0;
  v = wind_components(w, 0.0);
  EXPECT_DOUBLE_EQ(v.in_plane, 0.0);
  EXPECT_DOUBLE_EQ(v.out_plane, 0.0);
  w.direction_deg = 45.0;
  v = wind_components(w, 0.0);
  EXPECT_DOUBLE_EQ(v.in_plane, 0.0);
  EXPECT_NEAR(v.out_plane, 14.142, 1e-3);
}

TEST(Wind, MirrorDirectionsAreBitIdentical) {
  EXPECT_EQ(direction_factors(45.0), direction_factors(315.0));
  EXPECT_EQ(direction_factors(90.0), direction_factors(270.0));
  EXPECT_EQ(direction_factors(0.0), direction_factors(180.0));
}

TEST(Wind, CouplingLoadsInPlane) {
  WindCondition w;
  w.sustained_speed = 10.0;
  w.direction_deg = 0.0;
  w.in_plane_coupling = 0.5;
  EXPECT_DOUBLE_EQ(wind_components(w, 0.0).in_plane, 5.0);
}

TEST(Excitation, DragExamples) {
  ConductorSpec s = default_spec();
  s.diameter = 0.033;
  s.shape_factor = 1.0;
  WindCondition w;
  w.sustained_speed = 20.0;
  w.direction_deg = 90.0;
  EXPECT_NEAR(excitation(s, w, ModalState{}, 0.0).out_plane, 8.085, 5e-4);

  ModalState moving;
  moving.out_plane_rate = 20.0;
  EXPECT_DOUBLE_EQ(excitation(s, w, moving, 0.0).out_plane, 0.0);

  WindCondition w2 = w;
  w2.sustained_speed = 40.0;
  EXPECT_NEAR(excitation(s, w2, ModalState{}, 0.0).out_plane, 4.0 * excitation(s, w, ModalState{}, 0.0).out_plane,
              1e-12);
}

TEST(Excitation, ForceOpposesExcessConductorSpeed) {
  const ConductorSpec s = default_spec();
  WindCondition w;
  w.sustained_speed = 5.0;
  ModalState fast;
  fast.out_plane_rate = 8.0;
  EXPECT_LT(excitation(s, w, fast, 0.0).out_plane, 0.0);
}

TEST(Coefficients, InertiaScalesWithMass) {
  ConductorSpec s = default_spec();
  const auto a = derive_coefficients(s);
  s.mass_per_length *= 2.0;
  const auto b = derive_coefficients(s);
  EXPECT_DOUBLE_EQ(b.in_plane.inertia, 2.0 * a.in_plane.inertia);
  EXPECT_DOUBLE_EQ(b.out_plane.inertia, 2.0 * a.out_plane.inertia);
}

TEST(Coefficients, ZeroDampingRatioZeroesDamping) {
  ConductorSpec s = default_spec();
  s.damping_ratio = 0.0;
  const auto c = derive_coefficients(s);
  EXPECT_EQ(c.in_plane.damping, 0.0);
  EXPECT_EQ(c.out_plane.damping, 0.0);
}

TEST(Coefficients, OutOfPlaneFrequencyMatchesTautString) {
  const ConductorSpec s = default_spec(300.0);
  const auto c = derive_coefficients(s);
  const double omega = std::sqrt(c.out_plane.linear / c.out_plane.inertia);
  const double taut = std::numbers::pi / s.span * std::sqrt(s.horizontal_tension / s.mass_per_length);
  EXPECT_NEAR(omega / taut, 1.0, 1e-9);
}

TEST(Coefficients, InPlaneStiffnessCarriesSagCorrection) {
  const auto c = derive_coefficients(default_spec());
  EXPECT_GT(c.in_plane.linear, c.out_plane.linear);
}

TEST(Coefficients, RejectsNonPositiveTensionAndMass) {
  ConductorSpec s = default_spec();
  s.horizontal_tension = 0.0;
  EXPECT_THROW(derive_coefficients(s), InvalidArgument);
  s = default_spec();
  s.mass_per_length = -1.0;
  EXPECT_THROW(derive_coefficients(s), InvalidArgument);
}

TEST(ModalForcing, ProjectsOntoFirstMode) {
  ConductorSpec s = default_spec();
  s.span = 100.0;
  EXPECT_NEAR(modal_forcing(0.0, 1.0, s).out_plane, 63.662, 5e-4);
  EXPECT_EQ(modal_forcing(0.0, 1.0, s).in_plane, 0.0);
  EXPECT_NEAR(modal_forcing(0.0, 3.5, s).out_plane, 3.5 * modal_forcing(0.0, 1.0, s).out_plane, 1e-12);
}

TEST(OdeRhs, Examples) {
  const auto c = derive_coefficients(default_spec());
  const auto zero = ode_rhs(std::array<double, 4>{0, 0, 0, 0}, c, ModalForcing{});
  for (double v : zero) EXPECT_EQ(v, 0.0);

  ModalCoefficients lin;
  lin.in_plane.inertia = 3.0;
  lin.in_plane.linear = 12.0;
  lin.out_plane.inertia = 1.0;
  const auto d = ode_rhs(std::array<double, 4>{1, 0, 0, 0}, lin, ModalForcing{});
  EXPECT_DOUBLE_EQ(d[1], -4.0);

  ModalCoefficients coupled = lin;
  coupled.in_plane.quadratic_coupling = 2.0;
  const auto e0 = ode_rhs(std::array<double, 4>{0, 0, 0, 0}, coupled, ModalForcing{});
  const auto e1 = ode_rhs(std::array<double, 4>{0, 0, 0.5, 0}, coupled, ModalForcing{});
  EXPECT_NE(e0[1], e1[1]);
}

TEST(Rk4, ExponentialDecay) {
  auto f = [](double, const std::array<double, 1>& y) { return std::array<double, 1>{-y[0]}; };
  const auto y = rk4_integrate(f, std::array<double, 1>{1.0}, 0.0, 0.1, step_count(0.1, 1.0), [](double, const auto&) {});
  EXPECT_NEAR(y[0], 0.367879, 1e-6);
}

TEST(Rk4, HalvingStepCutsErrorFourthOrder) {
  const double e1 = oscillator_error(0.04, 5.0), e2 = oscillator_error(0.02, 5.0), e3 = oscillator_error(0.01, 5.0);
  EXPECT_GE(e1 / e2, 8.0);
  EXPECT_LE(e1 / e2, 32.0);
  EXPECT_GE(e2 / e3, 8.0);
  EXPECT_LE(e2 / e3, 32.0);
}

TEST(Rk4, NonlinearCableOrder) {
  ConductorSpec s = default_spec();
  const auto c = derive_coefficients(s);
  auto f = [&](double, const std::array<double, 4>& y) { return ode_rhs(y, c, ModalForcing{}); };
  auto run = [&](double h) {
    return rk4_integrate(f, std::array<double, 4>{0.2, 0.0, 0.5, 0.0}, 0.0, h, step_count(h, 4.0),
                         [](double, const auto&) {});
  };
  const auto a = run(0.004), b = run(0.002), d = run(0.001);
  const double order = std::log2(std::abs(a[2] - b[2]) / std::abs(b[2] - d[2]));
  EXPECT_GE(order, 3.5);
  EXPECT_LE(order, 4.5);
}

TEST(Integrate, TrajectoryLength) {
  const ConductorSpec s = default_spec();
  WindCondition w;
  w.sustained_speed = 12.0;
  const auto traj = integrate_rk4(s, w, derive_coefficients(s), ModalState{}, IntegrationSettings{0.01, 1.005, 1e3});
  EXPECT_EQ(traj.size(), 101u);
  EXPECT_EQ(traj.front(), ModalState{});
}

TEST(Integrate, CalmAtRestStaysAtRest) {
  const ConductorSpec s = default_spec();
  const auto traj = integrate_rk4(s, WindCondition{}, derive_coefficients(s), ModalState{}, IntegrationSettings{0.01, 5.0, 1e3});
  for (const auto& st : traj) {
    EXPECT_EQ(st.in_plane, 0.0);
    EXPECT_EQ(st.out_plane, 0.0);
  }
}

TEST(Integrate, LinearEnergyProxyDecays) {
  ConductorSpec s = default_spec();
  auto c = derive_coefficients(s);
  c.in_plane.quadratic = c.in_plane.quadratic_coupling = c.in_plane.cubic = c.in_plane.cubic_coupling = 0.0;
  c.out_plane.quadratic_coupling = c.out_plane.cubic_coupling = c.out_plane.cubic = 0.0;
  ModalState y0;
  y0.in_plane = 0.3;
  y0.out_plane = -0.4;
  y0.out_plane_rate = 1.0;
  const auto traj = integrate_rk4(s, WindCondition{}, c, y0, IntegrationSettings{0.01, 20.0, 1e3});
  auto energy = [&](const ModalState& x) {
    return c.in_plane.inertia * x.in_plane_rate * x.in_plane_rate + c.in_plane.linear * x.in_plane * x.in_plane +
           c.out_plane.inertia * x.out_plane_rate * x.out_plane_rate + c.out_plane.linear * x.out_plane * x.out_plane;
  };
  for (std::size_t k = 1; k < traj.size(); ++k) EXPECT_LE(energy(traj[k]), energy(traj[k - 1]) * (1 + 1e-9));
  EXPECT_LT(energy(traj.back()), 0.5 * energy(traj.front()));
}

TEST(Integrate, OutOfPlaneOddSymmetry) {
  const ConductorSpec s = default_spec();
  const auto c = derive_coefficients(s);
  ModalState a;
  a.in_plane = 0.1;
  a.out_plane = 0.3;
  a.out_plane_rate = -0.2;
  ModalState b = a;
  b.out_plane = -a.out_plane;
  b.out_plane_rate = -a.out_plane_rate;
  const IntegrationSettings set{0.01, 10.0, 1e3};
  const auto ta = integrate_rk4(s, WindCondition{}, c, a, set);
  const auto tb = integrate_rk4(s, WindCondition{}, c, b, set);
  for (std::size_t k = 0; k < ta.size(); ++k) {
    EXPECT_EQ(ta[k].out_plane, -tb[k].out_plane);
    EXPECT_EQ(ta[k].in_plane, tb[k].in_plane);
  }
}

TEST(Integrate, BitIdenticalReruns) {
  const ConductorSpec s = default_spec(700);
  WindCondition w;
  w.sustained_speed = 24.0;
  w.gust = {20.0, 3000.0, 0.0};
  const auto c = derive_coefficients(s);
  EXPECT_EQ(integrate_rk4(s, w, c, ModalState{}, IntegrationSettings{}),
            integrate_rk4(s, w, c, ModalState{}, IntegrationSettings{}));
}

TEST(Integrate, DivergenceGuardTrips) {
  const ConductorSpec s = default_spec();
  WindCondition w;
  w.sustained_speed = 30.0;
  EXPECT_THROW(integrate_rk4(s, w, derive_coefficients(s), ModalState{}, IntegrationSettings{0.01, 60.0, 1e-6}),
               DivergenceError);
}

TEST(Integrate, RejectsBadSettings) {
  const ConductorSpec s = default_spec();
  EXPECT_THROW(integrate_rk4(s, WindCondition{}, derive_coefficients(s), ModalState{}, IntegrationSettings{0.0, 1.0, 1e3}),
               InvalidArgument);
  EXPECT_THROW(integrate_rk4(s, WindCondition{}, derive_coefficients(s), ModalState{}, IntegrationSettings{0.1, 0.05, 1e3}),
               InvalidArgument);
}

TEST(Displacement, ModeShapeExamples) {
  const ConductorSpec s = default_spec();
  std::vector<ModalState> traj{{0.2, 0, -0.4, 0, 0.0}, {0.1, 0, 0.3, 0, 0.01}};
  for (double y : {0.0, s.span}) {
    for (const auto& d : displacement_field(traj, y, s)) {
      EXPECT_EQ(d.in_plane, 0.0);
      EXPECT_EQ(d.out_plane, 0.0);
    }
  }
  const auto mid = displacement_field(traj, s.span / 2, s);
  EXPECT_DOUBLE_EQ(mid[0].out_plane, -0.4);
  const auto quarter = displacement_field(traj, s.span / 4, s);
  EXPECT_NEAR(quarter[1].out_plane, 0.3 * 0.70710678, 1e-8);
  EXPECT_THROW(displacement_field(traj, s.span * 1.01, s), InvalidArgument);
  EXPECT_THROW(displacement_field(traj, -0.1, s), InvalidArgument);
}
