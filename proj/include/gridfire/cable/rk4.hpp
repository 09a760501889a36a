#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace gridfire::cable {

// One classical fourth-order Runge-Kutta step for y' = f(t, y).
template <std::size_t N, class Rhs>
std::array<double, N> rk4_step(Rhs&& f, double t, const std::array<double, N>& y, double h) {
  auto axpy = [](const std::array<double, N>& a, double s, const std::array<double, N>& b) {
    std::array<double, N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + s * b[i];
    return r;
  };
  const std::array<double, N> k1 = f(t, y);
  const std::array<double, N> k2 = f(t + 0.5 * h, axpy(y, 0.5 * h, k1));
  const std::array<double, N> k3 = f(t + 0.5 * h, axpy(y, 0.5 * h, k2));
  const std::array<double, N> k4 = f(t + h, axpy(y, h, k3));
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i)
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

// Number of fixed steps of size h that fit in [0, T].
inline std::size_t step_count(double h, double horizon) {
  return static_cast<std::size_t>(std::floor(horizon / h + 1e-9));
}

// Fixed-step integration from t0 over `steps` steps; `observe(t, y)` is called
// for the initial point and after every step.
template <std::size_t N, class Rhs, class Observer>
std::array<double, N> rk4_integrate(Rhs&& f, std::array<double, N> y, double t0, double h,
                                    std::size_t steps, Observer&& observe) {
  observe(t0, y);
  for (std::size_t k = 1; k <= steps; ++k) {
    y = rk4_step(f, t0 + static_cast<double>(k - 1) * h, y, h);
    observe(t0 + static_cast<double>(k) * h, y);
  }
  return y;
}

}  // namespace gridfire::cable
