#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace hspline {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double euler_gamma = std::numbers::egamma;

// sin(pi z) with exact zeros at the integers.
inline double sin_pi(double z) {
  double r = std::fmod(z, 2.0);
  if (r > 1.0) r -= 2.0;
  if (r < -1.0) r += 2.0;
  if (r == 0.0 || r == 1.0 || r == -1.0) return 0.0;
  if (r > 0.5) r = 1.0 - r;
  if (r < -0.5) r = -1.0 - r;
  return std::sin(pi * r);
}

inline double cos_pi(double z) { return sin_pi(z + 0.5); }

inline double sinc(double z) {
  if (std::abs(z) < 1e-8) return 1.0 - (pi * z) * (pi * z) / 6.0;
  return sin_pi(z) / (pi * z);
}

// (1 - cos a) / a^2, with the Taylor series near 0.
inline double one_minus_cos_over_sq(double a) {
  if (std::abs(a) < 1e-4) {
    const double a2 = a * a;
    return 0.5 - a2 / 24.0 + a2 * a2 / 720.0;
  }
  const double s = std::sin(0.5 * a);
  return 2.0 * s * s / (a * a);
}

// e^{i pi z}
inline cplx expi_pi(double z) { return {cos_pi(z), sin_pi(z)}; }

inline double digamma(double z) {
  if (!(z > 0.0)) throw std::domain_error("digamma: argument must be positive");
  double acc = 0.0;
  while (z < 10.0) {
    acc -= 1.0 / z;
    z += 1.0;
  }
  const double iz2 = 1.0 / (z * z);
  const double series =
      iz2 * (1.0 / 12 - iz2 * (1.0 / 120 - iz2 * (1.0 / 252 - iz2 * (1.0 / 240 - iz2 * (1.0 / 132 - iz2 * (691.0 / 32760))))));
  return acc + std::log(z) - 0.5 / z - series;
}

inline double polygamma3(double z) {
  if (!(z > 0.0)) throw std::domain_error("polygamma3: argument must be positive");
  double acc = 0.0;
  while (z < 12.0) {
    const double z2 = z * z;
    acc += 6.0 / (z2 * z2);
    z += 1.0;
  }
  const double iz = 1.0 / z;
  const double iz2 = iz * iz;
  const double tail = 2.0 + iz * (3.0 + iz * (2.0 + iz2 * (-1.0 + iz2 * (4.0 / 3.0 + iz2 * (-3.0 + iz2 * 10.0)))));
  return acc + tail * iz2 * iz;
}

}  // namespace hspline
