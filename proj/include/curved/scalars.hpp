#pragma once

// Curvature-scaled trigonometry shared by the surface and group layers.
//
// For curvature k the model trig functions are
//   cos_k(k, r) = cos(sqrt(k) r)        (k > 0)
//               = 1                      (k = 0)
//               = cosh(sqrt(-k) r)       (k < 0)
//   sin_k(k, r) = sin(sqrt(k) r)/sqrt(k), r, sinh(sqrt(-k) r)/sqrt(-k)
//   half_tan_k  = tan(sqrt(k) r / 2)/sqrt(k) = sin_k / (1 + cos_k)
// so that formulas written once in (cos_k, sin_k, half_tan_k) cover all three
// signs and are continuous in k at 0.  Near k r^2 = 0 the direct expressions
// lose relative accuracy ((cosh-1) cancellation, 0/0 scalings), so small
// arguments switch to the Taylor series in t = k r^2.

#include <cmath>
#include <limits>
#include <stdexcept>

namespace curved {

inline constexpr double kPi = 3.14159265358979323846;

namespace detail {
// |k r^2| below this uses the series branch; at the crossover the series
// truncation error and the cancellation error are both ~1e-18 relative.
inline constexpr double kSeriesCut = 1e-6;
}  // namespace detail

// cos(sqrt(k) r), analytically continued through k = 0.
inline double cos_k(double k, double r) {
  const double t = k * r * r;
  if (std::abs(t) < detail::kSeriesCut) {
    return 1.0 + t * (-0.5 + t * (1.0 / 24.0 - t / 720.0));
  }
  return k > 0 ? std::cos(std::sqrt(k) * r) : std::cosh(std::sqrt(-k) * r);
}

// sin(sqrt(k) r)/sqrt(k), analytically continued through k = 0 (value r).
inline double sin_k(double k, double r) {
  const double t = k * r * r;
  if (std::abs(t) < detail::kSeriesCut) {
    return r * (1.0 + t * (-1.0 / 6.0 + t * (1.0 / 120.0 - t / 5040.0)));
  }
  if (k > 0) return std::sin(std::sqrt(k) * r) / std::sqrt(k);
  return std::sinh(std::sqrt(-k) * r) / std::sqrt(-k);
}

// tan(sqrt(k) r / 2)/sqrt(k); the half-angle factor in swept-area rates.
// Identity half_tan_k = sin_k / (1 + cos_k) is exact for 1 + cos_k > 0,
// i.e. everywhere except the spherical antipode sqrt(k) r = pi.
inline double half_tan_k(double k, double r) {
  const double c = cos_k(k, r);
  if (c <= -1.0) {
    throw std::domain_error("half_tan_k: antipodal radius (sqrt(k) r = pi)");
  }
  return sin_k(k, r) / (1.0 + c);
}

// sqrt(k) * cot(sqrt(k) r) = cos_k / sin_k; radial drift factor.
inline double cot_k(double k, double r) {
  const double s = sin_k(k, r);
  if (s == 0.0) throw std::domain_error("cot_k: sin_k vanishes");
  return cos_k(k, r) / s;
}

// Wrap an angle into [0, 2*pi).
inline double wrap_angle_2pi(double a) {
  double w = std::fmod(a, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  if (w >= 2.0 * kPi) w = 0.0;  // fmod rounding at the seam
  return w;
}

// Wrap into (-pi, pi]; used for angle differences.
inline double wrap_angle_pm_pi(double a) {
  double w = std::remainder(a, 2.0 * kPi);  // (-pi, pi] up to sign of tie
  if (w <= -kPi) w = kPi;
  return w;
}

// Wrap a fiber coordinate into (-2*pi, 2*pi] (period 4*pi).
inline double wrap_fiber_4pi(double z) {
  double w = std::remainder(z, 4.0 * kPi);
  if (w <= -2.0 * kPi) w = 2.0 * kPi;
  return w;
}

}  // namespace curved
