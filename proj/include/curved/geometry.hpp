#pragma once

// Constant-curvature model surfaces in one chart-free ambient form.
//
// The surface of curvature k is realized as
//   k > 0 : sphere of radius 1/sqrt(k) in Euclidean R^3,
//   k = 0 : the plane z = 0,
//   k < 0 : upper hyperboloid <p,p>_M = 1/k (Minkowski form x^2+y^2-z^2),
// so every operation (distance, exponential map, transport, frames) is a few
// lines of ambient linear algebra, uniform in the sign of k via the scaled
// trig helpers in scalars.hpp.  Polar coordinates (phi, theta) are geodesic
// distance from a fixed pole and the angle around it.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "curved/scalars.hpp"

namespace curved::geom {

struct Curvature {
  double k = 0.0;
  double injectivity_radius = std::numeric_limits<double>::infinity();

  static Curvature of(double k) {
    if (!std::isfinite(k)) throw std::invalid_argument("Curvature: k must be finite");
    Curvature c;
    c.k = k;
    c.injectivity_radius =
        k > 0 ? kPi / std::sqrt(k) : std::numeric_limits<double>::infinity();
    return c;
  }
};

struct SurfacePoint {
  Eigen::Vector3d coords = Eigen::Vector3d::Zero();
};

struct TangentVec {
  SurfacePoint base;
  Eigen::Vector3d vec = Eigen::Vector3d::Zero();
};

// Orthonormal tangent frames at the two ends of the connecting geodesic:
// e1x points from x toward y, e1y points away from x (its transport), and
// e2* are the +90-degree rotations, so (e1, e2) is positively oriented.
struct FramePair {
  TangentVec e1x, e2x, e1y, e2y;
};

struct PolarCoords {
  double phi = 0.0;
  double theta = 0.0;
};

// Ambient pairing: Euclidean for k >= 0, Minkowski (+,+,-) for k < 0.
inline double form_dot(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                       const Curvature& c) {
  double d = a.x() * b.x() + a.y() * b.y();
  return c.k < 0 ? d - a.z() * b.z() : d + a.z() * b.z();
}

// Rotate a tangent vector at p by +90 degrees (the orientation in which the
// polar frame (d_phi, d_theta) is positive).
inline Eigen::Vector3d rotate90(const SurfacePoint& p, const Eigen::Vector3d& u,
                                const Curvature& c) {
  if (c.k == 0.0) return {-u.y(), u.x(), 0.0};
  const double s = std::sqrt(std::abs(c.k));
  Eigen::Vector3d w = (s * p.coords).cross(u);
  if (c.k < 0) w.z() = -w.z();  // Minkowski dual of the Euclidean cross product
  return w;
}

inline SurfacePoint embed(const PolarCoords& pc, const Curvature& c) {
  if (!std::isfinite(pc.phi) || !std::isfinite(pc.theta) || pc.phi < 0.0) {
    throw std::invalid_argument("embed: phi must be finite and >= 0");
  }
  if (c.k > 0 && pc.phi > c.injectivity_radius) {
    throw std::invalid_argument("embed: phi exceeds injectivity radius");
  }
  SurfacePoint p;
  if (c.k > 0) {
    const double s = std::sqrt(c.k);
    const double a = s * pc.phi;
    p.coords = Eigen::Vector3d(std::sin(a) * std::sin(pc.theta),
                               -std::sin(a) * std::cos(pc.theta), std::cos(a)) /
               s;
  } else if (c.k == 0.0) {
    p.coords = {pc.phi * std::cos(pc.theta), pc.phi * std::sin(pc.theta), 0.0};
  } else {
    const double s = std::sqrt(-c.k);
    const double a = s * pc.phi;
    p.coords = Eigen::Vector3d(std::sinh(a) * std::cos(pc.theta),
                               std::sinh(a) * std::sin(pc.theta), std::cosh(a)) /
               s;
  }
  return p;
}

inline SurfacePoint origin(const Curvature& c) { return embed({0.0, 0.0}, c); }

// Inverse chart.  theta is reported in [0, 2*pi), 0 at the pole.
inline PolarCoords polar_of(const SurfacePoint& p, const Curvature& c) {
  PolarCoords pc;
  if (c.k > 0) {
    const double s = std::sqrt(c.k);
    const Eigen::Vector3d q = s * p.coords;
    const double rxy = std::hypot(q.x(), q.y());
    pc.phi = std::atan2(rxy, q.z()) / s;
    pc.theta = rxy > 0 ? wrap_angle_2pi(std::atan2(q.x(), -q.y())) : 0.0;
  } else if (c.k == 0.0) {
    pc.phi = std::hypot(p.coords.x(), p.coords.y());
    pc.theta = pc.phi > 0 ? wrap_angle_2pi(std::atan2(p.coords.y(), p.coords.x())) : 0.0;
  } else {
    const double s = std::sqrt(-c.k);
    const Eigen::Vector3d q = s * p.coords;
    const double rxy = std::hypot(q.x(), q.y());
    pc.phi = std::asinh(rxy) / s;
    pc.theta = rxy > 0 ? wrap_angle_2pi(std::atan2(q.y(), q.x())) : 0.0;
  }
  return pc;
}

// Geodesic distance, stable at both the near and far ends of the range.
inline double distance(const SurfacePoint& x, const SurfacePoint& y,
                       const Curvature& c) {
  if (c.k == 0.0) {
    return std::hypot(x.coords.x() - y.coords.x(), x.coords.y() - y.coords.y());
  }
  const double s = std::sqrt(std::abs(c.k));
  const Eigen::Vector3d a = s * x.coords;
  const Eigen::Vector3d b = s * y.coords;
  if (c.k > 0) {
    return std::atan2(a.cross(b).norm(), a.dot(b)) / s;
  }
  // cosh(d) - 1 = <a-b, a-b>_M / 2, and the difference form is nonnegative.
  const Eigen::Vector3d d = a - b;
  const double q = std::max(0.0, form_dot(d, d, c));
  return 2.0 * std::asinh(0.5 * std::sqrt(q)) / s;
}

// Geodesic starting at v.base with initial velocity v.vec, evaluated at time 1.
inline SurfacePoint exp_map(const TangentVec& v, const Curvature& c) {
  const double n2 = form_dot(v.vec, v.vec, c);
  const double n = std::sqrt(std::max(0.0, n2));
  SurfacePoint out;
  if (n < 1e-300) {
    out.coords = v.base.coords + v.vec;
    return out;
  }
  const double scale = sin_k(c.k, n) / n;
  out.coords = v.base.coords * cos_k(c.k, n) + v.vec * scale;
  if (c.k != 0.0) {
    // Re-project to the model surface to stop rounding drift in long runs.
    const double r2 = form_dot(out.coords, out.coords, c);
    out.coords *= std::sqrt((1.0 / c.k) / r2);
  } else {
    out.coords.z() = 0.0;
  }
  return out;
}

// Initial velocity of the minimal geodesic from x to y (undefined at the
// spherical antipode, where the direction is ambiguous).
inline TangentVec log_map(const SurfacePoint& x, const SurfacePoint& y,
                          const Curvature& c) {
  const double rho = distance(x, y, c);
  TangentVec v;
  v.base = x;
  if (c.k > 0 && rho > c.injectivity_radius - 1e-9) {
    throw std::domain_error("log_map: points are (nearly) antipodal");
  }
  if (rho < 1e-300) {
    v.vec.setZero();
    return v;
  }
  Eigen::Vector3d perp;
  if (c.k == 0.0) {
    perp = y.coords - x.coords;
  } else {
    perp = y.coords - c.k * form_dot(x.coords, y.coords, c) * x.coords;
  }
  const double pn = std::sqrt(std::max(0.0, form_dot(perp, perp, c)));
  if (pn < 1e-300) {
    v.vec.setZero();
    return v;
  }
  v.vec = perp * (rho / pn);
  return v;
}

// Parallel transport of v along the minimal geodesic from x to y.
inline TangentVec parallel_transport(const SurfacePoint& x, const SurfacePoint& y,
                                     const TangentVec& v, const Curvature& c) {
  const double rho = distance(x, y, c);
  TangentVec out;
  out.base = y;
  if (rho < 1e-12) {
    out.vec = v.vec;
    return out;
  }
  const Eigen::Vector3d tx = log_map(x, y, c).vec / rho;
  const Eigen::Vector3d ty = -log_map(y, x, c).vec / rho;
  const double a = form_dot(v.vec, tx, c);
  const Eigen::Vector3d binormal = v.vec - a * tx;  // fixed by the transport
  out.vec = a * ty + binormal;
  return out;
}

// Frames at both ends of the connecting geodesic; rejects degenerate spans.
inline FramePair frame_pair(const SurfacePoint& x, const SurfacePoint& y,
                            const Curvature& c) {
  const double rho = distance(x, y, c);
  if (rho < 1e-9) throw std::domain_error("frame_pair: points nearly coincide");
  if (c.k > 0 && rho > c.injectivity_radius - 1e-9) {
    throw std::domain_error("frame_pair: points nearly antipodal");
  }
  FramePair f;
  f.e1x.base = x;
  f.e1x.vec = log_map(x, y, c).vec / rho;
  f.e2x.base = x;
  f.e2x.vec = rotate90(x, f.e1x.vec, c);
  f.e1y.base = y;
  f.e1y.vec = -log_map(y, x, c).vec / rho;
  f.e2y.base = y;
  f.e2y.vec = rotate90(y, f.e1y.vec, c);
  return f;
}

struct DerivPair {
  double grad = 0.0;
  double hess = 0.0;
};

// First and second derivatives of the distance R(x, y) along tangent
// directions u at x and v at y, expressed in the connecting frames:
//   dR   = v1 - u1
//   d2R  = ((u2^2 + v2^2) cos_k(R) - 2 u2 v2) / sin_k(R)
// (the second-order term is the index form of the transverse components).
inline DerivPair distance_derivatives(const SurfacePoint& x, const SurfacePoint& y,
                                      const TangentVec& u, const TangentVec& v,
                                      const Curvature& c) {
  const FramePair f = frame_pair(x, y, c);
  const double rho = distance(x, y, c);
  const double u1 = form_dot(u.vec, f.e1x.vec, c);
  const double u2 = form_dot(u.vec, f.e2x.vec, c);
  const double v1 = form_dot(v.vec, f.e1y.vec, c);
  const double v2 = form_dot(v.vec, f.e2y.vec, c);
  DerivPair d;
  d.grad = v1 - u1;
  d.hess = ((u2 * u2 + v2 * v2) * cos_k(c.k, rho) - 2.0 * u2 * v2) / sin_k(c.k, rho);
  return d;
}

// Same for the swept-area functional A (area between nearby connecting
// geodesics, normalized at the midpoint scale):
//   dA   = half_tan_k(R) (u2 + v2)
//   d2A  = (u2 v1 - v2 u1) * 2/(1 + cos_k(R)) + k half_tan_k(R)^2 (v2 v1 - u2 u1)
inline DerivPair area_derivatives(const SurfacePoint& x, const SurfacePoint& y,
                                  const TangentVec& u, const TangentVec& v,
                                  const Curvature& c) {
  const FramePair f = frame_pair(x, y, c);
  const double rho = distance(x, y, c);
  const double u1 = form_dot(u.vec, f.e1x.vec, c);
  const double u2 = form_dot(u.vec, f.e2x.vec, c);
  const double v1 = form_dot(v.vec, f.e1y.vec, c);
  const double v2 = form_dot(v.vec, f.e2y.vec, c);
  const double htk = half_tan_k(c.k, rho);
  DerivPair d;
  d.grad = htk * (u2 + v2);
  d.hess = (u2 * v1 - v2 * u1) * 2.0 / (1.0 + cos_k(c.k, rho)) +
           c.k * htk * htk * (v2 * v1 - u2 * u1);
  return d;
}

// Unsigned area of the geodesic triangle with the given vertices, from the
// side lengths alone (spherical/hyperbolic excess; Heron in the flat case).
inline double triangle_area(const SurfacePoint& pole, const SurfacePoint& x,
                            const SurfacePoint& y, const Curvature& c) {
  const double a = distance(pole, x, c);
  const double b = distance(pole, y, c);
  const double d = distance(x, y, c);
  if (c.k == 0.0) {
    const double s = 0.5 * (a + b + d);
    const double h = s * (s - a) * (s - b) * (s - d);
    return std::sqrt(std::max(0.0, h));
  }
  const double s = std::sqrt(std::abs(c.k));
  const double ca = cos_k(c.k, a), cb = cos_k(c.k, b), cd = cos_k(c.k, d);
  double denom;
  if (c.k > 0) {
    denom = 4.0 * std::cos(0.5 * s * a) * std::cos(0.5 * s * b) * std::cos(0.5 * s * d);
  } else {
    denom = 4.0 * std::cosh(0.5 * s * a) * std::cosh(0.5 * s * b) * std::cosh(0.5 * s * d);
  }
  if (denom <= 0.0) throw std::domain_error("triangle_area: degenerate spherical side");
  double ratio = (1.0 + ca + cb + cd) / denom;
  ratio = std::min(1.0, std::max(-1.0, ratio));
  const double excess = 2.0 * std::acos(ratio);  // unit-curvature area
  return excess / std::abs(c.k);
}

}  // namespace curved::geom
