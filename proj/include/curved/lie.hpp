#pragma once

// Matrix groups over the model surfaces: SU(2) (covering the sphere via the
// Hopf fibration) and SL(2,R) (covering the hyperbolic plane via the Mobius
// action on the upper half-plane), with a common three-parameter cylindrical
// chart g = exp(phi (cos(theta) X + sin(theta) Y)) exp(z Z).
//
// Basis convention (half-Pauli style), fixed so the brackets close as
//   SU(2):  [X,Y] = Z,  [Y,Z] = X,  [Z,X] = Y
//   SL(2):  [X,Y] = Z,  [Y,Z] = -X, [Z,X] = -Y
// and the fiber coordinate z has period 4*pi in both groups.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "curved/geometry.hpp"
#include "curved/scalars.hpp"

namespace curved::lie {

enum class GroupKind { SU2, SL2 };

struct GroupElement {
  GroupKind kind = GroupKind::SU2;
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
};

// Coefficients on the ordered basis (X, Y, Z).
struct AlgebraVec {
  double a = 0.0, b = 0.0, c = 0.0;
};

struct CylCoords {
  double phi = 0.0;    // horizontal radius: [0, pi] for SU2, [0, inf) for SL2
  double theta = 0.0;  // horizontal direction, [0, 2*pi)
  double z = 0.0;      // fiber coordinate, (-2*pi, 2*pi]
};

// Cylindrical chart output with degeneracy flags: theta is meaningless on the
// fiber axis (phi = 0) and z is meaningless at the SU2 equatorial seam
// (phi = pi); the corresponding fields are set to 0 when undefined.
struct CylDecomp {
  CylCoords c;
  bool theta_defined = true;
  bool z_defined = true;
};

inline std::array<Eigen::Matrix2cd, 3> basis(GroupKind kind) {
  using C = std::complex<double>;
  const C i(0.0, 1.0);
  Eigen::Matrix2cd X, Y, Z;
  if (kind == GroupKind::SU2) {
    X << C(0), C(0.5), C(-0.5), C(0);
    Y << C(0), 0.5 * i, 0.5 * i, C(0);
    Z << 0.5 * i, C(0), C(0), -0.5 * i;
  } else {
    X << C(0.5), C(0), C(0), C(-0.5);
    Y << C(0), C(-0.5), C(-0.5), C(0);
    Z << C(0), C(-0.5), C(0.5), C(0);
  }
  return {X, Y, Z};
}

inline Eigen::Matrix2cd algebra_matrix(const AlgebraVec& v, GroupKind kind) {
  const auto B = basis(kind);
  return v.a * B[0] + v.b * B[1] + v.c * B[2];
}

// Closed-form exponential.  With M = aX + bY + cZ one has M^2 = D * I for
//   D = -(a^2+b^2+c^2)/4  (SU2),   D = (a^2+b^2-c^2)/4  (SL2),
// so exp(M) = C(D) I + S(D) M with C(D) = cosh(sqrt(D)) (cos for D < 0) and
// S(D) = sinh(sqrt(D))/sqrt(D); a short series covers the D ~ 0 crossover.
inline GroupElement alg_exp(const AlgebraVec& v, GroupKind kind) {
  const double sq = v.a * v.a + v.b * v.b;
  const double D = kind == GroupKind::SU2 ? -(sq + v.c * v.c) / 4.0
                                          : (sq - v.c * v.c) / 4.0;
  double C, S;
  if (std::abs(D) < 1e-6) {
    C = 1.0 + D * (0.5 + D * (1.0 / 24.0 + D / 720.0));
    S = 1.0 + D * (1.0 / 6.0 + D * (1.0 / 120.0 + D / 5040.0));
  } else if (D > 0) {
    const double w = std::sqrt(D);
    C = std::cosh(w);
    S = std::sinh(w) / w;
  } else {
    const double w = std::sqrt(-D);
    C = std::cos(w);
    S = std::sin(w) / w;
  }
  GroupElement g;
  g.kind = kind;
  g.m = C * Eigen::Matrix2cd::Identity() + S * algebra_matrix(v, kind);
  return g;
}

inline GroupElement identity(GroupKind kind) {
  GroupElement g;
  g.kind = kind;
  return g;
}

inline GroupElement group_mul(const GroupElement& g, const GroupElement& h) {
  if (g.kind != h.kind) throw std::invalid_argument("group_mul: mixed group kinds");
  GroupElement out;
  out.kind = g.kind;
  out.m = g.m * h.m;
  return out;
}

// Adjugate inverse: exact given det = 1, and for SU2 identical to the adjoint.
inline GroupElement inverse(const GroupElement& g) {
  GroupElement out;
  out.kind = g.kind;
  out.m << g.m(1, 1), -g.m(0, 1), -g.m(1, 0), g.m(0, 0);
  return out;
}

// How far the matrix is from the group: |det - 1|, plus the unitarity defect
// (SU2) or the imaginary-part magnitude (SL2).
inline double group_residual(const GroupElement& g) {
  double r = std::abs(g.m.determinant() - std::complex<double>(1.0, 0.0));
  if (g.kind == GroupKind::SU2) {
    r += (g.m * g.m.adjoint() - Eigen::Matrix2cd::Identity()).norm();
  } else {
    r += std::abs(g.m(0, 0).imag()) + std::abs(g.m(0, 1).imag()) +
         std::abs(g.m(1, 0).imag()) + std::abs(g.m(1, 1).imag());
  }
  return r;
}

inline GroupElement from_cylindrical(const CylCoords& c, GroupKind kind) {
  if (!(c.phi >= 0.0) || (kind == GroupKind::SU2 && c.phi > kPi + 1e-12)) {
    throw std::invalid_argument("from_cylindrical: phi out of range");
  }
  GroupElement g;
  g.kind = kind;
  const double h = 0.5 * c.phi;
  if (kind == GroupKind::SU2) {
    using C = std::complex<double>;
    const C ez = std::polar(1.0, 0.5 * c.z);
    const C et = std::polar(1.0, c.theta - 0.5 * c.z);
    const double ch = std::cos(h), sh = std::sin(h);
    g.m << ch * ez, et * sh, -std::conj(et) * sh, ch * std::conj(ez);
  } else {
    const double ch = std::cosh(h), sh = std::sinh(h);
    const double cz = std::cos(0.5 * c.z), sz = std::sin(0.5 * c.z);
    const double ct = std::cos(c.theta + 0.5 * c.z), st = std::sin(c.theta + 0.5 * c.z);
    g.m << ch * cz + sh * ct, -ch * sz - sh * st, ch * sz - sh * st,
        ch * cz - sh * ct;
  }
  return g;
}

inline CylDecomp to_cylindrical(const GroupElement& g) {
  CylDecomp d;
  constexpr double tol = 1e-14;
  if (g.kind == GroupKind::SU2) {
    const std::complex<double> m00 = g.m(0, 0), m01 = g.m(0, 1);
    const double c = std::abs(m00), s = std::abs(m01);
    d.c.phi = 2.0 * std::atan2(s, c);
    d.z_defined = c > tol;
    d.c.z = d.z_defined ? 2.0 * std::arg(m00) : 0.0;
    d.theta_defined = s > tol;
    d.c.theta = d.theta_defined ? wrap_angle_2pi(std::arg(m01) + 0.5 * d.c.z) : 0.0;
  } else {
    const double p = 0.5 * (g.m(0, 0).real() + g.m(1, 1).real());
    const double q = 0.5 * (g.m(1, 0).real() - g.m(0, 1).real());
    const double r = 0.5 * (g.m(0, 0).real() - g.m(1, 1).real());
    const double s = -0.5 * (g.m(0, 1).real() + g.m(1, 0).real());
    const double sh = std::hypot(r, s);  // sinh(phi/2)
    d.c.phi = 2.0 * std::asinh(sh);
    d.c.z = 2.0 * std::atan2(q, p);  // cosh(phi/2) > 0 keeps (p,q) off origin
    d.theta_defined = sh > tol;
    d.c.theta = d.theta_defined ? wrap_angle_2pi(std::atan2(s, r) - 0.5 * d.c.z) : 0.0;
  }
  return d;
}

// Relative position: cylindrical coordinates of x^{-1} y.
inline CylDecomp relative_cylindrical(const GroupElement& x, const GroupElement& y) {
  return to_cylindrical(group_mul(inverse(x), y));
}

// Distance-like gauge on the group adapted to the horizontal/vertical split:
// phi^2 + |z| of the cylindrical decomposition (z already wrapped).
inline double cc_proxy(const GroupElement& g) {
  const CylDecomp d = to_cylindrical(g);
  return d.c.phi * d.c.phi + std::abs(d.c.z);
}

// exp(alpha Z) exp(beta X) exp(-alpha Z) = exp of the returned vector:
// the fiber rotation turns X in the horizontal plane, with opposite handedness
// in the two groups.
inline AlgebraVec conjugate_rotate(double alpha, double beta, GroupKind kind) {
  AlgebraVec v;
  v.a = beta * std::cos(alpha);
  v.b = kind == GroupKind::SU2 ? beta * std::sin(alpha) : -beta * std::sin(alpha);
  v.c = 0.0;
  return v;
}

// Base-point projection SU(2) -> S^2 (unit curvature): conjugation of the
// vertical direction, read off the quaternion components.  Fiber-invariant.
inline geom::PolarCoords hopf_project(const GroupElement& g) {
  if (g.kind != GroupKind::SU2) throw std::invalid_argument("hopf_project: SU2 only");
  const double x1 = g.m(0, 0).real(), y1 = g.m(0, 0).imag();
  const double x2 = g.m(0, 1).real(), y2 = g.m(0, 1).imag();
  const double px = 2.0 * (x1 * y2 + x2 * y1);
  const double py = 2.0 * (y1 * y2 - x1 * x2);
  const double pz = x1 * x1 + y1 * y1 - x2 * x2 - y2 * y2;
  geom::PolarCoords pc;
  const double rxy = std::hypot(px, py);
  pc.phi = std::atan2(rxy, pz);
  pc.theta = rxy > 1e-300 ? wrap_angle_2pi(std::atan2(px, -py)) : 0.0;
  return pc;
}

// Base-point projection SL(2,R) -> H^2 (curvature -1) through the Mobius
// action on i in the upper half-plane.  Fiber-invariant.
inline geom::PolarCoords mobius_project(const GroupElement& g) {
  if (g.kind != GroupKind::SL2) throw std::invalid_argument("mobius_project: SL2 only");
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> w = (g.m(0, 0) * i + g.m(0, 1)) / (g.m(1, 0) * i + g.m(1, 1));
  const double u = w.real(), v = w.imag();
  if (!(v > 0.0)) throw std::domain_error("mobius_project: image left the upper half-plane");
  // cosh(phi) - 1 = (u^2 + (v-1)^2) / (2v), stable near the origin.
  const double cm1 = (u * u + (v - 1.0) * (v - 1.0)) / (2.0 * v);
  geom::PolarCoords pc;
  pc.phi = 2.0 * std::asinh(std::sqrt(0.5 * cm1));
  const double sx = (u * u + v * v - 1.0) / (2.0 * v);  // sinh(phi) cos(theta)
  const double sy = -u / v;                             // sinh(phi) sin(theta)
  pc.theta = cm1 > 1e-300 ? wrap_angle_2pi(std::atan2(sy, sx)) : 0.0;
  return pc;
}

// Left-invariant horizontal fields in cylindrical components (d_phi, d_theta,
// d_z).  Singular on the fiber axis and (SU2) at the phi = pi seam.
struct HorizontalFrame {
  Eigen::Vector3d X;
  Eigen::Vector3d Y;
};

inline HorizontalFrame left_invariant_frame(const CylCoords& c, GroupKind kind) {
  if (c.phi < 1e-9) throw std::domain_error("left_invariant_frame: phi ~ 0");
  HorizontalFrame f;
  if (kind == GroupKind::SU2) {
    if (c.phi > kPi - 1e-9) throw std::domain_error("left_invariant_frame: phi ~ pi");
    const double h = 0.5 * c.phi;
    const double split = 1.0 / std::tan(h) + std::tan(h);  // 2 / sin(phi)
    const double cdz = std::cos(c.theta - c.z), sdz = std::sin(c.z - c.theta);
    f.X = {cdz, 0.5 * sdz * split, std::tan(h) * sdz};
    f.Y = {-sdz, 0.5 * cdz * split, std::tan(h) * cdz};
  } else {
    const double h = 0.5 * c.phi;
    const double split = 1.0 / std::tanh(h) - std::tanh(h);  // 2 / sinh(phi)
    const double cs = std::cos(c.theta + c.z), sn = std::sin(c.theta + c.z);
    f.X = {cs, -0.5 * sn * split, -std::tanh(h) * sn};
    f.Y = {sn, 0.5 * cs * split, std::tanh(h) * cs};
  }
  return f;
}

// Coefficients of the printed second-order operator X^2 + Y^2 on cylindrical
// functions:  d_phiphi + c_tt d_thetatheta + c_zz d_zz + c_tz d_thetaz +
// c_phi d_phi.  The generator of the simulated horizontal Brownian motion is
// one half of this operator.
struct SubLaplacianCoeffs {
  double phiphi = 1.0;
  double thetatheta = 0.0;
  double zz = 0.0;
  double thetaz = 0.0;
  double phi = 0.0;
};

inline SubLaplacianCoeffs sublaplacian_coeffs(double phi, GroupKind kind) {
  if (phi < 1e-9) throw std::domain_error("sublaplacian_coeffs: phi ~ 0");
  SubLaplacianCoeffs s;
  const double h = 0.5 * phi;
  if (kind == GroupKind::SU2) {
    if (phi > kPi - 1e-9) throw std::domain_error("sublaplacian_coeffs: phi ~ pi");
    const double sp = std::sin(phi);
    s.thetatheta = 1.0 / (sp * sp);
    s.zz = std::tan(h) * std::tan(h);
    s.thetaz = 1.0 / (std::cos(h) * std::cos(h));
    s.phi = std::cos(phi) / sp;
  } else {
    const double sp = std::sinh(phi);
    s.thetatheta = 1.0 / (sp * sp);
    s.zz = std::tanh(h) * std::tanh(h);
    s.thetaz = 1.0 / (std::cosh(h) * std::cosh(h));
    s.phi = std::cosh(phi) / sp;
  }
  return s;
}

// One Euler step of the horizontal Brownian motion in cylindrical
// coordinates.  The theta and z increments share one Gaussian (the horizontal
// constraint), and the radial drift is half the first-order coefficient of
// the printed operator.  Accurate away from the chart poles; phi reflects at
// the boundary, which the inward drift makes a vanishing-probability event.
inline CylCoords group_bm_step(GroupKind kind, const CylCoords& c, double dt,
                               std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  const double sdt = std::sqrt(dt);
  const double db1 = sdt * n01(rng);
  const double db2 = sdt * n01(rng);
  CylCoords out;
  if (kind == GroupKind::SU2) {
    const double sp = std::sin(c.phi);
    out.phi = c.phi + db1 + 0.5 * (std::cos(c.phi) / sp) * dt;
    out.theta = c.theta + db2 / sp;
    out.z = c.z + std::tan(0.5 * c.phi) * db2;
    if (out.phi < 0.0) out.phi = -out.phi;
    if (out.phi > kPi) out.phi = 2.0 * kPi - out.phi;
  } else {
    const double sp = std::sinh(c.phi);
    out.phi = c.phi + db1 + 0.5 * (std::cosh(c.phi) / sp) * dt;
    out.theta = c.theta + db2 / sp;
    out.z = c.z + std::tanh(0.5 * c.phi) * db2;
    if (out.phi < 0.0) out.phi = -out.phi;
  }
  return out;
}

// Euler path of the horizontal Brownian motion; returns n_steps + 1 states
// including the start.  Coordinates are left unwrapped so that smooth test
// functions of (phi, theta, z) see a continuous path.
inline std::vector<CylCoords> sample_group_bm(GroupKind kind, const CylCoords& start,
                                              double dt, int n_steps,
                                              std::mt19937_64& rng) {
  if (!(dt > 0.0) || n_steps < 0) {
    throw std::invalid_argument("sample_group_bm: need dt > 0, n_steps >= 0");
  }
  std::vector<CylCoords> path;
  path.reserve(static_cast<std::size_t>(n_steps) + 1);
  path.push_back(start);
  for (int i = 0; i < n_steps; ++i) {
    path.push_back(group_bm_step(kind, path.back(), dt, rng));
  }
  return path;
}

// Test helper: a random group element.  Haar for SU2 (normalized Gaussian
// quaternion); for SL2 a cylindrical box sample (not Haar, which does not
// exist as a probability measure there).
inline GroupElement random_element(GroupKind kind, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  if (kind == GroupKind::SU2) {
    Eigen::Vector4d q(n01(rng), n01(rng), n01(rng), n01(rng));
    q.normalize();
    GroupElement g;
    g.kind = kind;
    using C = std::complex<double>;
    g.m << C(q[0], q[1]), C(q[2], q[3]), C(-q[2], q[3]), C(q[0], -q[1]);
    return g;
  }
  std::uniform_real_distribution<double> uphi(0.0, 2.5), uth(0.0, 2.0 * kPi),
      uz(-2.0 * kPi, 2.0 * kPi);
  return from_cylindrical({uphi(rng), uth(rng), uz(rng)}, kind);
}

}  // namespace curved::lie
