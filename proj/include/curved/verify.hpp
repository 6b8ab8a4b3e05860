#pragma once

// Independent numerical oracles for the closed-form implementations:
// scaling-and-squaring matrix exponentials, finite differences, quadrature of
// the area two-form, Gauss-Bonnet angle sums, and Monte Carlo generator
// estimates.  Each suite reports how many checks ran, the worst error, and
// the tolerance it was held to; suites are reused by the test binaries and
// the `verify` CLI subcommand.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "curved/geometry.hpp"
#include "curved/lie.hpp"
#include "curved/scalars.hpp"
#include "curved/sde.hpp"

namespace curved::verify {

struct SuiteResult {
  std::string name;
  long n_checked = 0;
  long n_failed = 0;
  double max_err = 0.0;
  double tol = 0.0;

  bool pass() const { return n_checked > 0 && n_failed == 0; }
};

namespace detail {

inline void check(SuiteResult& r, double err) {
  ++r.n_checked;
  if (err > r.max_err || !(err == err)) r.max_err = err;
  if (!(err <= r.tol)) ++r.n_failed;  // NaN fails
}

// Signed difference a - b reduced modulo `period` into (-period/2, period/2].
inline double ang_diff(double a, double b, double period) {
  return std::remainder(a - b, period);
}

}  // namespace detail

// --- Lie layer ---------------------------------------------------------------

// Commutator table of the basis matrices; exact in floating point.
inline SuiteResult suite_brackets() {
  SuiteResult r{"bracket table [X,Y]=Z, [Y,Z]=+/-X, [Z,X]=+/-Y", 0, 0, 0.0, 1e-15};
  for (auto kind : {lie::GroupKind::SU2, lie::GroupKind::SL2}) {
    const auto B = lie::basis(kind);
    const double s = kind == lie::GroupKind::SU2 ? 1.0 : -1.0;
    detail::check(r, (B[0] * B[1] - B[1] * B[0] - B[2]).norm());
    detail::check(r, (B[1] * B[2] - B[2] * B[1] - s * B[0]).norm());
    detail::check(r, (B[2] * B[0] - B[0] * B[2] - s * B[1]).norm());
  }
  return r;
}

// Closed-form exponential against Eigen's scaling-and-squaring expm.
inline SuiteResult suite_alg_exp(long n = 1000, std::uint64_t seed = 101) {
  SuiteResult r{"alg_exp vs expm + group residual", 0, 0, 0.0, 1e-12};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (long i = 0; i < n; ++i) {
    for (auto kind : {lie::GroupKind::SU2, lie::GroupKind::SL2}) {
      const lie::AlgebraVec v{u(rng), u(rng), u(rng)};
      const lie::GroupElement g = lie::alg_exp(v, kind);
      const Eigen::Matrix2cd ref = lie::algebra_matrix(v, kind).exp();
      detail::check(r, (g.m - ref).norm());
      detail::check(r, lie::group_residual(g));
    }
  }
  return r;
}

// Cylindrical chart: round trip, and the product-of-exponentials route.
inline SuiteResult suite_cylindrical(long n = 1000, std::uint64_t seed = 102) {
  SuiteResult r{"cylindrical chart round trip", 0, 0, 0.0, 1e-12};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uth(0.0, 2.0 * kPi), uz(-2.0 * kPi, 2.0 * kPi);
  for (long i = 0; i < n; ++i) {
    for (auto kind : {lie::GroupKind::SU2, lie::GroupKind::SL2}) {
      std::uniform_real_distribution<double> uphi(
          0.05, kind == lie::GroupKind::SU2 ? kPi - 0.05 : 3.0);
      const lie::CylCoords c0{uphi(rng), uth(rng), uz(rng)};
      const lie::GroupElement g = lie::from_cylindrical(c0, kind);
      const lie::CylDecomp d = lie::to_cylindrical(g);
      detail::check(r, std::abs(d.c.phi - c0.phi));
      detail::check(r, std::abs(detail::ang_diff(d.c.theta, c0.theta, 2.0 * kPi)));
      detail::check(r, std::abs(detail::ang_diff(d.c.z, c0.z, 4.0 * kPi)));
      detail::check(r, (lie::from_cylindrical(d.c, kind).m - g.m).norm());
      const lie::GroupElement prod = lie::group_mul(
          lie::alg_exp({c0.phi * std::cos(c0.theta), c0.phi * std::sin(c0.theta), 0.0},
                       kind),
          lie::alg_exp({0.0, 0.0, c0.z}, kind));
      detail::check(r, (prod.m - g.m).norm());
    }
  }
  return r;
}

// Fiber rotation identity exp(aZ) exp(bX) = exp(rotated) exp(aZ).
inline SuiteResult suite_conjugation(long n = 1000, std::uint64_t seed = 103) {
  SuiteResult r{"fiber rotation of horizontal directions", 0, 0, 0.0, 1e-12};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ua(-6.0, 6.0), ub(-2.0, 2.0);
  for (long i = 0; i < n; ++i) {
    for (auto kind : {lie::GroupKind::SU2, lie::GroupKind::SL2}) {
      const double a = ua(rng), b = ub(rng);
      const lie::GroupElement lhs = lie::group_mul(lie::alg_exp({0, 0, a}, kind),
                                                   lie::alg_exp({b, 0, 0}, kind));
      const lie::GroupElement rhs =
          lie::group_mul(lie::alg_exp(lie::conjugate_rotate(a, b, kind), kind),
                         lie::alg_exp({0, 0, a}, kind));
      detail::check(r, (lhs.m - rhs.m).norm());
    }
  }
  return r;
}

// Left-invariant frame components against central differences of the chart
// along g exp(t X), g exp(t Y).
inline SuiteResult suite_fields(long n = 300, std::uint64_t seed = 104,
                                double eps = 1e-5) {
  SuiteResult r{"left-invariant fields vs finite differences", 0, 0, 0.0, 1e-6};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uth(0.0, 2.0 * kPi), uz(-6.0, 6.0);
  for (long i = 0; i < n; ++i) {
    for (auto kind : {lie::GroupKind::SU2, lie::GroupKind::SL2}) {
      std::uniform_real_distribution<double> uphi(
          0.3, kind == lie::GroupKind::SU2 ? 2.6 : 2.5);
      const lie::CylCoords c0{uphi(rng), uth(rng), uz(rng)};
      const lie::GroupElement g = lie::from_cylindrical(
          {c0.phi, c0.theta, wrap_fiber_4pi(c0.z)}, kind);
      const lie::HorizontalFrame f = lie::left_invariant_frame(
          {c0.phi, c0.theta, wrap_fiber_4pi(c0.z)}, kind);
      const Eigen::Vector3d dirs[2] = {f.X, f.Y};
      for (int d = 0; d < 2; ++d) {
        const lie::AlgebraVec step =
            d == 0 ? lie::AlgebraVec{eps, 0, 0} : lie::AlgebraVec{0, eps, 0};
        const lie::AlgebraVec mstep{-step.a, -step.b, 0};
        const lie::CylDecomp cp =
            lie::to_cylindrical(lie::group_mul(g, lie::alg_exp(step, kind)));
        const lie::CylDecomp cm =
            lie::to_cylindrical(lie::group_mul(g, lie::alg_exp(mstep, kind)));
        const double dphi = (cp.c.phi - cm.c.phi) / (2.0 * eps);
        const double dth =
            detail::ang_diff(cp.c.theta, cm.c.theta, 2.0 * kPi) / (2.0 * eps);
        const double dz = detail::ang_diff(cp.c.z, cm.c.z, 4.0 * kPi) / (2.0 * eps);
        detail::check(r, std::abs(dphi - dirs[d].x()));
        detail::check(r, std::abs(dth - dirs[d].y()));
        detail::check(r, std::abs(dz - dirs[d].z()));
      }
    }
  }
  return r;
}

// Projections: fiber invariance and agreement with the chart's base point.
inline SuiteResult suite_projections(long n = 500, std::uint64_t seed = 105) {
  SuiteResult r{"projection fiber-invariance and chart agreement", 0, 0, 0.0, 1e-12};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uz(-2.0 * kPi, 2.0 * kPi);
  std::uniform_real_distribution<double> uth(0.0, 2.0 * kPi);
  for (long i = 0; i < n; ++i) {
    for (auto kind : {lie::GroupKind::SU2, lie::GroupKind::SL2}) {
      const geom::Curvature c =
          geom::Curvature::of(kind == lie::GroupKind::SU2 ? 1.0 : -1.0);
      const lie::GroupElement g = lie::random_element(kind, rng);
      const lie::GroupElement g2 =
          lie::group_mul(g, lie::alg_exp({0, 0, uz(rng)}, kind));
      const auto proj = [&](const lie::GroupElement& e) {
        return kind == lie::GroupKind::SU2 ? lie::hopf_project(e)
                                           : lie::mobius_project(e);
      };
      const geom::SurfacePoint p1 = geom::embed(proj(g), c);
      const geom::SurfacePoint p2 = geom::embed(proj(g2), c);
      detail::check(r, (p1.coords - p2.coords).norm());

      std::uniform_real_distribution<double> uphi(
          0.0, kind == lie::GroupKind::SU2 ? kPi : 3.0);
      const lie::CylCoords c0{uphi(rng), uth(rng), uz(rng)};
      const geom::SurfacePoint chart = geom::embed({c0.phi, c0.theta}, c);
      const geom::SurfacePoint via =
          geom::embed(proj(lie::from_cylindrical(c0, kind)), c);
      detail::check(r, (chart.coords - via.coords).norm());
    }
  }
  return r;
}

// Relative fiber coordinate: |z(x^{-1} y)| equals the geodesic triangle area
// of the projections (shared-fiber pairs), its sign follows sin(theta_x -
// theta_y), the relative horizontal radius equals the surface distance, and
// fiber offsets shift z additively mod 4*pi.
inline SuiteResult suite_relative_fiber(long n = 1000, std::uint64_t seed = 106) {
  SuiteResult r{"relative fiber coordinate vs triangle area", 0, 0, 0.0, 1e-9};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uth(0.0, 2.0 * kPi), uz(-2.0 * kPi, 2.0 * kPi);
  for (long i = 0; i < n; ++i) {
    for (auto kind : {lie::GroupKind::SU2, lie::GroupKind::SL2}) {
      const geom::Curvature c =
          geom::Curvature::of(kind == lie::GroupKind::SU2 ? 1.0 : -1.0);
      std::uniform_real_distribution<double> uphi(
          0.1, kind == lie::GroupKind::SU2 ? 2.9 : 2.5);
      const double z0 = uz(rng);
      const lie::CylCoords cx{uphi(rng), uth(rng), z0};
      const lie::CylCoords cy{uphi(rng), uth(rng), z0};
      const lie::GroupElement x = lie::from_cylindrical(cx, kind);
      const lie::GroupElement y = lie::from_cylindrical(cy, kind);
      const lie::CylDecomp rel = lie::relative_cylindrical(x, y);

      const geom::SurfacePoint Px = geom::embed({cx.phi, cx.theta}, c);
      const geom::SurfacePoint Py = geom::embed({cy.phi, cy.theta}, c);
      const double area = geom::triangle_area(geom::origin(c), Px, Py, c);
      detail::check(r, std::abs(std::abs(rel.c.z) - area) / (1.0 + area));
      detail::check(r, std::abs(rel.c.phi - geom::distance(Px, Py, c)));

      const double sdt = std::sin(cx.theta - cy.theta);
      if (std::abs(sdt) > 1e-3 && area > 1e-6) {
        detail::check(r, (rel.c.z > 0) == (sdt > 0) ? 0.0 : 1.0);
      }
      // Fiber offsets shift the relative z additively (mod 4*pi).
      const double zx = uz(rng), zy = uz(rng);
      const lie::CylDecomp rel2 = lie::relative_cylindrical(
          lie::from_cylindrical({cx.phi, cx.theta, zx}, kind),
          lie::from_cylindrical({cy.phi, cy.theta, zy}, kind));
      detail::check(
          r, std::abs(detail::ang_diff(rel2.c.z, rel.c.z + (zy - zx), 4.0 * kPi)));
    }
  }
  return r;
}

// Monte Carlo generator check of the horizontal Brownian sampler against half
// the printed operator, with three test functions covering every coefficient.
inline SuiteResult suite_generator(lie::GroupKind kind, long n = 1000000,
                                   double dt = 1e-4, std::uint64_t seed = 107) {
  SuiteResult r{std::string("horizontal BM generator (") +
                    (kind == lie::GroupKind::SU2 ? "su2" : "sl2") + ")",
                0, 0, 0.0, 3.0};  // tol is a z-score here
  const lie::CylCoords c0{1.1, 0.7, 0.4};
  const lie::SubLaplacianCoeffs sc = lie::sublaplacian_coeffs(c0.phi, kind);

  const double f3v = std::sin(0.5 * c0.z) * std::sin(c0.theta);
  const double targets[3] = {
      0.5 * (2.0 + sc.phi * 2.0 * c0.phi),                     // f = phi^2
      0.5 * (sc.thetatheta * -std::sin(c0.theta)),             // f = sin(theta)
      0.5 * (sc.thetatheta * -f3v + sc.zz * -0.25 * f3v +      // f = sin(z/2) sin(theta)
             sc.thetaz * 0.5 * std::cos(0.5 * c0.z) * std::cos(c0.theta)),
  };
  auto eval = [](const lie::CylCoords& c, int j) {
    switch (j) {
      case 0: return c.phi * c.phi;
      case 1: return std::sin(c.theta);
      default: return std::sin(0.5 * c.z) * std::sin(c.theta);
    }
  };

  std::mt19937_64 rng(seed);
  double sum[3] = {0, 0, 0}, sumsq[3] = {0, 0, 0};
  for (long i = 0; i < n; ++i) {
    const lie::CylCoords c1 = lie::group_bm_step(kind, c0, dt, rng);
    for (int j = 0; j < 3; ++j) {
      const double g = (eval(c1, j) - eval(c0, j)) / dt;
      sum[j] += g;
      sumsq[j] += g * g;
    }
  }
  for (int j = 0; j < 3; ++j) {
    const double mean = sum[j] / n;
    const double var = (sumsq[j] - n * mean * mean) / (n - 1.0);
    const double se = std::sqrt(var / n);
    detail::check(r, std::abs(mean - targets[j]) / se);
  }
  return r;
}

// --- surface layer -----------------------------------------------------------

namespace detail {

struct PairConfig {
  geom::Curvature c;
  geom::SurfacePoint x, y;
  geom::TangentVec u, v;
};

// Random curvature-sign, random pair with distance in a safe band, random
// tangents expressed in the connecting frames.
inline PairConfig random_pair(std::mt19937_64& rng, int parity, double d_min,
                              double d_max_margin) {
  std::uniform_real_distribution<double> uth(0.0, 2.0 * kPi), ua(-1.0, 1.0);
  PairConfig pc;
  pc.c = geom::Curvature::of(parity % 2 == 0 ? 1.0 : -1.0);
  const double cap =
      (pc.c.k > 0 ? pc.c.injectivity_radius : 3.2) - d_max_margin;
  std::uniform_real_distribution<double> uphi(0.0, pc.c.k > 0 ? 1.2 : 1.6);
  while (true) {
    pc.x = geom::embed({uphi(rng), uth(rng)}, pc.c);
    pc.y = geom::embed({uphi(rng), uth(rng)}, pc.c);
    const double d = geom::distance(pc.x, pc.y, pc.c);
    if (d >= d_min && d <= cap) break;
  }
  const geom::FramePair f = geom::frame_pair(pc.x, pc.y, pc.c);
  pc.u = geom::TangentVec{pc.x, ua(rng) * f.e1x.vec + ua(rng) * f.e2x.vec};
  pc.v = geom::TangentVec{pc.y, ua(rng) * f.e1y.vec + ua(rng) * f.e2y.vec};
  return pc;
}

}  // namespace detail

// Distance first/second derivatives against central finite differences of
// R(s) = d(exp_x(s u), exp_y(s v)).
inline SuiteResult suite_distance_hessian(long n = 1000, std::uint64_t seed = 108,
                                          double h = 2e-4) {
  SuiteResult r{"distance derivatives vs finite differences", 0, 0, 0.0, 1e-5};
  std::mt19937_64 rng(seed);
  for (long i = 0; i < n; ++i) {
    const detail::PairConfig pc = detail::random_pair(rng, static_cast<int>(i), 0.3, 0.3);
    const geom::DerivPair an =
        geom::distance_derivatives(pc.x, pc.y, pc.u, pc.v, pc.c);
    auto F = [&](double s) {
      const geom::SurfacePoint xs =
          geom::exp_map({pc.x, s * pc.u.vec}, pc.c);
      const geom::SurfacePoint ys =
          geom::exp_map({pc.y, s * pc.v.vec}, pc.c);
      return geom::distance(xs, ys, pc.c);
    };
    const double f0 = F(0.0), fp = F(h), fm = F(-h);
    const double grad_fd = (fp - fm) / (2.0 * h);
    const double hess_fd = (fp - 2.0 * f0 + fm) / (h * h);
    detail::check(r, std::abs(grad_fd - an.grad) / (std::abs(an.grad) + 0.1));
    detail::check(r, std::abs(hess_fd - an.hess) / (std::abs(an.hess) + 0.1));
  }
  return r;
}

// Area derivatives against trapezoid quadrature of the area two-form flux
// through the family of connecting geodesics (the only analytic ingredient on
// the oracle side is the ambient exponential/logarithm pair).
inline SuiteResult suite_area_flux(long n = 200, std::uint64_t seed = 109,
                                   double h = 5e-4, int n_sigma = 400) {
  SuiteResult r{"area derivatives vs two-form flux quadrature", 0, 0, 0.0, 1e-3};
  std::mt19937_64 rng(seed);
  const double h_sigma = 1e-3;
  for (long i = 0; i < n; ++i) {
    const detail::PairConfig pc = detail::random_pair(rng, static_cast<int>(i), 0.4, 0.5);
    const geom::DerivPair an = geom::area_derivatives(pc.x, pc.y, pc.u, pc.v, pc.c);

    auto cpoint = [&](double s, double sig) {
      const geom::SurfacePoint xs = geom::exp_map({pc.x, s * pc.u.vec}, pc.c);
      const geom::SurfacePoint ys = geom::exp_map({pc.y, s * pc.v.vec}, pc.c);
      return geom::exp_map({xs, sig * geom::log_map(xs, ys, pc.c).vec}, pc.c);
    };
    auto flux = [&](double s) {
      double acc = 0.0;
      for (int j = 0; j <= n_sigma; ++j) {
        const double sig = static_cast<double>(j) / n_sigma;
        const geom::SurfacePoint p = cpoint(s, sig);
        const Eigen::Vector3d dsig =
            (cpoint(s, sig + h_sigma).coords - cpoint(s, sig - h_sigma).coords) /
            (2.0 * h_sigma);
        const Eigen::Vector3d ds =
            (cpoint(s + h, sig).coords - cpoint(s - h, sig).coords) / (2.0 * h);
        const double w = geom::form_dot(geom::rotate90(p, dsig, pc.c), ds, pc.c);
        acc += (j == 0 || j == n_sigma) ? 0.5 * w : w;
      }
      return acc / n_sigma;
    };

    const double grad_or = flux(0.0);
    const double hess_or = (flux(h) - flux(-h)) / (2.0 * h);
    detail::check(r, std::abs(grad_or - an.grad) / (std::abs(an.grad) + 0.05));
    detail::check(r, std::abs(hess_or - an.hess) / (std::abs(an.hess) + 0.05));
  }
  return r;
}

// Triangle area from side lengths against the Gauss-Bonnet angle sum.
inline SuiteResult suite_triangle(long n = 300, std::uint64_t seed = 110) {
  SuiteResult r{"triangle area vs Gauss-Bonnet angle sum", 0, 0, 0.0, 1e-9};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uth(0.0, 2.0 * kPi);
  for (long i = 0; i < n; ++i) {
    const geom::Curvature c = geom::Curvature::of(i % 2 == 0 ? 1.0 : -1.0);
    std::uniform_real_distribution<double> uphi(0.0, c.k > 0 ? 1.3 : 1.7);
    geom::SurfacePoint p, q, s;
    while (true) {
      p = geom::embed({uphi(rng), uth(rng)}, c);
      q = geom::embed({uphi(rng), uth(rng)}, c);
      s = geom::embed({uphi(rng), uth(rng)}, c);
      const double a = geom::distance(p, q, c), b = geom::distance(p, s, c),
                   d = geom::distance(q, s, c);
      const double cap = c.k > 0 ? c.injectivity_radius - 0.3 : 3.4;
      const double lo = 0.3;
      if (a < lo || b < lo || d < lo || a > cap || b > cap || d > cap) continue;
      if (a + b - d < 0.05 || a + d - b < 0.05 || b + d - a < 0.05) continue;
      break;
    }
    auto angle = [&](const geom::SurfacePoint& at, const geom::SurfacePoint& e1,
                     const geom::SurfacePoint& e2) {
      const Eigen::Vector3d a1 = geom::log_map(at, e1, c).vec;
      const Eigen::Vector3d a2 = geom::log_map(at, e2, c).vec;
      const double na = std::sqrt(geom::form_dot(a1, a1, c));
      const double nb = std::sqrt(geom::form_dot(a2, a2, c));
      double cosang = geom::form_dot(a1, a2, c) / (na * nb);
      cosang = std::min(1.0, std::max(-1.0, cosang));
      return std::acos(cosang);
    };
    const double sum = angle(p, q, s) + angle(q, p, s) + angle(s, p, q);
    const double gb = c.k > 0 ? sum - kPi : kPi - sum;
    const double area = geom::triangle_area(p, q, s, c);
    detail::check(r, std::abs(area - gb) / (1.0 + area));
  }
  return r;
}

// --- full run ----------------------------------------------------------------

inline std::vector<SuiteResult> verify_all(double scale = 1.0) {
  const auto sc = [scale](long n) {
    return std::max<long>(8, static_cast<long>(n * scale));
  };
  std::vector<SuiteResult> out;
  out.push_back(suite_brackets());
  out.push_back(suite_alg_exp(sc(1000)));
  out.push_back(suite_cylindrical(sc(1000)));
  out.push_back(suite_conjugation(sc(1000)));
  out.push_back(suite_fields(sc(300)));
  out.push_back(suite_projections(sc(500)));
  out.push_back(suite_relative_fiber(sc(1000)));
  out.push_back(suite_generator(lie::GroupKind::SU2, sc(1000000)));
  out.push_back(suite_generator(lie::GroupKind::SL2, sc(1000000)));
  out.push_back(suite_distance_hessian(sc(1000)));
  out.push_back(suite_area_flux(sc(200)));
  out.push_back(suite_triangle(sc(300)));
  return out;
}

}  // namespace curved::verify
