#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "curved/lie.hpp"
#include "curved/scalars.hpp"
#include "curved/verify.hpp"

using namespace curved;

TEST_CASE("group product, inverse, and residual", "[lie]") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (auto kind : {lie::GroupKind::SU2, lie::GroupKind::SL2}) {
    for (int i = 0; i < 50; ++i) {
      const lie::GroupElement g = lie::alg_exp({u(rng), u(rng), u(rng)}, kind);
      const lie::GroupElement h = lie::alg_exp({u(rng), u(rng), u(rng)}, kind);
      CHECK(lie::group_residual(lie::group_mul(g, h)) < 1e-12);
      const lie::GroupElement gi = lie::group_mul(g, lie::inverse(g));
      CHECK((gi.m - Eigen::Matrix2cd::Identity()).norm() < 1e-13);
    }
  }
  const lie::GroupElement a = lie::identity(lie::GroupKind::SU2);
  const lie::GroupElement b = lie::identity(lie::GroupKind::SL2);
  CHECK_THROWS_AS(lie::group_mul(a, b), std::invalid_argument);
}

TEST_CASE("one-parameter subgroups are additive", "[lie]") {
  for (auto kind : {lie::GroupKind::SU2, lie::GroupKind::SL2}) {
    for (double a : {0.3, -1.1}) {
      for (double b : {0.7, 2.2}) {
        const auto lhs = lie::alg_exp({a + b, 0, 0}, kind);
        const auto rhs =
            lie::group_mul(lie::alg_exp({a, 0, 0}, kind), lie::alg_exp({b, 0, 0}, kind));
        CHECK((lhs.m - rhs.m).norm() < 1e-13);
        const auto lz = lie::alg_exp({0, 0, a + b}, kind);
        const auto rz =
            lie::group_mul(lie::alg_exp({0, 0, a}, kind), lie::alg_exp({0, 0, b}, kind));
        CHECK((lz.m - rz.m).norm() < 1e-13);
      }
    }
  }
}

TEST_CASE("cylindrical chart flags the degenerate loci", "[lie]") {
  // phi = 0: theta is arbitrary and flagged.
  const auto at_pole = lie::to_cylindrical(lie::alg_exp({0, 0, 0.8}, lie::GroupKind::SU2));
  CHECK_FALSE(at_pole.theta_defined);
  CHECK(at_pole.z_defined);
  CHECK(at_pole.c.phi == Catch::Approx(0.0).margin(1e-12));
  CHECK(at_pole.c.z == Catch::Approx(0.8).margin(1e-12));
  // SU2 phi = pi: z is absorbed into theta and flagged.
  const auto equator =
      lie::to_cylindrical(lie::from_cylindrical({kPi, 0.4, 0.0}, lie::GroupKind::SU2));
  CHECK_FALSE(equator.z_defined);
  CHECK(equator.c.phi == Catch::Approx(kPi).margin(1e-12));
  // Out-of-range phi is rejected.
  CHECK_THROWS_AS(lie::from_cylindrical({kPi + 0.1, 0, 0}, lie::GroupKind::SU2),
                  std::invalid_argument);
  CHECK_THROWS_AS(lie::from_cylindrical({-0.1, 0, 0}, lie::GroupKind::SL2),
                  std::invalid_argument);
}

TEST_CASE("fiber coordinate wraps on the 4*pi period", "[lie]") {
  const lie::CylCoords c0{1.0, 0.5, 2.0 * kPi - 0.05};
  for (auto kind : {lie::GroupKind::SU2, lie::GroupKind::SL2}) {
    const auto g = lie::from_cylindrical(c0, kind);
    const auto shifted = lie::group_mul(g, lie::alg_exp({0, 0, 0.1}, kind));
    const auto d = lie::to_cylindrical(shifted);
    CHECK(d.c.z == Catch::Approx(-2.0 * kPi + 0.05).margin(1e-10));
  }
}

TEST_CASE("projections reject the wrong group", "[lie]") {
  CHECK_THROWS_AS(lie::hopf_project(lie::identity(lie::GroupKind::SL2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(lie::mobius_project(lie::identity(lie::GroupKind::SU2)),
                  std::invalid_argument);
}

TEST_CASE("half-angle rotation of horizontal directions", "[lie]") {
  const double b = 0.9;
  const auto su = lie::conjugate_rotate(kPi, b, lie::GroupKind::SU2);
  CHECK(su.a == Catch::Approx(-b).margin(1e-15));
  CHECK(su.b == Catch::Approx(0.0).margin(1e-12));
  const auto sl = lie::conjugate_rotate(0.5 * kPi, b, lie::GroupKind::SL2);
  CHECK(sl.a == Catch::Approx(0.0).margin(1e-12));
  CHECK(sl.b == Catch::Approx(-b).margin(1e-15));
  CHECK(su.c == 0.0);
  CHECK(sl.c == 0.0);
}

TEST_CASE("sublaplacian coefficients at the equatorial radius", "[lie]") {
  const auto c = lie::sublaplacian_coeffs(0.5 * kPi, lie::GroupKind::SU2);
  CHECK(c.phiphi == 1.0);
  CHECK(c.thetatheta == Catch::Approx(1.0).margin(1e-12));
  CHECK(c.zz == Catch::Approx(1.0).margin(1e-12));
  CHECK(c.thetaz == Catch::Approx(2.0).margin(1e-12));
  CHECK(c.phi == Catch::Approx(0.0).margin(1e-12));
  // Hyperbolic side: coth never vanishes, tanh(phi/2) < 1.
  const auto h = lie::sublaplacian_coeffs(1.3, lie::GroupKind::SL2);
  CHECK(h.zz < 1.0);
  CHECK(h.phi > 1.0 / std::tanh(1.3) - 1e-12);
}

TEST_CASE("horizontal frame is undefined on the chart axis", "[lie]") {
  CHECK_THROWS_AS(lie::left_invariant_frame({0.0, 0.0, 0.0}, lie::GroupKind::SU2),
                  std::domain_error);
  CHECK_THROWS_AS(lie::left_invariant_frame({kPi, 0.0, 0.0}, lie::GroupKind::SU2),
                  std::domain_error);
}

TEST_CASE("horizontal Brownian sampler stays in the chart domain", "[lie]") {
  std::mt19937_64 rng(22);
  for (auto kind : {lie::GroupKind::SU2, lie::GroupKind::SL2}) {
    const auto path = lie::sample_group_bm(kind, {1.0, 0.0, 0.0}, 1e-3, 4000, rng);
    REQUIRE(path.size() == 4001);
    for (const auto& c : path) {
      CHECK(c.phi >= 0.0);
      if (kind == lie::GroupKind::SU2) CHECK(c.phi <= kPi);
      CHECK(std::isfinite(c.theta));
      CHECK(std::isfinite(c.z));
    }
  }
}

TEST_CASE("algebra and chart oracles (reduced sample)", "[lie][oracle]") {
  for (const auto& r :
       {verify::suite_brackets(), verify::suite_alg_exp(150), verify::suite_cylindrical(150),
        verify::suite_conjugation(150), verify::suite_fields(40),
        verify::suite_projections(60), verify::suite_relative_fiber(120)}) {
    INFO(r.name << " max_err=" << r.max_err << " tol=" << r.tol);
    CHECK(r.pass());
  }
}
