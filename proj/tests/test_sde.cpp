#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "curved/geometry.hpp"
#include "curved/noise.hpp"
#include "curved/scalars.hpp"
#include "curved/sde.hpp"

using namespace curved;

namespace {
const std::vector<sde::Strategy> kAll = {
    sde::Strategy::Synchronous, sde::Strategy::Reflection, sde::Strategy::Perverse,
    sde::Strategy::FixedDistance, sde::Strategy::ReflectionNoise};
}

TEST_CASE("strategy names round-trip and reject junk", "[sde]") {
  for (auto s : kAll) {
    CHECK(sde::strategy_from_name(sde::strategy_name(s)) == s);
  }
  CHECK_THROWS_AS(sde::strategy_from_name("sideways"), std::invalid_argument);
}

TEST_CASE("every control satisfies the admissibility identity", "[sde]") {
  for (double k : {1.0, 0.5, 0.0, -1.0}) {
    const geom::Curvature c = geom::Curvature::of(k);
    for (auto s : kAll) {
      const bool noise = s == sde::Strategy::FixedDistance ||
                         s == sde::Strategy::ReflectionNoise;
      if (k < 0 && noise) {
        // cosh-shaped rows would need K K^T + Khat Khat^T > I: impossible.
        CHECK_THROWS_AS(sde::strategy_control(s, 1.0, c), std::invalid_argument);
        continue;
      }
      for (double R : {0.3, 1.0, 2.0}) {
        if (k > 0 && R >= c.injectivity_radius) continue;
        const auto ctrl = sde::strategy_control(s, R, c);
        CHECK(sde::control_residual(ctrl) < 1e-14);
        CHECK(ctrl.has_noise == (noise && k > 0));
      }
    }
  }
}

TEST_CASE("closed-form moment table", "[sde]") {
  const geom::Curvature c = geom::Curvature::of(1.0);
  const double R = 1.1;
  const double htk = half_tan_k(1.0, R);

  const auto refl = sde::moments(sde::strategy_control(sde::Strategy::Reflection, R, c), R, c);
  CHECK(refl.qvR == Catch::Approx(4.0));
  CHECK(refl.driftR == Catch::Approx((std::cos(R) - 1.0) / std::sin(R)));
  CHECK(refl.qvA == Catch::Approx(4.0 * htk * htk));
  CHECK(refl.driftA == Catch::Approx(0.0).margin(1e-15));
  CHECK(refl.covRA == Catch::Approx(0.0).margin(1e-15));

  const auto sync = sde::moments(sde::strategy_control(sde::Strategy::Synchronous, R, c), R, c);
  CHECK(sync.qvR == Catch::Approx(0.0).margin(1e-15));
  CHECK(sync.driftR == Catch::Approx(-std::tan(0.5 * R)));
  CHECK(sync.qvA == Catch::Approx(4.0 * htk * htk));

  const auto perv = sde::moments(sde::strategy_control(sde::Strategy::Perverse, R, c), R, c);
  CHECK(perv.qvR == Catch::Approx(0.0).margin(1e-15));
  CHECK(perv.qvA == Catch::Approx(0.0).margin(1e-15));
  CHECK(perv.driftR == Catch::Approx(1.0 / std::tan(0.5 * R)));

  const auto fd = sde::moments(sde::strategy_control(sde::Strategy::FixedDistance, R, c), R, c);
  CHECK(fd.qvR == 0.0);
  CHECK(fd.driftR == 0.0);
  CHECK(fd.qvA == Catch::Approx(2.0 * htk * htk * (1.0 + std::cos(R))));

  const auto rn =
      sde::moments(sde::strategy_control(sde::Strategy::ReflectionNoise, R, c), R, c);
  CHECK(rn.qvR == Catch::Approx(4.0));
  CHECK(rn.driftR == 0.0);  // the extra noise exactly cancels the drift
  CHECK(rn.qvA == Catch::Approx(2.0 * htk * htk * (1.0 + std::cos(R))));
}

TEST_CASE("fixed-distance control freezes the radius bit-for-bit", "[sde]") {
  const geom::Curvature c = geom::Curvature::of(1.0);
  sde::NoiseSource ns(99, 0);
  sde::ReducedState s{1.0, 0.0, 0.0};
  const auto ctrl = sde::strategy_control(sde::Strategy::FixedDistance, s.R, c);
  const double R0 = s.R;
  for (int i = 0; i < 100000; ++i) {
    const Eigen::Vector2d dU = ns.normal2(1e-4);
    const Eigen::Vector2d dW = ns.normal2(1e-4);
    s = sde::step_reduced(s, ctrl, dU, dW, 1e-4, c).state;
    REQUIRE(s.R == R0);  // exact: radial noise cancels and the drift is 0
  }
  CHECK(s.A != 0.0);
}

TEST_CASE("reduced steps clamp at the radius band edges", "[sde]") {
  const geom::Curvature c = geom::Curvature::of(1.0);
  const auto sync = sde::strategy_control(sde::Strategy::Synchronous, 1.0, c);
  // Push hard against the floor with a deterministic contraction.
  sde::ReducedState low{1.5e-6, 0.0, 0.0};
  const auto r1 = sde::step_reduced(low, sync, Eigen::Vector2d::Zero(),
                                    Eigen::Vector2d::Zero(), 1.0, c);
  CHECK(r1.event == sde::StepEvent::FloorClamp);
  CHECK(r1.state.R == sde::kRFloor);
  const auto perv = sde::strategy_control(sde::Strategy::Perverse, 1.0, c);
  sde::ReducedState high{kPi - 2e-6, 0.0, 0.0};
  const auto r2 = sde::step_reduced(high, perv, Eigen::Vector2d::Zero(),
                                    Eigen::Vector2d::Zero(), 2.0, c);
  CHECK(r2.event == sde::StepEvent::CeilClamp);
}

TEST_CASE("deterministic radius closed forms and their inverses", "[sde]") {
  const geom::Curvature c = geom::Curvature::of(1.0);
  CHECK(sde::deterministic_radius(sde::Strategy::Synchronous, 1.0, 0.0, c) ==
        Catch::Approx(1.0));
  CHECK(sde::deterministic_radius(sde::Strategy::Synchronous, 1.0, 50.0, c) <
        1e-9);
  CHECK(sde::deterministic_radius(sde::Strategy::Perverse, 1.0, 50.0, c) ==
        Catch::Approx(kPi).margin(1e-9));
  for (double t : {0.1, 0.5, 2.0}) {
    const double rt = sde::deterministic_radius(sde::Strategy::Synchronous, 1.2, t, c);
    CHECK(sde::sync_time_to_radius(1.2, rt, c) == Catch::Approx(t).margin(1e-12));
  }
  CHECK_THROWS_AS(sde::deterministic_radius(sde::Strategy::Reflection, 1.0, 1.0, c),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      sde::deterministic_radius(sde::Strategy::Synchronous, 1.0, 1.0,
                                geom::Curvature::of(-1.0)),
      std::invalid_argument);
}

TEST_CASE("synchronous Euler radius follows the closed form with real noise",
          "[sde]") {
  const geom::Curvature c = geom::Curvature::of(1.0);
  sde::NoiseSource ns(123, 5);
  sde::ReducedState s{1.0, 0.0, 0.0};
  const double dt = 1e-3;
  for (int i = 0; i < 1000; ++i) {
    const auto ctrl = sde::strategy_control(sde::Strategy::Synchronous, s.R, c);
    const Eigen::Vector2d dU = ns.normal2(dt);
    s = sde::step_reduced(s, ctrl, dU, Eigen::Vector2d::Zero(), dt, c).state;
  }
  // K = I makes the radial noise cancel exactly, so only Euler bias remains.
  const double target = sde::deterministic_radius(sde::Strategy::Synchronous, 1.0, 1.0, c);
  CHECK(s.R == Catch::Approx(target).margin(5e-4));
  CHECK(s.A != 0.0);  // the transverse noise still sweeps area
}

TEST_CASE("manifold and reduced one-step increments agree to Euler order", "[sde]") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n01;
  for (double k : {1.0, -1.0}) {
    const geom::Curvature c = geom::Curvature::of(k);
    for (auto strat : kAll) {
      if (k < 0 && (strat == sde::Strategy::FixedDistance ||
                    strat == sde::Strategy::ReflectionNoise)) {
        continue;
      }
      const double R = 1.2;
      const auto ctrl = sde::strategy_control(strat, R, c);
      const auto base = sde::make_coupling_state(
          geom::origin(c), geom::embed({R, 0.0}, c), c, 0.0);
      const double dt = 1e-6;
      for (int i = 0; i < 200; ++i) {
        const double sq = std::sqrt(dt);
        const Eigen::Vector2d dU(sq * n01(rng), sq * n01(rng));
        const Eigen::Vector2d dW(sq * n01(rng), sq * n01(rng));
        const auto mres = sde::step_manifold(base, ctrl, dU, dW, dt, c);
        const auto rres =
            sde::step_reduced({base.R, base.A, base.t}, ctrl, dU, dW, dt, c);
        // Same driving increments: differences are second-order remainders.
        CHECK(std::abs(mres.state.R - rres.state.R) < 50.0 * dt);
        CHECK(std::abs(mres.state.A - rres.state.A) < 50.0 * dt);
      }
    }
  }
}

TEST_CASE("coupling state construction records the geometry", "[sde]") {
  const geom::Curvature c = geom::Curvature::of(-1.0);
  const auto X = geom::origin(c);
  const auto Y = geom::embed({0.8, 1.0}, c);
  const auto s = sde::make_coupling_state(X, Y, c, 0.25, 1.5);
  CHECK(s.R == Catch::Approx(0.8).margin(1e-12));
  CHECK(s.A == 0.25);
  CHECK(s.t == 1.5);
}

TEST_CASE("per-trial noise streams are reproducible and distinct", "[sde]") {
  sde::NoiseSource a(42, 7), b(42, 7), d(42, 8);
  bool same_ab = true, same_ad = true;
  for (int i = 0; i < 64; ++i) {
    const double xa = a.normal(), xb = b.normal(), xd = d.normal();
    same_ab = same_ab && xa == xb;
    same_ad = same_ad && xa == xd;
  }
  CHECK(same_ab);
  CHECK_FALSE(same_ad);
}
