#pragma once

// Coupled Brownian pairs on a constant-curvature surface, in two equivalent
// forms:
//
//  * the reduced system for (R, A) — the distance between the two particles
//    and the area swept by the connecting geodesic — driven by a 2x2 coupling
//    matrix K (plus an extra-noise matrix Khat) acting frame-to-frame;
//  * the manifold system, which moves the two points themselves and recovers
//    (R, A) geometrically.  One-step moments of the two must agree.
//
// Admissibility: K K^T + Khat Khat^T = I (both marginals are Brownian).

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "curved/geometry.hpp"
#include "curved/noise.hpp"
#include "curved/scalars.hpp"

namespace curved::sde {

enum class Strategy { Synchronous, Reflection, Perverse, FixedDistance, ReflectionNoise };

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Synchronous: return "synchronous";
    case Strategy::Reflection: return "reflection";
    case Strategy::Perverse: return "perverse";
    case Strategy::FixedDistance: return "fixed_distance";
    case Strategy::ReflectionNoise: return "reflection_noise";
  }
  return "?";
}

inline Strategy strategy_from_name(const std::string& name) {
  if (name == "synchronous") return Strategy::Synchronous;
  if (name == "reflection") return Strategy::Reflection;
  if (name == "perverse") return Strategy::Perverse;
  if (name == "fixed_distance") return Strategy::FixedDistance;
  if (name == "reflection_noise") return Strategy::ReflectionNoise;
  throw std::invalid_argument("unknown strategy: " + name);
}

struct CouplingControl {
  Eigen::Matrix2d K = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d Khat = Eigen::Matrix2d::Zero();
  bool has_noise = false;  // Khat != 0; lets drivers skip drawing dW
};

// || K K^T + Khat Khat^T - I ||: zero for an admissible control.
inline double control_residual(const CouplingControl& c) {
  return (c.K * c.K.transpose() + c.Khat * c.Khat.transpose() -
          Eigen::Matrix2d::Identity())
      .norm();
}

// The five named controls.  The two noise-assisted ones need
// K22 = cos(sqrt(k) R) with |K22| <= 1: they exist only for k >= 0 (and for
// k = 0 degenerate to their noiseless counterparts).
inline CouplingControl strategy_control(Strategy s, double R, const geom::Curvature& c) {
  CouplingControl ctrl;
  switch (s) {
    case Strategy::Synchronous:
      break;
    case Strategy::Reflection:
      ctrl.K(0, 0) = -1.0;
      break;
    case Strategy::Perverse:
      ctrl.K(1, 1) = -1.0;
      break;
    case Strategy::FixedDistance:
    case Strategy::ReflectionNoise: {
      if (c.k < 0) {
        throw std::invalid_argument(
            "noise-assisted controls need k >= 0 (cos(sqrt(k)R) <= 1)");
      }
      if (!(R > 0.0) || (c.k > 0 && R >= c.injectivity_radius)) {
        throw std::invalid_argument("strategy_control: R out of (0, i(M))");
      }
      ctrl.K(0, 0) = s == Strategy::FixedDistance ? 1.0 : -1.0;
      ctrl.K(1, 1) = cos_k(c.k, R);
      ctrl.Khat(1, 1) = std::sqrt(c.k) * sin_k(c.k, R);
      ctrl.has_noise = ctrl.Khat(1, 1) != 0.0;
      break;
    }
  }
  return ctrl;
}

// Exact one-step moments of the reduced system at distance R under an
// admissible control (rates per unit time):
//   qvR    = 2 (1 - K11)
//   driftR = (cos_k(R) - K22) / sin_k(R)
//   qvA    = 2 half_tan_k(R)^2 (1 + K22)
//   driftA = (K12 - K21) / (1 + cos_k(R))
//   covRA  = half_tan_k(R) (K12 - K21)
struct MomentSet {
  double qvR = 0.0;
  double driftR = 0.0;
  double qvA = 0.0;
  double driftA = 0.0;
  double covRA = 0.0;
};

inline MomentSet moments(const CouplingControl& ctrl, double R, const geom::Curvature& c) {
  if (!(R > 0.0) || (c.k > 0 && R >= c.injectivity_radius)) {
    throw std::invalid_argument("moments: R out of (0, i(M))");
  }
  const double ck = cos_k(c.k, R);
  const double sk = sin_k(c.k, R);
  const double htk = half_tan_k(c.k, R);
  const double skew = ctrl.K(0, 1) - ctrl.K(1, 0);
  MomentSet m;
  m.qvR = 2.0 * (1.0 - ctrl.K(0, 0));
  m.driftR = (ck - ctrl.K(1, 1)) / sk;
  m.qvA = 2.0 * htk * htk * (1.0 + ctrl.K(1, 1));
  m.driftA = skew / (1.0 + ck);
  m.covRA = htk * skew;
  return m;
}

struct ReducedState {
  double R = 0.0;
  double A = 0.0;
  double t = 0.0;
};

enum class StepEvent { None, FloorClamp, CeilClamp };

struct ReducedStepResult {
  ReducedState state;
  StepEvent event = StepEvent::None;
};

inline constexpr double kRFloor = 1e-6;
inline constexpr double kRCeilMargin = 1e-6;

// One Euler step of the reduced (R, A) system with given Gaussian increments
// dU (common noise, in the x-frame) and dW (extra noise), both ~ N(0, dt I).
// R is kept in [floor, i(M) - margin] by clamping, reported via the event.
// A fixed-distance control leaves R bit-identical: the radial noise cancels
// exactly and driftR is an exact zero by construction.
inline ReducedStepResult step_reduced(const ReducedState& s, const CouplingControl& ctrl,
                                      const Eigen::Vector2d& dU, const Eigen::Vector2d& dW,
                                      double dt, const geom::Curvature& c) {
  const MomentSet m = moments(ctrl, s.R, c);
  Eigen::Vector2d dV = ctrl.K * dU;
  if (ctrl.has_noise) dV += ctrl.Khat * dW;
  const double dR = (dV(0) - dU(0)) + m.driftR * dt;
  const double dA = half_tan_k(c.k, s.R) * (dU(1) + dV(1)) + m.driftA * dt;

  ReducedStepResult out;
  out.state.R = s.R + dR;
  out.state.A = s.A + dA;
  out.state.t = s.t + dt;
  const double ceil =
      c.k > 0 ? c.injectivity_radius - kRCeilMargin : std::numeric_limits<double>::infinity();
  if (out.state.R < kRFloor) {
    out.state.R = kRFloor;
    out.event = StepEvent::FloorClamp;
  } else if (out.state.R > ceil) {
    out.state.R = ceil;
    out.event = StepEvent::CeilClamp;
  }
  return out;
}

struct CouplingState {
  geom::SurfacePoint X, Y;
  geom::FramePair frames;
  double R = 0.0;
  double A = 0.0;
  double t = 0.0;
};

struct ManifoldStepResult {
  CouplingState state;
  StepEvent event = StepEvent::None;  // boundary reached: frames left stale
};

inline CouplingState make_coupling_state(const geom::SurfacePoint& X,
                                         const geom::SurfacePoint& Y,
                                         const geom::Curvature& c, double A0 = 0.0,
                                         double t0 = 0.0) {
  CouplingState s;
  s.X = X;
  s.Y = Y;
  s.frames = geom::frame_pair(X, Y, c);  // rejects degenerate pairs
  s.R = geom::distance(X, Y, c);
  s.A = A0;
  s.t = t0;
  return s;
}

// One Euler step of the pair itself: both points move by exp_map of their
// frame increments (dV = K dU + Khat dW in the y-frame), the new distance is
// recomputed geometrically, and the swept area is updated to second order
// with the realized increment products, so one-step moments match the
// reduced system.  Hitting the floor/ceiling band is reported, not clamped;
// the frames are then left stale and the caller is expected to stop.
inline ManifoldStepResult step_manifold(const CouplingState& s, const CouplingControl& ctrl,
                                        const Eigen::Vector2d& dU, const Eigen::Vector2d& dW,
                                        double dt, const geom::Curvature& c) {
  Eigen::Vector2d dV = ctrl.K * dU;
  if (ctrl.has_noise) dV += ctrl.Khat * dW;

  const double htk = half_tan_k(c.k, s.R);
  const double ck = cos_k(c.k, s.R);
  const double dA = htk * (dU(1) + dV(1)) +
                    0.5 * ((dU(1) * dV(0) - dV(1) * dU(0)) * 2.0 / (1.0 + ck) +
                           c.k * htk * htk * (dV(1) * dV(0) - dU(1) * dU(0)));

  geom::TangentVec mx{s.X, dU(0) * s.frames.e1x.vec + dU(1) * s.frames.e2x.vec};
  geom::TangentVec my{s.Y, dV(0) * s.frames.e1y.vec + dV(1) * s.frames.e2y.vec};

  ManifoldStepResult out;
  out.state.X = geom::exp_map(mx, c);
  out.state.Y = geom::exp_map(my, c);
  out.state.R = geom::distance(out.state.X, out.state.Y, c);
  out.state.A = s.A + dA;
  out.state.t = s.t + dt;
  const double ceil =
      c.k > 0 ? c.injectivity_radius - kRCeilMargin : std::numeric_limits<double>::infinity();
  if (out.state.R < kRFloor) {
    out.event = StepEvent::FloorClamp;
    out.state.frames = s.frames;
  } else if (out.state.R > ceil) {
    out.event = StepEvent::CeilClamp;
    out.state.frames = s.frames;
  } else {
    out.state.frames = geom::frame_pair(out.state.X, out.state.Y, c);
  }
  return out;
}

// Closed-form radius evolution of the two deterministic-radius controls on
// the sphere side (k > 0):
//   synchronous: R_t = (2/sqrt(k)) asin(e^{-kt/2} sin(sqrt(k) R0 / 2))
//   perverse:    R_t = (2/sqrt(k)) acos(e^{-kt/2} cos(sqrt(k) R0 / 2))
inline double deterministic_radius(Strategy s, double R0, double t, const geom::Curvature& c) {
  if (!(c.k > 0)) throw std::invalid_argument("deterministic_radius: needs k > 0");
  if (!(R0 >= 0.0) || R0 > c.injectivity_radius) {
    throw std::invalid_argument("deterministic_radius: R0 out of [0, i(M)]");
  }
  const double sk = std::sqrt(c.k);
  const double damp = std::exp(-0.5 * c.k * t);
  if (s == Strategy::Synchronous) {
    return 2.0 / sk * std::asin(damp * std::sin(0.5 * sk * R0));
  }
  if (s == Strategy::Perverse) {
    return 2.0 / sk * std::acos(damp * std::cos(0.5 * sk * R0));
  }
  throw std::invalid_argument("deterministic_radius: no closed form for this strategy");
}

// Time for the noiseless synchronous control to contract from R_from to R_to.
inline double sync_time_to_radius(double R_from, double R_to, const geom::Curvature& c) {
  if (!(c.k > 0)) throw std::invalid_argument("sync_time_to_radius: needs k > 0");
  if (!(R_to > 0.0) || R_to > R_from || R_from >= c.injectivity_radius) {
    throw std::invalid_argument("sync_time_to_radius: need 0 < R_to <= R_from < i(M)");
  }
  const double sk = std::sqrt(c.k);
  return 2.0 / c.k *
         std::log(std::sin(0.5 * sk * R_from) / std::sin(0.5 * sk * R_to));
}

}  // namespace curved::sde
