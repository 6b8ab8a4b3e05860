#pragma once

// Two-phase coupling controller on the positive-curvature surface.
//
// The controller alternates between reflection coupling (shrinks the distance
// R, lets the swept area A diffuse) and fixed-distance coupling (freezes R,
// lets A relax), switching on the scale-free statistic W = A / R^2:
//   reflection      while |W| <  kappa,
//   fixed-distance  while |W| >  kappa - epsilon  (entered when |W| >= kappa).
// Runs stop when the pair couples (R <= delta_R with |A| <= kappa delta_R^2),
// when R reaches i(M) - eta (restartable), or at T_max.
//
// In wrapped mode W is computed from the fiber representative of A in
// (-2*pi, 2*pi] (period 4 pi); everything else is identical.
//
// Numerics: the base step dt is subdivided adaptively so one step moves W by
// at most ~w_step_tol standard deviations near the active threshold, which
// keeps threshold crossings resolved at every scale of R (equivalently:
// locally uniform steps in the clock sigma = int 4/R^2 ds used by the
// analysis).  Away from the threshold the cap relaxes linearly with the
// remaining gap, so a crossing is never jumped in one step (a >= 6 sigma
// event) but the far field is not forced onto the fine grid.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "curved/geometry.hpp"
#include "curved/noise.hpp"
#include "curved/scalars.hpp"
#include "curved/sde.hpp"

namespace curved::kendall {

struct KendallParams {
  double kappa = 1.0;     // fixed-distance entry threshold on |W|
  double epsilon = 0.25;  // exit hysteresis: leave at |W| <= kappa - epsilon
  double eta = 0.3;       // give up (restart) when R >= i(M) - eta
  double delta_R = 1e-3;  // coupling radius
  double T_max = 500.0;   // absolute time budget
  bool wrapped = false;   // compute W from the fiber representative of A
  double dt = 1e-4;       // base time step

  // Numerical knobs (not part of the mathematical construction).
  double a_zero_tol = 1e-6;  // |A| snap tolerance in area-zeroing segments
  double w_step_tol = 0.01;  // near-threshold per-substep cap on sd of the W increment
  double trace_dt = 1e-2;    // decimation interval for traces/diagnostics
};

inline void validate_params(const KendallParams& p, const geom::Curvature& c) {
  if (!(c.k > 0)) throw std::invalid_argument("phase controller requires k > 0");
  if (!(p.kappa > 0) || !(p.epsilon > 0) || !(p.eta > 0) || !(p.delta_R > 0) ||
      !(p.T_max > 0) || !(p.dt > 0)) {
    throw std::invalid_argument("kendall params must be positive");
  }
  if (!(p.epsilon < p.kappa)) throw std::invalid_argument("epsilon must be < kappa");
  if (!(p.eta < c.injectivity_radius)) {
    throw std::invalid_argument("eta must be < i(M)");
  }
  if (!(p.delta_R < c.injectivity_radius - p.eta)) {
    throw std::invalid_argument("delta_R must be < i(M) - eta");
  }
  if (p.wrapped) {
    if (std::abs(c.k - 1.0) > 1e-12) {
      throw std::invalid_argument("wrapped mode requires k = 1");
    }
    if (!(p.kappa < 2.0 * kPi)) {
      throw std::invalid_argument("wrapped mode requires kappa < 2*pi");
    }
    const double lower = 2.0 * kPi / ((kPi - p.eta) * (kPi - p.eta));
    if (!(p.kappa - p.epsilon > lower)) {
      throw std::invalid_argument(
          "wrapped mode requires kappa - epsilon > 2*pi/(pi - eta)^2");
    }
  }
}

enum class Phase { Reflection, FixedDistance };
enum class Outcome { Coupled, HitEta, TimedOut };

inline const char* phase_name(Phase p) {
  return p == Phase::Reflection ? "reflection" : "fixed_distance";
}
inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Coupled: return "coupled";
    case Outcome::HitEta: return "hit_eta";
    case Outcome::TimedOut: return "timed_out";
  }
  return "?";
}

struct StoppingRecord {
  Outcome outcome = Outcome::TimedOut;
  double tau = 0.0;
  long phase_switch_count = 0;
  double final_R = 0.0;
  double final_A = 0.0;
  long restarts = 0;  // eta-hits absorbed by run_successful
};

struct PathSample {
  double t = 0.0, R = 0.0, A = 0.0, W = 0.0;
  Phase phase = Phase::Reflection;
  long switch_count = 0;
};

// Series against the intrinsic clock sigma = int 4/R^2 ds: log R, W, and the
// accumulated reflection time int N dsigma (N = 1 in reflection phases).
struct Diagnostics {
  std::vector<double> sigma;
  std::vector<double> K_sigma;
  std::vector<double> W_sigma;
  std::vector<double> N_int;
};

// Per-run threshold bookkeeping: how far |W| lands past a threshold at the
// switch that it triggers, and whether W ever changes sign inside a
// fixed-distance interval (it cannot, unwrapped, without first exiting).
struct PhaseAudit {
  double max_entry_overshoot = 0.0;   // |W| - kappa at reflection -> fd
  double max_exit_undershoot = 0.0;   // (kappa - eps) - |W| at fd -> reflection
  long sign_flips_in_fd = 0;
  long floor_clamps = 0;
  long ceil_clamps = 0;
};

struct RunOptions {
  bool record_diagnostics = true;
  bool record_trace = false;
};

struct RunResult {
  StoppingRecord record;
  Diagnostics diagnostics;
  PhaseAudit audit;
  std::vector<PathSample> trace;
};

// Switching rule on |W| with hysteresis band [kappa - epsilon, kappa].
inline Phase phase_transition(Phase p, double W, const KendallParams& par) {
  const double a = std::abs(W);
  if (p == Phase::Reflection && a >= par.kappa) return Phase::FixedDistance;
  if (p == Phase::FixedDistance && a <= par.kappa - par.epsilon) return Phase::Reflection;
  return p;
}

namespace detail {

inline double area_rep(double A, bool wrapped) {
  return wrapped ? wrap_fiber_4pi(A) : A;
}

// Quadratic variation rate of W = A/R^2 under the phase's control, used to
// size substeps (drift contributes at higher order).
inline double qv_W(Phase phase, double R, double W, const geom::Curvature& c) {
  const double htk = half_tan_k(c.k, R);
  const double R2 = R * R;
  if (phase == Phase::Reflection) {
    // qvA = 4 htk^2, qvR = 4, covRA = 0.
    return 4.0 * htk * htk / (R2 * R2) + 16.0 * W * W / R2;
  }
  // Fixed distance: qvA = 2 htk^2 (1 + cos_k(R)), qvR = 0.
  return 2.0 * htk * htk * (1.0 + cos_k(c.k, R)) / (R2 * R2);
}

// Per-substep cap on the standard deviation of the W increment: full
// w_step_tol resolution near the phase's active threshold, relaxing linearly
// with the remaining gap (one step stays a >= 6 sigma event away from the
// crossing, so overshoot statistics at switches are unchanged).
inline double w_sd_cap(Phase phase, double W, const KendallParams& p) {
  const double a = std::abs(W);
  const double dist = phase == Phase::Reflection
                          ? std::max(0.0, p.kappa - a)
                          : std::max(0.0, a - (p.kappa - p.epsilon));
  return std::max(p.w_step_tol, dist / 6.0);
}

// Reflection moves R, and W = A/R^2 is convex in R: a single radial
// down-move of u = dR/R multiplies W by (1-u)^-2, which a cap on the
// linearized sd of W cannot see.  Cap the per-substep relative radial sd at
// the x solving W/(1-7x)^2 = kappa + 5*w_step_tol, so even a 7-sigma radial
// move cannot overshoot the switch threshold by more than the W resolution,
// and (x <= 1/8) the radius floor stays >= 8 sigma away.  Fixed-distance
// phases freeze R, making W exactly linear in the noise; no cap needed.
inline double dt_radius_cap(Phase phase, double R, double W,
                            const KendallParams& p) {
  if (phase != Phase::Reflection) {
    return std::numeric_limits<double>::infinity();
  }
  const double target = p.kappa + 5.0 * p.w_step_tol;
  const double x =
      std::min(0.125, (1.0 - std::sqrt(std::abs(W) / target)) / 7.0);
  const double sd = x * R;
  return sd * sd / 4.0;  // reflection radial quadratic variation is 4
}

}  // namespace detail

// Run the two-phase controller from `init` until Coupled / HitEta / TimedOut.
// The clock is absolute: stepping starts at init.t and T_max caps init.t + run).
inline RunResult run_to_tau(const sde::ReducedState& init, const KendallParams& p,
                            sde::NoiseSource& rng, const geom::Curvature& c,
                            const RunOptions& opt = {}) {
  validate_params(p, c);
  const double iM = c.injectivity_radius;
  if (!(init.R > 0.0) || !(init.R < iM - p.eta)) {
    throw std::invalid_argument("run_to_tau: init.R must lie in (0, i(M) - eta)");
  }

  RunResult out;
  sde::ReducedState s = init;
  Phase phase = Phase::Reflection;
  long switches = 0;
  double sigma = 0.0, n_int = 0.0;
  double fd_entry_sign = 0.0;
  double next_record_t = s.t;

  const auto ctrl_refl = sde::strategy_control(sde::Strategy::Reflection, 1.0, c);
  const Eigen::Vector2d zero2 = Eigen::Vector2d::Zero();

  auto record_point = [&](double W) {
    if (opt.record_diagnostics) {
      out.diagnostics.sigma.push_back(sigma);
      out.diagnostics.K_sigma.push_back(std::log(s.R));
      out.diagnostics.W_sigma.push_back(W);
      out.diagnostics.N_int.push_back(n_int);
    }
    if (opt.record_trace) {
      out.trace.push_back({s.t, s.R, s.A, W, phase, switches});
    }
  };

  Outcome outcome = Outcome::TimedOut;
  record_point(detail::area_rep(s.A, p.wrapped) / (s.R * s.R));

  while (true) {
    const double a_rep = detail::area_rep(s.A, p.wrapped);
    const double W = a_rep / (s.R * s.R);

    if (phase == Phase::Reflection && s.R <= p.delta_R &&
        std::abs(a_rep) <= p.kappa * p.delta_R * p.delta_R) {
      outcome = Outcome::Coupled;
      break;
    }
    if (s.R >= iM - p.eta) {
      outcome = Outcome::HitEta;
      break;
    }
    if (s.t >= p.T_max * (1.0 - 1e-15)) {
      outcome = Outcome::TimedOut;
      break;
    }

    const Phase next = phase_transition(phase, W, p);
    if (next != phase) {
      ++switches;
      if (next == Phase::FixedDistance) {
        out.audit.max_entry_overshoot =
            std::max(out.audit.max_entry_overshoot, std::abs(W) - p.kappa);
        fd_entry_sign = W >= 0 ? 1.0 : -1.0;
      } else {
        out.audit.max_exit_undershoot = std::max(
            out.audit.max_exit_undershoot, (p.kappa - p.epsilon) - std::abs(W));
      }
      phase = next;
      record_point(W);
    } else if (phase == Phase::FixedDistance && W * fd_entry_sign < 0.0 &&
               std::abs(W) > 1e-12) {
      ++out.audit.sign_flips_in_fd;
      fd_entry_sign = -fd_entry_sign;
    }

    const double sd_cap = detail::w_sd_cap(phase, W, p);
    double dt_eff =
        std::min(p.dt, sd_cap * sd_cap / detail::qv_W(phase, s.R, W, c));
    dt_eff = std::min(dt_eff, detail::dt_radius_cap(phase, s.R, W, p));
    dt_eff = std::min(dt_eff, p.T_max - s.t);

    const bool fd = phase == Phase::FixedDistance;
    const sde::CouplingControl ctrl =
        fd ? sde::strategy_control(sde::Strategy::FixedDistance, s.R, c) : ctrl_refl;
    const Eigen::Vector2d dU = rng.normal2(dt_eff);
    const Eigen::Vector2d dW = ctrl.has_noise ? rng.normal2(dt_eff) : zero2;
    const sde::ReducedStepResult res = sde::step_reduced(s, ctrl, dU, dW, dt_eff, c);
    if (res.event == sde::StepEvent::FloorClamp) ++out.audit.floor_clamps;
    if (res.event == sde::StepEvent::CeilClamp) ++out.audit.ceil_clamps;

    const double dsig =
        2.0 * dt_eff * (1.0 / (s.R * s.R) + 1.0 / (res.state.R * res.state.R));
    sigma += dsig;
    if (!fd) n_int += dsig;
    s = res.state;

    if (s.t >= next_record_t) {
      record_point(detail::area_rep(s.A, p.wrapped) / (s.R * s.R));
      next_record_t += p.trace_dt;
    }
  }

  record_point(detail::area_rep(s.A, p.wrapped) / (s.R * s.R));
  out.record.outcome = outcome;
  out.record.tau = s.t;
  out.record.phase_switch_count = switches;
  out.record.final_R = s.R;
  out.record.final_A = s.A;
  return out;
}

namespace detail {

// Fixed-distance segment at constant R until A crosses the nearest zero of
// its (possibly wrapped) representative; the hit time is interpolated inside
// the crossing step and A snaps onto the exact zero.  False on T_max.
inline bool zero_area_segment(sde::ReducedState& s, const KendallParams& p,
                              sde::NoiseSource& rng, const geom::Curvature& c) {
  double d_prev = area_rep(s.A, p.wrapped);
  if (std::abs(d_prev) <= p.a_zero_tol) {
    s.A -= d_prev;
    return true;
  }
  const sde::CouplingControl ctrl =
      sde::strategy_control(sde::Strategy::FixedDistance, s.R, c);
  while (s.t < p.T_max) {
    const double dt_eff = std::min(p.dt, p.T_max - s.t);
    const Eigen::Vector2d dU = rng.normal2(dt_eff);
    const Eigen::Vector2d dW = rng.normal2(dt_eff);
    const sde::ReducedStepResult res = sde::step_reduced(s, ctrl, dU, dW, dt_eff, c);
    const double d_new = area_rep(res.state.A, p.wrapped);
    const bool crossed =
        d_prev * d_new < 0.0 && std::abs(d_prev - d_new) < 2.0 * kPi;
    if (crossed || std::abs(d_new) <= p.a_zero_tol) {
      const double frac = crossed ? d_prev / (d_prev - d_new) : 1.0;
      s.t += frac * dt_eff;
      s.A = res.state.A - d_new;  // the multiple of the period being hit
      return true;
    }
    s = res.state;
    d_prev = d_new;
  }
  return false;
}

// Noiseless-radius synchronous segment contracting R to R_target (the radial
// noise cancels exactly, so R follows the closed form); A keeps diffusing.
// False on T_max.
inline bool sync_contract_segment(sde::ReducedState& s, double R_target,
                                  const KendallParams& p, sde::NoiseSource& rng,
                                  const geom::Curvature& c) {
  const double R_start = s.R;
  const double T_seg = sde::sync_time_to_radius(R_start, R_target, c);
  double elapsed = 0.0;
  while (elapsed < T_seg) {
    if (s.t >= p.T_max) return false;
    const double dt_eff = std::min({p.dt, T_seg - elapsed, p.T_max - s.t});
    const double R_here =
        sde::deterministic_radius(sde::Strategy::Synchronous, R_start, elapsed, c);
    const Eigen::Vector2d dU = rng.normal2(dt_eff);
    s.A += 2.0 * half_tan_k(c.k, R_here) * dU(1);
    elapsed += dt_eff;
    s.t += dt_eff;
  }
  s.R = R_target;
  return true;
}

// Perverse segment growing R to R_target: both R and A are deterministic
// (qvR = qvA = 0), so this is a pure closed-form time advance.  False on T_max.
inline bool perverse_grow_segment(sde::ReducedState& s, double R_target,
                                  const KendallParams& p, const geom::Curvature& c) {
  const double sk = std::sqrt(c.k);
  const double T_seg =
      2.0 / c.k *
      std::log(std::cos(0.5 * sk * s.R) / std::cos(0.5 * sk * R_target));
  if (s.t + T_seg >= p.T_max) {
    s.t = p.T_max;
    return false;
  }
  s.t += T_seg;
  s.R = R_target;
  return true;
}

inline void merge_audit(PhaseAudit& into, const PhaseAudit& leg) {
  into.max_entry_overshoot = std::max(into.max_entry_overshoot, leg.max_entry_overshoot);
  into.max_exit_undershoot = std::max(into.max_exit_undershoot, leg.max_exit_undershoot);
  into.sign_flips_in_fd += leg.sign_flips_in_fd;
  into.floor_clamps += leg.floor_clamps;
  into.ceil_clamps += leg.ceil_clamps;
}

}  // namespace detail

// Run until actually Coupled, absorbing eta-hits by the restart recipe:
// contract synchronously back to the home radius (exact closed-form radius),
// relax A to zero at fixed distance, and run the controller again.  Starting
// radii at the extremes are first preconditioned into (0, i(M) - eta).
// Diagnostics/trace of the returned result cover the controller legs
// (sigma restarts at zero each leg); the audit and counters are aggregated.
inline RunResult run_successful(const sde::ReducedState& init, const KendallParams& p,
                                sde::NoiseSource& rng, const geom::Curvature& c,
                                const RunOptions& opt = {}) {
  validate_params(p, c);
  const double iM = c.injectivity_radius;
  if (!(init.R >= 0.0) || !(init.R <= iM) || !std::isfinite(init.A)) {
    throw std::invalid_argument("run_successful: R0 out of [0, i(M)]");
  }

  RunResult out;
  sde::ReducedState s = init;
  long switches = 0, restarts = 0;

  auto timed_out = [&]() {
    out.record.outcome = Outcome::TimedOut;
    out.record.tau = s.t;
    out.record.phase_switch_count = switches;
    out.record.final_R = s.R;
    out.record.final_A = s.A;
    out.record.restarts = restarts;
    return out;
  };

  // Preconditioning: antipodal-ish starts contract synchronously, coupled-ish
  // starts grow perversely (deterministically, area frozen).
  double R_home = s.R;
  if (s.R >= iM - p.eta) {
    R_home = iM - 2.0 * p.eta;
    if (!(R_home > p.delta_R)) {
      throw std::invalid_argument("run_successful: i(M) - 2*eta must exceed delta_R");
    }
    if (!detail::sync_contract_segment(s, R_home, p, rng, c)) return timed_out();
  } else if (s.R <= p.delta_R) {
    if (std::abs(detail::area_rep(s.A, p.wrapped)) <=
        p.kappa * p.delta_R * p.delta_R) {
      out.record.outcome = Outcome::Coupled;  // already coupled at t = 0
      out.record.tau = s.t;
      out.record.final_R = s.R;
      out.record.final_A = s.A;
      return out;
    }
    R_home = std::min(1.0 / std::sqrt(c.k), 0.5 * (iM - p.eta));
    if (!detail::perverse_grow_segment(s, R_home, p, c)) return timed_out();
  }

  while (true) {
    if (std::abs(detail::area_rep(s.A, p.wrapped)) > p.a_zero_tol) {
      if (!detail::zero_area_segment(s, p, rng, c)) return timed_out();
    }
    RunResult leg = run_to_tau(s, p, rng, c, opt);
    switches += leg.record.phase_switch_count;
    detail::merge_audit(out.audit, leg.audit);
    out.diagnostics = std::move(leg.diagnostics);
    if (opt.record_trace) {
      out.trace.insert(out.trace.end(), leg.trace.begin(), leg.trace.end());
    }
    s.R = leg.record.final_R;
    s.A = leg.record.final_A;
    s.t = leg.record.tau;
    if (leg.record.outcome == Outcome::Coupled) {
      out.record = leg.record;
      out.record.phase_switch_count = switches;
      out.record.restarts = restarts;
      return out;
    }
    if (leg.record.outcome == Outcome::TimedOut) return timed_out();
    ++restarts;  // HitEta: contract home and relax the area
    if (!detail::sync_contract_segment(s, R_home, p, rng, c)) return timed_out();
  }
}

// Wrapped-statistic variant (whole-group covering comparison); k = 1 only.
inline RunResult run_wrapped(const sde::ReducedState& init, const KendallParams& p,
                             sde::NoiseSource& rng, const RunOptions& opt = {}) {
  KendallParams q = p;
  q.wrapped = true;
  return run_successful(init, q, rng, geom::Curvature::of(1.0), opt);
}

// --- manifold backend (cross-validation) ------------------------------------
//
// Same controller driven through the pair of surface points instead of the
// reduced (R, A) system.  Slower and not bit-exact in fixed-distance phases
// (R is recomputed geometrically each step), which is exactly what makes it
// useful as a cross-check of the reduced backend.

// If `final_state` is non-null it receives the stopped pair state.
inline RunResult run_to_tau(const sde::CouplingState& init, const KendallParams& p,
                            sde::NoiseSource& rng, const geom::Curvature& c,
                            const RunOptions& opt = {},
                            sde::CouplingState* final_state = nullptr) {
  validate_params(p, c);
  const double iM = c.injectivity_radius;
  if (!(init.R > 0.0) || !(init.R < iM - p.eta)) {
    throw std::invalid_argument("run_to_tau: init.R must lie in (0, i(M) - eta)");
  }

  RunResult out;
  sde::CouplingState s = init;
  Phase phase = Phase::Reflection;
  long switches = 0;
  double sigma = 0.0, n_int = 0.0;
  double fd_entry_sign = 0.0;
  double next_record_t = s.t;

  const auto ctrl_refl = sde::strategy_control(sde::Strategy::Reflection, 1.0, c);
  const Eigen::Vector2d zero2 = Eigen::Vector2d::Zero();

  auto record_point = [&](double W) {
    if (opt.record_diagnostics) {
      out.diagnostics.sigma.push_back(sigma);
      out.diagnostics.K_sigma.push_back(std::log(s.R));
      out.diagnostics.W_sigma.push_back(W);
      out.diagnostics.N_int.push_back(n_int);
    }
    if (opt.record_trace) {
      out.trace.push_back({s.t, s.R, s.A, W, phase, switches});
    }
  };

  Outcome outcome = Outcome::TimedOut;
  record_point(detail::area_rep(s.A, p.wrapped) / (s.R * s.R));

  while (true) {
    const double a_rep = detail::area_rep(s.A, p.wrapped);
    const double W = a_rep / (s.R * s.R);

    if (phase == Phase::Reflection && s.R <= p.delta_R &&
        std::abs(a_rep) <= p.kappa * p.delta_R * p.delta_R) {
      outcome = Outcome::Coupled;
      break;
    }
    if (s.R >= iM - p.eta) {
      outcome = Outcome::HitEta;
      break;
    }
    if (s.t >= p.T_max * (1.0 - 1e-15)) {
      outcome = Outcome::TimedOut;
      break;
    }

    const Phase next = phase_transition(phase, W, p);
    if (next != phase) {
      ++switches;
      if (next == Phase::FixedDistance) {
        out.audit.max_entry_overshoot =
            std::max(out.audit.max_entry_overshoot, std::abs(W) - p.kappa);
        fd_entry_sign = W >= 0 ? 1.0 : -1.0;
      } else {
        out.audit.max_exit_undershoot = std::max(
            out.audit.max_exit_undershoot, (p.kappa - p.epsilon) - std::abs(W));
      }
      phase = next;
      record_point(W);
    } else if (phase == Phase::FixedDistance && W * fd_entry_sign < 0.0 &&
               std::abs(W) > 1e-12) {
      ++out.audit.sign_flips_in_fd;
      fd_entry_sign = -fd_entry_sign;
    }

    const double sd_cap = detail::w_sd_cap(phase, W, p);
    double dt_eff =
        std::min(p.dt, sd_cap * sd_cap / detail::qv_W(phase, s.R, W, c));
    dt_eff = std::min(dt_eff, detail::dt_radius_cap(phase, s.R, W, p));
    dt_eff = std::min(dt_eff, p.T_max - s.t);

    const bool fd = phase == Phase::FixedDistance;
    const sde::CouplingControl ctrl =
        fd ? sde::strategy_control(sde::Strategy::FixedDistance, s.R, c) : ctrl_refl;
    const Eigen::Vector2d dU = rng.normal2(dt_eff);
    const Eigen::Vector2d dW = ctrl.has_noise ? rng.normal2(dt_eff) : zero2;
    const sde::ManifoldStepResult res = sde::step_manifold(s, ctrl, dU, dW, dt_eff, c);
    if (res.event == sde::StepEvent::FloorClamp) ++out.audit.floor_clamps;
    if (res.event == sde::StepEvent::CeilClamp) ++out.audit.ceil_clamps;

    const double dsig =
        2.0 * dt_eff * (1.0 / (s.R * s.R) + 1.0 / (res.state.R * res.state.R));
    sigma += dsig;
    if (!fd) n_int += dsig;
    s = res.state;

    if (res.event != sde::StepEvent::None) {
      // The frames are stale past a radius boundary, so the run must stop
      // here.  With validated parameters (delta_R and eta dominate the clamp
      // band) a stopping set always contains the boundary.
      const double ar = detail::area_rep(s.A, p.wrapped);
      const bool coupled_now = phase == Phase::Reflection && s.R <= p.delta_R &&
                               std::abs(ar) <= p.kappa * p.delta_R * p.delta_R;
      if (!coupled_now && !(s.R >= iM - p.eta)) {
        throw std::runtime_error(
            "manifold controller: radius boundary reached outside every stopping set");
      }
      continue;
    }

    if (s.t >= next_record_t) {
      record_point(detail::area_rep(s.A, p.wrapped) / (s.R * s.R));
      next_record_t += p.trace_dt;
    }
  }

  record_point(detail::area_rep(s.A, p.wrapped) / (s.R * s.R));
  out.record.outcome = outcome;
  out.record.tau = s.t;
  out.record.phase_switch_count = switches;
  out.record.final_R = s.R;
  out.record.final_A = s.A;
  if (final_state != nullptr) *final_state = s;
  return out;
}

namespace detail {

// Manifold analogue of zero_area_segment: fixed-distance stepping of the pair
// until the (possibly wrapped) area representative crosses zero.  The hit time
// is interpolated but the pair keeps its post-step position (the radius is
// frozen up to discretization, so the positional slack is O(sqrt(dt))).
inline bool zero_area_segment(sde::CouplingState& s, const KendallParams& p,
                              sde::NoiseSource& rng, const geom::Curvature& c) {
  double d_prev = area_rep(s.A, p.wrapped);
  if (std::abs(d_prev) <= p.a_zero_tol) {
    s.A -= d_prev;
    return true;
  }
  while (s.t < p.T_max) {
    const sde::CouplingControl ctrl =
        sde::strategy_control(sde::Strategy::FixedDistance, s.R, c);
    const double dt_eff = std::min(p.dt, p.T_max - s.t);
    const Eigen::Vector2d dU = rng.normal2(dt_eff);
    const Eigen::Vector2d dW = rng.normal2(dt_eff);
    const sde::ManifoldStepResult res = sde::step_manifold(s, ctrl, dU, dW, dt_eff, c);
    if (res.event != sde::StepEvent::None) {
      throw std::runtime_error("manifold area segment: radius boundary reached");
    }
    const double d_new = area_rep(res.state.A, p.wrapped);
    const bool crossed =
        d_prev * d_new < 0.0 && std::abs(d_prev - d_new) < 2.0 * kPi;
    if (crossed || std::abs(d_new) <= p.a_zero_tol) {
      const double frac = crossed ? d_prev / (d_prev - d_new) : 1.0;
      const double t_hit = s.t + frac * dt_eff;
      s = res.state;
      s.t = t_hit;
      s.A = res.state.A - d_new;
      return true;
    }
    s = res.state;
    d_prev = d_new;
  }
  return false;
}

// Manifold radius segments: simulate the deterministic-radius controls until
// the target radius is reached (no closed-form snap; the geometric radius
// carries O(dt) discretization slack).
inline bool radius_segment(sde::CouplingState& s, double R_target, sde::Strategy strat,
                           const KendallParams& p, sde::NoiseSource& rng,
                           const geom::Curvature& c) {
  const bool contracting = R_target < s.R;
  while (s.t < p.T_max) {
    if ((contracting && s.R <= R_target) || (!contracting && s.R >= R_target)) {
      return true;
    }
    const sde::CouplingControl ctrl = sde::strategy_control(strat, s.R, c);
    const double dt_eff = std::min(p.dt, p.T_max - s.t);
    const Eigen::Vector2d dU = rng.normal2(dt_eff);
    const sde::ManifoldStepResult res =
        sde::step_manifold(s, ctrl, dU, Eigen::Vector2d::Zero(), dt_eff, c);
    if (res.event != sde::StepEvent::None) {
      throw std::runtime_error("manifold radius segment: radius boundary reached");
    }
    s = res.state;
  }
  return false;
}

}  // namespace detail

// Manifold-backend run_successful: same restart recipe, with the closed-form
// radius segments replaced by simulated ones.
inline RunResult run_successful(const sde::CouplingState& init, const KendallParams& p,
                                sde::NoiseSource& rng, const geom::Curvature& c,
                                const RunOptions& opt = {},
                                sde::CouplingState* final_state = nullptr) {
  validate_params(p, c);
  const double iM = c.injectivity_radius;
  if (!(init.R > 0.0) || !(init.R < iM) || !std::isfinite(init.A)) {
    throw std::invalid_argument("run_successful: R0 out of (0, i(M))");
  }

  RunResult out;
  sde::CouplingState s = init;
  long switches = 0, restarts = 0;

  auto finish = [&](const StoppingRecord& rec) {
    out.record = rec;
    out.record.phase_switch_count = switches;
    out.record.restarts = restarts;
    if (final_state != nullptr) *final_state = s;
    return out;
  };
  auto timed_out = [&]() {
    return finish({Outcome::TimedOut, s.t, 0, s.R, s.A, 0});
  };

  double R_home = s.R;
  if (s.R >= iM - p.eta) {
    R_home = iM - 2.0 * p.eta;
    if (!(R_home > p.delta_R)) {
      throw std::invalid_argument("run_successful: i(M) - 2*eta must exceed delta_R");
    }
    if (!detail::radius_segment(s, R_home, sde::Strategy::Synchronous, p, rng, c)) {
      return timed_out();
    }
  } else if (s.R <= p.delta_R) {
    if (std::abs(detail::area_rep(s.A, p.wrapped)) <=
        p.kappa * p.delta_R * p.delta_R) {
      return finish({Outcome::Coupled, s.t, 0, s.R, s.A, 0});
    }
    R_home = std::min(1.0 / std::sqrt(c.k), 0.5 * (iM - p.eta));
    if (!detail::radius_segment(s, R_home, sde::Strategy::Perverse, p, rng, c)) {
      return timed_out();
    }
  }

  while (true) {
    if (std::abs(detail::area_rep(s.A, p.wrapped)) > p.a_zero_tol) {
      if (!detail::zero_area_segment(s, p, rng, c)) return timed_out();
    }
    RunResult leg = run_to_tau(s, p, rng, c, opt, &s);
    switches += leg.record.phase_switch_count;
    detail::merge_audit(out.audit, leg.audit);
    out.diagnostics = std::move(leg.diagnostics);
    if (opt.record_trace) {
      out.trace.insert(out.trace.end(), leg.trace.begin(), leg.trace.end());
    }
    if (leg.record.outcome == Outcome::Coupled) return finish(leg.record);
    if (leg.record.outcome == Outcome::TimedOut) return timed_out();
    ++restarts;
    if (!detail::radius_segment(s, R_home, sde::Strategy::Synchronous, p, rng, c)) {
      return timed_out();
    }
  }
}

// Diagnostics from a recorded trace: trapezoid sigma clock, log R, the
// recorded W, and the reflection-time integral int N dsigma.
inline Diagnostics diagnostics_series(const std::vector<PathSample>& path) {
  Diagnostics d;
  d.sigma.reserve(path.size());
  d.K_sigma.reserve(path.size());
  d.W_sigma.reserve(path.size());
  d.N_int.reserve(path.size());
  double sigma = 0.0, n_int = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) {
      const auto& a = path[i - 1];
      const auto& b = path[i];
      const double dsig =
          2.0 * (b.t - a.t) * (1.0 / (a.R * a.R) + 1.0 / (b.R * b.R));
      sigma += dsig;
      if (a.phase == Phase::Reflection) n_int += dsig;
    }
    d.sigma.push_back(sigma);
    d.K_sigma.push_back(std::log(path[i].R));
    d.W_sigma.push_back(path[i].W);
    d.N_int.push_back(n_int);
  }
  return d;
}

}  // namespace curved::kendall
