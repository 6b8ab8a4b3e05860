// curved-coupling: command-line front end.
//
// Subcommands:
//   simulate   fixed-strategy single/ensemble runs of the coupled pair
//   kendall    two-phase controller batches (successful-coupling experiment)
//   verify     numerical oracle suites for the closed-form implementations
//   moments    one-step moment validation of the manifold backend
//   diagnose   group-vs-geometry distance-equivalence diagnostic
//
// Exit codes: 0 success, 1 validation/suite failure, 2 usage error.
// The environment variable CURVED_COUPLING_SEED overrides --seed when set.

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "curved/geometry.hpp"
#include "curved/harness.hpp"
#include "curved/io.hpp"
#include "curved/kendall.hpp"
#include "curved/lie.hpp"
#include "curved/noise.hpp"
#include "curved/sde.hpp"
#include "curved/verify.hpp"

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Options {
  double k = 1.0;
  std::string group = "su2";
  std::string strategy = "reflection";
  double r0 = 1.0;
  double a0 = 0.0;
  double dt = 1e-4;
  double dt_moments = 1e-3;  // moments has its own default (one-step experiments)
  double t_max = 500.0;
  int trials = 100;
  std::uint64_t seed = 20250822;
  int jobs = 1;
  double kappa = 1.0;
  double epsilon = 0.25;
  double eta = 0.3;
  double delta_r = 1e-3;
  bool wrapped = false;
  std::string out;
  int dump_paths = 0;
  bool print_config = false;
  std::string backend = "reduced";
  bool single_run = false;
  long samples = 20000;
  std::string suite = "all";
  std::string tol_profile = "default";
};

// Applies CURVED_COUPLING_SEED; throws std::invalid_argument on a bad value.
void apply_env_seed(Options& o) {
  const char* env = std::getenv("CURVED_COUPLING_SEED");
  if (env == nullptr || *env == '\0') return;
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || end == env || *end != '\0') {
    throw std::invalid_argument("invalid CURVED_COUPLING_SEED: " + std::string(env));
  }
  o.seed = static_cast<std::uint64_t>(v);
}

ordered_json config_json(const std::string& sub, const Options& o) {
  ordered_json j;
  j["subcommand"] = sub;
  j["k"] = o.k;
  j["group"] = o.group;
  j["strategy"] = o.strategy;
  j["r0"] = o.r0;
  j["a0"] = o.a0;
  j["dt"] = sub == "moments" ? o.dt_moments : o.dt;
  j["t_max"] = o.t_max;
  j["trials"] = o.trials;
  j["seed"] = o.seed;
  j["jobs"] = o.jobs;
  j["kappa"] = o.kappa;
  j["epsilon"] = o.epsilon;
  j["eta"] = o.eta;
  j["delta_r"] = o.delta_r;
  j["wrapped"] = o.wrapped;
  j["out"] = o.out;
  j["dump_paths"] = o.dump_paths;
  j["backend"] = o.backend;
  j["single_run"] = o.single_run;
  j["samples"] = o.samples;
  j["suite"] = o.suite;
  j["tol_profile"] = o.tol_profile;
  return j;
}

void maybe_print_config(const std::string& sub, const Options& o) {
  if (!o.print_config) return;
  std::cout << config_json(sub, o).dump(2) << "\n";
  std::cout.flush();
}

fs::path ensure_out_dir(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

void write_text_file(const fs::path& path,
                     const std::function<void(std::ostream&)>& writer) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  writer(os);
  if (!os) throw std::runtime_error("error while writing " + path.string());
}

// --- simulate -----------------------------------------------------------------

int run_simulate(const Options& o) {
  maybe_print_config("simulate", o);
  const curved::geom::Curvature c = curved::geom::Curvature::of(o.k);
  const curved::sde::Strategy strat = curved::sde::strategy_from_name(o.strategy);
  const bool manifold = o.backend == "manifold";
  if (!(o.t_max > 0) || !(o.dt > 0)) {
    throw std::invalid_argument("simulate: need dt > 0 and t-max > 0");
  }
  const long n_steps = static_cast<long>(std::ceil(o.t_max / o.dt));
  const long stride = std::max<long>(1, n_steps / 100000);

  double sumR = 0, sumR2 = 0, sumA = 0, sumA2 = 0;
  long floor_clamps = 0, ceil_clamps = 0, boundary_stops = 0;
  int paths_written = 0;
  const fs::path dir = o.out.empty() ? fs::path() : ensure_out_dir(o.out);

  for (int trial = 0; trial < o.trials; ++trial) {
    curved::sde::NoiseSource ns(o.seed, static_cast<std::uint64_t>(trial));
    const bool dump = !o.out.empty() && trial < o.dump_paths;
    std::vector<curved::sde::ReducedState> path;
    double R = 0, A = 0;

    if (manifold) {
      curved::sde::CouplingState s = curved::sde::make_coupling_state(
          curved::geom::origin(c), curved::geom::embed({o.r0, 0.0}, c), c, o.a0);
      if (dump) path.push_back({s.R, s.A, s.t});
      for (long i = 0; i < n_steps; ++i) {
        const double dt_eff = std::min(o.dt, o.t_max - s.t);
        const auto ctrl = curved::sde::strategy_control(strat, s.R, c);
        const Eigen::Vector2d dU = ns.normal2(dt_eff);
        const Eigen::Vector2d dW =
            ctrl.has_noise ? ns.normal2(dt_eff) : Eigen::Vector2d::Zero().eval();
        const auto res = curved::sde::step_manifold(s, ctrl, dU, dW, dt_eff, c);
        s = res.state;
        if (dump && ((i + 1) % stride == 0 || i + 1 == n_steps)) {
          path.push_back({s.R, s.A, s.t});
        }
        if (res.event != curved::sde::StepEvent::None) {
          ++boundary_stops;  // frames are stale past the boundary: stop the path
          break;
        }
      }
      R = s.R;
      A = s.A;
    } else {
      curved::sde::ReducedState s{o.r0, o.a0, 0.0};
      if (dump) path.push_back(s);
      for (long i = 0; i < n_steps; ++i) {
        const double dt_eff = std::min(o.dt, o.t_max - s.t);
        const auto ctrl = curved::sde::strategy_control(strat, s.R, c);
        const Eigen::Vector2d dU = ns.normal2(dt_eff);
        const Eigen::Vector2d dW =
            ctrl.has_noise ? ns.normal2(dt_eff) : Eigen::Vector2d::Zero().eval();
        const auto res = curved::sde::step_reduced(s, ctrl, dU, dW, dt_eff, c);
        if (res.event == curved::sde::StepEvent::FloorClamp) ++floor_clamps;
        if (res.event == curved::sde::StepEvent::CeilClamp) ++ceil_clamps;
        s = res.state;
        if (dump && ((i + 1) % stride == 0 || i + 1 == n_steps)) path.push_back(s);
      }
      R = s.R;
      A = s.A;
    }

    sumR += R;
    sumR2 += R * R;
    sumA += A;
    sumA2 += A * A;
    if (dump) {
      char name[64];
      std::snprintf(name, sizeof(name), "path_%04d.csv", trial);
      write_text_file(dir / name, [&](std::ostream& os) {
        curved::io::write_path_csv(os, path, o.strategy);
      });
      ++paths_written;
    }
  }

  const double n = o.trials;
  ordered_json j;
  j["subcommand"] = "simulate";
  j["strategy"] = o.strategy;
  j["k"] = o.k;
  j["r0"] = o.r0;
  j["a0"] = o.a0;
  j["dt"] = o.dt;
  j["t_max"] = o.t_max;
  j["trials"] = o.trials;
  j["seed"] = o.seed;
  j["backend"] = o.backend;
  j["final_R"] = {{"mean", sumR / n},
                  {"var", o.trials > 1 ? (sumR2 - sumR * sumR / n) / (n - 1) : 0.0}};
  j["final_A"] = {{"mean", sumA / n},
                  {"var", o.trials > 1 ? (sumA2 - sumA * sumA / n) / (n - 1) : 0.0}};
  j["events"] = {{"floor_clamps", floor_clamps},
                 {"ceil_clamps", ceil_clamps},
                 {"boundary_stops", boundary_stops}};
  if (c.k > 0 && (strat == curved::sde::Strategy::Synchronous ||
                  strat == curved::sde::Strategy::Perverse)) {
    j["closed_form_final_R"] =
        curved::sde::deterministic_radius(strat, o.r0, o.t_max, c);
  }
  j["paths_written"] = paths_written;
  if (!o.out.empty()) {
    write_text_file(dir / "summary.json",
                    [&](std::ostream& os) { os << j.dump(2) << "\n"; });
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

// --- kendall ------------------------------------------------------------------

ordered_json audit_json(const curved::kendall::PhaseAudit& a) {
  return ordered_json{{"max_entry_overshoot", a.max_entry_overshoot},
                      {"max_exit_undershoot", a.max_exit_undershoot},
                      {"sign_flips_in_fd", a.sign_flips_in_fd},
                      {"floor_clamps", a.floor_clamps},
                      {"ceil_clamps", a.ceil_clamps}};
}

int run_kendall(const Options& o) {
  maybe_print_config("kendall", o);
  curved::harness::ExperimentConfig cfg;
  cfg.curvature = curved::geom::Curvature::of(o.k);
  cfg.params.kappa = o.kappa;
  cfg.params.epsilon = o.epsilon;
  cfg.params.eta = o.eta;
  cfg.params.delta_R = o.delta_r;
  cfg.params.T_max = o.t_max;
  cfg.params.wrapped = o.wrapped;
  cfg.params.dt = o.dt;
  cfg.R0 = o.r0;
  cfg.A0 = o.a0;
  cfg.trials = o.trials;
  cfg.master_seed = o.seed;
  cfg.jobs = o.jobs;
  cfg.successful = !o.single_run;
  cfg.manifold = o.backend == "manifold";
  curved::kendall::validate_params(cfg.params, cfg.curvature);

  const curved::harness::BatchResult batch = curved::harness::run_batch(cfg);
  const auto grid = curved::harness::uniform_grid(cfg.params.T_max, 201);
  const auto surv = curved::harness::survival_curve(batch.records, grid);
  const auto tv = curved::harness::tv_upper_bound(surv);

  ordered_json j;
  j["subcommand"] = "kendall";
  j["k"] = o.k;
  j["r0"] = o.r0;
  j["a0"] = o.a0;
  j["backend"] = o.backend;
  j["mode"] = o.single_run ? "single" : "successful";
  j["seed"] = o.seed;
  j["params"] = {{"kappa", o.kappa},     {"epsilon", o.epsilon},
                 {"eta", o.eta},         {"delta_r", o.delta_r},
                 {"t_max", o.t_max},     {"dt", o.dt},
                 {"wrapped", o.wrapped}};
  j["trials"] = batch.summary.trials;
  j["outcomes"] = {{"coupled", batch.summary.coupled},
                   {"hit_eta", batch.summary.hit_eta},
                   {"timed_out", batch.summary.timed_out}};
  j["restarts"] = batch.summary.restarts;
  j["tau"] = {{"mean_coupled", batch.summary.mean_tau_coupled},
              {"max_coupled", batch.summary.max_tau_coupled}};
  j["switches_mean"] = batch.summary.mean_switches;
  j["audit"] = audit_json(batch.summary.audit);

  if (!o.out.empty()) {
    const fs::path dir = ensure_out_dir(o.out);
    write_text_file(dir / "records.csv", [&](std::ostream& os) {
      curved::io::write_records_csv(os, batch.records);
    });
    write_text_file(dir / "survival.csv", [&](std::ostream& os) {
      curved::io::write_survival_csv(os, surv);
    });
    write_text_file(dir / "tv_bound.csv", [&](std::ostream& os) {
      curved::io::write_survival_csv(os, tv);
    });
    // Traces are reproduced trial-by-trial from the per-trial streams rather
    // than held for the whole batch.
    curved::kendall::RunOptions topt;
    topt.record_diagnostics = false;
    topt.record_trace = true;
    for (int i = 0; i < std::min(o.dump_paths, o.trials); ++i) {
      curved::sde::NoiseSource ns(cfg.master_seed, static_cast<std::uint64_t>(i));
      curved::sde::ReducedState init{cfg.R0, cfg.A0, 0.0};
      const curved::kendall::RunResult r =
          cfg.successful
              ? curved::kendall::run_successful(init, cfg.params, ns, cfg.curvature, topt)
              : curved::kendall::run_to_tau(init, cfg.params, ns, cfg.curvature, topt);
      char name[64];
      std::snprintf(name, sizeof(name), "trace_%04d.csv", i);
      write_text_file(dir / name, [&](std::ostream& os) {
        curved::io::write_phase_trace_csv(os, r.trace);
      });
    }
    write_text_file(dir / "summary.json",
                    [&](std::ostream& os) { os << j.dump(2) << "\n"; });
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

// --- verify -------------------------------------------------------------------

int run_verify(const Options& o) {
  maybe_print_config("verify", o);
  double scale = 1.0;
  if (o.tol_profile == "quick") {
    scale = 0.05;
  } else if (o.tol_profile != "default") {
    throw std::invalid_argument("unknown --tol-profile: " + o.tol_profile);
  }
  const auto sc = [scale](long n) {
    return std::max<long>(8, static_cast<long>(n * scale));
  };

  using curved::verify::SuiteResult;
  std::vector<std::pair<std::string, std::function<SuiteResult()>>> registry = {
      {"brackets", [] { return curved::verify::suite_brackets(); }},
      {"alg-exp", [&] { return curved::verify::suite_alg_exp(sc(1000)); }},
      {"cylindrical", [&] { return curved::verify::suite_cylindrical(sc(1000)); }},
      {"conjugation", [&] { return curved::verify::suite_conjugation(sc(1000)); }},
      {"fields", [&] { return curved::verify::suite_fields(sc(300)); }},
      {"projections", [&] { return curved::verify::suite_projections(sc(500)); }},
      {"relative-fiber", [&] { return curved::verify::suite_relative_fiber(sc(1000)); }},
      {"generator-su2",
       [&] { return curved::verify::suite_generator(curved::lie::GroupKind::SU2, sc(1000000)); }},
      {"generator-sl2",
       [&] { return curved::verify::suite_generator(curved::lie::GroupKind::SL2, sc(1000000)); }},
      {"hessian", [&] { return curved::verify::suite_distance_hessian(sc(1000)); }},
      {"area", [&] { return curved::verify::suite_area_flux(sc(200)); }},
      {"triangle", [&] { return curved::verify::suite_triangle(sc(300)); }},
  };

  bool found = false, all_pass = true;
  for (const auto& [name, fn] : registry) {
    if (o.suite != "all" && o.suite != name) continue;
    found = true;
    const SuiteResult r = fn();
    all_pass = all_pass && r.pass();
    std::printf("[%s] %-52s checks=%-6ld failed=%-4ld max_err=%-10.3g tol=%.3g\n",
                r.pass() ? "PASS" : "FAIL", r.name.c_str(), r.n_checked, r.n_failed,
                r.max_err, r.tol);
  }
  if (!found) throw std::invalid_argument("unknown --suite: " + o.suite);
  return all_pass ? 0 : 1;
}

// --- moments ------------------------------------------------------------------

int run_moments(const Options& o, bool r0_given) {
  maybe_print_config("moments", o);
  const curved::geom::Curvature c = curved::geom::Curvature::of(o.k);
  std::vector<double> grid;
  if (r0_given) {
    grid.push_back(o.r0);
  } else {
    for (double r : {0.5, 1.0, 2.0}) {
      if (r < c.injectivity_radius - 0.05) grid.push_back(r);
    }
  }
  std::vector<std::string> strategies;
  if (o.strategy == "all") {
    strategies = {"synchronous", "reflection", "perverse", "fixed_distance",
                  "reflection_noise"};
  } else {
    strategies = {o.strategy};
  }

  const double gate = 4.0;
  bool ok = true;
  ordered_json rows = ordered_json::array();
  for (const auto& sname : strategies) {
    const auto strat = curved::sde::strategy_from_name(sname);
    const auto checks = curved::harness::validate_moments(strat, c, grid, o.samples,
                                                          o.dt_moments, o.seed);
    for (const auto& row : checks) {
      ok = ok && row.max_abs_z <= gate;
      std::printf(
          "%-17s R=%-5g n=%-7ld dt=%-8g z(meanR)=%-+7.2f z(varR)=%-+7.2f "
          "z(meanA)=%-+7.2f z(varA)=%-+7.2f z(cov)=%-+7.2f max|z|=%.2f %s\n",
          sname.c_str(), row.R, row.n, row.dt, row.z[0], row.z[1], row.z[2],
          row.z[3], row.z[4], row.max_abs_z, row.max_abs_z <= gate ? "ok" : "FAIL");
      rows.push_back(ordered_json{{"strategy", sname},
                                  {"R", row.R},
                                  {"n", row.n},
                                  {"dt", row.dt},
                                  {"mean_dR", row.mean_dR},
                                  {"var_dR", row.var_dR},
                                  {"mean_dA", row.mean_dA},
                                  {"var_dA", row.var_dA},
                                  {"cov_dRdA", row.cov_dRdA},
                                  {"z", {row.z[0], row.z[1], row.z[2], row.z[3], row.z[4]}},
                                  {"max_abs_z", row.max_abs_z}});
    }
  }
  if (!o.out.empty()) {
    const fs::path dir = ensure_out_dir(o.out);
    write_text_file(dir / "moments.json", [&](std::ostream& os) {
      ordered_json j;
      j["subcommand"] = "moments";
      j["k"] = o.k;
      j["gate"] = gate;
      j["rows"] = rows;
      os << j.dump(2) << "\n";
    });
  }
  std::printf("moment gate max|z| <= %g: %s\n", gate, ok ? "pass" : "fail");
  return ok ? 0 : 1;
}

// --- diagnose -----------------------------------------------------------------

int run_diagnose(const Options& o) {
  maybe_print_config("diagnose", o);
  const curved::lie::GroupKind kind =
      o.group == "su2" ? curved::lie::GroupKind::SU2 : curved::lie::GroupKind::SL2;
  std::mt19937_64 rng(o.seed);
  const auto rep = curved::harness::equivalence_diagnostic(kind, o.trials, rng);
  ordered_json j;
  j["subcommand"] = "diagnose";
  j["group"] = o.group;
  j["n_pairs"] = rep.n_pairs;
  j["n_skipped"] = rep.n_skipped;
  j["gauge"] = "rho^2 + |area|";
  j["ratio"] = {{"min", rep.min_ratio}, {"max", rep.max_ratio}, {"mean", rep.mean_ratio}};
  if (kind == curved::lie::GroupKind::SL2) {
    j["ratio_sqrt_gauge"] = {{"min", rep.min_ratio_sqrt}, {"max", rep.max_ratio_sqrt}};
  }
  if (!o.out.empty()) {
    const fs::path dir = ensure_out_dir(o.out);
    write_text_file(dir / "diagnose.json",
                    [&](std::ostream& os) { os << j.dump(2) << "\n"; });
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coupled Brownian motions on constant-curvature surfaces and their group lifts"};
  app.require_subcommand(1);
  Options o;
  bool r0_given = false;

  const auto add_common = [&](CLI::App* cmd, bool controller) {
    cmd->add_option("--k", o.k, "surface curvature")->capture_default_str();
    cmd->add_option("--r0", o.r0, "initial distance R0")
        ->capture_default_str()
        ->each([&](const std::string&) { r0_given = true; });
    cmd->add_option("--a0", o.a0, "initial swept area A0")->capture_default_str();
    cmd->add_option("--dt", o.dt, "time step")->capture_default_str();
    cmd->add_option("--t-max", o.t_max, "time horizon")->capture_default_str();
    cmd->add_option("--trials", o.trials, "number of trials")->capture_default_str();
    cmd->add_option("--seed", o.seed, "master seed (env CURVED_COUPLING_SEED overrides)")
        ->capture_default_str();
    cmd->add_option("--jobs", o.jobs, "worker count (accepted; execution is serial)")
        ->capture_default_str();
    cmd->add_option("--out", o.out, "output directory for CSV/JSON artifacts");
    cmd->add_option("--dump-paths", o.dump_paths, "write the first N paths/traces as CSV")
        ->capture_default_str();
    cmd->add_option("--backend", o.backend, "stepping backend")
        ->check(CLI::IsMember({"reduced", "manifold"}))
        ->capture_default_str();
    cmd->add_flag("--print-config", o.print_config,
                  "echo the resolved configuration as JSON before running");
    if (controller) {
      cmd->add_option("--kappa", o.kappa, "fixed-distance entry threshold on |W|")
          ->capture_default_str();
      cmd->add_option("--epsilon", o.epsilon, "hysteresis width (exit at kappa - epsilon)")
          ->capture_default_str();
      cmd->add_option("--eta", o.eta, "antipodal guard band")->capture_default_str();
      cmd->add_option("--delta-r", o.delta_r, "coupling radius")->capture_default_str();
      cmd->add_flag("--wrapped", o.wrapped, "use the wrapped area representative for W");
      cmd->add_flag("--single-run", o.single_run,
                    "stop at the first eta-hit instead of restarting");
    }
  };

  CLI::App* sim = app.add_subcommand("simulate", "fixed-strategy coupling runs");
  add_common(sim, false);
  sim->add_option("--strategy", o.strategy, "coupling strategy")
      ->check(CLI::IsMember({"synchronous", "reflection", "perverse", "fixed_distance",
                             "reflection_noise"}))
      ->capture_default_str();

  CLI::App* ken = app.add_subcommand("kendall", "two-phase controller batches");
  add_common(ken, true);

  CLI::App* ver = app.add_subcommand("verify", "numerical oracle suites");
  ver->add_option("--suite", o.suite,
                  "all | brackets | alg-exp | cylindrical | conjugation | fields | "
                  "projections | relative-fiber | generator-su2 | generator-sl2 | "
                  "hessian | area | triangle")
      ->capture_default_str();
  ver->add_option("--tol-profile", o.tol_profile, "default | quick (smaller samples)")
      ->capture_default_str();
  ver->add_flag("--print-config", o.print_config,
                "echo the resolved configuration as JSON before running");

  CLI::App* mom = app.add_subcommand("moments", "one-step moment validation");
  mom->add_option("--k", o.k, "surface curvature")->capture_default_str();
  mom->add_option("--strategy", o.strategy, "strategy name or 'all'")
      ->check(CLI::IsMember({"all", "synchronous", "reflection", "perverse",
                             "fixed_distance", "reflection_noise"}))
      ->default_val("all");
  mom->add_option("--r0", o.r0, "check a single radius instead of the default grid")
      ->each([&](const std::string&) { r0_given = true; });
  mom->add_option("--dt", o.dt_moments, "time step")->capture_default_str();
  mom->add_option("--samples", o.samples, "one-step samples per (strategy, R)")
      ->capture_default_str();
  mom->add_option("--seed", o.seed, "master seed (env CURVED_COUPLING_SEED overrides)")
      ->capture_default_str();
  mom->add_option("--out", o.out, "output directory");
  mom->add_flag("--print-config", o.print_config,
                "echo the resolved configuration as JSON before running");

  CLI::App* dia = app.add_subcommand("diagnose", "distance-equivalence diagnostic");
  dia->add_option("--group", o.group, "su2 | sl2")
      ->check(CLI::IsMember({"su2", "sl2"}))
      ->capture_default_str();
  dia->add_option("--trials", o.trials, "number of random pairs")->default_val(2000);
  dia->add_option("--seed", o.seed, "master seed (env CURVED_COUPLING_SEED overrides)")
      ->capture_default_str();
  dia->add_option("--out", o.out, "output directory");
  dia->add_flag("--print-config", o.print_config,
                "echo the resolved configuration as JSON before running");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    apply_env_seed(o);
    if (sim->parsed()) return run_simulate(o);
    if (ken->parsed()) return run_kendall(o);
    if (ver->parsed()) return run_verify(o);
    if (mom->parsed()) return run_moments(o, r0_given);
    if (dia->parsed()) return run_diagnose(o);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
