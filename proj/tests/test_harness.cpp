#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "curved/harness.hpp"
#include "curved/io.hpp"

using namespace curved;

namespace {

harness::ExperimentConfig small_config() {
  harness::ExperimentConfig cfg;
  cfg.params.T_max = 300.0;
  cfg.trials = 24;
  cfg.master_seed = 1001;
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CLI_BINARY_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string capture_cli(const std::string& args) {
  const std::string cmd = std::string(CLI_BINARY_PATH) + " " + args;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[512];
  while (std::fgets(buf, sizeof(buf), pipe) != nullptr) out += buf;
  pclose(pipe);
  return out;
}

}  // namespace

TEST_CASE("batches are reproducible from the master seed", "[harness]") {
  const auto cfg = small_config();
  const auto a = harness::run_batch(cfg);
  const auto b = harness::run_batch(cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].tau == b.records[i].tau);
    CHECK(a.records[i].outcome == b.records[i].outcome);
    CHECK(a.records[i].final_A == b.records[i].final_A);
  }
  auto cfg2 = cfg;
  cfg2.master_seed = 1002;
  const auto d = harness::run_batch(cfg2);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    any_diff = any_diff || a.records[i].tau != d.records[i].tau;
  }
  CHECK(any_diff);
}

TEST_CASE("survival curves are monotone with censoring", "[harness]") {
  auto cfg = small_config();
  cfg.successful = false;  // eta hits become right-censored survivors
  const auto batch = harness::run_batch(cfg);
  const auto grid = harness::uniform_grid(cfg.params.T_max, 101);
  const auto s = harness::survival_curve(batch.records, grid);
  REQUIRE(s.p_hat.size() == grid.size());
  CHECK(s.p_hat.front() == 1.0);
  long censored = 0;
  for (const auto& r : batch.records) {
    if (r.outcome != kendall::Outcome::Coupled) ++censored;
  }
  CHECK(s.p_hat.back() >=
        static_cast<double>(censored) / static_cast<double>(cfg.trials) - 1e-12);
  for (std::size_t i = 1; i < s.p_hat.size(); ++i) {
    CHECK(s.p_hat[i] <= s.p_hat[i - 1] + 1e-12);
  }
  const auto tv = harness::tv_upper_bound(s);
  for (double v : tv.p_hat) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(harness::max_curve_gap(s, s) == 0.0);
  CHECK_THROWS_AS(harness::uniform_grid(-1.0), std::invalid_argument);
}

TEST_CASE("independent seeds give survival curves within the DKW envelope",
          "[harness][slow]") {
  auto cfg = small_config();
  cfg.trials = 400;
  cfg.params.T_max = 100.0;
  cfg.successful = false;
  auto cfg2 = cfg;
  cfg2.master_seed = 909090;
  const auto s1 = harness::survival_curve(harness::run_batch(cfg).records,
                                          harness::uniform_grid(100.0, 101));
  const auto s2 = harness::survival_curve(harness::run_batch(cfg2).records,
                                          harness::uniform_grid(100.0, 101));
  // Two-sample DKW-style bound at alpha ~ 0.01: eps = sqrt(ln(2/a)/2n) each.
  CHECK(harness::max_curve_gap(s1, s2) < 2.0 * std::sqrt(std::log(200.0) / 800.0));
}

TEST_CASE("manifold one-step moments match the closed forms", "[harness][slow]") {
  const geom::Curvature c = geom::Curvature::of(1.0);
  for (auto strat : {sde::Strategy::Synchronous, sde::Strategy::Reflection,
                     sde::Strategy::FixedDistance}) {
    const auto rows = harness::validate_moments(strat, c, {0.8, 1.6}, 8000, 1e-3, 77);
    for (const auto& row : rows) {
      INFO(sde::strategy_name(strat) << " R=" << row.R << " max|z|=" << row.max_abs_z);
      CHECK(row.max_abs_z < 4.0);
    }
  }
}

TEST_CASE("equivalence diagnostic reports bounded positive ratios", "[harness]") {
  std::mt19937_64 rng(404);
  for (auto kind : {lie::GroupKind::SU2, lie::GroupKind::SL2}) {
    const auto rep = harness::equivalence_diagnostic(kind, 400, rng);
    CHECK(rep.n_pairs == 400);
    CHECK(rep.min_ratio > 0.0);
    CHECK(rep.min_ratio <= rep.mean_ratio);
    CHECK(rep.mean_ratio <= rep.max_ratio);
    CHECK(std::isfinite(rep.max_ratio));
  }
}

TEST_CASE("csv writers emit the pinned headers", "[harness]") {
  std::ostringstream os;
  io::write_path_csv(os, {{1.0, 0.5, 0.0}}, "reflection");
  CHECK(os.str().rfind("t,R,A,phase\n", 0) == 0);

  std::ostringstream os2;
  io::write_records_csv(os2, {{kendall::Outcome::Coupled, 1.5, 3, 1e-3, 0.0, 0}});
  CHECK(os2.str().rfind("trial,outcome,tau,switches,final_R,final_A\n", 0) == 0);
  CHECK(os2.str().find("coupled") != std::string::npos);

  std::ostringstream os3;
  harness::SurvivalCurve s;
  s.grid = {0.0};
  s.p_hat = {1.0};
  s.ci_half_width = {0.0};
  io::write_survival_csv(os3, s);
  CHECK(os3.str().rfind("t,p_hat,ci\n", 0) == 0);

  std::ostringstream os4;
  io::write_phase_trace_csv(os4, {{0.0, 1.0, 0.0, 0.0, kendall::Phase::Reflection, 0}});
  CHECK(os4.str().rfind("t,R,A,W,phase,switch_count\n", 0) == 0);
}

TEST_CASE("cli validates flags before computing", "[harness][cli]") {
  CHECK(run_cli("kendall --epsilon 2 --kappa 1 2>/dev/null") == 2);
  CHECK(run_cli("kendall --wrapped --k 2 2>/dev/null") == 2);
  CHECK(run_cli("simulate --strategy sideways 2>/dev/null") == 2);
  CHECK(run_cli("verify --suite no-such-suite 2>/dev/null") == 2);
  CHECK(run_cli("frobnicate 2>/dev/null") == 2);
  CHECK(run_cli("--help >/dev/null") == 0);
}

TEST_CASE("cli verify and simulate smoke runs", "[harness][cli][slow]") {
  CHECK(run_cli("verify --suite brackets >/dev/null") == 0);
  CHECK(run_cli("verify --suite conjugation --tol-profile quick >/dev/null") == 0);

  const auto dir = std::filesystem::temp_directory_path() / "curved_cli_test";
  std::filesystem::remove_all(dir);
  const std::string out = dir.string();
  CHECK(run_cli("simulate --strategy fixed_distance --k 1 --r0 1 --dt 1e-3 "
                "--t-max 0.2 --trials 3 --dump-paths 1 --out " +
                out + " >/dev/null") == 0);
  CHECK(std::filesystem::exists(dir / "summary.json"));
  CHECK(std::filesystem::exists(dir / "path_0000.csv"));
  std::ifstream csv(dir / "path_0000.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,R,A,phase");

  CHECK(run_cli("kendall --k 1 --trials 3 --t-max 400 --delta-r 0.05 --dt 1e-3 "
                "--dump-paths 1 --out " +
                out + " >/dev/null") == 0);
  CHECK(std::filesystem::exists(dir / "records.csv"));
  CHECK(std::filesystem::exists(dir / "survival.csv"));
  CHECK(std::filesystem::exists(dir / "trace_0000.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("cli seed resolution prefers the environment variable", "[harness][cli]") {
  const std::string base =
      "simulate --strategy synchronous --k 1 --r0 1 --dt 1e-2 --t-max 0.05 "
      "--trials 1 --seed 42 --print-config";
  setenv("CURVED_COUPLING_SEED", "777", 1);
  const std::string with_env = capture_cli(base);
  unsetenv("CURVED_COUPLING_SEED");
  const std::string without = capture_cli(base);
  CHECK(with_env.find("\"seed\": 777") != std::string::npos);
  CHECK(without.find("\"seed\": 42") != std::string::npos);

  setenv("CURVED_COUPLING_SEED", "not-a-number", 1);
  CHECK(run_cli(base + " 2>/dev/null") == 2);
  unsetenv("CURVED_COUPLING_SEED");
}
