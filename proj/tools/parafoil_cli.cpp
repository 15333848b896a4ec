// parafoil: plan, fly and evaluate guided parafoil descents.
//
// Exit codes: 0 success, 2 configuration error, 3 output collision,
// 4 planner or solver failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "parafoil/montecarlo.hpp"
#include "parafoil/scenario_config.hpp"
#include "parafoil/serialization.hpp"
#include "parafoil/socp.hpp"

namespace fs = std::filesystem;
using namespace parafoil;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kCollision = 3;
constexpr int kFailure = 4;

struct ExitError {
  int code;
  std::string message;
  std::string key;
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> runs;
  std::optional<int> max_iter;
  std::optional<double> replan_threshold;
  bool no_replan{false};
  bool force{false};
  std::string problem;
};

ScenarioConfig load(const Options& o) {
  ScenarioConfig c = o.config.empty() ? ScenarioConfig{} : load_scenario(o.config);
  if (o.max_iter) {
    if (*o.max_iter < 1) throw ConfigError("--max-iter", "must be at least 1");
    c.planner.max_iter = *o.max_iter;
  }
  if (o.replan_threshold) c.replan_threshold = *o.replan_threshold;
  if (o.no_replan) c.replan_threshold = std::numeric_limits<double>::infinity();
  if (o.runs) c.campaign.runs = *o.runs;
  if (o.seed) c.campaign.base_seed = *o.seed;
  c.validate();
  return c;
}

// Output directory: must not exist (or be empty) unless --force.
void prepare_dir(const Options& o) {
  if (o.out.empty()) throw ExitError{kConfigError, "--out is required", "--out"};
  const fs::path dir(o.out);
  if (fs::exists(dir) && !(fs::is_directory(dir) && fs::is_empty(dir)) && !o.force) {
    throw ExitError{kCollision, "output path exists: " + dir.string() + " (use --force)", "--out"};
  }
  fs::create_directories(dir);
}

std::ofstream open(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ExitError{kCollision, "cannot write " + path.string(), "--out"};
  return f;
}

int cmd_plan(const Options& o) {
  const ScenarioConfig c = load(o);
  prepare_dir(o);
  const PlanResult result = plan(c.problem(), c.planner);
  const fs::path dir(o.out);
  {
    auto f = open(dir / "diagnostics.json");
    write_diagnostics_json(result.diagnostics, f);
  }
  if (result.diagnostics.status == PlanStatus::SolverFailure && !result.usable()) {
    throw ExitError{kFailure, result.diagnostics.message, ""};
  }
  const auto samples = reference_samples(result.reference);
  {
    auto f = open(dir / "trajectory.json");
    write_trajectory_json(samples, f);
  }
  {
    auto f = open(dir / "trajectory.csv");
    write_trajectory_csv(samples, f);
  }
  {
    auto f = open(dir / "iterates.json");
    write_iterates_json(result, f);
  }
  const PlannerDiagnostics& d = result.diagnostics;
  std::printf("status %s, converged %s, iterations %d + %d, mean iteration %.2f ms\n", to_string(d.status).c_str(),
              d.converged ? "true" : "false", d.iterations_phase1, d.iterations_phase2,
              1e3 * d.mean_iteration_time());
  if (d.status == PlanStatus::SolverFailure) throw ExitError{kFailure, d.message, ""};
  return kOk;
}

int cmd_fly(const Options& o) {
  const ScenarioConfig c = load(o);
  prepare_dir(o);
  const std::uint64_t seed = o.seed.value_or(0);
  const FlightResult r = fly(c.flight(), seed);
  const fs::path dir(o.out);
  {
    auto f = open(dir / "landing.json");
    write_landing_json(r.record, r.replanning_enabled, seed, f);
  }
  {
    auto f = open(dir / "log.json");
    write_trajectory_json(r.log, f);
  }
  {
    auto f = open(dir / "log.csv");
    write_trajectory_csv(r.log, f);
  }
  if (!r.record.ok) throw ExitError{kFailure, r.record.failure, ""};
  std::printf("miss %.3f m, heading miss %.3f deg, replans %d, replanning %s\n", r.record.miss_distance,
              r.record.miss_heading * 180.0 / 3.14159265358979323846, r.record.replans,
              r.replanning_enabled ? "enabled" : "disabled");
  return kOk;
}

int cmd_montecarlo(const Options& o) {
  const ScenarioConfig c = load(o);
  prepare_dir(o);
  const CampaignResult result = run_campaign(c.campaign_config());
  const CampaignSummary summary = summarize(result);
  const fs::path dir(o.out);
  {
    auto f = open(dir / "campaign.csv");
    write_campaign_csv(result, f);
  }
  {
    auto f = open(dir / "trace.csv");
    write_trace_csv(result, f);
  }
  {
    auto f = open(dir / "summary.json");
    write_summary_json(summary, f);
  }
  std::printf("runs %d, failures %d, mean miss %.3f m, median %.3f m, p95 %s m, max %.3f m\n", summary.runs,
              summary.failures, summary.miss.mean, summary.miss.median,
              format_significant(summary.miss.p95, 2).c_str(), summary.miss.max);
  if (summary.failures * 20 > summary.runs) {
    throw ExitError{kFailure, std::to_string(summary.failures) + " of " + std::to_string(summary.runs) + " runs failed",
                    ""};
  }
  return kOk;
}

int cmd_wind(const Options& o) {
  const ScenarioConfig c = load(o);
  prepare_dir(o);
  const int count = o.runs.value_or(1);
  if (count < 1) throw ConfigError("--runs", "must be at least 1");
  const SpeedProfile sp = c.speeds();
  const auto grid = altitude_grid(c.z_final, c.z0, c.wind_spacing);
  auto f = open(fs::path(o.out) / "wind.csv");
  f << "profile,seed_x,seed_y,z,wx,wy\n";
  char buf[160];
  for (int i = 0; i < count; ++i) {
    DrydenParams p = c.wind;
    if (o.seed) {
      p.seed_x = *o.seed + 2 * static_cast<std::uint64_t>(i);
      p.seed_y = p.seed_x + 1;
    } else if (i > 0) {
      p.seed_x += 2 * static_cast<std::uint64_t>(i);
      p.seed_y += 2 * static_cast<std::uint64_t>(i);
    }
    const WindProfile w = generate_profile(p, sp, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%d,%llu,%llu,%.17g,%.17g,%.17g\n", i,
                    static_cast<unsigned long long>(p.seed_x), static_cast<unsigned long long>(p.seed_y), grid[k],
                    w.wx()[k], w.wy()[k]);
      f << buf;
    }
  }
  std::printf("%d wind profile(s), %zu altitudes each\n", count, grid.size());
  return kOk;
}

int cmd_solve_socp(const Options& o) {
  std::ifstream in(o.problem);
  if (!in) throw ExitError{kConfigError, "cannot read " + o.problem, "--problem"};
  ConeProgram p;
  try {
    p = ConeProgram::read_triplets(in);
    p.validate();
  } catch (const std::exception& e) {
    throw ExitError{kConfigError, e.what(), "--problem"};
  }
  const ConicSolution sol = SocpSolver().solve(p);
  std::printf("status %s\nobjective %.17g\niterations %d\n", to_string(sol.status).c_str(), sol.objective,
              sol.iterations);
  if (!o.out.empty()) {
    if (fs::exists(o.out) && !o.force) throw ExitError{kCollision, "output path exists: " + o.out, "--out"};
    auto f = open(o.out);
    char buf[64];
    f << "status " << to_string(sol.status) << "\n";
    std::snprintf(buf, sizeof buf, "objective %.17g\n", sol.objective);
    f << buf;
    for (Eigen::Index i = 0; i < sol.primal.size(); ++i) {
      std::snprintf(buf, sizeof buf, "x %ld %.17g\n", static_cast<long>(i), sol.primal[i]);
      f << buf;
    }
  }
  return sol.status == SolveStatus::Optimal ? kOk : kFailure;
}

int cmd_config(const Options& o) {
  const ScenarioConfig c = load(o);
  const std::string text = dump_scenario(c);
  if (o.out.empty()) {
    std::cout << text;
    return kOk;
  }
  if (fs::exists(o.out) && !o.force) throw ExitError{kCollision, "output path exists: " + o.out, "--out"};
  auto f = open(o.out);
  f << text;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parafoil guidance by successive convexification"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool with_seed, bool with_runs) {
    sub->add_option("--config", o.config, "Scenario JSON (defaults to the nominal scenario)");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_flag("--force", o.force, "Overwrite existing output");
    sub->add_option("--max-iter", o.max_iter, "Phase-one SCP iteration cap");
    if (with_seed) sub->add_option("--seed", o.seed, "Seed (U64)");
    if (with_runs) sub->add_option("--runs", o.runs, "Number of runs or profiles");
  };

  CLI::App* plan_cmd = app.add_subcommand("plan", "Plan a reference trajectory");
  common(plan_cmd, false, false);
  CLI::App* fly_cmd = app.add_subcommand("fly", "Plan and fly one closed-loop descent");
  common(fly_cmd, true, false);
  fly_cmd->add_option("--replan-threshold", o.replan_threshold, "Cross-track error that triggers replanning (m)");
  fly_cmd->add_flag("--no-replan", o.no_replan, "Disable replanning");
  CLI::App* mc_cmd = app.add_subcommand("montecarlo", "Run a dispersion campaign");
  common(mc_cmd, true, true);
  mc_cmd->add_option("--replan-threshold", o.replan_threshold, "Cross-track error that triggers replanning (m)");
  mc_cmd->add_flag("--no-replan", o.no_replan, "Disable replanning");
  CLI::App* wind_cmd = app.add_subcommand("wind", "Emit wind profiles as CSV");
  common(wind_cmd, true, true);
  CLI::App* socp_cmd = app.add_subcommand("solve-socp", "Solve a cone program in triplet format");
  socp_cmd->add_option("--problem", o.problem, "Triplet file")->required();
  socp_cmd->add_option("--out", o.out, "Solution file");
  socp_cmd->add_flag("--force", o.force, "Overwrite existing output");
  CLI::App* config_cmd = app.add_subcommand("config", "Print the effective scenario document");
  config_cmd->add_option("--config", o.config, "Scenario JSON");
  config_cmd->add_option("--out", o.out, "Output file");
  config_cmd->add_flag("--force", o.force, "Overwrite existing output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*plan_cmd) return cmd_plan(o);
    if (*fly_cmd) return cmd_fly(o);
    if (*mc_cmd) return cmd_montecarlo(o);
    if (*wind_cmd) return cmd_wind(o);
    if (*socp_cmd) return cmd_solve_socp(o);
    if (*config_cmd) return cmd_config(o);
  } catch (const ConfigError& e) {
    write_error_json(e.what(), e.key(), kConfigError, std::cerr);
    return kConfigError;
  } catch (const ExitError& e) {
    write_error_json(e.message, e.key, e.code, std::cerr);
    return e.code;
  } catch (const fs::filesystem_error& e) {
    write_error_json(e.what(), "--out", kCollision, std::cerr);
    return kCollision;
  } catch (const std::invalid_argument& e) {
    write_error_json(e.what(), "", kConfigError, std::cerr);
    return kConfigError;
  } catch (const std::exception& e) {
    write_error_json(e.what(), "", kFailure, std::cerr);
    return kFailure;
  }
  return kOk;
}
