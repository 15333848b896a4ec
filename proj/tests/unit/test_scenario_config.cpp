#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "parafoil/scenario_config.hpp"

using namespace parafoil;

namespace {

std::string expect_config_error(const std::string& text) {
  try {
    (void)parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  ADD_FAILURE() << "no ConfigError for " << text;
  return {};
}

}  // namespace

TEST(ScenarioConfig, MinimalDocumentGivesDefaults) {
  const ScenarioConfig c = parse_scenario(R"({"version": 1})");
  const ScenarioConfig d;
  EXPECT_EQ(c.z0, d.z0);
  EXPECT_EQ(c.x0, d.x0);
  EXPECT_EQ(c.nodes, 40);
  EXPECT_EQ(c.psi_dot_max, 0.15);
  EXPECT_EQ(c.gains.k_cross, 0.002);
  EXPECT_EQ(c.gains.k_heading, 0.8);
  EXPECT_EQ(c.gains.k_long, 0.05);
  EXPECT_EQ(c.atmosphere.c_h(), 1.225);
  EXPECT_EQ(c.atmosphere.c_rho(), 2.256e-5);
  EXPECT_EQ(c.atmosphere.c_e(), 4.2559);
  EXPECT_TRUE(std::isinf(c.replan_threshold));
  EXPECT_EQ(c.campaign.runs, 200);
}

TEST(ScenarioConfig, DefaultWeightsScaleWithSpeeds) {
  const ScenarioConfig c;
  const PlanningProblem p = c.problem();
  const Mesh m = build_mesh(p.time_map(), p.wind, p.nodes);
  const ScpWeights w = c.planner.weights_for(m);
  EXPECT_EQ(w.alpha1, 1e4);
  EXPECT_EQ(w.alpha2, 1e2);
  EXPECT_EQ(w.alpha5, 1e3);
  EXPECT_NEAR(w.eps_h, 0.05 * p.speeds.horizontal(p.z_final), 1e-12);
  EXPECT_NEAR(w.eps_u, 0.3 * p.speeds.horizontal(p.speeds.z0()), 1e-12);
  EXPECT_EQ(w.conv_tol, 1e-3);
  EXPECT_EQ(w.max_iter, 50);
}

TEST(ScenarioConfig, OverridesApply) {
  const ScenarioConfig c = parse_scenario(R"({
    "version": 1,
    "boundary": {"z0": 1500, "x0": [300, -200], "psi_f": 1.0},
    "mesh": {"nodes": 25},
    "planner": {"eps_h": 0.4, "max_iter": 12},
    "wind": {"sigma_lf": 0, "seed_x": 99},
    "flight": {"replan_threshold": 30},
    "campaign": {"runs": 5, "randomize_wind": false}
  })");
  EXPECT_EQ(c.z0, 1500.0);
  EXPECT_EQ(c.x0, Eigen::Vector2d(300.0, -200.0));
  EXPECT_EQ(c.psi_f, 1.0);
  EXPECT_EQ(c.nodes, 25);
  EXPECT_EQ(c.planner.eps_h, 0.4);
  EXPECT_EQ(c.planner.max_iter, 12);
  EXPECT_EQ(c.wind.sigma_lf, 0.0);
  EXPECT_EQ(c.wind.seed_x, 99u);
  EXPECT_EQ(c.replan_threshold, 30.0);
  EXPECT_EQ(c.campaign.runs, 5);
  EXPECT_FALSE(c.campaign.randomize_wind);
}

TEST(ScenarioConfig, NullThresholdDisablesReplanning) {
  const ScenarioConfig c = parse_scenario(R"({"version": 1, "flight": {"replan_threshold": null}})");
  EXPECT_TRUE(std::isinf(c.replan_threshold));
}

TEST(ScenarioConfig, UnknownKeyNamesItsPath) {
  EXPECT_EQ(expect_config_error(R"({"version": 1, "boundary": {"z00": 5}})"), "boundary.z00");
  EXPECT_EQ(expect_config_error(R"({"version": 1, "colour": "red"})"), "colour");
  EXPECT_EQ(expect_config_error(R"({"version": 1, "planner": {"solver": {"tol": 1}}})"), "planner.solver.tol");
}

TEST(ScenarioConfig, TypeErrorsNameTheirPath) {
  EXPECT_EQ(expect_config_error(R"({"version": 1, "mesh": {"nodes": "forty"}})"), "mesh.nodes");
  EXPECT_EQ(expect_config_error(R"({"version": 1, "boundary": {"x0": [1, 2, 3]}})"), "boundary.x0");
  EXPECT_EQ(expect_config_error(R"({"version": 1, "mesh": {"nodes": 2.5}})"), "mesh.nodes");
  EXPECT_EQ(expect_config_error(R"({"version": 1, "campaign": {"randomize_wind": 1}})"), "campaign.randomize_wind");
}

TEST(ScenarioConfig, InvalidValuesRejected) {
  EXPECT_EQ(expect_config_error(R"({"version": 1, "psi_dot_max": -0.1})"), "psi_dot_max");
  EXPECT_FALSE(expect_config_error(R"({"version": 1, "mesh": {"nodes": 1}})").empty());
  EXPECT_FALSE(expect_config_error(R"({"version": 1, "boundary": {"z0": -5}})").empty());
}

TEST(ScenarioConfig, VersionRequired) {
  EXPECT_EQ(expect_config_error(R"({})"), "version");
  EXPECT_EQ(expect_config_error(R"({"version": 2})"), "version");
}

TEST(ScenarioConfig, MalformedJson) {
  EXPECT_THROW((void)parse_scenario("{\"version\": 1,"), ConfigError);
}

TEST(ScenarioConfig, DumpRoundTrips) {
  ScenarioConfig c;
  c.z0 = 1234.5;
  c.x0 = {-10.25, 77.0};
  c.planner.eps_u = 2.5;
  c.wind.direction = 0.7;
  c.replan_threshold = 30.0;
  c.dispersions.v_bias = 0.05;
  c.campaign.base_seed = 18446744073709551615ull;
  const std::string text = dump_scenario(c);
  const ScenarioConfig back = parse_scenario(text);
  EXPECT_EQ(dump_scenario(back), text);
  EXPECT_EQ(back.x0, c.x0);
  EXPECT_EQ(back.campaign.base_seed, c.campaign.base_seed);
  EXPECT_EQ(back.planner.eps_u, 2.5);
}

TEST(ScenarioConfig, DumpOfDefaultsRoundTripsWithInfiniteThreshold) {
  const std::string text = dump_scenario(ScenarioConfig{});
  EXPECT_TRUE(std::isinf(parse_scenario(text).replan_threshold));
  EXPECT_EQ(dump_scenario(parse_scenario(text)), text);
}

TEST(ScenarioConfig, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "parafoil_config_test.json";
  {
    std::ofstream out(path);
    out << R"({"version": 1, "boundary": {"z0": 900}})";
  }
  EXPECT_EQ(load_scenario(path).z0, 900.0);
  std::filesystem::remove(path);
  EXPECT_THROW((void)load_scenario(path), ConfigError);
}

TEST(ScenarioConfig, ProblemCarriesScenario) {
  ScenarioConfig c;
  c.z0 = 1800.0;
  const PlanningProblem p = c.problem();
  EXPECT_EQ(p.speeds.z0(), 1800.0);
  EXPECT_EQ(p.x0, c.x0);
  EXPECT_TRUE(p.wind.covers(0.0));
  EXPECT_TRUE(p.wind.covers(1800.0));
  const FlightConfig f = c.flight();
  EXPECT_EQ(f.substeps, 20);
  EXPECT_EQ(f.gains.k_cross, c.gains.k_cross);
}
