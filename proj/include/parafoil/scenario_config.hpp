#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "parafoil/control_sim.hpp"
#include "parafoil/montecarlo.hpp"

namespace parafoil {

/// Schema or value error in a scenario document. `key` is the dotted path of
/// the offending entry, e.g. "boundary.psi0".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  [[nodiscard]] const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct CampaignBlock {
  int runs{200};
  std::uint64_t base_seed{0};
  double radius_min{500.0};
  double radius_max{2000.0};
  double altitude_min{1000.0};
  double altitude_max{3000.0};
  bool randomize_wind{true};
  int threads{0};
};

/// Everything one run needs, in SI units. Defaults form the nominal scenario:
/// 2 km up, 1 km east of the target, flying north, landing facing east.
struct ScenarioConfig {
  static constexpr int kVersion = 1;

  AtmosphereModel atmosphere;
  // Speed measurement (v, r) taken at altitude speed_altitude.
  double v_measured{12.0};
  double r_measured{4.5};
  double speed_altitude{0.0};

  double t0{0.0};
  double z0{2000.0};
  double z_final{0.0};
  Eigen::Vector2d x0{1000.0, 0.0};
  double psi0{1.5707963267948966};
  Eigen::Vector2d target{0.0, 0.0};
  double psi_f{0.0};
  double psi_dot_max{0.15};
  int nodes{40};
  double mesh_ratio{1.0};

  PlannerSettings planner;
  DrydenParams wind;
  double wind_spacing{1.0};  // m

  ControllerGains gains;
  DispersionSpec dispersions;
  double replan_threshold{std::numeric_limits<double>::infinity()};  // m, inf disables
  double replan_margin{100.0};
  double replan_cooldown{20.0};
  int substeps{20};

  CampaignBlock campaign;

  [[nodiscard]] SpeedProfile speeds() const;
  /// The planning problem with the wind realization of `wind`.
  [[nodiscard]] PlanningProblem problem() const;
  [[nodiscard]] FlightConfig flight() const;
  [[nodiscard]] CampaignConfig campaign_config() const;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Parses a scenario document. Missing keys keep their defaults; unknown keys,
/// type mismatches and invalid values throw ConfigError.
[[nodiscard]] ScenarioConfig parse_scenario(const std::string& text);
[[nodiscard]] ScenarioConfig load_scenario(const std::filesystem::path& path);
/// Full document with every key spelled out.
[[nodiscard]] std::string dump_scenario(const ScenarioConfig& config);

}  // namespace parafoil
