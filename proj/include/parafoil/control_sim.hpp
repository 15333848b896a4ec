#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "parafoil/dynamics.hpp"
#include "parafoil/planner.hpp"
#include "parafoil/wind.hpp"

namespace parafoil {

struct ControllerGains {
  double k_cross{0.002};    // 1/(m s)
  double k_heading{0.8};    // 1/s
  double k_long{0.05};      // 1/s
  double sink_authority{0.15};  // |sink delta| <= sink_authority r(z)

  void validate() const;
};

/// Truth plant dispersions. `gusts` is wind the planner does not know about;
/// an empty profile means none.
struct TruthModelParams {
  double v_bias{0.0};         // fraction
  double r_bias{0.0};         // fraction
  double actuator_tau{0.0};   // s
  double turn_rate_limit{0.0};  // rad/s, 0 uses the planner's limit
  WindProfile gusts;

  void validate() const;
};

/// Ranges from which a flight draws its truth dispersions.
struct DispersionSpec {
  double v_bias{0.0};        // uniform in [-v_bias, v_bias]
  double r_bias{0.0};        // uniform in [-r_bias, r_bias]
  double actuator_tau{0.0};  // fixed
  double gust_sigma{0.0};    // m/s at the reference altitude
  double gust_length{60.0};  // m

  void validate() const;
  [[nodiscard]] bool none() const { return v_bias == 0.0 && r_bias == 0.0 && actuator_tau == 0.0 && gust_sigma == 0.0; }
};

/// Draws the truth model for one seeded flight of `problem`.
[[nodiscard]] TruthModelParams sample_truth(const DispersionSpec& spec, const PlanningProblem& problem,
                                            const DrydenParams& wind_params, std::uint64_t seed);

/// Signed cross-track error of `est` against the reference at time t,
/// positive when the vehicle is left of the track.
[[nodiscard]] double cross_track_error(const FourDofState& est, const ReferenceSolution& ref, double t);
/// Signed along-track error, positive when the vehicle is ahead.
[[nodiscard]] double along_track_error(const FourDofState& est, const ReferenceSolution& ref, double t);

/// pace u*(t) - k_cross d + k_heading wrap(psi* - psi), clamped to
/// +-psi_dot_max. A positive d (left of track) steers right. `pace` is the
/// rate at which the reference clock runs against real time.
[[nodiscard]] double lateral_control(const ControllerGains& gains, const FourDofState& est,
                                     const ReferenceSolution& ref, double t, double psi_dot_max,
                                     double pace = 1.0);

/// k_long times the along-track error, clamped to +-sink_authority r(z).
/// Positive means descend faster.
[[nodiscard]] double longitudinal_control(const ControllerGains& gains, const FourDofState& est,
                                          const ReferenceSolution& ref, double t, double nominal_sink);

struct FlightConfig {
  PlanningProblem problem;
  PlannerSettings planner;
  ControllerGains gains;
  DispersionSpec dispersions;
  DrydenParams wind_params;  // seeds the unknown gust realization
  double replan_threshold{std::numeric_limits<double>::infinity()};  // m
  double replan_margin{100.0};   // no replanning below z_f + margin, m
  double replan_cooldown{20.0};  // s between replans
  int substeps{20};              // truth steps per mesh interval
};

struct LandingRecord {
  double miss_distance{0.0};
  double miss_heading{0.0};
  double touchdown_time{0.0};
  int replans{0};
  double saturated_fraction{0.0};
  bool ok{true};
  std::string failure;
  int iterations_phase1{0};
  int iterations_phase2{0};
  double mean_iteration_ms{0.0};
};

struct TrajectorySample {
  double t{0.0};
  double px{0.0};
  double py{0.0};
  double z{0.0};
  double psi{0.0};
  double u_cmd{0.0};
};

struct FlightResult {
  LandingRecord record;
  std::vector<TrajectorySample> log;  // one sample per truth step, plus touchdown
  TruthModelParams truth;
  PlannerDiagnostics initial_plan;
  bool replanning_enabled{false};
};

/// Plans, then flies the truth plant under the tracking controllers until it
/// crosses z_final. Deterministic per (config, seed).
[[nodiscard]] FlightResult fly(const FlightConfig& config, std::uint64_t seed);

/// Same, with an explicit truth model and an already computed plan.
[[nodiscard]] FlightResult fly(const FlightConfig& config, const PlanResult& plan, const TruthModelParams& truth);

}  // namespace parafoil
