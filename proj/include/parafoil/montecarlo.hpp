#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "parafoil/control_sim.hpp"

namespace parafoil {

/// A dispersion campaign. `flight` is the template scenario: for each run the
/// start pose, start altitude and (optionally) the wind realization are
/// redrawn, everything else is kept.
struct CampaignConfig {
  explicit CampaignConfig(FlightConfig base) : flight(std::move(base)) {}

  FlightConfig flight;
  int runs{200};
  std::uint64_t base_seed{0};
  double radius_min{500.0};     // m, start distance from the target
  double radius_max{2000.0};
  double altitude_min{1000.0};  // m
  double altitude_max{3000.0};
  bool randomize_wind{true};    // fresh gust seeds per run
  double wind_spacing{1.0};     // m
  int threads{0};               // 0 uses the hardware concurrency

  void validate() const;
  [[nodiscard]] std::uint64_t seed_of(int run) const { return base_seed + static_cast<std::uint64_t>(run); }
};

/// Scenario of run `run`: start position uniform over the annulus around the
/// target, heading uniform, altitude uniform in the band.
[[nodiscard]] PlanningProblem sample_problem(const CampaignConfig& config, int run);
[[nodiscard]] FlightConfig sample_flight(const CampaignConfig& config, int run);

/// Streaming mean and population variance of the miss distance and the
/// absolute heading miss.
struct RunningStats {
  long n{0};
  double mean_miss{0.0};
  double m2_miss{0.0};
  double mean_heading_miss{0.0};
  double m2_heading_miss{0.0};

  void push(double miss, double heading_miss);
  void merge(const RunningStats& other);
  [[nodiscard]] double var_miss() const { return n > 0 ? m2_miss / static_cast<double>(n) : 0.0; }
  [[nodiscard]] double var_heading_miss() const {
    return n > 0 ? m2_heading_miss / static_cast<double>(n) : 0.0;
  }
};

struct CampaignRun {
  int run{0};
  std::uint64_t seed{0};
  LandingRecord record;
};

struct CampaignResult {
  std::vector<CampaignRun> runs;
  std::vector<RunningStats> trace;  // stats over successful runs 0..i

  [[nodiscard]] int failures() const;
};

/// Runs every flight of the campaign, in parallel when threads allow. The
/// result does not depend on the thread count.
[[nodiscard]] CampaignResult run_campaign(const CampaignConfig& config);

struct DistributionSummary {
  double mean{0.0};
  double median{0.0};
  double p95{0.0};
  double max{0.0};
};

struct CampaignSummary {
  int runs{0};
  int failures{0};
  DistributionSummary miss;          // m
  DistributionSummary heading_miss;  // rad, absolute
  double mean_iterations{0.0};       // phase one plus phase two
  double mean_iteration_ms{0.0};
  double mean_replans{0.0};
};

/// Statistics over the successful records. Throws std::invalid_argument on
/// an empty list.
[[nodiscard]] CampaignSummary summarize(const std::vector<LandingRecord>& records);
[[nodiscard]] CampaignSummary summarize(const CampaignResult& result);

/// Linear-interpolation quantile of unsorted data, q in [0, 1].
[[nodiscard]] double quantile(std::vector<double> values, double q);

/// Decimal rendering with `digits` significant digits.
[[nodiscard]] std::string format_significant(double value, int digits);

/// `run,seed,miss_m,miss_heading_rad,iters_p1,iters_p2,mean_iter_ms,replans,status`.
/// mean_iter_ms is wall-clock; with include_timing false it is written as 0 so
/// the bytes depend on the config only.
void write_campaign_csv(const CampaignResult& result, std::ostream& out, bool include_timing = true);
void write_trace_csv(const CampaignResult& result, std::ostream& out);

}  // namespace parafoil
