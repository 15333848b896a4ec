#include "parafoil/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "parafoil/random.hpp"

namespace parafoil {

namespace {

constexpr std::uint64_t kPoseTag = 0x4341'4d50'504f'5345ULL;
constexpr std::uint64_t kWindTagX = 0x4341'4d50'5749'4e58ULL;
constexpr std::uint64_t kWindTagY = 0x4341'4d50'5749'4e59ULL;

std::string number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

DistributionSummary describe(const std::vector<double>& v) {
  DistributionSummary d;
  if (v.empty()) return d;
  double sum = 0.0;
  for (double x : v) sum += x;
  d.mean = sum / static_cast<double>(v.size());
  d.median = quantile(v, 0.5);
  d.p95 = quantile(v, 0.95);
  d.max = *std::max_element(v.begin(), v.end());
  return d;
}

}  // namespace

void CampaignConfig::validate() const {
  if (runs < 1) throw std::invalid_argument("runs must be at least 1");
  if (!(radius_min >= 0.0 && radius_max >= radius_min)) throw std::invalid_argument("radius range is empty");
  if (!(altitude_max >= altitude_min && altitude_min > flight.problem.z_final)) {
    throw std::invalid_argument("altitude range is empty or below z_final");
  }
  const AtmosphereModel& atm = flight.problem.speeds.atmosphere();
  if (!atm.in_domain(altitude_max) || !atm.in_domain(flight.problem.z_final)) {
    throw std::invalid_argument("altitude range leaves the atmosphere domain");
  }
  if (!(wind_spacing > 0.0)) throw std::invalid_argument("wind_spacing must be positive");
  if (threads < 0) throw std::invalid_argument("threads must be nonnegative");
  flight.dispersions.validate();
  flight.gains.validate();
}

PlanningProblem sample_problem(const CampaignConfig& config, int run) {
  const std::uint64_t seed = config.seed_of(run);
  Random rng(Random::mix(seed) ^ kPoseTag);
  const double r2 = rng.uniform(config.radius_min * config.radius_min, config.radius_max * config.radius_max);
  const double bearing = rng.uniform(-std::numbers::pi, std::numbers::pi);
  const double heading = rng.uniform(-std::numbers::pi, std::numbers::pi);
  const double z0 = rng.uniform(config.altitude_min, config.altitude_max);

  PlanningProblem p = config.flight.problem;
  p.speeds = p.speeds.anchored_at(z0);
  p.x0 = p.target + std::sqrt(r2) * Eigen::Vector2d(std::cos(bearing), std::sin(bearing));
  p.psi0 = heading;
  DrydenParams wind = config.flight.wind_params;
  if (config.randomize_wind) {
    wind.seed_x = Random::mix(seed) ^ kWindTagX;
    wind.seed_y = Random::mix(seed) ^ kWindTagY;
  }
  p.wind = generate_profile(wind, p.speeds, altitude_grid(p.z_final - 50.0, z0 + 10.0, config.wind_spacing));
  return p;
}

FlightConfig sample_flight(const CampaignConfig& config, int run) {
  FlightConfig f = config.flight;
  f.problem = sample_problem(config, run);
  return f;
}

void RunningStats::push(double miss, double heading_miss) {
  RunningStats one;
  one.n = 1;
  one.mean_miss = miss;
  one.mean_heading_miss = heading_miss;
  merge(one);
}

void RunningStats::merge(const RunningStats& o) {
  if (o.n == 0) return;
  if (n == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n);
  const double nb = static_cast<double>(o.n);
  const double total = na + nb;
  const double d_miss = o.mean_miss - mean_miss;
  const double d_head = o.mean_heading_miss - mean_heading_miss;
  mean_miss += d_miss * nb / total;
  mean_heading_miss += d_head * nb / total;
  m2_miss += o.m2_miss + d_miss * d_miss * na * nb / total;
  m2_heading_miss += o.m2_heading_miss + d_head * d_head * na * nb / total;
  n += o.n;
}

int CampaignResult::failures() const {
  return static_cast<int>(std::count_if(runs.begin(), runs.end(), [](const CampaignRun& r) { return !r.record.ok; }));
}

CampaignResult run_campaign(const CampaignConfig& config) {
  config.validate();
  CampaignResult out;
  out.runs.resize(static_cast<std::size_t>(config.runs));

  auto one = [&](int i) {
    CampaignRun& r = out.runs[static_cast<std::size_t>(i)];
    r.run = i;
    r.seed = config.seed_of(i);
    try {
      r.record = fly(sample_flight(config, i), r.seed).record;
    } catch (const std::exception& e) {
      r.record = LandingRecord{};
      r.record.ok = false;
      r.record.failure = e.what();
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = std::min(config.runs, config.threads > 0 ? config.threads : static_cast<int>(hw));
  if (workers <= 1) {
    for (int i = 0; i < config.runs; ++i) one(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < config.runs; i = next++) one(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  // Reduction in run order, independent of scheduling.
  RunningStats stats;
  out.trace.reserve(out.runs.size());
  for (const CampaignRun& r : out.runs) {
    if (r.record.ok) stats.push(r.record.miss_distance, std::abs(r.record.miss_heading));
    out.trace.push_back(stats);
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::string format_significant(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return buf;
}

CampaignSummary summarize(const std::vector<LandingRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize needs at least one record");
  CampaignSummary s;
  s.runs = static_cast<int>(records.size());
  std::vector<double> miss;
  std::vector<double> heading;
  double iterations = 0.0;
  double iteration_ms = 0.0;
  double replans = 0.0;
  for (const LandingRecord& r : records) {
    iterations += r.iterations_phase1 + r.iterations_phase2;
    iteration_ms += r.mean_iteration_ms;
    replans += r.replans;
    if (!r.ok) {
      ++s.failures;
      continue;
    }
    miss.push_back(r.miss_distance);
    heading.push_back(std::abs(r.miss_heading));
  }
  const double n = static_cast<double>(records.size());
  s.miss = describe(miss);
  s.heading_miss = describe(heading);
  s.mean_iterations = iterations / n;
  s.mean_iteration_ms = iteration_ms / n;
  s.mean_replans = replans / n;
  return s;
}

CampaignSummary summarize(const CampaignResult& result) {
  std::vector<LandingRecord> records;
  records.reserve(result.runs.size());
  for (const CampaignRun& r : result.runs) records.push_back(r.record);
  return summarize(records);
}

void write_campaign_csv(const CampaignResult& result, std::ostream& out, bool include_timing) {
  out << "run,seed,miss_m,miss_heading_rad,iters_p1,iters_p2,mean_iter_ms,replans,status\n";
  for (const CampaignRun& r : result.runs) {
    const LandingRecord& rec = r.record;
    out << r.run << ',' << r.seed << ',' << number(rec.miss_distance) << ',' << number(rec.miss_heading) << ','
        << rec.iterations_phase1 << ',' << rec.iterations_phase2 << ','
        << number(include_timing ? rec.mean_iteration_ms : 0.0) << ',' << rec.replans << ','
        << (rec.ok ? std::string("ok") : csv_field("failed: " + rec.failure)) << '\n';
  }
}

void write_trace_csv(const CampaignResult& result, std::ostream& out) {
  out << "run,n,mean_miss_m,var_miss_m2,mean_heading_miss_rad,var_heading_miss_rad2\n";
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    const RunningStats& s = result.trace[i];
    out << i << ',' << s.n << ',' << number(s.mean_miss) << ',' << number(s.var_miss()) << ','
        << number(s.mean_heading_miss) << ',' << number(s.var_heading_miss()) << '\n';
  }
}

}  // namespace parafoil
