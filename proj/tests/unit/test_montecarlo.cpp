#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "parafoil/montecarlo.hpp"
#include "parafoil/scenario_config.hpp"

using namespace parafoil;

namespace {

LandingRecord record(double miss, double heading = 0.0) {
  LandingRecord r;
  r.miss_distance = miss;
  r.miss_heading = heading;
  r.iterations_phase1 = 10;
  r.iterations_phase2 = 1;
  return r;
}

CampaignConfig small_campaign(int runs) {
  ScenarioConfig s;
  s.campaign.runs = runs;
  s.campaign.base_seed = 7;
  s.campaign.altitude_min = 800.0;
  s.campaign.altitude_max = 1200.0;
  s.wind_spacing = 5.0;
  s.dispersions = DispersionSpec{0.05, 0.05, 0.5, 0.3, 60.0};
  CampaignConfig c = s.campaign_config();
  c.threads = 1;
  return c;
}

std::string csv_of(const CampaignResult& r) {
  std::ostringstream out;
  write_campaign_csv(r, out, false);
  return out.str();
}

}  // namespace

TEST(RunningStats, MatchesBatchAtEveryPrefix) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> d(0.0, 100.0);
  std::vector<double> xs(500);
  for (double& x : xs) x = d(gen);
  RunningStats s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s.push(xs[i], 0.5 * xs[i]);
    double mean = 0.0;
    for (std::size_t j = 0; j <= i; ++j) mean += xs[j];
    mean /= static_cast<double>(i + 1);
    double var = 0.0;
    for (std::size_t j = 0; j <= i; ++j) var += (xs[j] - mean) * (xs[j] - mean);
    var /= static_cast<double>(i + 1);
    ASSERT_NEAR(s.mean_miss, mean, 1e-12 * mean) << i;
    ASSERT_NEAR(s.var_miss(), var, 1e-10 * std::max(var, 1.0)) << i;
    ASSERT_NEAR(s.var_heading_miss(), 0.25 * var, 1e-10 * std::max(var, 1.0)) << i;
  }
}

TEST(RunningStats, SingleRunHasZeroVariance) {
  RunningStats s;
  s.push(3.5, 0.1);
  EXPECT_EQ(s.mean_miss, 3.5);
  EXPECT_EQ(s.var_miss(), 0.0);
  EXPECT_EQ(s.var_heading_miss(), 0.0);
}

TEST(RunningStats, OrderDoesNotMatter) {
  std::mt19937_64 gen(11);
  std::lognormal_distribution<double> d(1.0, 1.0);
  std::vector<double> xs(200);
  for (double& x : xs) x = d(gen);
  RunningStats a;
  for (double x : xs) a.push(x, x);
  std::shuffle(xs.begin(), xs.end(), gen);
  RunningStats b;
  for (double x : xs) b.push(x, x);
  EXPECT_NEAR(a.mean_miss, b.mean_miss, 1e-12 * a.mean_miss);
  EXPECT_NEAR(a.var_miss(), b.var_miss(), 1e-12 * a.var_miss());
}

TEST(RunningStats, MergeEqualsSequentialPush) {
  RunningStats left, right, all;
  for (int i = 0; i < 30; ++i) {
    const double x = std::sin(i) * 10.0 + 20.0;
    (i < 13 ? left : right).push(x, 0.0);
    all.push(x, 0.0);
  }
  left.merge(right);
  EXPECT_EQ(left.n, all.n);
  EXPECT_NEAR(left.mean_miss, all.mean_miss, 1e-12 * all.mean_miss);
  EXPECT_NEAR(left.var_miss(), all.var_miss(), 1e-12 * all.var_miss());
}

TEST(Summary, IdenticalRecords) {
  const CampaignSummary s = summarize(std::vector<LandingRecord>(5, record(4.25, -0.1)));
  EXPECT_EQ(s.miss.mean, 4.25);
  EXPECT_EQ(s.miss.median, 4.25);
  EXPECT_EQ(s.miss.max, 4.25);
  EXPECT_NEAR(s.heading_miss.mean, 0.1, 1e-15);
  EXPECT_EQ(s.runs, 5);
  EXPECT_EQ(s.failures, 0);
}

TEST(Summary, TwoRecordsMean) {
  const CampaignSummary s = summarize({record(1.0), record(3.0)});
  EXPECT_EQ(s.miss.mean, 2.0);
  EXPECT_EQ(s.miss.max, 3.0);
  EXPECT_EQ(s.mean_iterations, 11.0);
}

TEST(Summary, FailedRecordsCountedNotAveraged) {
  LandingRecord bad = record(1e6);
  bad.ok = false;
  const CampaignSummary s = summarize({record(1.0), bad, record(3.0)});
  EXPECT_EQ(s.failures, 1);
  EXPECT_EQ(s.miss.mean, 2.0);
}

TEST(Summary, EmptyThrows) {
  EXPECT_THROW((void)summarize(std::vector<LandingRecord>{}), std::invalid_argument);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_EQ(quantile({3.0, 1.0, 2.0}, 0.5), 2.0);
  EXPECT_EQ(quantile({1.0, 2.0, 3.0, 4.0}, 0.5), 2.5);
  EXPECT_NEAR(quantile({0.0, 10.0}, 0.95), 9.5, 1e-12);
  EXPECT_EQ(quantile({7.0}, 0.95), 7.0);
  EXPECT_THROW((void)quantile({}, 0.5), std::invalid_argument);
}

TEST(FormatSignificant, TwoDigits) {
  EXPECT_EQ(format_significant(12.345, 2), "12");
  EXPECT_EQ(format_significant(0.012345, 2), "0.012");
  EXPECT_EQ(format_significant(1.96, 2), "2");
}

TEST(Sampler, DrawsInsideTheConfiguredRanges) {
  const CampaignConfig c = small_campaign(1);
  for (int run = 0; run < 200; ++run) {
    const PlanningProblem p = sample_problem(c, run);
    const double r = (p.x0 - p.target).norm();
    EXPECT_GE(r, c.radius_min * (1.0 - 1e-12));
    EXPECT_LE(r, c.radius_max * (1.0 + 1e-12));
    EXPECT_GE(p.speeds.z0(), c.altitude_min);
    EXPECT_LE(p.speeds.z0(), c.altitude_max);
    EXPECT_GE(p.psi0, -std::numbers::pi);
    EXPECT_LT(p.psi0, std::numbers::pi);
    EXPECT_TRUE(p.wind.covers(p.z_final) && p.wind.covers(p.speeds.z0()));
  }
  EXPECT_NE(sample_problem(c, 0).x0, sample_problem(c, 1).x0);
  EXPECT_EQ(sample_problem(c, 3).x0, sample_problem(c, 3).x0);
}

TEST(Campaign, ParallelEqualsSerial) {
  CampaignConfig serial = small_campaign(4);
  CampaignConfig parallel = serial;
  parallel.threads = 3;
  const CampaignResult a = run_campaign(serial);
  const CampaignResult b = run_campaign(parallel);
  ASSERT_EQ(a.runs.size(), 4u);
  EXPECT_EQ(csv_of(a), csv_of(b));
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].record.miss_distance, b.runs[i].record.miss_distance);
    EXPECT_EQ(a.runs[i].seed, serial.seed_of(static_cast<int>(i)));
  }
}

TEST(Campaign, CsvBytesReproducible) {
  const CampaignConfig c = small_campaign(3);
  const std::string first = csv_of(run_campaign(c));
  EXPECT_EQ(first, csv_of(run_campaign(c)));
  EXPECT_EQ(first.substr(0, first.find('\n')),
            "run,seed,miss_m,miss_heading_rad,iters_p1,iters_p2,mean_iter_ms,replans,status");
  EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 4);
}

TEST(Campaign, TraceAgreesWithBatch) {
  const CampaignResult r = run_campaign(small_campaign(3));
  ASSERT_EQ(r.trace.size(), r.runs.size());
  std::vector<LandingRecord> prefix;
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    prefix.push_back(r.runs[i].record);
    const CampaignSummary s = summarize(prefix);
    EXPECT_NEAR(r.trace[i].mean_miss, s.miss.mean, 1e-12 * std::max(s.miss.mean, 1.0)) << i;
  }
}

TEST(Campaign, SingleRunSummaryEqualsItsRecord) {
  const CampaignResult r = run_campaign(small_campaign(1));
  ASSERT_EQ(r.runs.size(), 1u);
  const CampaignSummary s = summarize(r);
  EXPECT_EQ(s.miss.mean, r.runs[0].record.miss_distance);
  EXPECT_EQ(s.miss.max, r.runs[0].record.miss_distance);
  EXPECT_EQ(r.trace[0].var_miss(), 0.0);
}

TEST(Campaign, Validation) {
  CampaignConfig c = small_campaign(0);
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.runs = 1;
  c.altitude_min = -10.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
