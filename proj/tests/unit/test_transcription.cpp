#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "parafoil/planner.hpp"
#include "parafoil/socp.hpp"
#include "parafoil/transcription.hpp"

using namespace parafoil;

namespace {

const SpeedProfile kSpeeds(AtmosphereModel{}, 2000.0, 12.0, 4.5);
const SpeedProfile kFlat(AtmosphereModel(1.225, 1e-15, 4.2559), 2000.0, 12.0, 4.5);

WindProfile dryden(const SpeedProfile& sp) {
  return generate_profile(DrydenParams{}, sp, altitude_grid(-50.0, sp.z0() + 10.0));
}

struct Instance {
  Mesh mesh;
  BoundaryData bounds;
  ScpWeights weights;
  SubstitutedTrajectory guess;
};

Instance instance(const SpeedProfile& sp, const WindProfile& wind, int nodes, double psi0, Eigen::Vector2d target,
                  double psi_f) {
  Instance in;
  in.mesh = build_mesh(TimeAltitudeMap(sp, 0.0, 0.0), wind, nodes);
  in.bounds = BoundaryData::make(in.mesh, {1000.0, 0.0}, psi0, target, psi_f, 0.15);
  in.weights = ScpWeights::defaults(in.mesh);
  in.guess = initial_guess(in.mesh, in.bounds);
  return in;
}

}  // namespace

TEST(BuildMesh, ConstantDensityHasEqualSpeeds) {
  const Mesh m = build_mesh(TimeAltitudeMap(kFlat, 0.0, 0.0), WindProfile::calm(0.0, 2000.0), 10);
  for (double v : m.v) EXPECT_NEAR(v, 12.0, 1e-9);
  for (double v : m.v_tilde) EXPECT_NEAR(v, 12.0, 1e-9);
}

TEST(BuildMesh, ThreeNodesZeroWind) {
  const Mesh m = build_mesh(TimeAltitudeMap(kSpeeds, 0.0, 0.0), WindProfile::calm(0.0, 2000.0), 3);
  EXPECT_EQ(m.nodes(), 3);
  EXPECT_EQ(m.wind_drift, Eigen::Matrix2Xd::Zero(2, 2));
}

TEST(BuildMesh, IntervalsTelescope) {
  const TimeAltitudeMap map(kSpeeds, 5.0, 0.0);
  const Mesh m = build_mesh(map, dryden(kSpeeds), 40);
  double sum = 0.0;
  for (double dt : m.dt) sum += dt;
  EXPECT_NEAR(sum, map.t_final() - map.t0(), 1e-12 * map.t_final());
  EXPECT_EQ(m.node_times.front(), map.t0());
  EXPECT_EQ(m.node_times.back(), map.t_final());
  EXPECT_EQ(m.node_altitudes.back(), 0.0);
  for (std::size_t k = 1; k < m.dt.size(); ++k) EXPECT_NEAR(m.dt[k], m.dt[0], 1e-9);
}

TEST(BuildMesh, IntervalMeanSpeedMatchesQuadrature) {
  using Q = boost::math::quadrature::gauss_kronrod<double, 31>;
  const TimeAltitudeMap map(kSpeeds, 0.0, 0.0);
  const Mesh m = build_mesh(map, WindProfile::calm(0.0, 2000.0), 40);
  for (int k = 0; k < m.intervals(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double t_a = m.node_times[i];
    const double t_b = m.node_times[i + 1];
    // Stay clear of the clamped landing altitude where the inverse map is exact only to round-off.
    auto v_of_t = [&](double t) { return kSpeeds.horizontal(map.altitude_of_time(std::min(t, map.t_final()))); };
    const double mean = Q::integrate(v_of_t, t_a, t_b, 5, 1e-14) / (t_b - t_a);
    EXPECT_NEAR(m.v_tilde[i], mean, 1e-6 * mean) << k;
    EXPECT_GT(m.smoothing_weight(k), 0.0);
  }
}

TEST(BuildMesh, GeometricRatioCrowdsTowardLanding) {
  const Mesh m = build_mesh(TimeAltitudeMap(kSpeeds, 0.0, 0.0), WindProfile::calm(0.0, 2000.0), 10, 0.9);
  for (std::size_t k = 1; k < m.dt.size(); ++k) EXPECT_NEAR(m.dt[k] / m.dt[k - 1], 0.9, 1e-9);
}

TEST(BuildMesh, RejectsTooFewNodes) {
  EXPECT_THROW((void)build_mesh(TimeAltitudeMap(kSpeeds, 0.0, 0.0), WindProfile::calm(0.0, 2000.0), 2),
               std::invalid_argument);
}

TEST(ScpWeights, DefaultsAndOrdering) {
  const Mesh m = build_mesh(TimeAltitudeMap(kSpeeds, 0.0, 0.0), WindProfile::calm(0.0, 2000.0), 5);
  const ScpWeights w = ScpWeights::defaults(m);
  EXPECT_EQ(w.eps_h, 0.05 * m.v.back());
  EXPECT_EQ(w.eps_u, 0.3 * m.v.front());
  EXPECT_NO_THROW(w.validate());
  ScpWeights bad = w;
  bad.alpha1 = 5e2;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = w;
  bad.alpha2 = 50.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(BuildPhase1, ConstraintCounts) {
  const Instance in = instance(kSpeeds, dryden(kSpeeds), 40, 1.0, {0.0, 0.0}, 0.0);
  const ConvexSubproblem p = build_phase1(in.mesh, in.bounds, in.weights, in.guess);
  EXPECT_EQ(p.counts.dynamics, 39);
  EXPECT_EQ(p.counts.lower_bounds, 40);
  EXPECT_EQ(p.counts.norm_bounds, 40);
  EXPECT_EQ(p.counts.rate_cones, 39);
  EXPECT_EQ(p.counts.trust_cones, 40);
  // Two equality rows per dynamics step plus the fixed initial position and input.
  EXPECT_EQ(p.program.A.rows(), 2 * 39 + 4);
  EXPECT_EQ(p.program.dims.nonneg, 40);
  // Terminal epigraph, smoothing epigraphs, norm bounds, rate and trust cones.
  EXPECT_EQ(p.program.dims.soc.size(), 1u + 39u + 40u + 39u + 40u);
  EXPECT_EQ(p.program.num_vars(), p.layout.count());
  EXPECT_NO_THROW(p.program.validate());
}

TEST(BuildPhase2, AddsOneVariable) {
  const Instance in = instance(kSpeeds, dryden(kSpeeds), 20, 1.0, {0.0, 0.0}, 0.0);
  const ConvexSubproblem p1 = build_phase1(in.mesh, in.bounds, in.weights, in.guess);
  const ConvexSubproblem p2 = build_phase2(in.mesh, in.bounds, in.weights, in.guess);
  EXPECT_EQ(p2.program.num_vars(), p1.program.num_vars() + 1);
  EXPECT_EQ(p2.phase, 2);
  EXPECT_EQ(p2.layout.slack(), p1.program.num_vars());
}

TEST(BuildPhase1, DegenerateLinearizationThrows) {
  Instance in = instance(kSpeeds, dryden(kSpeeds), 10, 1.0, {0.0, 0.0}, 0.0);
  in.guess.inputs.col(4).setZero();
  EXPECT_THROW((void)build_phase1(in.mesh, in.bounds, in.weights, in.guess), std::domain_error);
}

TEST(BuildPhase1, LinearizationPointIsFeasible) {
  const Instance in = instance(kSpeeds, dryden(kSpeeds), 40, 2.0, {0.0, 0.0}, 0.0);
  EXPECT_LE(phase1_violation(in.mesh, in.bounds, in.weights, in.guess, in.guess), 1e-9);
  EXPECT_LE(input_residual(in.mesh, in.guess), 1e-12);
}

TEST(BuildPhase1, StraightAheadTargetReproducesLinearization) {
  // Constant density keeps |u_k| constant, so the straight guess has no smoothing cost.
  Instance in = instance(kFlat, WindProfile::calm(-10.0, 2010.0), 40, 0.0, {0.0, 0.0}, 0.0);
  const Eigen::Vector2d end = in.guess.positions.col(in.mesh.nodes() - 1);
  in.bounds = BoundaryData::make(in.mesh, {1000.0, 0.0}, 0.0, end, 0.0, 0.15);
  const CostTerms c = evaluate_cost(in.mesh, in.bounds, in.weights, in.guess);
  EXPECT_NEAR(c.total(), 0.0, 1e-9);
  const ConvexSubproblem p = build_phase1(in.mesh, in.bounds, in.weights, in.guess);
  const ConicSolution sol = solve(p.program);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  const SubstitutedTrajectory t = extract_trajectory(p.layout, sol.primal);
  // The only gain left is the heading term, which rewards stretching the last
  // input to |u| = v_f + eps_h; the path stays on the straight ray.
  const double heading_gain = in.weights.alpha2 * in.weights.eps_h / in.mesh.v.back();
  EXPECT_LE(sol.objective, 1e-6);
  EXPECT_GE(sol.objective, -heading_gain - 1e-6);
  EXPECT_LE((t.positions.col(in.mesh.nodes() - 1) - end).norm(), 1e-3);
  for (int k = 0; k < in.mesh.nodes(); ++k) {
    EXPECT_NEAR(std::atan2(t.inputs(1, k), t.inputs(0, k)), 0.0, 1e-6) << k;
    EXPECT_NEAR(t.positions(1, k), 0.0, 1e-4) << k;
  }
  const ReferenceSolution ref = recover_reference(t, in.mesh);
  for (double u : ref.turn_rates) EXPECT_NEAR(u, 0.0, 1e-6);
}

TEST(BuildPhase1, SolvedObjectiveMatchesDirectCost) {
  const Instance in = instance(kSpeeds, dryden(kSpeeds), 40, 1.5707963267948966, {0.0, 0.0}, 0.0);
  const ConvexSubproblem p = build_phase1(in.mesh, in.bounds, in.weights, in.guess);
  const ConicSolution sol = solve(p.program);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  const SubstitutedTrajectory t = extract_trajectory(p.layout, sol.primal);
  const double direct = evaluate_cost(in.mesh, in.bounds, in.weights, t).total();
  EXPECT_NEAR(sol.objective, direct, 1e-5 * std::max(1.0, direct));
  EXPECT_LE(phase1_violation(in.mesh, in.bounds, in.weights, in.guess, t), 1e-6);
  for (int k = 0; k < in.mesh.nodes(); ++k) {
    EXPECT_LE((t.inputs.col(k) - in.guess.inputs.col(k)).norm(), in.weights.eps_u * (1.0 + 1e-9));
  }
}

TEST(SmoothingCost, SmallAngleReducesToHeadingIncrements) {
  const Mesh m = build_mesh(TimeAltitudeMap(kFlat, 0.0, 0.0), WindProfile::calm(0.0, 2000.0), 30);
  SubstitutedTrajectory t;
  t.positions = Eigen::Matrix2Xd::Zero(2, 30);
  t.inputs.resize(2, 30);
  double psi = 0.0, expected = 0.0;
  for (int k = 0; k < 30; ++k) {
    t.inputs.col(k) = 12.0 * Eigen::Vector2d(std::cos(psi), std::sin(psi));
    const double dpsi = 0.01 * std::sin(0.3 * k);
    if (k + 1 < 30) expected += dpsi * dpsi / m.dt[static_cast<std::size_t>(k)];
    psi += dpsi;
  }
  const BoundaryData b = BoundaryData::make(m, {0.0, 0.0}, 0.0, {0.0, 0.0}, 0.0, 0.15);
  const double got = evaluate_cost(m, b, ScpWeights::defaults(m), t).smoothing;
  EXPECT_NEAR(got, expected, 1e-4 * expected);
  EXPECT_NEAR(m.smoothing_weight(3), 1.0 / (12.0 * 12.0 * m.dt[3]), 1e-9 * m.smoothing_weight(3));
}

TEST(BuildPhase2, SlackNotAbovePhaseOneResidual) {
  PlanningProblem problem{kSpeeds, 0.0, 0.0, dryden(kSpeeds)};
  problem.x0 = {1000.0, 0.0};
  problem.psi0 = 1.5707963267948966;
  PlannerSettings settings;
  settings.phase2_max_iter = 0;
  const PlanResult r = plan(problem, settings);
  ASSERT_TRUE(r.diagnostics.converged);
  const SubstitutedTrajectory& t1 = r.trajectory;
  const double rho_h = input_residual(r.mesh, t1);
  const ConvexSubproblem p2 = build_phase2(r.mesh, r.bounds, r.weights, t1);
  const ConicSolution s2 = solve(p2.program);
  ASSERT_EQ(s2.status, SolveStatus::Optimal);
  const double slack = s2.primal[p2.layout.slack()];
  EXPECT_GE(slack, -1e-9);
  EXPECT_LE(slack, rho_h + 1e-7);
  // The phase-one solution with eps = rho_h is feasible, so phase two can only improve on it.
  const double bound = evaluate_cost(r.mesh, r.bounds, r.weights, t1, rho_h).total();
  EXPECT_LE(s2.objective, bound + 1e-6 * std::abs(bound));
}

TEST(BuildPhase2, VanishingSlackWeightRecoversPhaseOne) {
  Instance in = instance(kSpeeds, dryden(kSpeeds), 40, 2.5, {0.0, 0.0}, 0.0);
  in.weights.alpha5 = 1e-6;
  const ConicSolution s1 = solve(build_phase1(in.mesh, in.bounds, in.weights, in.guess).program);
  const ConvexSubproblem p2 = build_phase2(in.mesh, in.bounds, in.weights, in.guess);
  const ConicSolution s2 = solve(p2.program);
  ASSERT_EQ(s1.status, SolveStatus::Optimal);
  ASSERT_EQ(s2.status, SolveStatus::Optimal);
  const double without_slack = s2.objective - in.weights.alpha5 * s2.primal[p2.layout.slack()];
  EXPECT_NEAR(without_slack, s1.objective, 1e-6 * std::max(1.0, s1.objective) + in.weights.alpha5 * in.weights.eps_h);
}

TEST(RateChord, ChordOfAllowedTurn) {
  const Mesh m = build_mesh(TimeAltitudeMap(kFlat, 0.0, 0.0), WindProfile::calm(0.0, 2000.0), 40);
  const double chord = rate_chord(m, 0, 0.15, 0.5);
  const double angle = m.dt[0] * 0.15;
  EXPECT_NEAR(chord, 2.0 * std::sin(0.5 * angle) * 11.5, 1e-6 * chord);
  EXPECT_LT(chord, 2.0 * std::sin(0.5 * angle) * 11.5);
}

TEST(ConeProgram, TripletRoundTrip) {
  const Instance in = instance(kSpeeds, dryden(kSpeeds), 6, 1.0, {0.0, 0.0}, 0.0);
  const ConeProgram p = build_phase2(in.mesh, in.bounds, in.weights, in.guess).program;
  std::stringstream io;
  p.write_triplets(io);
  const ConeProgram q = ConeProgram::read_triplets(io);
  EXPECT_EQ(q.c, p.c);
  EXPECT_EQ(q.b, p.b);
  EXPECT_EQ(q.h, p.h);
  EXPECT_EQ(q.offset, p.offset);
  EXPECT_EQ(q.dims, p.dims);
  EXPECT_EQ(Eigen::MatrixXd(q.A), Eigen::MatrixXd(p.A));
  EXPECT_EQ(Eigen::MatrixXd(q.G), Eigen::MatrixXd(p.G));
}
