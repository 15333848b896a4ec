#include <cmath>
#include <cstring>
#include <sstream>

#include <gtest/gtest.h>

#include "parafoil/socp.hpp"
#include "socp_reference.hpp"

using namespace parafoil;
namespace oracle = parafoil::testing;

namespace {

// min t  s.t. |x - a| <= t, variables (x, t).
ConeProgram distance_to(const Eigen::Vector3d& a) {
  ConeProgramBuilder b;
  b.add_variables(4);
  b.add_cost(3, 1.0);
  b.add_soc({AffineExpr::var(3), AffineExpr::var(0).plus(-a[0]), AffineExpr::var(1).plus(-a[1]),
             AffineExpr::var(2).plus(-a[2])});
  return b.build();
}

// min c'x  s.t. |x| <= 1.
ConeProgram support_of_ball(const Eigen::VectorXd& c) {
  ConeProgramBuilder b;
  b.add_variables(static_cast<int>(c.size()));
  for (int i = 0; i < c.size(); ++i) b.add_cost(i, c[i]);
  std::vector<AffineExpr> rows{AffineExpr(1.0)};
  for (int i = 0; i < c.size(); ++i) rows.push_back(AffineExpr::var(i));
  b.add_soc(std::move(rows));
  return b.build();
}

void expect_kkt_tight(const ConeProgram& p, const ConicSolution& s) {
  const KktResiduals r = kkt_residuals(p, s.primal, s.slack, s.eq_dual, s.cone_dual);
  EXPECT_LE(r.primal_equality, 1e-7);
  EXPECT_LE(r.primal_cone, 1e-7);
  EXPECT_LE(r.dual, 1e-7);
  EXPECT_LE(std::min(r.gap, r.relative_gap), 1e-7);
  EXPECT_LE(r.equality_abs, 1e-8);
  EXPECT_LE(r.cone_violation, 1e-8);
  EXPECT_LE(cone_violation(p.dims, s.slack), 1e-12);
  EXPECT_LE(cone_violation(p.dims, s.cone_dual), 1e-12);
}

}  // namespace

TEST(Socp, ProjectionIdentity) {
  const Eigen::Vector3d a(1.5, -2.0, 0.25);
  const ConeProgram p = distance_to(a);
  const ConicSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_LE((s.primal.head<3>() - a).norm(), 1e-6);
  EXPECT_NEAR(s.objective, 0.0, 1e-7);
}

TEST(Socp, SupportFunctionOfUnitBall) {
  Eigen::VectorXd c(4);
  c << 3.0, -1.0, 2.0, 0.5;
  const ConeProgram p = support_of_ball(c);
  const ConicSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_LE((s.primal + c / c.norm()).norm(), 1e-7);
  EXPECT_NEAR(s.objective, -c.norm(), 1e-7 * c.norm());
  expect_kkt_tight(p, s);
}

TEST(Socp, LinearProgramWithEqualities) {
  // min x0 + 2 x1 + 3 x2  s.t. x0 + x1 + x2 = 1, x >= 0.
  ConeProgramBuilder b;
  b.add_variables(3);
  for (int i = 0; i < 3; ++i) {
    b.add_cost(i, i + 1.0);
    b.add_nonneg(AffineExpr::var(i));
  }
  AffineExpr sum = AffineExpr::var(0).add(1, 1.0).add(2, 1.0).plus(-1.0);
  b.add_equality(sum);
  const ConeProgram p = b.build();
  const ConicSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.primal[0], 1.0, 1e-7);
  EXPECT_NEAR(s.objective, 1.0, 1e-7);
  expect_kkt_tight(p, s);
}

TEST(Socp, AgreesWithAdmmOnRandomInstances) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const oracle::RandomSocp r = oracle::random_socp(seed);
    const ConicSolution s = solve(r.program);
    ASSERT_EQ(s.status, SolveStatus::Optimal) << seed;
    const oracle::AdmmResult ref = oracle::admm_reference(r.program, 1e-9);
    EXPECT_LE(ref.primal_residual, 1e-6) << seed;
    EXPECT_NEAR(s.objective, ref.objective, 1e-4 * std::max(1.0, std::abs(ref.objective))) << seed;
    expect_kkt_tight(r.program, s);
  }
}

TEST(Socp, ObjectiveScalingLeavesArgminUnchanged) {
  Eigen::VectorXd c(5);
  c << 0.3, -1.2, 2.0, 0.7, -0.4;
  ConeProgram p = support_of_ball(c);
  ConeProgramBuilder b;
  b.add_variables(5);
  for (int i = 0; i < 5; ++i) b.add_cost(i, c[i]);
  b.add_soc({AffineExpr(1.0), AffineExpr::var(0), AffineExpr::var(1), AffineExpr::var(2), AffineExpr::var(3),
             AffineExpr::var(4)});
  b.add_nonneg(AffineExpr::var(0, -1.0).plus(-0.1));  // x0 <= -0.1, active
  b.add_equality(AffineExpr::var(1).add(2, 1.0).plus(-0.2));
  // On a curved cone boundary the argmin error grows like the square root of
  // the duality gap, so the solves run to a tighter gap than the default.
  SolverSettings tight;
  tight.gap_tol = 1e-12;
  tight.abs_gap_tol = 1e-13;
  const SocpSolver solver(tight);
  for (const ConeProgram& base : {p, b.build()}) {
    ConeProgram scaled = base;
    scaled.c *= 37.0;
    const ConicSolution s1 = solver.solve(base);
    const ConicSolution s2 = solver.solve(scaled);
    ASSERT_EQ(s1.status, SolveStatus::Optimal);
    ASSERT_EQ(s2.status, SolveStatus::Optimal);
    EXPECT_LE((s1.primal - s2.primal).norm(), 1e-6 * std::max(1.0, s1.primal.norm()));
    EXPECT_NEAR(s2.objective, 37.0 * s1.objective, 1e-6 * std::abs(s2.objective));
  }
}

TEST(Socp, DeterministicBytes) {
  const oracle::RandomSocp r = oracle::random_socp(9);
  const ConicSolution a = solve(r.program);
  const ConicSolution b = solve(r.program);
  ASSERT_EQ(a.primal.size(), b.primal.size());
  EXPECT_EQ(0, std::memcmp(a.primal.data(), b.primal.data(), sizeof(double) * a.primal.size()));
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(Socp, InconsistentProblemIsNotOptimal) {
  // x >= 1 and -x >= 0.
  ConeProgramBuilder b;
  b.add_variables(1);
  b.add_cost(0, 1.0);
  b.add_nonneg(AffineExpr::var(0).plus(-1.0));
  b.add_nonneg(AffineExpr::var(0, -1.0));
  const ConicSolution s = solve(b.build());
  EXPECT_NE(s.status, SolveStatus::Optimal);
}

TEST(Socp, MaxIterReported) {
  SolverSettings settings;
  settings.max_iter = 1;
  const ConicSolution s = SocpSolver(settings).solve(oracle::random_socp(3).program);
  EXPECT_EQ(s.status, SolveStatus::MaxIter);
  EXPECT_FALSE(s.reduced_accuracy);
}

TEST(Socp, TripletFileRoundTripSolvesIdentically) {
  const oracle::RandomSocp r = oracle::random_socp(4);
  std::stringstream io;
  r.program.write_triplets(io);
  const ConeProgram q = ConeProgram::read_triplets(io);
  const ConicSolution a = solve(r.program);
  const ConicSolution b = solve(q);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(Socp, MalformedTripletsRejected) {
  std::istringstream in("socp-triplets 1\nvariables 2\noffset 0\ncost 1\n5 1.0\n");
  EXPECT_THROW((void)ConeProgram::read_triplets(in), std::runtime_error);
}

TEST(ConeViolation, OrthantAndSoc) {
  ConeDims d;
  d.nonneg = 1;
  d.soc = {3};
  Eigen::VectorXd v(4);
  v << 1.0, 5.0, 3.0, 4.0;
  EXPECT_EQ(cone_violation(d, v), 0.0);
  v << -0.5, 4.0, 3.0, 4.0;
  EXPECT_NEAR(cone_violation(d, v), 1.0, 1e-15);
}

TEST(ConeProgram, ValidateCatchesSizeMismatch) {
  ConeProgram p = support_of_ball(Eigen::Vector2d(1.0, 1.0));
  p.h.conservativeResize(p.h.size() - 1);
  EXPECT_THROW(p.validate(), std::invalid_argument);
}
