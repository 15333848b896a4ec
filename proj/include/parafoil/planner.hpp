#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "parafoil/atmosphere.hpp"
#include "parafoil/dynamics.hpp"
#include "parafoil/socp.hpp"
#include "parafoil/transcription.hpp"
#include "parafoil/wind.hpp"

namespace parafoil {

/// One guidance problem: start pose at the anchor altitude of `speeds`,
/// landing target at z_final, and the wind the planner believes in.
struct PlanningProblem {
  SpeedProfile speeds;
  double t0{0.0};
  double z_final{0.0};
  WindProfile wind;
  Eigen::Vector2d x0{Eigen::Vector2d::Zero()};
  double psi0{0.0};
  Eigen::Vector2d target{Eigen::Vector2d::Zero()};
  double psi_f{0.0};
  double psi_dot_max{0.15};
  int nodes{40};
  double mesh_ratio{1.0};

  [[nodiscard]] TimeAltitudeMap time_map() const { return {speeds, t0, z_final}; }
};

struct PlannerSettings {
  double alpha1{1e4};
  double alpha2{1e2};
  double alpha5{1e3};
  std::optional<double> eps_h;  // default 0.05 v(z_f)
  std::optional<double> eps_u;  // default 0.3 v(z_0)
  double conv_tol{1e-3};
  int max_iter{50};
  int phase2_max_iter{5};
  SolverSettings solver;

  [[nodiscard]] ScpWeights weights_for(const Mesh& mesh) const;
};

enum class PlanStatus { Converged, MaxIterExceeded, SolverFailure };

[[nodiscard]] std::string to_string(PlanStatus status);

/// One accepted SCP iterate. Every iterate is a complete, flyable trajectory.
struct ScpIterate {
  int phase{1};
  SubstitutedTrajectory trajectory;
  double slack{0.0};  // phase-two eps, 0 in phase one
  CostTerms cost;
  double residual_h{0.0};
  double build_time{0.0};  // seconds
  double solve_time{0.0};  // seconds
  int solver_iterations{0};
};

struct PlannerDiagnostics {
  int iterations_phase1{0};
  int iterations_phase2{0};
  std::vector<double> cost_history;
  std::vector<double> residuals;
  std::vector<double> iteration_times;  // build + solve, seconds
  double max_residual_h{0.0};           // worst over phase-one iterates
  bool converged{false};
  bool warm_started{false};
  PlanStatus status{PlanStatus::Converged};
  std::string message;

  [[nodiscard]] int iterations() const { return iterations_phase1 + iterations_phase2; }
  [[nodiscard]] double mean_iteration_time() const;
};

struct PlanResult {
  PlanningProblem problem;
  Mesh mesh;
  BoundaryData bounds;
  ScpWeights weights;
  SubstitutedTrajectory trajectory;  // the returned iterate
  double slack{0.0};
  ReferenceSolution reference;
  PlannerDiagnostics diagnostics;
  std::vector<ScpIterate> iterates;

  /// Whether any trajectory (at worst the initial guess) is available.
  [[nodiscard]] bool usable() const { return trajectory.size() > 0; }
  /// Reference recovered from iterate i (anytime output).
  [[nodiscard]] ReferenceSolution reference_of(std::size_t i) const;
  [[nodiscard]] double final_cost() const;
};

/// Constant-heading guess: u_k = v_k u0 / |u0|, positions from the discrete
/// dynamics. Satisfies every phase-one constraint.
[[nodiscard]] SubstitutedTrajectory initial_guess(const Mesh& mesh, const BoundaryData& bounds);

/// Two-phase successive convexification. A warm start that violates the
/// phase-one constraints is replaced by the constant-heading guess.
[[nodiscard]] PlanResult plan(const PlanningProblem& problem, const PlannerSettings& settings = {},
                              const SubstitutedTrajectory* warm_start = nullptr);

/// Warm-start guess on `mesh` from an earlier reference: headings resampled
/// over normalized time-to-go, the first heading replaced by psi0, then
/// rate-limited forward so the guess stays feasible.
[[nodiscard]] SubstitutedTrajectory resample_guess(const ReferenceSolution& previous, double t_now, const Mesh& mesh,
                                                   const BoundaryData& bounds, double eps_h);

/// Plans again from `state` at time t_now with the speeds measured there.
/// Throws std::invalid_argument unless state.z lies below the previous start
/// and above z_final + altitude_margin.
[[nodiscard]] PlanResult replan(const PlanResult& previous, const FourDofState& state, double t_now,
                                const SpeedProfile& measured, const PlannerSettings& settings,
                                double altitude_margin = 50.0, bool warm = true);

}  // namespace parafoil
