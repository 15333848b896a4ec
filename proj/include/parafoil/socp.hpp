#pragma once

#include <string>

#include <Eigen/Core>

#include "parafoil/cone_program.hpp"

namespace parafoil {

enum class SolveStatus { Optimal, MaxIter, Infeasible, NumericalFailure };

[[nodiscard]] std::string to_string(SolveStatus status);

struct SolverSettings {
  double gap_tol{1e-7};       // relative duality gap
  double abs_gap_tol{1e-9};   // absolute duality gap
  double feas_tol{1e-9};      // relative primal/dual residuals
  // A point meeting these looser tolerances is returned, flagged, when the
  // solve breaks down before full accuracy.
  double reduced_feas_tol{1e-6};
  double reduced_gap_tol{5e-5};
  int max_iter{100};
  double step_fraction{0.99};
  double regularization{1e-9};
  int refinement_steps{4};
};

/// Residuals of the optimality conditions at the returned point, each
/// normalized by max(1, |data|) the same way the stopping test is.
struct KktResiduals {
  double primal_equality{0.0};  // |Ax - b|
  double primal_cone{0.0};      // |Gx + s - h|
  double dual{0.0};             // |c + A'y + G'z|
  double gap{0.0};              // s'z, absolute
  double relative_gap{0.0};
  double equality_abs{0.0};     // max |Ax - b|, unnormalized
  double cone_violation{0.0};   // worst cone violation of h - Gx
};

struct ConicSolution {
  Eigen::VectorXd primal;
  Eigen::VectorXd slack;
  Eigen::VectorXd eq_dual;
  Eigen::VectorXd cone_dual;
  double objective{0.0};
  double dual_objective{0.0};
  SolveStatus status{SolveStatus::NumericalFailure};
  bool reduced_accuracy{false};  // optimal only to the reduced tolerances
  int iterations{0};
  double solve_time{0.0};  // seconds
  KktResiduals residuals;
};

/// Primal-dual interior-point method for linear programs over products of
/// nonnegative orthants and second-order cones. Nesterov-Todd scaling,
/// Mehrotra predictor-corrector steps, and a sparse quasi-definite LDL'
/// factorization of the reduced KKT system with iterative refinement.
///
/// Instances hold no mutable state; one solve is deterministic in its input.
class SocpSolver {
 public:
  explicit SocpSolver(SolverSettings settings = {}) : settings_(settings) {}

  [[nodiscard]] const SolverSettings& settings() const { return settings_; }
  [[nodiscard]] ConicSolution solve(const ConeProgram& problem) const;

 private:
  SolverSettings settings_;
};

/// Convenience wrapper with a custom relative gap tolerance.
[[nodiscard]] ConicSolution solve(const ConeProgram& problem, double gap_tol = 1e-7);

/// Residuals of an arbitrary candidate point, used by the solver itself and by
/// external cross-checks.
[[nodiscard]] KktResiduals kkt_residuals(const ConeProgram& problem, const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                                         const Eigen::VectorXd& z);

/// Largest cone-membership violation of v (0 when v is in K).
[[nodiscard]] double cone_violation(const ConeDims& dims, const Eigen::VectorXd& v);

}  // namespace parafoil
