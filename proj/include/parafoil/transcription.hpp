#pragma once

#include <vector>

#include <Eigen/Core>

#include "parafoil/atmosphere.hpp"
#include "parafoil/cone_program.hpp"
#include "parafoil/dynamics.hpp"
#include "parafoil/wind.hpp"

namespace parafoil {

/// Temporal mesh of the fixed-final-time problem.
struct Mesh {
  std::vector<double> node_times;      // t_0 ... t_{N-1} = t_f
  std::vector<double> node_altitudes;  // z(t_k)
  std::vector<double> dt;              // t_{k+1} - t_k, N-1 entries
  std::vector<double> v;               // v(z_k)
  std::vector<double> v_tilde;         // interval mean of v(z(t)), N-1 entries
  Eigen::Matrix2Xd wind_drift;         // W_k, N-1 columns

  [[nodiscard]] int nodes() const { return static_cast<int>(node_times.size()); }
  [[nodiscard]] int intervals() const { return nodes() - 1; }
  [[nodiscard]] double t0() const { return node_times.front(); }
  [[nodiscard]] double t_final() const { return node_times.back(); }
  [[nodiscard]] double v_max() const;
  [[nodiscard]] double min_dt() const;
  /// (v_k v_{k+1})^2 / (v_tilde_k^6 dt_k), the weight of |u_{k+1} - u_k|^2.
  [[nodiscard]] double smoothing_weight(int k) const;
};

/// Mesh over [t0, t_f] of `map`. ratio = 1 gives a uniform mesh; ratio < 1
/// shrinks each interval geometrically so nodes crowd toward landing.
/// Throws std::invalid_argument when nodes < 3 or ratio <= 0.
[[nodiscard]] Mesh build_mesh(const TimeAltitudeMap& map, const WindProfile& wind, int nodes,
                              double ratio = 1.0);

struct ScpWeights {
  double alpha1{1e4};  // terminal position
  double alpha2{1e2};  // terminal heading
  double alpha5{1e3};  // phase-two slack
  double eps_h{0.0};   // substituted-input tolerance, m/s
  double eps_u{0.0};   // trust-region radius, m/s
  double conv_tol{1e-3};
  int max_iter{50};
  int phase2_max_iter{5};

  /// Default weights with eps_h = 0.05 v(z_f) and eps_u = 0.3 v(z_0).
  static ScpWeights defaults(const Mesh& mesh);
  /// Requires alpha1 >= 10 alpha2 >= 100, positive tolerances and caps.
  void validate() const;
};

struct BoundaryData {
  Eigen::Vector2d x0{Eigen::Vector2d::Zero()};
  Eigen::Vector2d u0{Eigen::Vector2d::Zero()};
  Eigen::Vector2d xf{Eigen::Vector2d::Zero()};
  Eigen::Vector2d uf{Eigen::Vector2d::Zero()};  // -v(z_f) [cos psi_f, sin psi_f]
  double psi_dot_max{0.0};

  static BoundaryData make(const Mesh& mesh, const Eigen::Vector2d& x0, double psi0, const Eigen::Vector2d& xf,
                           double psi_f, double psi_dot_max);
};

/// Index map of the decision vector.
///   [x_0 u_0 x_1 u_1 ... x_{N-1} u_{N-1} | t | s_0 ... s_{N-2} | eps]
/// t bounds the terminal miss, s_k the smoothing terms, eps is phase two only.
struct VariableLayout {
  int nodes{0};
  bool has_slack{false};

  [[nodiscard]] int x(int k) const { return 4 * k; }
  [[nodiscard]] int u(int k) const { return 4 * k + 2; }
  [[nodiscard]] int terminal() const { return 4 * nodes; }
  [[nodiscard]] int smoothing(int k) const { return 4 * nodes + 1 + k; }
  [[nodiscard]] int slack() const { return has_slack ? 5 * nodes : -1; }
  [[nodiscard]] int count() const { return 5 * nodes + (has_slack ? 1 : 0); }
};

struct ConstraintCounts {
  int dynamics{0};        // 2-row equalities
  int lower_bounds{0};    // linearized |u_k| >= v_k - eps
  int norm_bounds{0};     // |u_k| <= v_k + eps
  int rate_cones{0};      // heading-rate limits
  int trust_cones{0};     // |u_k - ubar_k| <= eps_u
};

struct ConvexSubproblem {
  ConeProgram program;
  VariableLayout layout;
  ConstraintCounts counts;
  int phase{1};
};

/// Phase one: eps_h fixed at weights.eps_h. Throws std::domain_error when any
/// |ubar_k| < 1e-6 m/s.
[[nodiscard]] ConvexSubproblem build_phase1(const Mesh& mesh, const BoundaryData& bounds, const ScpWeights& weights,
                                            const SubstitutedTrajectory& linearization);
/// Phase two: eps_h becomes a variable in [0, weights.eps_h] with cost alpha5.
[[nodiscard]] ConvexSubproblem build_phase2(const Mesh& mesh, const BoundaryData& bounds, const ScpWeights& weights,
                                            const SubstitutedTrajectory& linearization);

/// Positions and inputs from a subproblem's primal vector.
[[nodiscard]] SubstitutedTrajectory extract_trajectory(const VariableLayout& layout, const Eigen::VectorXd& primal);

/// Worst |(|u_k| - v_k)| along a trajectory.
[[nodiscard]] double input_residual(const Mesh& mesh, const SubstitutedTrajectory& traj);

/// Chord length allowed between consecutive inputs: the largest |u_{k+1} - u_k|
/// that keeps the heading change within dt_k psi_dot_max for inputs of norm
/// at least min(v_k, v_{k+1}) - eps.
[[nodiscard]] double rate_chord(const Mesh& mesh, int k, double psi_dot_max, double eps);

struct CostTerms {
  double terminal{0.0};
  double heading{0.0};
  double smoothing{0.0};
  double slack{0.0};
  [[nodiscard]] double total() const { return terminal + heading + smoothing + slack; }
};

/// Cost of a trajectory evaluated directly from its values; slack is the
/// phase-two eps (pass 0 in phase one).
[[nodiscard]] CostTerms evaluate_cost(const Mesh& mesh, const BoundaryData& bounds, const ScpWeights& weights,
                                      const SubstitutedTrajectory& traj, double slack = 0.0);

/// Largest violation of the phase-one constraints by `traj` when linearized
/// about `linearization` (0 means feasible).
[[nodiscard]] double phase1_violation(const Mesh& mesh, const BoundaryData& bounds, const ScpWeights& weights,
                                      const SubstitutedTrajectory& linearization, const SubstitutedTrajectory& traj);

}  // namespace parafoil
