#pragma once

#include <vector>

#include <Eigen/Core>

#include "parafoil/atmosphere.hpp"
#include "parafoil/wind.hpp"

namespace parafoil {

struct Mesh;

/// Pose of the 4-DOF kinematic parafoil. Heading is kept unwrapped.
struct FourDofState {
  double px{0.0};
  double py{0.0};
  double psi{0.0};
  double z{0.0};

  [[nodiscard]] Eigen::Vector2d position() const { return {px, py}; }
  friend bool operator==(const FourDofState&, const FourDofState&) = default;
};

/// Multiplicative speed dispersions and a sink-rate offset applied on top of
/// the nominal profile. The defaults leave the nominal arithmetic unchanged.
struct PlantModifiers {
  double v_scale{1.0};
  double r_scale{1.0};
  double sink_offset{0.0};  // m/s, positive descends faster
};

/// One RK4 step of the 4-DOF model with a constant turn rate:
///   px' = v(z) cos(psi) + wx(z),  py' = v(z) sin(psi) + wy(z),
///   psi' = turn_rate,             z' = -r(z).
FourDofState propagate_4dof(const FourDofState& state, double turn_rate, const WindProfile& wind,
                            const SpeedProfile& speeds, double dt, const PlantModifiers& mods = {});

/// Position/substituted-input pair sequence on the mesh: positions x_k and
/// planar velocity inputs u_k = v(z_k) [cos psi_k, sin psi_k].
struct SubstitutedTrajectory {
  Eigen::Matrix2Xd positions;
  Eigen::Matrix2Xd inputs;

  [[nodiscard]] Eigen::Index size() const { return positions.cols(); }
};

/// Exact transition of the substituted integrator dynamics over one interval
/// with linearly interpolated input: A_d = I and B- = B+ = (dt / 2) I.
struct DiscreteTransition {
  double dt{0.0};
  Eigen::Vector2d wind_drift{Eigen::Vector2d::Zero()};

  [[nodiscard]] Eigen::Matrix2d a_d() const { return Eigen::Matrix2d::Identity(); }
  [[nodiscard]] Eigen::Matrix2d b_minus() const { return 0.5 * dt * Eigen::Matrix2d::Identity(); }
  [[nodiscard]] Eigen::Matrix2d b_plus() const { return 0.5 * dt * Eigen::Matrix2d::Identity(); }
};

[[nodiscard]] Eigen::Vector2d discrete_step(const DiscreteTransition& trans, const Eigen::Vector2d& x_k,
                                            const Eigen::Vector2d& u_k, const Eigen::Vector2d& u_k1);

/// Guidance output: node states, piecewise-constant turn rates, and enough of
/// the substituted solution to evaluate the reference between nodes.
struct ReferenceSolution {
  std::vector<double> node_times;
  std::vector<FourDofState> states;
  std::vector<double> turn_rates;  // one per interval
  Eigen::Matrix2Xd inputs;         // u_k at nodes
  Eigen::Matrix2Xd wind_drift;     // W_k per interval

  [[nodiscard]] std::size_t nodes() const { return node_times.size(); }
  [[nodiscard]] double t0() const { return node_times.front(); }
  [[nodiscard]] double t_final() const { return node_times.back(); }
  /// Interval index containing t (clamped to the horizon).
  [[nodiscard]] std::size_t interval_at(double t) const;
  /// u*(t); zero outside the horizon.
  [[nodiscard]] double turn_rate_at(double t) const;
  /// x*(t): position follows the discrete model within the interval, heading
  /// and altitude are interpolated linearly.
  [[nodiscard]] FourDofState state_at(double t) const;
  /// Unit ground-track tangent of the planned path at t.
  [[nodiscard]] Eigen::Vector2d track_direction_at(double t) const;
};

/// Wraps an angle to (-pi, pi]; exactly pi maps to +pi.
[[nodiscard]] double wrap_angle(double angle);

/// Sequentially unwrapped headings atan2(u_y, u_x) of the node inputs.
[[nodiscard]] std::vector<double> unwrapped_headings(const Eigen::Matrix2Xd& inputs);

/// Heading and turn-rate reference from a substituted solution.
/// Throws std::domain_error when any |u_k| < 0.1 v(z_k).
[[nodiscard]] ReferenceSolution recover_reference(const SubstitutedTrajectory& traj, const Mesh& mesh);

struct OpenLoopResult {
  FourDofState final_state;
  std::vector<FourDofState> node_states;  // truth state at each mesh node
};

/// Flies the reference turn rates open loop through the 4-DOF model from
/// `start`, with `substeps` RK4 steps per mesh interval.
[[nodiscard]] OpenLoopResult simulate_open_loop(const ReferenceSolution& ref, const FourDofState& start,
                                                const WindProfile& wind, const SpeedProfile& speeds,
                                                int substeps = 20);

}  // namespace parafoil
