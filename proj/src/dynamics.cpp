#include "parafoil/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "parafoil/transcription.hpp"

namespace parafoil {

namespace {

struct Derivative {
  double px, py, psi, z;
};

Derivative rates(const FourDofState& s, double turn_rate, const WindProfile& wind, const SpeedProfile& speeds,
                 const PlantModifiers& mods) {
  const Speeds sp = speeds.at(s.z);
  const Eigen::Vector2d w = wind.at(s.z);
  const double v = sp.horizontal * mods.v_scale;
  const double r = sp.sink * mods.r_scale + mods.sink_offset;
  return {v * std::cos(s.psi) + w.x(), v * std::sin(s.psi) + w.y(), turn_rate, -r};
}

FourDofState advance(const FourDofState& s, const Derivative& d, double h) {
  return {s.px + h * d.px, s.py + h * d.py, s.psi + h * d.psi, s.z + h * d.z};
}

}  // namespace

FourDofState propagate_4dof(const FourDofState& state, double turn_rate, const WindProfile& wind,
                            const SpeedProfile& speeds, double dt, const PlantModifiers& mods) {
  if (!std::isfinite(turn_rate) || !std::isfinite(dt)) throw std::invalid_argument("non-finite turn rate or step");
  const Derivative k1 = rates(state, turn_rate, wind, speeds, mods);
  const Derivative k2 = rates(advance(state, k1, 0.5 * dt), turn_rate, wind, speeds, mods);
  const Derivative k3 = rates(advance(state, k2, 0.5 * dt), turn_rate, wind, speeds, mods);
  const Derivative k4 = rates(advance(state, k3, dt), turn_rate, wind, speeds, mods);
  const double h6 = dt / 6.0;
  FourDofState out{state.px + h6 * (k1.px + 2.0 * k2.px + 2.0 * k3.px + k4.px),
                   state.py + h6 * (k1.py + 2.0 * k2.py + 2.0 * k3.py + k4.py),
                   state.psi + h6 * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi),
                   state.z + h6 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z)};
  if (!speeds.atmosphere().in_domain(out.z)) throw std::domain_error("state left the atmosphere domain");
  return out;
}

Eigen::Vector2d discrete_step(const DiscreteTransition& trans, const Eigen::Vector2d& x_k, const Eigen::Vector2d& u_k,
                              const Eigen::Vector2d& u_k1) {
  return x_k + 0.5 * trans.dt * (u_k + u_k1) + trans.wind_drift;
}

double wrap_angle(double angle) {
  double r = std::remainder(angle, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

std::vector<double> unwrapped_headings(const Eigen::Matrix2Xd& inputs) {
  std::vector<double> psi;
  const auto n = inputs.cols();
  if (n == 0) return psi;
  psi.reserve(static_cast<std::size_t>(n));
  psi.push_back(std::atan2(inputs(1, 0), inputs(0, 0)));
  double last_turn = 0.0;
  for (Eigen::Index k = 1; k < n; ++k) {
    const Eigen::Vector2d a = inputs.col(k - 1);
    const Eigen::Vector2d b = inputs.col(k);
    double d = std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
    // A reversal is ambiguous; keep turning the way the previous node turned.
    if (std::abs(d) == std::numbers::pi) d = last_turn < 0.0 ? -std::numbers::pi : std::numbers::pi;
    psi.push_back(psi.back() + d);
    if (d != 0.0) last_turn = d;
  }
  return psi;
}

std::size_t ReferenceSolution::interval_at(double t) const {
  if (node_times.size() < 2) return 0;
  const auto it = std::upper_bound(node_times.begin(), node_times.end(), t);
  const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - node_times.begin() - 1, 0));
  return std::min(idx, node_times.size() - 2);
}

double ReferenceSolution::turn_rate_at(double t) const {
  if (node_times.size() < 2 || t < t0() || t > t_final()) return 0.0;
  return turn_rates[interval_at(t)];
}

FourDofState ReferenceSolution::state_at(double t) const {
  if (node_times.size() < 2) return states.front();
  const double tc = std::clamp(t, t0(), t_final());
  const std::size_t k = interval_at(tc);
  const double dt = node_times[k + 1] - node_times[k];
  const double tau = tc - node_times[k];
  const Eigen::Vector2d u0 = inputs.col(static_cast<Eigen::Index>(k));
  const Eigen::Vector2d u1 = inputs.col(static_cast<Eigen::Index>(k + 1));
  const Eigen::Vector2d w = wind_drift.col(static_cast<Eigen::Index>(k));
  const Eigen::Vector2d p =
      states[k].position() + u0 * tau + (u1 - u0) * (tau * tau / (2.0 * dt)) + w * (tau / dt);
  const double frac = tau / dt;
  return {p.x(), p.y(), states[k].psi + turn_rates[k] * tau, states[k].z + frac * (states[k + 1].z - states[k].z)};
}

Eigen::Vector2d ReferenceSolution::track_direction_at(double t) const {
  const double tc = std::clamp(t, t0(), t_final());
  const std::size_t k = interval_at(tc);
  const double dt = node_times[k + 1] - node_times[k];
  const double tau = tc - node_times[k];
  const Eigen::Vector2d u0 = inputs.col(static_cast<Eigen::Index>(k));
  const Eigen::Vector2d u1 = inputs.col(static_cast<Eigen::Index>(k + 1));
  const Eigen::Vector2d g = u0 + (u1 - u0) * (tau / dt) + wind_drift.col(static_cast<Eigen::Index>(k)) / dt;
  const double n = g.norm();
  if (n > 0.0) return g / n;
  const double psi = states[k].psi + turn_rates[k] * tau;
  return {std::cos(psi), std::sin(psi)};
}

ReferenceSolution recover_reference(const SubstitutedTrajectory& traj, const Mesh& mesh) {
  const int n = mesh.nodes();
  if (traj.size() != n || traj.inputs.cols() != n) throw std::invalid_argument("trajectory and mesh disagree in size");
  for (int k = 0; k < n; ++k) {
    if (traj.inputs.col(k).norm() < 0.1 * mesh.v[static_cast<std::size_t>(k)]) {
      throw std::domain_error("degenerate substituted input at node " + std::to_string(k));
    }
  }
  ReferenceSolution ref;
  ref.node_times = mesh.node_times;
  ref.inputs = traj.inputs;
  ref.wind_drift = mesh.wind_drift;
  const std::vector<double> psi = unwrapped_headings(traj.inputs);
  ref.states.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    ref.states.push_back({traj.positions(0, k), traj.positions(1, k), psi[static_cast<std::size_t>(k)],
                          mesh.node_altitudes[static_cast<std::size_t>(k)]});
  }
  ref.turn_rates.reserve(static_cast<std::size_t>(n - 1));
  for (int k = 0; k + 1 < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    ref.turn_rates.push_back((psi[i + 1] - psi[i]) / mesh.dt[i]);
  }
  return ref;
}

OpenLoopResult simulate_open_loop(const ReferenceSolution& ref, const FourDofState& start, const WindProfile& wind,
                                  const SpeedProfile& speeds, int substeps) {
  if (substeps < 1) throw std::invalid_argument("substeps must be positive");
  OpenLoopResult out;
  FourDofState s = start;
  out.node_states.push_back(s);
  for (std::size_t k = 0; k + 1 < ref.nodes(); ++k) {
    const double h = (ref.node_times[k + 1] - ref.node_times[k]) / substeps;
    for (int j = 0; j < substeps; ++j) s = propagate_4dof(s, ref.turn_rates[k], wind, speeds, h);
    out.node_states.push_back(s);
  }
  out.final_state = s;
  return out;
}

}  // namespace parafoil
