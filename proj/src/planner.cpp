#include "parafoil/planner.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace parafoil {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool stalled(double current, double previous, double tol) {
  return std::abs(current - previous) / std::max(std::abs(previous), 1.0) < tol;
}

SubstitutedTrajectory integrate_inputs(const Mesh& mesh, const BoundaryData& bounds, Eigen::Matrix2Xd inputs) {
  SubstitutedTrajectory t;
  t.inputs = std::move(inputs);
  t.positions.resize(2, mesh.nodes());
  t.positions.col(0) = bounds.x0;
  for (int k = 0; k + 1 < mesh.nodes(); ++k) {
    const DiscreteTransition tr{mesh.dt[static_cast<std::size_t>(k)], mesh.wind_drift.col(k)};
    t.positions.col(k + 1) = discrete_step(tr, t.positions.col(k), t.inputs.col(k), t.inputs.col(k + 1));
  }
  return t;
}

}  // namespace

std::string to_string(PlanStatus status) {
  switch (status) {
    case PlanStatus::Converged: return "converged";
    case PlanStatus::MaxIterExceeded: return "max_iter_exceeded";
    case PlanStatus::SolverFailure: return "solver_failure";
  }
  return "unknown";
}

ScpWeights PlannerSettings::weights_for(const Mesh& mesh) const {
  ScpWeights w = ScpWeights::defaults(mesh);
  w.alpha1 = alpha1;
  w.alpha2 = alpha2;
  w.alpha5 = alpha5;
  if (eps_h) w.eps_h = *eps_h;
  if (eps_u) w.eps_u = *eps_u;
  w.conv_tol = conv_tol;
  w.max_iter = max_iter;
  w.phase2_max_iter = phase2_max_iter;
  return w;
}

double PlannerDiagnostics::mean_iteration_time() const {
  if (iteration_times.empty()) return 0.0;
  return std::accumulate(iteration_times.begin(), iteration_times.end(), 0.0) /
         static_cast<double>(iteration_times.size());
}

ReferenceSolution PlanResult::reference_of(std::size_t i) const {
  return recover_reference(iterates.at(i).trajectory, mesh);
}

double PlanResult::final_cost() const { return evaluate_cost(mesh, bounds, weights, trajectory, slack).total(); }

SubstitutedTrajectory initial_guess(const Mesh& mesh, const BoundaryData& bounds) {
  const Eigen::Vector2d dir = bounds.u0.normalized();
  Eigen::Matrix2Xd inputs(2, mesh.nodes());
  for (int k = 0; k < mesh.nodes(); ++k) inputs.col(k) = mesh.v[static_cast<std::size_t>(k)] * dir;
  inputs.col(0) = bounds.u0;
  return integrate_inputs(mesh, bounds, std::move(inputs));
}

PlanResult plan(const PlanningProblem& problem, const PlannerSettings& settings,
                const SubstitutedTrajectory* warm_start) {
  const TimeAltitudeMap map = problem.time_map();
  if (!(map.t_final() > map.t0())) throw std::invalid_argument("final time must exceed the start time");

  PlanResult out{problem, build_mesh(map, problem.wind, problem.nodes, problem.mesh_ratio), {}, {}, {}, 0.0, {}, {},
                 {}};
  const Mesh& mesh = out.mesh;
  out.weights = settings.weights_for(mesh);
  out.weights.validate();
  out.bounds = BoundaryData::make(mesh, problem.x0, problem.psi0, problem.target, problem.psi_f,
                                  problem.psi_dot_max);
  const ScpWeights& w = out.weights;
  PlannerDiagnostics& diag = out.diagnostics;

  SubstitutedTrajectory current = initial_guess(mesh, out.bounds);
  if (warm_start != nullptr && warm_start->size() == mesh.nodes() &&
      phase1_violation(mesh, out.bounds, w, *warm_start, *warm_start) <= 1e-9) {
    current = *warm_start;
    diag.warm_started = true;
  }
  out.trajectory = current;

  const SocpSolver solver(settings.solver);

  // Runs one phase; returns true once the relative cost change between two
  // solved iterates drops below conv_tol while the trust region is slack.
  // Near a symmetric guess (target almost astern) the cost can stall for a
  // few iterations while the inputs still move by the full eps_u.
  auto run_phase = [&](int phase, int cap) {
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (int n = 0; n < cap; ++n) {
      const auto t_build = std::chrono::steady_clock::now();
      const ConvexSubproblem sub = phase == 1 ? build_phase1(mesh, out.bounds, w, current)
                                              : build_phase2(mesh, out.bounds, w, current);
      const double build_time = seconds_since(t_build);
      const ConicSolution sol = solver.solve(sub.program);
      if (sol.status != SolveStatus::Optimal) {
        diag.status = PlanStatus::SolverFailure;
        diag.message = "phase " + std::to_string(phase) + " subproblem " + to_string(sol.status);
        return false;
      }
      ScpIterate it;
      it.phase = phase;
      it.trajectory = extract_trajectory(sub.layout, sol.primal);
      it.slack = phase == 2 ? std::max(sol.primal[sub.layout.slack()], 0.0) : 0.0;
      it.cost = evaluate_cost(mesh, out.bounds, w, it.trajectory, it.slack);
      it.residual_h = input_residual(mesh, it.trajectory);
      it.build_time = build_time;
      it.solve_time = sol.solve_time;
      it.solver_iterations = sol.iterations;
      const double cost = it.cost.total();
      double step = 0.0;
      for (int k = 0; k < mesh.nodes(); ++k) {
        step = std::max(step, (it.trajectory.inputs.col(k) - current.inputs.col(k)).norm());
      }

      (phase == 1 ? diag.iterations_phase1 : diag.iterations_phase2) += 1;
      diag.cost_history.push_back(cost);
      diag.residuals.push_back(it.residual_h);
      diag.iteration_times.push_back(build_time + sol.solve_time);
      if (phase == 1) diag.max_residual_h = std::max(diag.max_residual_h, it.residual_h);
      current = it.trajectory;
      out.trajectory = it.trajectory;
      out.slack = it.slack;
      out.iterates.push_back(std::move(it));
      if (stalled(cost, previous, w.conv_tol) && step < 0.99 * w.eps_u) return true;
      previous = cost;
    }
    return false;
  };

  const bool phase1_done = run_phase(1, w.max_iter);
  if (phase1_done) {
    if (w.phase2_max_iter > 0) {
      run_phase(2, w.phase2_max_iter);
      if (diag.status == PlanStatus::SolverFailure) {
        // The last accepted iterate is still feasible; keep it.
        diag.status = PlanStatus::Converged;
        diag.message = "phase two stopped early: " + diag.message;
      }
    }
    diag.converged = true;
  } else if (diag.status != PlanStatus::SolverFailure) {
    diag.status = PlanStatus::MaxIterExceeded;
    diag.message = "phase one reached max_iter";
    // Best phase-one iterate by cost.
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.iterates.size(); ++i) {
      if (out.iterates[i].cost.total() < out.iterates[best].cost.total()) best = i;
    }
    if (!out.iterates.empty()) {
      out.trajectory = out.iterates[best].trajectory;
      out.slack = 0.0;
    }
  }
  out.reference = recover_reference(out.trajectory, mesh);
  return out;
}

SubstitutedTrajectory resample_guess(const ReferenceSolution& previous, double t_now, const Mesh& mesh,
                                     const BoundaryData& bounds, double eps_h) {
  const int n = mesh.nodes();
  const double span_new = mesh.t_final() - mesh.t0();
  const double prev_end = previous.t_final();
  const double prev_span = std::max(prev_end - t_now, 0.0);
  std::vector<double> psi(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double to_go = (mesh.t_final() - mesh.node_times[static_cast<std::size_t>(k)]) / span_new;
    psi[static_cast<std::size_t>(k)] = previous.state_at(prev_end - to_go * prev_span).psi;
  }
  const double psi0 = std::atan2(bounds.u0.y(), bounds.u0.x());
  const double shift = 2.0 * std::numbers::pi * std::round((psi0 - psi[0]) / (2.0 * std::numbers::pi));
  for (double& p : psi) p += shift;
  psi[0] = psi0;

  Eigen::Matrix2Xd inputs(2, n);
  inputs.col(0) = bounds.u0;
  for (int k = 1; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double a = mesh.v[i - 1];
    const double b = mesh.v[i];
    // Largest heading step whose chord fits the rate cone for these norms.
    const double chord = rate_chord(mesh, k - 1, bounds.psi_dot_max, eps_h);
    const double c = std::clamp((a * a + b * b - chord * chord) / (2.0 * a * b), -1.0, 1.0);
    const double limit = 0.999 * std::acos(c);
    psi[i] = std::clamp(psi[i], psi[i - 1] - limit, psi[i - 1] + limit);
    inputs.col(k) = b * Eigen::Vector2d(std::cos(psi[i]), std::sin(psi[i]));
  }
  return integrate_inputs(mesh, bounds, std::move(inputs));
}

PlanResult replan(const PlanResult& previous, const FourDofState& state, double t_now, const SpeedProfile& measured,
                  const PlannerSettings& settings, double altitude_margin, bool warm) {
  const PlanningProblem& old = previous.problem;
  if (!(state.z < old.speeds.z0())) throw std::invalid_argument("replan state must lie below the previous start");
  if (!(state.z > old.z_final + altitude_margin)) {
    throw std::invalid_argument("replan altitude is within the landing margin");
  }
  PlanningProblem next = old;
  next.speeds = SpeedProfile(measured.atmosphere(), state.z, measured.horizontal(state.z), measured.sink(state.z));
  next.t0 = t_now;
  next.x0 = state.position();
  next.psi0 = state.psi;
  if (!warm) return plan(next, settings);

  const TimeAltitudeMap map = next.time_map();
  const Mesh mesh = build_mesh(map, next.wind, next.nodes, next.mesh_ratio);
  const BoundaryData bounds =
      BoundaryData::make(mesh, next.x0, next.psi0, next.target, next.psi_f, next.psi_dot_max);
  const ScpWeights w = settings.weights_for(mesh);
  const SubstitutedTrajectory guess = resample_guess(previous.reference, t_now, mesh, bounds, w.eps_h);
  return plan(next, settings, &guess);
}

}  // namespace parafoil
