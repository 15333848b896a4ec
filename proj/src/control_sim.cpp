#include "parafoil/control_sim.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "parafoil/random.hpp"

namespace parafoil {

namespace {

constexpr std::uint64_t kBiasTag = 0x5452'5554'4842'0001ULL;
constexpr std::uint64_t kGustTagX = 0x5452'5554'4847'0002ULL;
constexpr std::uint64_t kGustTagY = 0x5452'5554'4847'0003ULL;

}  // namespace

void ControllerGains::validate() const {
  if (!(k_cross >= 0.0) || !(k_heading >= 0.0) || !(k_long >= 0.0)) {
    throw std::invalid_argument("controller gains must be nonnegative");
  }
  if (!(sink_authority >= 0.0)) throw std::invalid_argument("sink authority must be nonnegative");
}

void TruthModelParams::validate() const {
  if (!(std::abs(v_bias) <= 0.2) || !(std::abs(r_bias) <= 0.2)) {
    throw std::invalid_argument("speed biases must lie within +-0.2");
  }
  if (!(actuator_tau >= 0.0)) throw std::invalid_argument("actuator_tau must be nonnegative");
  if (!(turn_rate_limit >= 0.0)) throw std::invalid_argument("turn_rate_limit must be nonnegative");
}

void DispersionSpec::validate() const {
  if (!(v_bias >= 0.0 && v_bias <= 0.2) || !(r_bias >= 0.0 && r_bias <= 0.2)) {
    throw std::invalid_argument("bias ranges must lie in [0, 0.2]");
  }
  if (!(actuator_tau >= 0.0)) throw std::invalid_argument("actuator_tau must be nonnegative");
  if (!(gust_sigma >= 0.0)) throw std::invalid_argument("gust_sigma must be nonnegative");
  if (!(gust_length > 0.0)) throw std::invalid_argument("gust_length must be positive");
}

TruthModelParams sample_truth(const DispersionSpec& spec, const PlanningProblem& problem,
                              const DrydenParams& wind_params, std::uint64_t seed) {
  spec.validate();
  TruthModelParams truth;
  Random rng(Random::mix(seed) ^ kBiasTag);
  truth.v_bias = rng.uniform(-spec.v_bias, spec.v_bias);
  truth.r_bias = rng.uniform(-spec.r_bias, spec.r_bias);
  truth.actuator_tau = spec.actuator_tau;
  if (spec.gust_sigma > 0.0 && !problem.wind.empty()) {
    DrydenParams p = wind_params;
    p.w_ref = 0.0;
    p.sigma_lf = 0.0;
    p.sigma_hf = spec.gust_sigma;
    p.length_hf = spec.gust_length;
    p.seed_x = Random::mix(seed) ^ kGustTagX;
    p.seed_y = Random::mix(seed) ^ kGustTagY;
    truth.gusts = generate_components(p, problem.speeds, problem.wind.grid()).high_frequency;
  }
  return truth;
}

double cross_track_error(const FourDofState& est, const ReferenceSolution& ref, double t) {
  const Eigen::Vector2d tangent = ref.track_direction_at(t);
  const Eigen::Vector2d e = est.position() - ref.state_at(t).position();
  return tangent.x() * e.y() - tangent.y() * e.x();
}

double along_track_error(const FourDofState& est, const ReferenceSolution& ref, double t) {
  return ref.track_direction_at(t).dot(est.position() - ref.state_at(t).position());
}

double lateral_control(const ControllerGains& gains, const FourDofState& est, const ReferenceSolution& ref,
                       double t, double psi_dot_max, double pace) {
  const double d = cross_track_error(est, ref, t);
  const double heading_error = wrap_angle(ref.state_at(t).psi - est.psi);
  const double u = ref.turn_rate_at(t) * pace - gains.k_cross * d + gains.k_heading * heading_error;
  return std::clamp(u, -psi_dot_max, psi_dot_max);
}

double longitudinal_control(const ControllerGains& gains, const FourDofState& est, const ReferenceSolution& ref,
                            double t, double nominal_sink) {
  const double bound = gains.sink_authority * nominal_sink;
  return std::clamp(gains.k_long * along_track_error(est, ref, t), -bound, bound);
}

FlightResult fly(const FlightConfig& config, std::uint64_t seed) {
  const TruthModelParams truth = sample_truth(config.dispersions, config.problem, config.wind_params, seed);
  std::optional<PlanResult> initial;
  try {
    initial.emplace(plan(config.problem, config.planner));
  } catch (const std::exception& e) {
    FlightResult failed;
    failed.truth = truth;
    failed.record.ok = false;
    failed.record.failure = std::string("planner: ") + e.what();
    return failed;
  }
  return fly(config, *initial, truth);
}

FlightResult fly(const FlightConfig& config, const PlanResult& initial, const TruthModelParams& truth) {
  config.gains.validate();
  truth.validate();
  const PlanningProblem& pr = config.problem;
  FlightResult out;
  out.truth = truth;
  out.initial_plan = initial.diagnostics;
  out.replanning_enabled = std::isfinite(config.replan_threshold);
  LandingRecord& rec = out.record;
  rec.iterations_phase1 = initial.diagnostics.iterations_phase1;
  rec.iterations_phase2 = initial.diagnostics.iterations_phase2;
  rec.mean_iteration_ms = 1e3 * initial.diagnostics.mean_iteration_time();
  if (!initial.usable()) {
    rec.ok = false;
    rec.failure = "planner returned no trajectory";
    return out;
  }

  const WindProfile truth_wind = truth.gusts.empty() ? pr.wind : pr.wind + truth.gusts;
  PlantModifiers mods{1.0 + truth.v_bias, 1.0 + truth.r_bias, 0.0};
  const double limit = truth.turn_rate_limit > 0.0 ? truth.turn_rate_limit : pr.psi_dot_max;
  const SpeedProfile& speeds = pr.speeds;

  // The reference is followed on its own clock tau, which advances at the
  // ratio of the actual to the planned sink rate, so reference states are
  // compared at matching altitudes. Steps are uniform in tau.
  PlanResult current = initial;
  const ReferenceSolution* ref = &current.reference;
  FourDofState state{pr.x0.x(), pr.x0.y(), pr.psi0, speeds.z0()};
  double omega = ref->turn_rates.front();
  double t = pr.t0;
  double tau = pr.t0;
  std::size_t k = 0;
  int j = 0;
  double dtau = (ref->node_times[1] - ref->node_times[0]) / config.substeps;
  double last_replan = -std::numeric_limits<double>::infinity();
  long steps = 0;
  long saturated = 0;
  const double give_up = pr.t0 + 3.0 * (initial.mesh.t_final() - pr.t0);

  try {
    while (true) {
      const bool on_reference = k + 1 < ref->nodes();
      double tau_end = tau + dtau;
      if (on_reference) {
        dtau = (ref->node_times[k + 1] - ref->node_times[k]) / config.substeps;
        tau = ref->node_times[k] + j * dtau;
        tau_end = j + 1 == config.substeps ? ref->node_times[k + 1] : tau + dtau;
      }
      mods.sink_offset = longitudinal_control(config.gains, state, *ref, tau, speeds.sink(state.z));
      const double sink = speeds.sink(state.z) * mods.r_scale + mods.sink_offset;
      const double pace = sink / current.problem.speeds.sink(state.z);
      const double h = dtau / pace;
      const double cmd = lateral_control(config.gains, state, *ref, tau, limit, pace);
      if (std::abs(cmd) >= limit) ++saturated;
      if (truth.actuator_tau > 0.0) omega += -std::expm1(-h / truth.actuator_tau) * (cmd - omega);
      else omega = cmd;
      out.log.push_back({t, state.px, state.py, state.z, state.psi, cmd});

      const FourDofState previous = state;
      state = propagate_4dof(state, omega, truth_wind, speeds, h, mods);
      ++steps;

      if (state.z <= pr.z_final) {
        const double frac = (previous.z - pr.z_final) / (previous.z - state.z);
        const double px = previous.px + frac * (state.px - previous.px);
        const double py = previous.py + frac * (state.py - previous.py);
        const double psi = previous.psi + frac * (state.psi - previous.psi);
        rec.touchdown_time = t + frac * h;
        out.log.push_back({rec.touchdown_time, px, py, pr.z_final, psi, cmd});
        rec.miss_distance = std::hypot(px - pr.target.x(), py - pr.target.y());
        rec.miss_heading = wrap_angle(psi - pr.psi_f);
        break;
      }
      t += h;
      tau = tau_end;
      if (on_reference && ++j == config.substeps) {
        j = 0;
        ++k;
      }
      if (t > give_up) {
        rec.ok = false;
        rec.failure = "no touchdown within the time budget";
        break;
      }

      if (out.replanning_enabled && t - last_replan >= config.replan_cooldown &&
          state.z > pr.z_final + config.replan_margin &&
          std::abs(cross_track_error(state, *ref, tau)) > config.replan_threshold) {
        const SpeedProfile measured(speeds.atmosphere(), state.z, speeds.horizontal(state.z) * mods.v_scale,
                                    speeds.sink(state.z) * mods.r_scale);
        try {
          PlanResult next = replan(current, state, tau, measured, config.planner, config.replan_margin);
          if (next.usable() && next.diagnostics.status != PlanStatus::SolverFailure) {
            current = std::move(next);
            ref = &current.reference;
            k = 0;
            j = 0;
            ++rec.replans;
            last_replan = t;
          }
        } catch (const std::exception&) {
          // Keep tracking the previous reference.
        }
      }
    }
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.failure = std::string("truth-domain escape: ") + e.what();
  }
  rec.saturated_fraction = steps > 0 ? static_cast<double>(saturated) / static_cast<double>(steps) : 0.0;
  return out;
}

}  // namespace parafoil
