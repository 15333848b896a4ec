#include "parafoil/serialization.hpp"

#include <cstdio>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace parafoil {

namespace {

using nlohmann::json;

json read_document(std::istream& in) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("malformed JSON: ") + e.what());
  }
}

json distribution(const DistributionSummary& d) {
  return {{"mean", d.mean}, {"median", d.median}, {"p95", d.p95}, {"max", d.max}};
}

json matrix_columns(const Eigen::Matrix2Xd& m) {
  json cols = json::array();
  for (Eigen::Index k = 0; k < m.cols(); ++k) cols.push_back({m(0, k), m(1, k)});
  return cols;
}

}  // namespace

std::vector<TrajectorySample> reference_samples(const ReferenceSolution& ref) {
  std::vector<TrajectorySample> out;
  out.reserve(ref.nodes());
  for (std::size_t k = 0; k < ref.nodes(); ++k) {
    const FourDofState& s = ref.states[k];
    const double u = k < ref.turn_rates.size() ? ref.turn_rates[k] : 0.0;
    out.push_back({ref.node_times[k], s.px, s.py, s.z, s.psi, u});
  }
  return out;
}

void write_trajectory_json(const std::vector<TrajectorySample>& samples, std::ostream& out) {
  json doc = json::array();
  for (const TrajectorySample& s : samples) {
    doc.push_back({{"t", s.t}, {"px", s.px}, {"py", s.py}, {"z", s.z}, {"psi", s.psi}, {"u_cmd", s.u_cmd}});
  }
  out << doc.dump() << '\n';
}

std::vector<TrajectorySample> read_trajectory_json(std::istream& in) {
  const json doc = read_document(in);
  if (!doc.is_array()) throw std::runtime_error("trajectory document must be an array");
  std::vector<TrajectorySample> out;
  out.reserve(doc.size());
  for (const json& r : doc) {
    out.push_back({r.at("t").get<double>(), r.at("px").get<double>(), r.at("py").get<double>(),
                   r.at("z").get<double>(), r.at("psi").get<double>(), r.at("u_cmd").get<double>()});
  }
  return out;
}

void write_trajectory_csv(const std::vector<TrajectorySample>& samples, std::ostream& out) {
  out << "t,px,py,z,psi,u_cmd\n";
  char buf[256];
  for (const TrajectorySample& s : samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t, s.px, s.py, s.z, s.psi, s.u_cmd);
    out << buf;
  }
}

void write_diagnostics_json(const PlannerDiagnostics& d, std::ostream& out) {
  json times = json::array();
  for (double t : d.iteration_times) times.push_back(1e3 * t);
  const json doc = {{"iterations", d.iterations()},
                    {"iterations_phase1", d.iterations_phase1},
                    {"iterations_phase2", d.iterations_phase2},
                    {"converged", d.converged},
                    {"status", to_string(d.status)},
                    {"message", d.message},
                    {"warm_started", d.warm_started},
                    {"max_residual_h", d.max_residual_h},
                    {"cost_history", d.cost_history},
                    {"residuals", d.residuals},
                    {"times_ms", times}};
  out << doc.dump(2) << '\n';
}

PlannerDiagnostics read_diagnostics_json(std::istream& in) {
  const json doc = read_document(in);
  PlannerDiagnostics d;
  d.iterations_phase1 = doc.at("iterations_phase1").get<int>();
  d.iterations_phase2 = doc.at("iterations_phase2").get<int>();
  if (doc.at("iterations").get<int>() != d.iterations()) {
    throw std::runtime_error("iteration counts disagree");
  }
  d.converged = doc.at("converged").get<bool>();
  const std::string status = doc.at("status").get<std::string>();
  bool known = false;
  for (PlanStatus s : {PlanStatus::Converged, PlanStatus::MaxIterExceeded, PlanStatus::SolverFailure}) {
    if (to_string(s) == status) {
      d.status = s;
      known = true;
    }
  }
  if (!known) throw std::runtime_error("unknown planner status " + status);
  d.message = doc.at("message").get<std::string>();
  d.warm_started = doc.at("warm_started").get<bool>();
  d.max_residual_h = doc.at("max_residual_h").get<double>();
  d.cost_history = doc.at("cost_history").get<std::vector<double>>();
  d.residuals = doc.at("residuals").get<std::vector<double>>();
  for (double ms : doc.at("times_ms").get<std::vector<double>>()) d.iteration_times.push_back(ms / 1e3);
  return d;
}

void write_iterates_json(const PlanResult& result, std::ostream& out) {
  json doc = json::array();
  for (std::size_t i = 0; i < result.iterates.size(); ++i) {
    const ScpIterate& it = result.iterates[i];
    doc.push_back({{"iteration", i + 1},
                   {"phase", it.phase},
                   {"cost", it.cost.total()},
                   {"terminal", it.cost.terminal},
                   {"heading", it.cost.heading},
                   {"smoothing", it.cost.smoothing},
                   {"slack", it.slack},
                   {"residual_h", it.residual_h},
                   {"solver_iterations", it.solver_iterations},
                   {"time_ms", 1e3 * (it.build_time + it.solve_time)},
                   {"positions", matrix_columns(it.trajectory.positions)},
                   {"inputs", matrix_columns(it.trajectory.inputs)}});
  }
  out << doc.dump() << '\n';
}

void write_landing_json(const LandingRecord& r, bool replanning_enabled, std::uint64_t seed, std::ostream& out) {
  const json doc = {{"seed", seed},
                    {"replanning_enabled", replanning_enabled},
                    {"ok", r.ok},
                    {"failure", r.failure},
                    {"miss_distance", r.miss_distance},
                    {"miss_heading", r.miss_heading},
                    {"touchdown_time", r.touchdown_time},
                    {"replans", r.replans},
                    {"saturated_fraction", r.saturated_fraction},
                    {"iterations_phase1", r.iterations_phase1},
                    {"iterations_phase2", r.iterations_phase2},
                    {"mean_iteration_ms", r.mean_iteration_ms}};
  out << doc.dump(2) << '\n';
}

LandingRecord read_landing_json(std::istream& in) {
  const json doc = read_document(in);
  LandingRecord r;
  r.ok = doc.at("ok").get<bool>();
  r.failure = doc.at("failure").get<std::string>();
  r.miss_distance = doc.at("miss_distance").get<double>();
  r.miss_heading = doc.at("miss_heading").get<double>();
  r.touchdown_time = doc.at("touchdown_time").get<double>();
  r.replans = doc.at("replans").get<int>();
  r.saturated_fraction = doc.at("saturated_fraction").get<double>();
  r.iterations_phase1 = doc.at("iterations_phase1").get<int>();
  r.iterations_phase2 = doc.at("iterations_phase2").get<int>();
  r.mean_iteration_ms = doc.at("mean_iteration_ms").get<double>();
  return r;
}

void write_summary_json(const CampaignSummary& s, std::ostream& out) {
  const json doc = {{"runs", s.runs},
                    {"failures", s.failures},
                    {"miss_m", distribution(s.miss)},
                    {"heading_miss_rad", distribution(s.heading_miss)},
                    {"p95_miss_m_2sig", format_significant(s.miss.p95, 2)},
                    {"mean_iterations", s.mean_iterations},
                    {"mean_iteration_ms", s.mean_iteration_ms},
                    {"mean_replans", s.mean_replans}};
  out << doc.dump(2) << '\n';
}

void write_error_json(const std::string& message, const std::string& key, int exit_code, std::ostream& out) {
  const json doc = {{"error", message}, {"key", key}, {"exit_code", exit_code}};
  out << doc.dump(2) << '\n';
}

}  // namespace parafoil
