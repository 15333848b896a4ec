#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "parafoil/control_sim.hpp"
#include "parafoil/montecarlo.hpp"
#include "parafoil/planner.hpp"

namespace parafoil {

/// Reference sampled at the mesh nodes; u_cmd is the turn rate of the interval
/// that starts at the node (0 at the last node).
[[nodiscard]] std::vector<TrajectorySample> reference_samples(const ReferenceSolution& ref);

/// JSON array of {t, px, py, z, psi, u_cmd} records.
void write_trajectory_json(const std::vector<TrajectorySample>& samples, std::ostream& out);
[[nodiscard]] std::vector<TrajectorySample> read_trajectory_json(std::istream& in);
void write_trajectory_csv(const std::vector<TrajectorySample>& samples, std::ostream& out);

/// {iterations, iterations_phase1, iterations_phase2, converged, status,
///  message, warm_started, max_residual_h, cost_history[], residuals[], times_ms[]}
void write_diagnostics_json(const PlannerDiagnostics& diag, std::ostream& out);
[[nodiscard]] PlannerDiagnostics read_diagnostics_json(std::istream& in);

/// Every SCP iterate: phase, cost terms, node positions and inputs.
void write_iterates_json(const PlanResult& result, std::ostream& out);

void write_landing_json(const LandingRecord& record, bool replanning_enabled, std::uint64_t seed, std::ostream& out);
[[nodiscard]] LandingRecord read_landing_json(std::istream& in);

void write_summary_json(const CampaignSummary& summary, std::ostream& out);

/// Machine-readable error document {error, key, exit_code}.
void write_error_json(const std::string& message, const std::string& key, int exit_code, std::ostream& out);

}  // namespace parafoil
