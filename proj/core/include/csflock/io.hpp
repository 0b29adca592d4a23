#pragma once

#include <optional>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "csflock/analysis.hpp"
#include "csflock/clustering.hpp"
#include "csflock/integrator.hpp"

namespace csflock {

/// Shortest decimal string that parses back to exactly `x`.
std::string format_number(double x);

/// Header `t,x_1..x_N[,v_1..v_N],w_1..w_N`; velocity columns only for
/// second-order trajectories.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Header `kappa,n_clusters`.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// [{kind, i, j, t}] with 1-based particle indices.
nlohmann::json events_to_json(const std::vector<Event>& events);

nlohmann::json partition_to_json(const ClusterPartition& partition,
                                 std::optional<double> kappa_c = std::nullopt);

nlohmann::json bounds_to_json(const BoundsReport& report);

/// {claims, bounds, fitted_rate, theoretical_rate}; rates are null when
/// unavailable and fitted_rate is "exact" when D_v vanished.
nlohmann::json ledger_to_json(const VerificationLedger& ledger, const BoundsReport& report,
                              const FlockingDiagnostics& diagnostics);

nlohmann::json equilibrium_to_json(const EquilibriumResult& result);

}  // namespace csflock
