#include "csflock/io.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace csflock {

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  if (res.ec != std::errc{}) return "nan";
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t n = traj.params.n;
  const bool with_v = traj.order == ModelOrder::Second;
  os << 't';
  for (std::size_t i = 1; i <= n; ++i) os << ",x_" << i;
  if (with_v) {
    for (std::size_t i = 1; i <= n; ++i) os << ",v_" << i;
  }
  for (std::size_t i = 1; i <= n; ++i) os << ",w_" << i;
  os << '\n';
  for (const auto& s : traj.samples) {
    os << format_number(s.time);
    for (double x : s.positions) os << ',' << format_number(x);
    if (with_v) {
      for (double v : s.velocities) os << ',' << format_number(v);
    }
    for (int w : s.weights) os << ',' << w;
    os << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "kappa,n_clusters\n";
  for (const auto& r : rows) os << format_number(r.kappa) << ',' << r.n_clusters << '\n';
}

nlohmann::json events_to_json(const std::vector<Event>& events) {
  auto out = nlohmann::json::array();
  for (const auto& e : events) {
    out.push_back({{"kind", to_string(e.kind)}, {"i", e.i + 1}, {"j", e.j + 1}, {"t", e.time}});
  }
  return out;
}

nlohmann::json partition_to_json(const ClusterPartition& partition, std::optional<double> kappa_c) {
  nlohmann::json out;
  out["boundaries"] = partition.boundaries;
  out["count"] = partition.count;
  out["group_velocities"] = partition.group_velocities;
  out["kappa_c"] = optional_number(kappa_c);
  out["degenerate"] = partition.degenerate;
  out["warnings"] = partition.warnings;
  return out;
}

nlohmann::json bounds_to_json(const BoundsReport& r) {
  nlohmann::json out;
  out["regime"] = to_string(r.regime);
  out["pair_lower_bounds"] = r.pair_lower_bounds;
  out["c_m1_prime"] = optional_number(r.c_m1_prime);
  out["c_m1_degenerate"] = r.c_m1_degenerate;
  out["c_M1_prime"] = optional_number(r.c_M1_prime);
  out["decay_rate"] = optional_number(r.decay_rate);
  out["c_L"] = optional_number(r.c_L);
  out["c_chain"] = r.c_chain;
  out["c_m"] = optional_number(r.c_m);
  out["scaling_estimate"] = optional_number(r.scaling_estimate);
  out["notes"] = r.notes;
  return out;
}

nlohmann::json ledger_to_json(const VerificationLedger& ledger, const BoundsReport& report,
                              const FlockingDiagnostics& diagnostics) {
  nlohmann::json out;
  auto claims = nlohmann::json::array();
  for (const auto& c : ledger.claims) {
    claims.push_back({{"name", c.name},
                      {"status", to_string(c.status)},
                      {"detail", c.detail},
                      {"first_violation", optional_number(c.first_violation)}});
  }
  out["claims"] = std::move(claims);
  out["bounds"] = bounds_to_json(report);
  if (diagnostics.exact) {
    out["fitted_rate"] = "exact";
  } else {
    out["fitted_rate"] = optional_number(diagnostics.fitted_rate);
  }
  out["theoretical_rate"] = optional_number(diagnostics.theoretical_rate);
  return out;
}

nlohmann::json equilibrium_to_json(const EquilibriumResult& result) {
  return {{"positions", result.positions},
          {"residual", result.residual},
          {"iterations", result.iterations}};
}

}  // namespace csflock
