#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "csflock/integrator.hpp"
#include "csflock/potential.hpp"

namespace csflock {

/// Contiguous partition of spatially ordered particles into clusters.
///
/// `boundaries` is n_0 = 0 < n_1 < ... < n_p = N; cluster i holds the
/// (1-based) particles n_{i-1}+1 .. n_i.
struct ClusterPartition {
  std::vector<std::size_t> boundaries;
  std::size_t count = 0;
  /// Asymptotic velocity per cluster; empty for the small-coupling variant.
  std::vector<double> group_velocities;
  /// True if some membership condition evaluated to an exact tie.
  bool degenerate = false;
  /// Smallest distance from zero of any membership decision, i.e. no
  /// perturbation of the conditions below this size changes the partition.
  double min_margin = 0.0;
  std::vector<std::string> warnings;

  /// Cluster sizes |I_i|.
  std::vector<std::size_t> sizes() const;
  /// Throws DomainError if boundaries are not a valid partition of {1..n}.
  void validate(std::size_t n) const;
};

/// Averages and fluctuations over the index window (a, b] (0-based a, b).
struct LocalStats {
  std::size_t a = 0;
  std::size_t b = 0;
  double mean_nu = 0.0;
  double mean_x = 0.0;
  std::vector<double> fluct_nu;
  std::vector<double> fluct_x;
};

LocalStats local_stats(std::span<const double> nu, std::span<const double> x, std::size_t a,
                       std::size_t b);

/// Greedy maximal-cluster construction for the first-order system.
///
/// `nu` must be indexed in spatial order. A non-zero mean is removed before
/// the construction and added back to the group velocities. Exact ties count
/// as a failed membership test and mark the result degenerate.
/// Throws RegimeError unless beta > 1.
ClusterPartition predict_first_order(std::span<const double> nu, double kappa,
                                     const Potential& potential);

/// Smallest coupling above which a single cluster forms (0 if every kappa > 0
/// gives one). Throws RegimeError unless beta > 1.
double kappa_critical_first_order(std::span<const double> nu, const Potential& potential);

/// predict_first_order applied to the natural velocities of (x0, v0).
/// x0 must be strictly increasing (DomainError otherwise).
ClusterPartition predict_second_order(std::span<const double> x0, std::span<const double> v0,
                                      double kappa, const Potential& potential);

/// Closed-form critical coupling for the second-order system.
double kappa_critical_second_order(std::span<const double> x0, std::span<const double> v0,
                                   const Potential& potential);

/// The coupling-free limit of the construction, driven by the initial
/// velocities only. No group velocities are reported.
ClusterPartition predict_small_kappa(std::span<const double> v0);

/// The constant answer for beta <= 1: every configuration flocks.
ClusterPartition predict_unconditional(std::span<const double> velocities);

struct SweepInput {
  ModelOrder order = ModelOrder::First;
  /// Initial positions (second order only).
  std::vector<double> positions;
  /// Natural velocities (first order) or initial velocities (second order).
  std::vector<double> velocities;
};

struct SweepRow {
  double kappa = 0.0;
  std::size_t n_clusters = 0;
};

/// Cluster count at each grid value, evaluated on up to `jobs` threads.
/// Rows come back in grid order.
std::vector<SweepRow> sweep_cluster_count(const SweepInput& input, std::span<const double> kappa_grid,
                                          const Potential& potential, unsigned jobs = 1);

}  // namespace csflock
