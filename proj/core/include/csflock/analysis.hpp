#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csflock/clustering.hpp"
#include "csflock/integrator.hpp"
#include "csflock/potential.hpp"

namespace csflock {

/// Explicit bound constants. Fields that do not apply to the regime, or whose
/// hypotheses fail, are left empty and explained in `notes`.
struct BoundsReport {
  Regime regime = Regime::LongRange;

  // beta < 1
  /// C_{m,i,i+1} for each adjacent pair.
  std::vector<double> pair_lower_bounds;
  std::optional<double> c_m1_prime;
  /// A zero natural-velocity gap makes the pairwise bound vanish.
  bool c_m1_degenerate = false;
  std::optional<double> c_M1_prime;
  std::optional<double> decay_rate;

  // beta >= 1
  std::optional<double> c_L;
  /// C_L followed by each inductive step; the last entry is C_m.
  std::vector<double> c_chain;
  std::optional<double> c_m;
  /// Order estimate exp(-N^2 log N / (beta - 1)), without the prefactor.
  std::optional<double> scaling_estimate;

  std::vector<std::string> notes;
};

/// Bounds for beta < 1. `nu` and `x0` share the same (spatial) indexing.
BoundsReport bounds_long_range(std::span<const double> nu, std::span<const double> x0, double kappa,
                               const Potential& potential);

/// Bounds for beta >= 1. The inductive chain needs a finite far-field limit
/// and is only built for beta > 1. Throws DomainError on coincident x0.
BoundsReport bounds_short_range(std::span<const double> nu, std::span<const double> x0,
                                double kappa, const Potential& potential);

struct EquilibriumResult {
  /// Ascending, zero-mean positions.
  std::vector<double> positions;
  /// Max-norm of the equilibrium residual at exit.
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// Solves nu_i + (kappa/N) sum_{k != i} P(y_k - y_i) = 0 with sum y = 0 over
/// a window of `nu_window.size()` particles out of `n_total`.
///
/// For beta < 1 particles are ordered by natural velocity and equal
/// velocities share a position. For beta >= 1 the window is taken in the
/// given (spatial) order. Throws NormalizationError for a non-zero-sum
/// window and SolverError when Newton's method does not converge (for
/// beta > 1 this means the window is not a cluster).
EquilibriumResult solve_equilibrium(std::span<const double> nu_window, double kappa,
                                    const Potential& potential, std::size_t n_total,
                                    std::optional<std::vector<double>> initial_guess = std::nullopt);

enum class PairClass { Bounded, Diverging };

struct EmpiricalClusters {
  /// Boundaries are over the spatial order at the final sample.
  ClusterPartition partition;
  /// order[r] is the original index of the particle at spatial rank r.
  std::vector<std::size_t> order;
  /// Least-squares slope of each spatially adjacent distance.
  std::vector<double> adjacent_slopes;
  /// classes[i][j] for original indices; symmetric.
  std::vector<std::vector<PairClass>> classes;
  double slope_tol = 0.0;
};

/// slope_tol default: 1e-3 times the largest adjacent group-velocity gap of
/// the prediction, or 1e-3 when a single cluster is predicted.
double default_slope_tol(const ClusterPartition& predicted);

/// Classifies adjacent pairs as bounded or diverging by the slope of their
/// distance over the trailing `window_fraction` of samples. Throws
/// ConfigError if fewer than 3 samples fall in the window.
EmpiricalClusters empirical_clusters(const Trajectory& traj, double window_fraction,
                                     double slope_tol);

struct FlockingDiagnostics {
  std::vector<double> times;
  std::vector<double> d_x;
  std::vector<double> d_v;
  std::vector<double> d_1;
  /// Decay rate of D_v from a log-linear fit over the trailing half.
  std::optional<double> fitted_rate;
  /// D_v vanished identically; no fit is reported.
  bool exact = false;
  std::optional<double> theoretical_rate;
};

/// Diameter series and fitted decay rate. When `theoretical_rate` is not
/// given and beta <= 1, it is kappa * psi(sup_t D_x(t)).
FlockingDiagnostics flocking_diagnostics(const Trajectory& traj,
                                         std::optional<double> theoretical_rate = std::nullopt);

enum class ClaimStatus { Pass, Fail, Inconclusive };

std::string_view to_string(ClaimStatus status) noexcept;

struct Claim {
  std::string name;
  ClaimStatus status = ClaimStatus::Inconclusive;
  std::string detail;
  /// Time of the first violating sample, if any.
  std::optional<double> first_violation;
};

struct VerificationLedger {
  std::vector<Claim> claims;
  bool all_pass() const;
};

/// Checks the bounds in `report` against every sample of `traj`.
VerificationLedger verify_bounds(const Trajectory& traj, const BoundsReport& report);

}  // namespace csflock
