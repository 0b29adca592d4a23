#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csflock/potential.hpp"

namespace csflock {

/// Particle count, coupling strength and interaction kernel.
struct ModelParams {
  ModelParams(std::size_t n, double kappa, Potential potential);

  std::size_t n;
  double kappa;
  Potential potential;
};

/// Galilean shift removed by `normalize`. Raw-frame positions are recovered
/// as x + mean_position + mean_velocity * t.
struct FrameShift {
  double mean_position = 0.0;
  double mean_velocity = 0.0;

  double raw_position(double x, double t) const { return x + mean_position + mean_velocity * t; }
  double raw_velocity(double v) const { return v + mean_velocity; }
};

struct NormalizedData {
  std::vector<double> positions;
  std::vector<double> velocities;
  FrameShift shift;
};

enum class Normalization {
  Auto,    // subtract the means and carry on
  Strict,  // reject inputs that are not already zero-mean
};

NormalizedData normalize(std::span<const double> x, std::span<const double> v);

/// True if the mean of `values` is zero relative to their magnitude.
bool is_zero_mean(std::span<const double> values, double rel_tol = 1e-10);

/// State of the first-order reduction.
///
/// Stuck particles are represented as a single group with an integer weight
/// rather than as duplicate coordinates. `group_of[p]` maps original particle
/// p onto its group so per-particle output keeps a stable width.
struct FirstOrderState {
  std::vector<double> positions;
  std::vector<double> natural_velocities;
  std::vector<int> weights;
  std::vector<std::size_t> group_of;
  double time = 0.0;

  /// One group per particle, all weights 1.
  static FirstOrderState from_particles(std::vector<double> x, std::vector<double> nu,
                                        double time = 0.0);

  std::size_t particle_count() const noexcept { return group_of.size(); }
  std::size_t group_count() const noexcept { return positions.size(); }

  /// Positions expanded to one entry per original particle.
  std::vector<double> particle_positions() const;
  /// Group weight seen by each original particle.
  std::vector<int> particle_weights() const;
  /// Lowest original particle index that belongs to `group`.
  std::size_t representative(std::size_t group) const;

  /// Throws DomainError if sizes or weights are inconsistent.
  void validate() const;
};

/// Merges group `b` into group `a`: weights add, position and natural velocity
/// become weight averages so the weighted sums are unchanged.
void merge_groups(FirstOrderState& state, std::size_t a, std::size_t b);

struct SecondOrderState {
  std::vector<double> positions;
  std::vector<double> velocities;
  double time = 0.0;
};

/// nu_i = v_i - (kappa/N) sum_{k != i} P(x_k - x_i).
///
/// Coincident positions are allowed for beta < 1 (they contribute P(0) = 0)
/// and rejected with DomainError otherwise. With Normalization::Strict,
/// non-zero-mean input raises NormalizationError; with Auto the means are
/// removed first.
std::vector<double> natural_velocities(const ModelParams& params, std::span<const double> x0,
                                       std::span<const double> v0,
                                       Normalization mode = Normalization::Auto);

/// Velocity field of the first-order system, one entry per group.
std::vector<double> rhs_first_order(const ModelParams& params, const FirstOrderState& state);

/// Allocation-free form used by the integrator.
void rhs_first_order(const ModelParams& params, std::span<const double> positions,
                     std::span<const double> nu, std::span<const int> weights,
                     std::span<double> out);

struct SecondOrderRates {
  std::vector<double> velocity;
  std::vector<double> acceleration;
};

/// (v, a) with a_i = (kappa/N) sum_j psi(|x_i - x_j|) (v_j - v_i).
SecondOrderRates rhs_second_order(const ModelParams& params, const SecondOrderState& state);

void rhs_second_order(const ModelParams& params, std::span<const double> positions,
                      std::span<const double> velocities, std::span<double> acceleration);

}  // namespace csflock
