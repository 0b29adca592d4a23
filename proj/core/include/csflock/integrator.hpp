#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "csflock/model.hpp"

namespace csflock {

enum class EventKind { Crossing, Sticking };

std::string_view to_string(EventKind kind) noexcept;

/// A collision between two particles (0-based original indices, i < j).
struct Event {
  EventKind kind;
  std::size_t i;
  std::size_t j;
  double time;
};

enum class ModelOrder { First, Second };

std::string_view to_string(ModelOrder order) noexcept;

/// One output sample. All vectors have one entry per original particle; stuck
/// particles repeat their shared coordinate.
struct Sample {
  double time = 0.0;
  std::vector<double> positions;
  std::vector<double> velocities;
  std::vector<int> weights;
};

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t ordering_rejections = 0;
  std::size_t singular_stages = 0;
};

struct IntegratorConfig {
  double rtol = 1e-9;
  double atol = 1e-12;
  /// Contact distance for sticking; defaults to 1e-7 * initial diameter.
  std::optional<double> eps_stick;
  /// Natural-velocity equality tolerance; defaults to 1e-9 * (1 + max|nu|).
  std::optional<double> eps_nu;
  double min_step = 1e-14;
  double max_step = 1.0;
  double sample_dt = 0.1;
  /// Fraction of (min distance / fastest closing rate) allowed per step when
  /// beta >= 1.
  double step_cap_factor = 0.2;
  /// Locate crossing and sticking times inside a step by bisection on the
  /// interpolated pair distance. Otherwise the step end time is reported.
  bool refine_events = true;

  /// Throws ConfigError on non-positive or inconsistent values.
  void validate() const;
};

struct Trajectory {
  ModelParams params;
  ModelOrder order;
  std::vector<Sample> samples;
  std::vector<Event> events;
  IntegrationStats stats;
  /// The first-order state at the final time (merged groups included).
  std::optional<FirstOrderState> final_first_order;
  std::optional<SecondOrderState> final_second_order;
};

/// Step-size policy for the repulsive regimes: caps `proposed` at
/// cap_factor * d_min / v_close, where d_min is the smallest pair distance
/// and v_close the fastest pairwise closing rate. Pairs that are separating
/// do not constrain the step.
double step_control(std::span<const double> positions, std::span<const double> velocities,
                    double proposed, double cap_factor = 0.2);

/// Integrates the first-order reduction from `state0` up to `t_end`.
///
/// For beta < 1, crossings are logged and integrated through, and groups
/// that touch with equal natural velocities are merged into one weighted
/// group (a Sticking event). For beta >= 1, trial steps that change the
/// spatial ordering are rejected and retried with half the step.
///
/// Throws ConfigError for a bad horizon or config, StiffnessError if the
/// step falls below `min_step`.
Trajectory integrate_first_order(const ModelParams& params, FirstOrderState state0,
                                 const IntegratorConfig& config, double t_end);

/// Integrates the second-order system directly for beta >= 1. For beta < 1
/// the run goes through the first-order reduction and samples carry the
/// reconstructed velocities.
Trajectory integrate_second_order(const ModelParams& params, SecondOrderState state0,
                                  const IntegratorConfig& config, double t_end);

}  // namespace csflock
