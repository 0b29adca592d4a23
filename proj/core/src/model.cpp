#include "csflock/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "csflock/errors.hpp"

namespace csflock {

namespace {

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

[[noreturn]] void coincident(std::size_t i, std::size_t k, double x) {
  throw SingularityError("particles " + std::to_string(i + 1) + " and " + std::to_string(k + 1) +
                         " coincide at x = " + std::to_string(x));
}

}  // namespace

ModelParams::ModelParams(std::size_t n_, double kappa_, Potential potential_)
    : n(n_), kappa(kappa_), potential(potential_) {
  if (n < 2) throw ConfigError("particle count must be at least 2");
  if (!std::isfinite(kappa) || kappa <= 0.0) {
    throw ConfigError("coupling strength must be finite and positive");
  }
}

bool is_zero_mean(std::span<const double> values, double rel_tol) {
  double scale = 1.0;
  for (double v : values) scale = std::max(scale, std::fabs(v));
  return std::fabs(mean_of(values)) <= rel_tol * scale;
}

NormalizedData normalize(std::span<const double> x, std::span<const double> v) {
  NormalizedData out;
  out.shift.mean_position = mean_of(x);
  out.shift.mean_velocity = mean_of(v);
  out.positions.reserve(x.size());
  out.velocities.reserve(v.size());
  for (double xi : x) out.positions.push_back(xi - out.shift.mean_position);
  for (double vi : v) out.velocities.push_back(vi - out.shift.mean_velocity);
  return out;
}

FirstOrderState FirstOrderState::from_particles(std::vector<double> x, std::vector<double> nu,
                                                double time) {
  if (x.size() != nu.size()) throw ConfigError("positions and natural velocities differ in length");
  FirstOrderState s;
  const std::size_t n = x.size();
  s.positions = std::move(x);
  s.natural_velocities = std::move(nu);
  s.weights.assign(n, 1);
  s.group_of.resize(n);
  std::iota(s.group_of.begin(), s.group_of.end(), std::size_t{0});
  s.time = time;
  return s;
}

std::vector<double> FirstOrderState::particle_positions() const {
  std::vector<double> out(group_of.size());
  for (std::size_t p = 0; p < group_of.size(); ++p) out[p] = positions[group_of[p]];
  return out;
}

std::vector<int> FirstOrderState::particle_weights() const {
  std::vector<int> out(group_of.size());
  for (std::size_t p = 0; p < group_of.size(); ++p) out[p] = weights[group_of[p]];
  return out;
}

std::size_t FirstOrderState::representative(std::size_t group) const {
  for (std::size_t p = 0; p < group_of.size(); ++p) {
    if (group_of[p] == group) return p;
  }
  throw DomainError("group " + std::to_string(group) + " has no members");
}

void FirstOrderState::validate() const {
  const std::size_t g = positions.size();
  if (natural_velocities.size() != g || weights.size() != g) {
    throw DomainError("first-order state vectors differ in length");
  }
  std::vector<int> seen(g, 0);
  for (std::size_t owner : group_of) {
    if (owner >= g) throw DomainError("particle mapped to a missing group");
    ++seen[owner];
  }
  for (std::size_t k = 0; k < g; ++k) {
    if (weights[k] <= 0 || seen[k] != weights[k]) {
      throw DomainError("group weight does not match its member count");
    }
  }
  if (!std::isfinite(time) || time < 0.0) throw DomainError("state time must be non-negative");
}

void merge_groups(FirstOrderState& s, std::size_t a, std::size_t b) {
  if (a == b || a >= s.group_count() || b >= s.group_count()) {
    throw DomainError("invalid group pair for merge");
  }
  const double wa = s.weights[a];
  const double wb = s.weights[b];
  s.positions[a] = (wa * s.positions[a] + wb * s.positions[b]) / (wa + wb);
  s.natural_velocities[a] = (wa * s.natural_velocities[a] + wb * s.natural_velocities[b]) / (wa + wb);
  s.weights[a] += s.weights[b];

  s.positions.erase(s.positions.begin() + static_cast<std::ptrdiff_t>(b));
  s.natural_velocities.erase(s.natural_velocities.begin() + static_cast<std::ptrdiff_t>(b));
  s.weights.erase(s.weights.begin() + static_cast<std::ptrdiff_t>(b));
  const std::size_t target = a > b ? a - 1 : a;
  for (auto& owner : s.group_of) {
    if (owner == b) {
      owner = target;
    } else if (owner > b) {
      --owner;
    }
  }
}

std::vector<double> natural_velocities(const ModelParams& params, std::span<const double> x0,
                                       std::span<const double> v0, Normalization mode) {
  if (x0.size() != params.n || v0.size() != params.n) {
    throw ConfigError("initial data must have exactly n = " + std::to_string(params.n) + " entries");
  }
  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> v(v0.begin(), v0.end());
  if (!is_zero_mean(x) || !is_zero_mean(v)) {
    if (mode == Normalization::Strict) {
      throw NormalizationError("initial positions and velocities must have zero mean");
    }
    auto normalized = normalize(x, v);
    x = std::move(normalized.positions);
    v = std::move(normalized.velocities);
  }

  const Potential& pot = params.potential;
  const double scale = params.kappa / static_cast<double>(params.n);
  const bool long_range = pot.regime() == Regime::LongRange;
  std::vector<double> nu(params.n);
  for (std::size_t i = 0; i < params.n; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < params.n; ++k) {
      if (k == i) continue;
      const double d = x[k] - x[i];
      if (d == 0.0) {
        if (long_range) continue;
        throw DomainError("coincident initial positions are not allowed for beta >= 1 (particles " +
                          std::to_string(i + 1) + " and " + std::to_string(k + 1) + ")");
      }
      sum += pot.interaction(d);
    }
    nu[i] = v[i] - scale * sum;
  }
  return nu;
}

void rhs_first_order(const ModelParams& params, std::span<const double> positions,
                     std::span<const double> nu, std::span<const int> weights,
                     std::span<double> out) {
  const Potential& pot = params.potential;
  const double scale = params.kappa / static_cast<double>(params.n);
  const bool long_range = pot.regime() == Regime::LongRange;
  const std::size_t g = positions.size();
  for (std::size_t i = 0; i < g; ++i) out[i] = 0.0;
  // Antisymmetric pair loop: P is odd, so the (i,k) and (k,i) terms share one
  // evaluation.
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t k = i + 1; k < g; ++k) {
      const double d = positions[k] - positions[i];
      if (d == 0.0) {
        if (long_range) continue;
        coincident(i, k, positions[i]);
      }
      const double p = pot.interaction(d);
      out[i] += weights[k] * p;
      out[k] -= weights[i] * p;
    }
  }
  for (std::size_t i = 0; i < g; ++i) out[i] = nu[i] + scale * out[i];
}

std::vector<double> rhs_first_order(const ModelParams& params, const FirstOrderState& state) {
  state.validate();
  if (state.particle_count() != params.n) {
    throw ConfigError("state particle count does not match the model");
  }
  std::vector<double> out(state.group_count());
  rhs_first_order(params, state.positions, state.natural_velocities, state.weights, out);
  return out;
}

void rhs_second_order(const ModelParams& params, std::span<const double> positions,
                      std::span<const double> velocities, std::span<double> acceleration) {
  const Potential& pot = params.potential;
  const double scale = params.kappa / static_cast<double>(params.n);
  const std::size_t n = positions.size();
  for (std::size_t i = 0; i < n; ++i) acceleration[i] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = positions[j] - positions[i];
      if (d == 0.0) coincident(i, j, positions[i]);
      const double f = pot.weight(d) * (velocities[j] - velocities[i]);
      acceleration[i] += f;
      acceleration[j] -= f;
    }
  }
  for (std::size_t i = 0; i < n; ++i) acceleration[i] *= scale;
}

SecondOrderRates rhs_second_order(const ModelParams& params, const SecondOrderState& state) {
  if (state.positions.size() != params.n || state.velocities.size() != params.n) {
    throw ConfigError("second-order state must have n positions and velocities");
  }
  SecondOrderRates out{state.velocities, std::vector<double>(params.n)};
  rhs_second_order(params, state.positions, state.velocities, out.acceleration);
  return out;
}

}  // namespace csflock
