#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace csflock {

using Rng = std::mt19937_64;

/// Standard normals shifted to zero mean.
std::vector<double> centered_normals(std::size_t n, Rng& rng);

/// Standard normals, sorted ascending, then shifted to zero mean.
std::vector<double> sorted_centered_normals(std::size_t n, Rng& rng);

struct RandomInstance {
  std::vector<double> positions;
  /// Initial velocities or natural velocities, depending on the caller.
  std::vector<double> velocities;
};

/// Positions from sorted_centered_normals, then velocities from
/// centered_normals, both drawn from one generator seeded with `seed`.
RandomInstance random_instance(std::size_t n, std::uint64_t seed);

}  // namespace csflock
