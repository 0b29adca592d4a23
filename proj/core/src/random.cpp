#include "csflock/random.hpp"

#include <algorithm>
#include <numeric>

namespace csflock {

std::vector<double> centered_normals(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(n);
  for (double& v : out) v = normal(rng);
  if (n == 0) return out;
  const double m = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(n);
  for (double& v : out) v -= m;
  return out;
}

std::vector<double> sorted_centered_normals(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(n);
  for (double& v : out) v = normal(rng);
  std::sort(out.begin(), out.end());
  if (n == 0) return out;
  const double m = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(n);
  for (double& v : out) v -= m;
  return out;
}

RandomInstance random_instance(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  RandomInstance out;
  out.positions = sorted_centered_normals(n, rng);
  out.velocities = centered_normals(n, rng);
  return out;
}

}  // namespace csflock
