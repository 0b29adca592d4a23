#include "csflock/clustering.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

#include "csflock/errors.hpp"
#include "csflock/model.hpp"

namespace csflock {

namespace {

constexpr double kTieUlps = 64.0;

void require_short_range(const Potential& potential, const char* what) {
  if (potential.regime() != Regime::ShortRange) {
    throw RegimeError(std::string(what) + " needs beta > 1 (got beta = " +
                      std::to_string(potential.beta()) + ")");
  }
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> centered(std::span<const double> v) {
  const double m = mean(v);
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x -= m;
  return out;
}

void require_nonempty(std::span<const double> v) {
  if (v.empty()) throw ConfigError("velocity vector is empty");
}

void require_sorted_distinct(std::span<const double> x) {
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (!(x[i] < x[i + 1])) {
      throw DomainError("initial positions must be strictly increasing (positions " +
                        std::to_string(i + 1) + " and " + std::to_string(i + 2) + ")");
    }
  }
}

// drift(a, m, k) is the coupling term added to the condition for window
// (a, m] at intermediate index k.
using Drift = std::function<double(std::size_t m, std::size_t k)>;

ClusterPartition greedy(std::span<const double> nu, const Drift& drift) {
  const std::size_t n = nu.size();
  std::vector<double> prefix(n + 1, 0.0);
  std::vector<double> abs_prefix(n + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    prefix[j + 1] = prefix[j] + nu[j];
    abs_prefix[j + 1] = abs_prefix[j] + std::fabs(nu[j]);
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();

  ClusterPartition out;
  out.boundaries.push_back(0);
  out.min_margin = std::numeric_limits<double>::infinity();
  std::size_t a = 0;
  while (a < n) {
    std::size_t best = a + 1;
    for (std::size_t m = a + 2; m <= n; ++m) {
      const double mean_m = (prefix[m] - prefix[a]) / static_cast<double>(m - a);
      const double abs_mean = (abs_prefix[m] - abs_prefix[a]) / static_cast<double>(m - a);
      double weakest_pass = std::numeric_limits<double>::infinity();
      double strongest_fail = 0.0;
      bool tie = false;
      std::size_t tie_k = 0;
      for (std::size_t k = a + 1; k < m; ++k) {
        const double mean_k = (prefix[k] - prefix[a]) / static_cast<double>(k - a);
        const double d = drift(m, k);
        const double value = mean_k - mean_m + d;
        const double tol =
            kTieUlps * eps * (std::fabs(mean_k) + std::fabs(mean_m) + std::fabs(d) + abs_mean);
        if (std::fabs(value) <= tol) {
          tie = true;
          tie_k = k;
        } else if (value < 0.0) {
          strongest_fail = std::max(strongest_fail, -value);
        } else {
          weakest_pass = std::min(weakest_pass, value);
        }
      }
      double margin;
      if (strongest_fail > 0.0) {
        margin = strongest_fail;
      } else if (tie) {
        margin = 0.0;
        out.degenerate = true;
        out.warnings.push_back("membership test for window (" + std::to_string(a) + ", " +
                               std::to_string(m) + "] ties at k = " + std::to_string(tie_k) +
                               "; treated as a break");
      } else {
        margin = weakest_pass;
        best = m;
      }
      out.min_margin = std::min(out.min_margin, margin);
    }
    out.boundaries.push_back(best);
    a = best;
  }
  out.count = out.boundaries.size() - 1;
  return out;
}

}  // namespace

std::vector<std::size_t> ClusterPartition::sizes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < boundaries.size(); ++i) out.push_back(boundaries[i] - boundaries[i - 1]);
  return out;
}

void ClusterPartition::validate(std::size_t n) const {
  if (boundaries.size() < 2 || boundaries.front() != 0 || boundaries.back() != n) {
    throw DomainError("partition must start at 0 and end at n");
  }
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (boundaries[i] <= boundaries[i - 1]) throw DomainError("partition boundaries must increase");
  }
  if (count != boundaries.size() - 1) throw DomainError("partition count mismatch");
  if (!group_velocities.empty() && group_velocities.size() != count) {
    throw DomainError("one group velocity per cluster expected");
  }
}

LocalStats local_stats(std::span<const double> nu, std::span<const double> x, std::size_t a,
                       std::size_t b) {
  if (!(a < b) || b > nu.size() || (!x.empty() && x.size() != nu.size())) {
    throw ConfigError("invalid window for local statistics");
  }
  LocalStats s;
  s.a = a;
  s.b = b;
  s.mean_nu = mean(nu.subspan(a, b - a));
  for (std::size_t j = a; j < b; ++j) s.fluct_nu.push_back(nu[j] - s.mean_nu);
  if (!x.empty()) {
    s.mean_x = mean(x.subspan(a, b - a));
    for (std::size_t j = a; j < b; ++j) s.fluct_x.push_back(x[j] - s.mean_x);
  }
  return s;
}

ClusterPartition predict_first_order(std::span<const double> nu, double kappa,
                                     const Potential& potential) {
  require_short_range(potential, "cluster prediction");
  require_nonempty(nu);
  if (!std::isfinite(kappa) || kappa <= 0.0) throw ConfigError("coupling strength must be positive");
  const double shift = mean(nu);
  const std::vector<double> v = centered(nu);
  const double n = static_cast<double>(v.size());
  const double phi_inf = potential.unit_potential_limit();

  ClusterPartition out = greedy(v, [&](std::size_t m, std::size_t k) {
    return kappa * static_cast<double>(m - k) * phi_inf / n;
  });
  for (std::size_t i = 1; i < out.boundaries.size(); ++i) {
    const std::size_t lo = out.boundaries[i - 1];
    const std::size_t hi = out.boundaries[i];
    const double local = mean(std::span<const double>(v).subspan(lo, hi - lo));
    const double drift =
        kappa * (n - static_cast<double>(hi) - static_cast<double>(lo)) * phi_inf / n;
    out.group_velocities.push_back(local + drift + shift);
  }
  return out;
}

double kappa_critical_first_order(std::span<const double> nu, const Potential& potential) {
  require_short_range(potential, "critical coupling");
  require_nonempty(nu);
  const std::vector<double> v = centered(nu);
  const std::size_t n = v.size();
  const double phi_inf = potential.unit_potential_limit();
  double result = 0.0;
  double partial = 0.0;
  for (std::size_t l = 1; l < n; ++l) {
    partial += v[l - 1];
    const double denom = static_cast<double>(n - l) * phi_inf / static_cast<double>(n);
    result = std::max(result, -(partial / static_cast<double>(l)) / denom);
  }
  return result;
}

ClusterPartition predict_second_order(std::span<const double> x0, std::span<const double> v0,
                                      double kappa, const Potential& potential) {
  require_short_range(potential, "cluster prediction");
  require_sorted_distinct(x0);
  const ModelParams params(x0.size(), kappa, potential);
  const auto nu = natural_velocities(params, x0, v0, Normalization::Auto);
  ClusterPartition out = predict_first_order(nu, kappa, potential);
  // natural_velocities works in the zero-mean frame.
  const double shift = mean(v0);
  for (double& g : out.group_velocities) g += shift;
  return out;
}

double kappa_critical_second_order(std::span<const double> x0, std::span<const double> v0,
                                   const Potential& potential) {
  require_short_range(potential, "critical coupling");
  require_sorted_distinct(x0);
  if (x0.size() != v0.size() || x0.size() < 2) {
    throw ConfigError("positions and velocities must have the same length n >= 2");
  }
  const std::vector<double> v = centered(v0);
  const std::size_t n = v.size();
  const double nd = static_cast<double>(n);
  const double phi_inf = potential.unit_potential_limit();
  double result = 0.0;
  double partial = 0.0;
  for (std::size_t l = 1; l < n; ++l) {
    partial += v[l - 1];
    if (partial >= 0.0) continue;
    double cross = 0.0;
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t k = l; k < n; ++k) cross += potential.unit_potential(x0[k] - x0[i]);
    }
    const double denom =
        static_cast<double>((n - l) * l) * phi_inf / nd - cross / nd;
    result = std::max(result, -partial / denom);
  }
  return result;
}

ClusterPartition predict_small_kappa(std::span<const double> v0) {
  require_nonempty(v0);
  const std::vector<double> v = centered(v0);
  return greedy(v, [](std::size_t, std::size_t) { return 0.0; });
}

ClusterPartition predict_unconditional(std::span<const double> velocities) {
  require_nonempty(velocities);
  ClusterPartition out;
  out.boundaries = {0, velocities.size()};
  out.count = 1;
  out.group_velocities = {mean(velocities)};
  out.min_margin = std::numeric_limits<double>::infinity();
  return out;
}

std::vector<SweepRow> sweep_cluster_count(const SweepInput& input, std::span<const double> kappa_grid,
                                          const Potential& potential, unsigned jobs) {
  if (input.order == ModelOrder::Second && input.positions.size() != input.velocities.size()) {
    throw ConfigError("positions and velocities must have the same length");
  }
  for (double k : kappa_grid) {
    if (!std::isfinite(k) || k <= 0.0) throw ConfigError("kappa grid values must be positive");
  }
  std::vector<SweepRow> rows(kappa_grid.size());
  auto evaluate = [&](std::size_t idx) {
    const double kappa = kappa_grid[idx];
    std::size_t count;
    if (potential.regime() != Regime::ShortRange) {
      count = 1;
    } else if (input.order == ModelOrder::First) {
      count = predict_first_order(input.velocities, kappa, potential).count;
    } else {
      count = predict_second_order(input.positions, input.velocities, kappa, potential).count;
    }
    rows[idx] = {kappa, count};
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(kappa_grid.size())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < kappa_grid.size(); ++i) evaluate(i);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < kappa_grid.size(); i = next++) {
        try {
          evaluate(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

}  // namespace csflock
