#include "csflock/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "csflock/errors.hpp"

namespace csflock {

namespace {

constexpr double kBoundSlack = 1e-9;

double diameter(std::span<const double> v) {
  if (v.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

double min_gap(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  double out = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < s.size(); ++i) out = std::min(out, s[i + 1] - s[i]);
  return out;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void check_inputs(std::span<const double> nu, std::span<const double> x0, double kappa) {
  if (nu.size() != x0.size() || nu.size() < 2) {
    throw ConfigError("natural velocities and positions must have the same length n >= 2");
  }
  if (!std::isfinite(kappa) || kappa <= 0.0) throw ConfigError("coupling strength must be positive");
}

// Least-squares slope of y against t.
double ls_slope(std::span<const double> t, std::span<const double> y) {
  const double n = static_cast<double>(t.size());
  const double tm = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sxy += (t[i] - tm) * (y[i] - ym);
    sxx += (t[i] - tm) * (t[i] - tm);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

BoundsReport bounds_long_range(std::span<const double> nu, std::span<const double> x0, double kappa,
                               const Potential& potential) {
  if (potential.regime() != Regime::LongRange) {
    throw RegimeError("long-range bounds need beta < 1");
  }
  check_inputs(nu, x0, kappa);
  BoundsReport r;
  r.regime = Regime::LongRange;
  const std::size_t n = nu.size();

  bool monotone = true;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double gap = nu[i + 1] - nu[i];
    if (gap < 0.0) {
      monotone = false;
      continue;
    }
    if (gap == 0.0) r.c_m1_degenerate = true;
    r.pair_lower_bounds.push_back(potential.origin_potential_inverse(gap / kappa));
  }
  if (!monotone) {
    r.pair_lower_bounds.clear();
    r.notes.push_back("natural velocities are not increasing; pairwise lower bound unavailable");
  } else if (r.c_m1_degenerate) {
    r.notes.push_back("equal adjacent natural velocities; pairwise lower bound is zero");
  } else {
    double c = std::numeric_limits<double>::infinity();
    bool sorted = true;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double dx = x0[i + 1] - x0[i];
      if (!(dx > 0.0)) sorted = false;
      c = std::min({c, dx, r.pair_lower_bounds[i]});
    }
    if (sorted) {
      r.c_m1_prime = c;
    } else {
      r.notes.push_back("initial positions are not ordered like the natural velocities");
    }
  }

  const double d_nu = diameter(nu);
  r.c_M1_prime = std::max(diameter(x0), potential.origin_potential_inverse(d_nu / kappa));
  if (*r.c_M1_prime > 0.0) {
    r.decay_rate = kappa * potential.weight(*r.c_M1_prime);
  } else {
    r.notes.push_back("all particles coincide with equal natural velocities; no decay rate");
  }
  return r;
}

BoundsReport bounds_short_range(std::span<const double> nu, std::span<const double> x0,
                                double kappa, const Potential& potential) {
  if (potential.regime() == Regime::LongRange) {
    throw RegimeError("short-range bounds need beta >= 1");
  }
  check_inputs(nu, x0, kappa);
  const std::size_t n = nu.size();
  const double nd = static_cast<double>(n);

  std::vector<double> ranked;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::fabs(x0[j] - x0[i]);
      if (d == 0.0) {
        throw DomainError("coincident initial positions (particles " + std::to_string(i + 1) +
                          " and " + std::to_string(j + 1) + ")");
      }
      ranked.push_back(d);
    }
  }
  std::sort(ranked.begin(), ranked.end());

  BoundsReport r;
  r.regime = potential.regime();
  const double d_nu = diameter(nu);
  const double d_x = diameter(x0);
  r.c_L = std::min({1.0, d_x, potential.unit_potential_inverse(-nd * d_nu / (2.0 * kappa))});

  if (potential.regime() == Regime::Critical) {
    r.notes.push_back("the inductive distance chain needs a finite far-field limit (beta > 1)");
    return r;
  }
  const double phi_inf = potential.unit_potential_limit();
  double c1 = *r.c_L;
  r.c_chain.push_back(c1);
  // Ranked gaps are 1-based in the induction: D_p(0) = ranked[p - 1].
  for (std::size_t p = ranked.size() - 1; p >= 1; --p) {
    const double far = std::max(std::fabs(potential.unit_potential(c1)), phi_inf);
    const double arg = -(nd / (2.0 * kappa)) * (2.0 * kappa * far + d_nu);
    const double c2 = std::min({potential.unit_potential_inverse(arg), 1.0, ranked[p - 1], c1 / 2.0});
    r.c_chain.push_back(c2);
    c1 = c2;
  }
  r.c_m = r.c_chain.back();
  r.scaling_estimate = std::exp(-nd * nd * std::log(nd) / (potential.beta() - 1.0));
  return r;
}

EquilibriumResult solve_equilibrium(std::span<const double> nu_window, double kappa,
                                    const Potential& potential, std::size_t n_total,
                                    std::optional<std::vector<double>> initial_guess) {
  const std::size_t w = nu_window.size();
  if (w == 0 || n_total < w) throw ConfigError("window must be non-empty and no larger than n");
  if (!std::isfinite(kappa) || kappa <= 0.0) throw ConfigError("coupling strength must be positive");
  double sum = 0.0;
  double abs_sum = 0.0;
  double nu_max = 0.0;
  for (double v : nu_window) {
    sum += v;
    abs_sum += std::fabs(v);
    nu_max = std::max(nu_max, std::fabs(v));
  }
  if (std::fabs(sum) > 1e-10 * std::max(1.0, abs_sum)) {
    throw NormalizationError("natural velocities over the window must sum to zero");
  }
  if (initial_guess && initial_guess->size() != w) {
    throw ConfigError("initial guess must have one entry per window particle");
  }

  const bool long_range = potential.regime() == Regime::LongRange;
  // Groups: particles that must share a position (equal nu, beta < 1).
  std::vector<std::size_t> order(w);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (long_range) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return nu_window[a] < nu_window[b]; });
  }
  std::vector<double> g_nu;
  std::vector<double> g_w;
  std::vector<std::size_t> group_of(w);
  const double tie = 1e-12 * (1.0 + nu_max);
  for (std::size_t r = 0; r < w; ++r) {
    const std::size_t p = order[r];
    if (long_range && !g_nu.empty() && std::fabs(nu_window[p] - nu_window[order[r - 1]]) <= tie) {
      const std::size_t g = g_nu.size() - 1;
      g_nu[g] = (g_nu[g] * g_w[g] + nu_window[p]) / (g_w[g] + 1.0);
      g_w[g] += 1.0;
    } else {
      g_nu.push_back(nu_window[p]);
      g_w.push_back(1.0);
    }
    group_of[p] = g_nu.size() - 1;
  }
  const std::size_t G = g_nu.size();
  const double scale = kappa / static_cast<double>(n_total);

  auto residual = [&](const Eigen::VectorXd& y, Eigen::VectorXd& f) {
    f.resize(static_cast<Eigen::Index>(G));
    for (std::size_t g = 0; g < G; ++g) {
      double acc = 0.0;
      for (std::size_t h = 0; h < G; ++h) {
        if (h != g) acc += g_w[h] * potential.interaction(y[h] - y[g]);
      }
      f[g] = g_nu[g] + scale * acc;
    }
  };
  auto centre = [&](Eigen::VectorXd& y) {
    double m = 0.0;
    double total = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      m += g_w[g] * y[g];
      total += g_w[g];
    }
    y.array() -= m / total;
  };
  auto ordered = [&](const Eigen::VectorXd& y) {
    for (std::size_t g = 0; g + 1 < G; ++g) {
      if (!(y[g] < y[g + 1]) || !std::isfinite(y[g + 1])) return false;
    }
    return true;
  };

  Eigen::VectorXd y(static_cast<Eigen::Index>(G));
  if (initial_guess) {
    std::vector<double> acc(G, 0.0);
    for (std::size_t p = 0; p < w; ++p) acc[group_of[p]] += (*initial_guess)[p];
    for (std::size_t g = 0; g < G; ++g) y[g] = acc[g] / g_w[g];
    if (!ordered(y)) {
      throw ConfigError(long_range ? "initial guess must be ordered like the natural velocities"
                                   : "initial guess must be strictly increasing");
    }
  } else {
    double spacing = 1.0;
    if (long_range && G > 1) {
      const double span = potential.origin_potential_inverse(
          static_cast<double>(n_total) * diameter(nu_window) / (kappa * static_cast<double>(w)));
      spacing = std::max(span / static_cast<double>(G - 1), 1e-6);
    }
    for (std::size_t g = 0; g < G; ++g) {
      y[g] = (static_cast<double>(g) - 0.5 * static_cast<double>(G - 1)) * spacing;
    }
  }
  centre(y);

  EquilibriumResult out;
  Eigen::VectorXd f;
  residual(y, f);
  double res = G > 1 ? f.cwiseAbs().maxCoeff() : std::fabs(g_nu[0]);
  constexpr std::size_t kMaxIter = 200;
  constexpr int kMaxHalvings = 60;
  while (G > 1 && out.iterations < kMaxIter && res > 1e-14 * (1.0 + nu_max)) {
    ++out.iterations;
    // Rows 0..G-2 are the force balance; the last row pins the weighted mean.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(G), static_cast<Eigen::Index>(G));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(G));
    for (std::size_t g = 0; g + 1 < G; ++g) {
      double diag = 0.0;
      for (std::size_t h = 0; h < G; ++h) {
        if (h == g) continue;
        const double d = scale * g_w[h] * potential.weight(y[h] - y[g]);
        J(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(h)) = d;
        diag -= d;
      }
      J(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(g)) = diag;
      rhs[static_cast<Eigen::Index>(g)] = -f[static_cast<Eigen::Index>(g)];
    }
    for (std::size_t h = 0; h < G; ++h) J(static_cast<Eigen::Index>(G - 1), static_cast<Eigen::Index>(h)) = g_w[h];
    rhs[static_cast<Eigen::Index>(G - 1)] = 0.0;
    const Eigen::VectorXd step = J.fullPivLu().solve(rhs);
    if (!step.allFinite()) break;

    double lambda = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial;
    Eigen::VectorXd f_trial;
    for (int k = 0; k <= kMaxHalvings; ++k, lambda *= 0.5) {
      trial = y + lambda * step;
      if (!ordered(trial)) continue;
      centre(trial);
      residual(trial, f_trial);
      const double r_trial = f_trial.cwiseAbs().maxCoeff();
      if (std::isfinite(r_trial) && r_trial < res) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    y = trial;
    f = f_trial;
    res = f.cwiseAbs().maxCoeff();
  }
  out.residual = res;
  if (!(res < 1e-10)) {
    throw SolverError("no equilibrium: residual " + fmt(res) + " after " +
                      std::to_string(out.iterations) + " Newton iterations");
  }
  out.positions.resize(w);
  for (std::size_t p = 0; p < w; ++p) out.positions[p] = G > 1 ? y[group_of[p]] : 0.0;
  std::sort(out.positions.begin(), out.positions.end());
  return out;
}

double default_slope_tol(const ClusterPartition& predicted) {
  if (predicted.count <= 1 || predicted.group_velocities.size() < 2) return 1e-3;
  double gap = 0.0;
  for (std::size_t i = 0; i + 1 < predicted.group_velocities.size(); ++i) {
    gap = std::max(gap, std::fabs(predicted.group_velocities[i + 1] - predicted.group_velocities[i]));
  }
  return gap > 0.0 ? 1e-3 * gap : 1e-3;
}

EmpiricalClusters empirical_clusters(const Trajectory& traj, double window_fraction,
                                     double slope_tol) {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    throw ConfigError("window fraction must lie in (0, 1]");
  }
  if (!(slope_tol > 0.0)) throw ConfigError("slope tolerance must be positive");
  if (traj.samples.empty()) throw ConfigError("trajectory has no samples");
  const double t_first = traj.samples.front().time;
  const double t_last = traj.samples.back().time;
  const double t_start = t_last - window_fraction * (t_last - t_first);
  std::vector<const Sample*> window;
  for (const auto& s : traj.samples) {
    if (s.time >= t_start) window.push_back(&s);
  }
  if (window.size() < 3) {
    throw ConfigError("trajectory too short: " + std::to_string(window.size()) +
                      " samples in the trailing window, need at least 3");
  }

  const Sample& last = traj.samples.back();
  const std::size_t n = last.positions.size();
  EmpiricalClusters out;
  out.slope_tol = slope_tol;
  out.order.resize(n);
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t b) {
    return last.positions[a] < last.positions[b];
  });

  std::vector<double> t(window.size());
  std::vector<double> d(window.size());
  for (std::size_t s = 0; s < window.size(); ++s) t[s] = window[s]->time;
  out.partition.boundaries.push_back(0);
  for (std::size_t r = 0; r + 1 < n; ++r) {
    const std::size_t a = out.order[r];
    const std::size_t b = out.order[r + 1];
    for (std::size_t s = 0; s < window.size(); ++s) d[s] = window[s]->positions[b] - window[s]->positions[a];
    const double slope = ls_slope(t, d);
    out.adjacent_slopes.push_back(slope);
    if (!(slope < slope_tol)) out.partition.boundaries.push_back(r + 1);
  }
  out.partition.boundaries.push_back(n);
  out.partition.count = out.partition.boundaries.size() - 1;
  out.partition.min_margin = std::numeric_limits<double>::infinity();
  for (double slope : out.adjacent_slopes) {
    out.partition.min_margin = std::min(out.partition.min_margin, std::fabs(slope - slope_tol));
  }

  std::vector<std::size_t> cluster_of(n);
  for (std::size_t c = 0; c < out.partition.count; ++c) {
    double v = 0.0;
    const std::size_t lo = out.partition.boundaries[c];
    const std::size_t hi = out.partition.boundaries[c + 1];
    for (std::size_t r = lo; r < hi; ++r) {
      cluster_of[out.order[r]] = c;
      v += last.velocities[out.order[r]];
    }
    out.partition.group_velocities.push_back(v / static_cast<double>(hi - lo));
  }
  out.classes.assign(n, std::vector<PairClass>(n, PairClass::Bounded));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (cluster_of[i] != cluster_of[j]) out.classes[i][j] = PairClass::Diverging;
    }
  }
  return out;
}

FlockingDiagnostics flocking_diagnostics(const Trajectory& traj,
                                         std::optional<double> theoretical_rate) {
  FlockingDiagnostics out;
  for (const auto& s : traj.samples) {
    out.times.push_back(s.time);
    out.d_x.push_back(diameter(s.positions));
    out.d_v.push_back(diameter(s.velocities));
    out.d_1.push_back(min_gap(s.positions));
  }
  if (out.times.empty()) throw ConfigError("trajectory has no samples");

  const double t_mid = 0.5 * (out.times.front() + out.times.back());
  std::vector<double> t;
  std::vector<double> logv;
  bool any_positive = false;
  for (std::size_t k = 0; k < out.times.size(); ++k) {
    if (out.d_v[k] > 0.0) any_positive = true;
    if (out.times[k] >= t_mid) {
      t.push_back(out.times[k]);
      logv.push_back(std::log(std::max(out.d_v[k], std::numeric_limits<double>::epsilon())));
    }
  }
  if (!any_positive) {
    out.exact = true;
  } else if (t.size() >= 2) {
    out.fitted_rate = -ls_slope(t, logv);
  }

  if (theoretical_rate) {
    out.theoretical_rate = theoretical_rate;
  } else if (traj.params.potential.regime() != Regime::ShortRange) {
    const double sup = *std::max_element(out.d_x.begin(), out.d_x.end());
    if (sup > 0.0) out.theoretical_rate = traj.params.kappa * traj.params.potential.weight(sup);
  }
  return out;
}

std::string_view to_string(ClaimStatus status) noexcept {
  switch (status) {
    case ClaimStatus::Pass:
      return "pass";
    case ClaimStatus::Fail:
      return "fail";
    case ClaimStatus::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

bool VerificationLedger::all_pass() const {
  return std::all_of(claims.begin(), claims.end(),
                     [](const Claim& c) { return c.status == ClaimStatus::Pass; });
}

VerificationLedger verify_bounds(const Trajectory& traj, const BoundsReport& report) {
  VerificationLedger ledger;
  const bool long_range = report.regime == Regime::LongRange;
  const bool regime_ok = (traj.params.potential.regime() == Regime::LongRange) == long_range;

  auto check = [&](const std::string& name, const std::optional<double>& bound, bool upper,
                   auto&& series_of, const std::string& missing) {
    Claim c;
    c.name = name;
    if (!regime_ok) {
      c.detail = "bounds were computed for a different regime";
    } else if (!bound) {
      c.detail = missing;
    } else if (traj.samples.size() < 2) {
      c.detail = "trajectory too short to test the claim";
    } else {
      c.status = ClaimStatus::Pass;
      const double limit = upper ? *bound * (1.0 + kBoundSlack) : *bound * (1.0 - kBoundSlack);
      double worst = upper ? -std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::infinity();
      for (const auto& s : traj.samples) {
        const double v = series_of(s);
        worst = upper ? std::max(worst, v) : std::min(worst, v);
        const bool bad = upper ? v > limit : v < limit;
        if (bad && !c.first_violation) {
          c.status = ClaimStatus::Fail;
          c.first_violation = s.time;
        }
      }
      c.detail = std::string(upper ? "max observed " : "min observed ") + fmt(worst) + " vs bound " +
                 fmt(*bound);
      if (c.first_violation) c.detail += "; first violation at t = " + fmt(*c.first_violation);
    }
    ledger.claims.push_back(std::move(c));
  };

  auto dx = [](const Sample& s) { return diameter(s.positions); };
  auto d1 = [](const Sample& s) { return min_gap(s.positions); };
  if (long_range) {
    check("diameter_upper_bound", report.c_M1_prime, true, dx, "diameter bound unavailable");
    check("pairwise_lower_bound", report.c_m1_prime, false, d1,
          report.c_m1_degenerate ? "pairwise bound degenerate (equal natural velocities)"
                                 : "pairwise bound needs increasing natural velocities");
  } else {
    check("diameter_lower_bound", report.c_L, false, dx, "diameter bound unavailable");
    check("distance_lower_bound", report.c_m, false, d1,
          "distance chain unavailable for beta = 1");
  }
  return ledger;
}

}  // namespace csflock
