#include "csflock/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include <boost/numeric/odeint/stepper/runge_kutta_dopri5.hpp>

#include "csflock/errors.hpp"

namespace csflock {

namespace {

using State = std::vector<double>;
using Dopri5 = boost::numeric::odeint::runge_kutta_dopri5<State>;

constexpr double kEventTimeTol = 1e-10;

double error_norm(const State& y0, const State& y1, const State& err, double atol, double rtol) {
  if (y0.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < y0.size(); ++i) {
    const double sc = atol + rtol * std::max(std::fabs(y0[i]), std::fabs(y1[i]));
    const double q = err[i] / sc;
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(y0.size()));
}

std::vector<std::size_t> argsort(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  return idx;
}

bool keeps_order(std::span<const double> x, const std::vector<std::size_t>& perm) {
  for (std::size_t k = 0; k + 1 < perm.size(); ++k) {
    if (!(x[perm[k]] < x[perm[k + 1]])) return false;
  }
  return true;
}

struct ClosestPair {
  std::size_t i = 0;
  std::size_t j = 0;
  double distance = std::numeric_limits<double>::infinity();
};

ClosestPair closest_pair(std::span<const double> x) {
  ClosestPair best;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double d = std::fabs(x[j] - x[i]);
      if (d < best.distance) best = {i, j, d};
    }
  }
  return best;
}

double diameter(std::span<const double> x) {
  if (x.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi - *lo;
}

void check_horizon(double t0, double t_end) {
  if (!std::isfinite(t_end)) throw ConfigError("t_end must be finite");
  if (!(t_end > t0)) throw ConfigError("t_end must be later than the initial time");
}

// First-order reduction with weighted groups and the beta < 1 event logic.
class FirstOrderSystem {
 public:
  FirstOrderSystem(const ModelParams& params, FirstOrderState state, const IntegratorConfig& cfg,
                   std::vector<Event>& events)
      : params_(params),
        state_(std::move(state)),
        long_range_(params.potential.regime() == Regime::LongRange),
        refine_(cfg.refine_events),
        atol_(cfg.atol),
        rtol_(cfg.rtol),
        events_(events) {
    double nu_max = 0.0;
    for (double nu : state_.natural_velocities) nu_max = std::max(nu_max, std::fabs(nu));
    eps_nu_ = cfg.eps_nu.value_or(1e-9 * (1.0 + nu_max));
    const double d0 = diameter(state_.positions);
    eps_stick_ = cfg.eps_stick.value_or(1e-7 * (d0 > 0.0 ? d0 : 1.0));
  }

  bool repulsive() const { return !long_range_; }
  std::size_t dim() const { return state_.group_count(); }
  State initial() const { return state_.positions; }
  FirstOrderState& state() { return state_; }

  void eval(const State& y, State& f) const {
    rhs_first_order(params_, y, state_.natural_velocities, state_.weights, f);
  }

  std::span<const double> positions(const State& y) const { return y; }
  std::span<const double> rates(const State&, const State& f) const { return f; }

  // Handles contacts already present at the initial time.
  void start(double t) {
    if (!long_range_) return;
    const std::size_t g = state_.group_count();
    for (std::size_t a = 0; a < g; ++a) {
      for (std::size_t b = a + 1; b < g; ++b) {
        if (state_.positions[a] == state_.positions[b] && !same_nu(a, b)) {
          log(EventKind::Crossing, a, b, t);
        }
      }
    }
    merge_touching(t);
  }

  // Returns true when the dimension changed (groups merged).
  bool on_accept(double t, double h, const State& y0, const State& f0, State& y1, State& f1) {
    state_.time = t + h;
    if (!long_range_) {
      state_.positions = y1;
      return false;
    }
    struct Contact {
      double time;
      std::size_t rep_a;
      std::size_t rep_b;
    };
    std::vector<Contact> contacts;
    const std::size_t g = y0.size();
    for (std::size_t a = 0; a < g; ++a) {
      for (std::size_t b = a + 1; b < g; ++b) {
        const double d0 = y0[b] - y0[a];
        const double d1 = y1[b] - y1[a];
        const bool flipped = d0 != 0.0 && (d1 == 0.0 || (d0 > 0.0) != (d1 > 0.0));
        auto dist = [&](double s) {
          const State& ys = advance(y0, f0, s * h);
          return ys[b] - ys[a];
        };
        if (same_nu(a, b)) {
          if (std::fabs(d1) < eps_stick_ || flipped) {
            const double tc = std::fabs(d0) < eps_stick_
                                  ? t
                                  : locate(t, h, [&](double s) {
                                      const double d = dist(s);
                                      return std::fabs(d) < eps_stick_ || (d0 > 0.0) != (d > 0.0);
                                    });
            contacts.push_back({tc, state_.representative(a), state_.representative(b)});
          }
        } else if (flipped) {
          const double tc = locate(t, h, [&](double s) {
            const double d = dist(s);
            return d == 0.0 || (d0 > 0.0) != (d > 0.0);
          });
          log(EventKind::Crossing, a, b, tc);
        }
      }
    }
    state_.positions = y1;
    if (contacts.empty()) return false;

    std::sort(contacts.begin(), contacts.end(),
              [](const Contact& l, const Contact& r) { return l.time < r.time; });
    for (const auto& c : contacts) {
      const std::size_t ga = state_.group_of[c.rep_a];
      const std::size_t gb = state_.group_of[c.rep_b];
      if (ga == gb) continue;
      stick(ga, gb, c.time);
    }
    merge_touching(t + h);
    y1 = state_.positions;
    f1.assign(y1.size(), 0.0);
    eval(y1, f1);
    return true;
  }

  Sample sample(double t, const State& y, const State& f) const {
    Sample s;
    s.time = t;
    const std::size_t n = state_.particle_count();
    s.positions.resize(n);
    s.velocities.resize(n);
    s.weights.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
      const std::size_t g = state_.group_of[p];
      s.positions[p] = y[g];
      s.velocities[p] = f[g];
      s.weights[p] = state_.weights[g];
    }
    return s;
  }

 private:
  bool same_nu(std::size_t a, std::size_t b) const {
    return std::fabs(state_.natural_velocities[a] - state_.natural_velocities[b]) < eps_nu_;
  }

  // Re-integrates from the start of the accepted step to offset dt. The
  // field is not smooth at contacts, so interpolating the step is too coarse
  // for the event time. The last result is cached for repeated pair checks.
  const State& advance(const State& y0, const State& f0, double dt) const {
    if (cache_valid_ && cache_dt_ == dt && cache_start_ == y0) return cache_;
    Dopri5 stepper;
    State y = y0, f = f0, y1(y0.size()), f1(y0.size()), err(y0.size());
    auto rhs = [this](const State& x, State& dxdt, double) { eval(x, dxdt); };
    double tau = 0.0;
    double hh = dt;
    while (tau < dt) {
      const bool last = hh >= dt - tau;
      const double step = last ? dt - tau : hh;
      double en;
      try {
        stepper.do_step(rhs, y, f, tau, y1, f1, step, err);
        en = error_norm(y, y1, err, atol_, rtol_);
      } catch (const SingularityError&) {
        en = std::numeric_limits<double>::infinity();
      }
      // Steps this small cannot move a pair by more than the event tolerance.
      if (!(en <= 1.0) && step > kEventTimeTol * 1e-3) {
        hh = step * (std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.25);
        continue;
      }
      if (!(en <= 1.0)) eval(y1, f1);
      y.swap(y1);
      f.swap(f1);
      tau = last ? dt : tau + step;
      hh = step * (en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0));
    }
    cache_start_ = y0;
    cache_dt_ = dt;
    cache_ = std::move(y);
    cache_valid_ = true;
    return cache_;
  }

  template <class Pred>
  double locate(double t, double h, Pred hit) const {
    if (!refine_) return t + h;
    double lo = 0.0;
    double hi = 1.0;
    while ((hi - lo) * h > kEventTimeTol) {
      const double mid = 0.5 * (lo + hi);
      if (hit(mid)) {
        hi = mid;
      } else {
        lo = mid;
      }
      if (hi - lo < 1e-16) break;
    }
    return t + hi * h;
  }

  void log(EventKind kind, std::size_t group_a, std::size_t group_b, double time) {
    std::size_t i = state_.representative(group_a);
    std::size_t j = state_.representative(group_b);
    if (i > j) std::swap(i, j);
    events_.push_back({kind, i, j, time});
  }

  void stick(std::size_t ga, std::size_t gb, double time) {
    log(EventKind::Sticking, ga, gb, time);
    merge_groups(state_, std::min(ga, gb), std::max(ga, gb));
  }

  void merge_touching(double t) {
    bool merged = true;
    while (merged) {
      merged = false;
      const std::size_t g = state_.group_count();
      for (std::size_t a = 0; a < g && !merged; ++a) {
        for (std::size_t b = a + 1; b < g && !merged; ++b) {
          if (same_nu(a, b) && std::fabs(state_.positions[b] - state_.positions[a]) < eps_stick_) {
            stick(a, b, t);
            merged = true;
          }
        }
      }
    }
  }

  const ModelParams& params_;
  FirstOrderState state_;
  bool long_range_;
  bool refine_;
  double atol_;
  double rtol_;
  mutable State cache_start_;
  mutable State cache_;
  mutable double cache_dt_ = 0.0;
  mutable bool cache_valid_ = false;
  double eps_nu_ = 0.0;
  double eps_stick_ = 0.0;
  std::vector<Event>& events_;
};

// Direct second-order system, state layout [x_1..x_N, v_1..v_N].
class SecondOrderSystem {
 public:
  SecondOrderSystem(const ModelParams& params, const SecondOrderState& s0)
      : params_(params), n_(params.n) {
    y0_ = s0.positions;
    y0_.insert(y0_.end(), s0.velocities.begin(), s0.velocities.end());
  }

  bool repulsive() const { return true; }
  std::size_t dim() const { return 2 * n_; }
  State initial() const { return y0_; }

  void eval(const State& y, State& f) const {
    std::span<const double> ys(y);
    std::span<double> fs(f);
    std::copy(y.begin() + static_cast<std::ptrdiff_t>(n_), y.end(), f.begin());
    rhs_second_order(params_, ys.first(n_), ys.subspan(n_), fs.subspan(n_));
  }

  std::span<const double> positions(const State& y) const { return std::span<const double>(y).first(n_); }
  std::span<const double> rates(const State& y, const State&) const {
    return std::span<const double>(y).subspan(n_);
  }

  void start(double) {}
  bool on_accept(double, double, const State&, const State&, State&, State&) { return false; }

  Sample sample(double t, const State& y, const State&) const {
    Sample s;
    s.time = t;
    s.positions.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n_));
    s.velocities.assign(y.begin() + static_cast<std::ptrdiff_t>(n_), y.end());
    s.weights.assign(n_, 1);
    return s;
  }

 private:
  const ModelParams& params_;
  std::size_t n_;
  State y0_;
};

template <class System>
State drive(System& sys, double t0, double t_end, const IntegratorConfig& cfg, Trajectory& traj) {
  Dopri5 stepper;
  sys.start(t0);  // may merge groups that already touch
  State y = sys.initial();

  State f(y.size());
  sys.eval(y, f);
  traj.samples.push_back(sys.sample(t0, y, f));

  const std::vector<std::size_t> order = argsort(sys.positions(y));
  const bool enforce_order = sys.repulsive();
  auto rhs = [&sys](const State& x, State& dxdt, double) { sys.eval(x, dxdt); };

  const double dt = cfg.sample_dt;
  std::size_t k = 1;
  auto next_sample = [&]() {
    const double ts = t0 + static_cast<double>(k) * dt;
    return (ts >= t_end || t_end - ts < 1e-9 * dt) ? t_end : ts;
  };
  double t_next = next_sample();

  double t = t0;
  double h = std::max(cfg.min_step, 1e-3 * std::min(cfg.max_step, dt));
  State y1, f1, err;
  while (t < t_end) {
    double h_try = std::min(h, cfg.max_step);
    if (enforce_order) h_try = step_control(sys.positions(y), sys.rates(y, f), h_try, cfg.step_cap_factor);
    if (h_try < cfg.min_step) {
      const auto cp = closest_pair(sys.positions(y));
      throw StiffnessError("step size underflow at t = " + std::to_string(t) + ": particles " +
                               std::to_string(cp.i + 1) + " and " + std::to_string(cp.j + 1) +
                               " are " + std::to_string(cp.distance) + " apart",
                           t, cp.i, cp.j, cp.distance);
    }
    const bool clipped = h_try >= t_next - t;
    const double step = clipped ? t_next - t : h_try;

    y1.assign(y.size(), 0.0);
    f1.assign(y.size(), 0.0);
    err.assign(y.size(), 0.0);
    double en;
    try {
      stepper.do_step(rhs, y, f, t, y1, f1, step, err);
      en = error_norm(y, y1, err, cfg.atol, cfg.rtol);
    } catch (const SingularityError&) {
      ++traj.stats.singular_stages;
      en = std::numeric_limits<double>::infinity();
    }
    if (!(en <= 1.0)) {
      ++traj.stats.rejected;
      h = step * (std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.25);
      continue;
    }
    if (enforce_order && !keeps_order(sys.positions(y1), order)) {
      ++traj.stats.ordering_rejections;
      h = 0.5 * step;
      continue;
    }

    ++traj.stats.accepted;
    const double t1 = clipped ? t_next : t + step;
    const bool resized = sys.on_accept(t, step, y, f, y1, f1);
    y.swap(y1);
    f.swap(f1);
    t = t1;
    if (resized) stepper = Dopri5{};

    if (clipped) {
      h = h_try;
      traj.samples.push_back(sys.sample(t, y, f));
      ++k;
      t_next = next_sample();
    } else {
      const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h = step * factor;
    }
  }
  return y;
}

}  // namespace

std::string_view to_string(EventKind kind) noexcept {
  return kind == EventKind::Crossing ? "crossing" : "sticking";
}

std::string_view to_string(ModelOrder order) noexcept {
  return order == ModelOrder::First ? "first" : "second";
}

void IntegratorConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(rtol) || !positive(atol)) throw ConfigError("rtol and atol must be positive");
  if (!positive(min_step) || !positive(max_step) || !(min_step < max_step)) {
    throw ConfigError("step bounds must satisfy 0 < min_step < max_step");
  }
  if (!positive(sample_dt)) throw ConfigError("sample_dt must be positive");
  if (!positive(step_cap_factor)) throw ConfigError("step cap factor must be positive");
  if (eps_stick && !positive(*eps_stick)) throw ConfigError("eps_stick must be positive");
  if (eps_nu && !positive(*eps_nu)) throw ConfigError("eps_nu must be positive");
}

double step_control(std::span<const double> positions, std::span<const double> velocities,
                    double proposed, double cap_factor) {
  double d_min = std::numeric_limits<double>::infinity();
  double closing = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      const double d = positions[j] - positions[i];
      d_min = std::min(d_min, std::fabs(d));
      // Positive when the pair is approaching.
      const double rate = d > 0.0 ? velocities[i] - velocities[j] : velocities[j] - velocities[i];
      closing = std::max(closing, rate);
    }
  }
  if (closing <= 0.0 || !std::isfinite(d_min)) return proposed;
  return std::min(proposed, cap_factor * d_min / closing);
}

Trajectory integrate_first_order(const ModelParams& params, FirstOrderState state0,
                                 const IntegratorConfig& config, double t_end) {
  config.validate();
  state0.validate();
  if (state0.particle_count() != params.n) {
    throw ConfigError("state particle count does not match the model");
  }
  check_horizon(state0.time, t_end);
  if (params.potential.regime() != Regime::LongRange) {
    for (std::size_t a = 0; a < state0.group_count(); ++a) {
      for (std::size_t b = a + 1; b < state0.group_count(); ++b) {
        if (state0.positions[a] == state0.positions[b]) {
          throw SingularityError("coincident initial positions are not allowed for beta >= 1");
        }
      }
    }
  }

  Trajectory traj{params, ModelOrder::First, {}, {}, {}, std::nullopt, std::nullopt};
  const double t0 = state0.time;
  FirstOrderSystem sys(params, std::move(state0), config, traj.events);
  drive(sys, t0, t_end, config, traj);
  traj.final_first_order = sys.state();
  return traj;
}

Trajectory integrate_second_order(const ModelParams& params, SecondOrderState state0,
                                  const IntegratorConfig& config, double t_end) {
  config.validate();
  if (state0.positions.size() != params.n || state0.velocities.size() != params.n) {
    throw ConfigError("second-order state must have n positions and velocities");
  }
  check_horizon(state0.time, t_end);

  if (params.potential.regime() == Regime::LongRange) {
    // nu_i = v_i - (kappa/N) sum Psi(x_k - x_i); natural_velocities() works in
    // the zero-mean frame, so the mean drift is added back.
    const double v_mean =
        std::accumulate(state0.velocities.begin(), state0.velocities.end(), 0.0) /
        static_cast<double>(params.n);
    auto nu = natural_velocities(params, state0.positions, state0.velocities);
    for (double& v : nu) v += v_mean;
    auto first =
        FirstOrderState::from_particles(state0.positions, std::move(nu), state0.time);
    Trajectory traj = integrate_first_order(params, std::move(first), config, t_end);
    traj.order = ModelOrder::Second;
    const Sample& last = traj.samples.back();
    traj.final_second_order = SecondOrderState{last.positions, last.velocities, last.time};
    return traj;
  }

  for (std::size_t i = 0; i < params.n; ++i) {
    for (std::size_t j = i + 1; j < params.n; ++j) {
      if (state0.positions[i] == state0.positions[j]) {
        throw SingularityError("second-order integration needs distinct initial positions");
      }
    }
  }

  Trajectory traj{params, ModelOrder::Second, {}, {}, {}, std::nullopt, std::nullopt};
  SecondOrderSystem sys(params, state0);
  const State y = drive(sys, state0.time, t_end, config, traj);
  SecondOrderState final;
  final.positions.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(params.n));
  final.velocities.assign(y.begin() + static_cast<std::ptrdiff_t>(params.n), y.end());
  final.time = traj.samples.back().time;
  traj.final_second_order = std::move(final);
  return traj;
}

}  // namespace csflock
