#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "csflock/analysis.hpp"
#include "csflock/clustering.hpp"
#include "csflock/errors.hpp"
#include "csflock/integrator.hpp"
#include "csflock/io.hpp"
#include "csflock/model.hpp"
#include "csflock/random.hpp"

namespace csflock::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kOutDirEnv = "CSFLOCK_OUT_DIR";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& raw, const char* what) {
  const std::string s = trim(raw);
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last || s.empty()) {
    throw ConfigError(std::string("invalid number for ") + what + ": '" + raw + "'");
  }
  return v;
}

struct Instance {
  ModelOrder order = ModelOrder::First;
  std::vector<double> positions;
  /// Natural velocities (first order) or initial velocities (second order).
  std::vector<double> velocities;
  std::optional<std::uint64_t> seed;
};

ModelOrder parse_order(const std::string& s) {
  if (s == "first") return ModelOrder::First;
  if (s == "second") return ModelOrder::Second;
  throw ConfigError("order must be 'first' or 'second', got '" + s + "'");
}

double require(const std::optional<double>& v, const char* name) {
  if (!v) throw ConfigError(std::string("missing required parameter --") + name);
  return *v;
}

// Fills in whatever initial data the flags did not supply from the seeded
// generator.
Instance resolve_instance(const RunConfig& cfg, bool need_positions) {
  Instance inst;
  inst.order = parse_order(cfg.order);
  const bool first = inst.order == ModelOrder::First;
  if (first && cfg.v0 && !cfg.nu) throw ConfigError("first-order runs take natural velocities (--nu)");
  if (!first && cfg.nu && !cfg.v0) throw ConfigError("second-order runs take initial velocities (--v0)");
  const auto& vel = first ? cfg.nu : cfg.v0;

  std::optional<std::size_t> n = cfg.n;
  auto check_len = [&](const std::optional<std::vector<double>>& v, const char* name) {
    if (!v) return;
    if (n && *n != v->size()) {
      throw ConfigError(std::string(name) + " has " + std::to_string(v->size()) +
                        " entries but n = " + std::to_string(*n));
    }
    n = v->size();
  };
  check_len(cfg.x0, "x0");
  check_len(vel, first ? "nu" : "v0");
  if (!n) throw ConfigError("particle count unknown: pass --n or explicit initial data");
  if (*n < 2) throw ConfigError("particle count must be at least 2");

  const bool generate = (need_positions && !cfg.x0) || !vel;
  inst.seed = cfg.seed;
  RandomInstance random;
  if (generate) {
    if (!inst.seed) inst.seed = 0;
    random = random_instance(*n, *inst.seed);
  }
  inst.positions = cfg.x0 ? *cfg.x0 : random.positions;
  inst.velocities = vel ? *vel : random.velocities;
  return inst;
}

IntegratorConfig integrator_config(const RunConfig& cfg) {
  IntegratorConfig ic;
  ic.rtol = cfg.rtol;
  ic.atol = cfg.atol;
  ic.sample_dt = cfg.sample_dt;
  return ic;
}

json seed_json(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  return nullptr;
}

std::optional<fs::path> output_dir(const RunConfig& cfg) {
  if (cfg.out_dir) return fs::path(*cfg.out_dir);
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return fs::path(env);
  return std::nullopt;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw ConfigError("failed writing '" + path.string() + "'");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Emits a JSON artifact on stdout and, with an output directory, to a file.
void emit(const RunConfig& cfg, const std::string& file, const json& doc, std::ostream& out) {
  const std::string text = dump(doc);
  out << text;
  if (auto dir = output_dir(cfg)) write_text(*dir / file, text);
}

Trajectory simulate(const RunConfig& cfg, const Instance& inst, const ModelParams& params) {
  const IntegratorConfig ic = integrator_config(cfg);
  if (inst.order == ModelOrder::First) {
    auto state = FirstOrderState::from_particles(inst.positions, inst.velocities);
    return integrate_first_order(params, std::move(state), ic, cfg.t_end);
  }
  SecondOrderState state{inst.positions, inst.velocities, 0.0};
  return integrate_second_order(params, std::move(state), ic, cfg.t_end);
}

// Natural velocities in the frame of the supplied data.
std::vector<double> natural_of(const Instance& inst, const ModelParams& params) {
  if (inst.order == ModelOrder::First) return inst.velocities;
  return natural_velocities(params, inst.positions, inst.velocities, Normalization::Auto);
}

// Sorts positions and velocities together by position.
void sort_by_position(std::vector<double>& x, std::vector<double>& v) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> xs, vs;
  for (std::size_t i : idx) {
    xs.push_back(x[i]);
    vs.push_back(v[i]);
  }
  x = std::move(xs);
  v = std::move(vs);
}

json manifest(const RunConfig& cfg, const Instance& inst, const ModelParams& params) {
  return {{"subcommand", cfg.subcommand},
          {"seed", seed_json(inst.seed)},
          {"n", params.n},
          {"beta", params.potential.beta()},
          {"kappa", params.kappa},
          {"order", to_string(inst.order)},
          {"t_end", cfg.t_end},
          {"rtol", cfg.rtol},
          {"atol", cfg.atol},
          {"sample_dt", cfg.sample_dt}};
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const Instance inst = resolve_instance(cfg, true);
  const ModelParams params(inst.positions.size(), require(cfg.kappa, "kappa"),
                           Potential(require(cfg.beta, "beta")));
  const Trajectory traj = simulate(cfg, inst, params);

  const fs::path dir = output_dir(cfg).value_or(fs::path("."));
  std::ostringstream csv;
  write_trajectory_csv(csv, traj);
  write_text(dir / "trajectory.csv", csv.str());
  write_text(dir / "events.json", dump(events_to_json(traj.events)));

  json m = manifest(cfg, inst, params);
  m["samples"] = traj.samples.size();
  m["events"] = traj.events.size();
  m["stats"] = {{"accepted", traj.stats.accepted},
                {"rejected", traj.stats.rejected},
                {"ordering_rejections", traj.stats.ordering_rejections},
                {"singular_stages", traj.stats.singular_stages}};
  m["files"] = {"trajectory.csv", "events.json"};
  const std::string text = dump(m);
  write_text(dir / "run.json", text);
  out << text;
  return kOk;
}

int cmd_predict(const RunConfig& cfg, std::ostream& out) {
  const Instance inst = resolve_instance(cfg, false);
  const double kappa = require(cfg.kappa, "kappa");
  const Potential pot(require(cfg.beta, "beta"));
  const bool second = inst.order == ModelOrder::Second;
  if (second && inst.positions.empty()) throw ConfigError("second-order prediction needs --x0");

  json doc;
  if (pot.regime() != Regime::ShortRange) {
    doc = partition_to_json(predict_unconditional(inst.velocities), 0.0);
    doc["unconditional"] = true;
  } else if (second) {
    const auto p = predict_second_order(inst.positions, inst.velocities, kappa, pot);
    doc = partition_to_json(p, kappa_critical_second_order(inst.positions, inst.velocities, pot));
    doc["unconditional"] = false;
  } else {
    const auto p = predict_first_order(inst.velocities, kappa, pot);
    doc = partition_to_json(p, kappa_critical_first_order(inst.velocities, pot));
    doc["unconditional"] = false;
  }
  doc["seed"] = seed_json(inst.seed);
  emit(cfg, "predict.json", doc, out);
  return kOk;
}

int cmd_kappa_critical(const RunConfig& cfg, std::ostream& out) {
  const Instance inst = resolve_instance(cfg, false);
  const Potential pot(require(cfg.beta, "beta"));
  const bool second = inst.order == ModelOrder::Second;
  if (second && inst.positions.empty()) throw ConfigError("second-order critical coupling needs --x0");
  double kc = 0.0;
  const bool unconditional = pot.regime() != Regime::ShortRange;
  if (!unconditional) {
    kc = second ? kappa_critical_second_order(inst.positions, inst.velocities, pot)
                : kappa_critical_first_order(inst.velocities, pot);
  }
  const json doc = {{"kappa_c", kc},
                    {"order", to_string(inst.order)},
                    {"unconditional", unconditional},
                    {"seed", seed_json(inst.seed)}};
  emit(cfg, "kappa_critical.json", doc, out);
  return kOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  const Instance inst = resolve_instance(cfg, parse_order(cfg.order) == ModelOrder::Second);
  const Potential pot(require(cfg.beta, "beta"));
  if (cfg.kappa_grid.empty()) throw ConfigError("sweep needs --kappa-grid");
  SweepInput input{inst.order, inst.positions, inst.velocities};
  const auto rows = sweep_cluster_count(input, cfg.kappa_grid, pot, cfg.jobs);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  out << csv.str();
  if (auto dir = output_dir(cfg)) {
    write_text(*dir / "sweep.csv", csv.str());
    json m = {{"subcommand", "sweep"},
              {"seed", seed_json(inst.seed)},
              {"n", inst.velocities.size()},
              {"beta", pot.beta()},
              {"order", to_string(inst.order)},
              {"kappa_grid", cfg.kappa_grid}};
    write_text(*dir / "run.json", dump(m));
  }
  return kOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const Instance inst = resolve_instance(cfg, true);
  const Potential pot(require(cfg.beta, "beta"));
  const ModelParams params(inst.positions.size(), require(cfg.kappa, "kappa"), pot);
  const Trajectory traj = simulate(cfg, inst, params);
  const std::vector<double> nu = natural_of(inst, params);

  BoundsReport report = pot.regime() == Regime::LongRange
                            ? bounds_long_range(nu, inst.positions, params.kappa, pot)
                            : bounds_short_range(nu, inst.positions, params.kappa, pot);
  VerificationLedger ledger = verify_bounds(traj, report);
  const FlockingDiagnostics diag = flocking_diagnostics(traj, report.decay_rate);

  json extra;
  if (pot.regime() == Regime::ShortRange) {
    std::vector<double> x = inst.positions;
    std::vector<double> v = nu;
    sort_by_position(x, v);
    const ClusterPartition predicted = predict_first_order(v, params.kappa, pot);
    Claim claim;
    claim.name = "cluster_prediction";
    try {
      const double tol = cfg.slope_tol.value_or(default_slope_tol(predicted));
      const EmpiricalClusters emp = empirical_clusters(traj, cfg.window_fraction, tol);
      const bool same = emp.partition.boundaries == predicted.boundaries;
      claim.status = same ? ClaimStatus::Pass : ClaimStatus::Fail;
      claim.detail = "predicted " + std::to_string(predicted.count) + " clusters, observed " +
                     std::to_string(emp.partition.count);
      extra["empirical_boundaries"] = emp.partition.boundaries;
    } catch (const ConfigError& e) {
      claim.status = ClaimStatus::Inconclusive;
      claim.detail = e.what();
    }
    extra["predicted_boundaries"] = predicted.boundaries;
    ledger.claims.push_back(std::move(claim));
  }

  json doc = ledger_to_json(ledger, report, diag);
  doc["seed"] = seed_json(inst.seed);
  for (auto it = extra.begin(); it != extra.end(); ++it) doc[it.key()] = it.value();
  emit(cfg, "verify.json", doc, out);
  return kOk;
}

int cmd_equilibrium(const RunConfig& cfg, std::ostream& out) {
  RunConfig first = cfg;
  first.order = "first";
  if (cfg.v0 && !cfg.nu) throw ConfigError("equilibrium takes natural velocities (--nu)");
  const Instance inst = resolve_instance(first, false);
  const Potential pot(require(cfg.beta, "beta"));
  const double kappa = require(cfg.kappa, "kappa");
  const std::size_t n_total = cfg.n.value_or(inst.velocities.size());
  const EquilibriumResult eq = solve_equilibrium(inst.velocities, kappa, pot, n_total);
  json doc = equilibrium_to_json(eq);
  doc["seed"] = seed_json(inst.seed);
  emit(cfg, "equilibrium.json", doc, out);
  return kOk;
}

template <class T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item, "list entry"));
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

void apply_config_json(const std::string& text, RunConfig& cfg) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "n") {
      cfg.n = get_as<std::size_t>(v, k);
    } else if (k == "beta") {
      cfg.beta = get_as<double>(v, k);
    } else if (k == "kappa") {
      cfg.kappa = get_as<double>(v, k);
    } else if (k == "order") {
      cfg.order = get_as<std::string>(v, k);
    } else if (k == "x0") {
      cfg.x0 = get_as<std::vector<double>>(v, k);
    } else if (k == "v0") {
      cfg.v0 = get_as<std::vector<double>>(v, k);
    } else if (k == "nu") {
      cfg.nu = get_as<std::vector<double>>(v, k);
    } else if (k == "t_end") {
      cfg.t_end = get_as<double>(v, k);
    } else if (k == "rtol") {
      cfg.rtol = get_as<double>(v, k);
    } else if (k == "atol") {
      cfg.atol = get_as<double>(v, k);
    } else if (k == "sample_dt") {
      cfg.sample_dt = get_as<double>(v, k);
    } else if (k == "seed") {
      cfg.seed = get_as<std::uint64_t>(v, k);
    } else if (k == "kappa_grid") {
      cfg.kappa_grid = get_as<std::vector<double>>(v, k);
    } else if (k == "jobs") {
      cfg.jobs = get_as<unsigned>(v, k);
    } else if (k == "window_fraction") {
      cfg.window_fraction = get_as<double>(v, k);
    } else if (k == "slope_tol") {
      cfg.slope_tol = get_as<double>(v, k);
    } else {
      throw ConfigError("unknown config key '" + k + "'");
    }
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and cluster analysis for the 1D Cucker-Smale model with singular weights",
               "csflock"};
  app.require_subcommand(1);

  struct Flags {
    std::optional<std::string> config, n, beta, kappa, order, x0, v0, nu, t_end, rtol, atol,
        sample_dt, seed, kappa_grid, jobs, out, window_fraction, slope_tol;
  } f;

  const std::vector<std::pair<std::string, std::string>> subcommands = {
      {"simulate", "Integrate the dynamics; writes trajectory.csv, events.json and run.json"},
      {"predict", "Predict the asymptotic cluster partition"},
      {"kappa-critical", "Critical coupling strength for mono-cluster flocking"},
      {"sweep", "Cluster count over a grid of coupling strengths (CSV)"},
      {"verify", "Simulate and check the explicit bounds (JSON ledger)"},
      {"equilibrium", "Solve for the equilibrium configuration of a cluster"},
  };
  for (const auto& [name, help] : subcommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", f.config, "JSON config file; flags override its values")->type_name("FILE");
    sub->add_option("--n", f.n, "Particle count (for generated data)")->type_name("INT");
    sub->add_option("--beta", f.beta, "Communication exponent beta > 0")->type_name("FLOAT");
    sub->add_option("--kappa", f.kappa, "Coupling strength")->type_name("FLOAT");
    sub->add_option("--order", f.order, "Model order: first | second")->type_name("first|second");
    sub->add_option("--x0", f.x0, "Initial positions, comma separated")->type_name("LIST");
    sub->add_option("--v0", f.v0, "Initial velocities (second order), comma separated")->type_name("LIST");
    sub->add_option("--nu", f.nu, "Natural velocities (first order), comma separated")->type_name("LIST");
    sub->add_option("--t-end", f.t_end, "Final time")->type_name("FLOAT");
    sub->add_option("--rtol", f.rtol, "Relative tolerance")->type_name("FLOAT");
    sub->add_option("--atol", f.atol, "Absolute tolerance")->type_name("FLOAT");
    sub->add_option("--sample-dt", f.sample_dt, "Output sampling interval")->type_name("FLOAT");
    sub->add_option("--seed", f.seed, "Seed for generated initial data")->type_name("UINT");
    sub->add_option("--kappa-grid", f.kappa_grid, "Coupling values for sweep, comma separated")->type_name("LIST");
    sub->add_option("--jobs", f.jobs, "Worker threads for sweep")->type_name("INT");
    sub->add_option("--out", f.out, "Output directory (default: $CSFLOCK_OUT_DIR)")->type_name("DIR");
    sub->add_option("--window-fraction", f.window_fraction, "Trailing fraction used for slope fits")->type_name("FLOAT");
    sub->add_option("--slope-tol", f.slope_tol, "Distance-slope threshold for diverging pairs")->type_name("FLOAT");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    RunConfig cfg;
    for (const auto* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();
    if (f.config) {
      std::ifstream is(*f.config, std::ios::binary);
      if (!is) throw ConfigError("cannot read config file '" + *f.config + "'");
      std::stringstream buf;
      buf << is.rdbuf();
      apply_config_json(buf.str(), cfg);
    }
    auto count = [](const std::string& s, const char* what) {
      const double v = parse_number(s, what);
      if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::uint64_t>(v))) {
        throw ConfigError(std::string(what) + " must be a non-negative integer");
      }
      return static_cast<std::uint64_t>(v);
    };
    if (f.n) cfg.n = count(*f.n, "--n");
    if (f.beta) cfg.beta = parse_number(*f.beta, "--beta");
    if (f.kappa) cfg.kappa = parse_number(*f.kappa, "--kappa");
    if (f.order) cfg.order = *f.order;
    if (f.x0) cfg.x0 = parse_number_list(*f.x0);
    if (f.v0) cfg.v0 = parse_number_list(*f.v0);
    if (f.nu) cfg.nu = parse_number_list(*f.nu);
    if (f.t_end) cfg.t_end = parse_number(*f.t_end, "--t-end");
    if (f.rtol) cfg.rtol = parse_number(*f.rtol, "--rtol");
    if (f.atol) cfg.atol = parse_number(*f.atol, "--atol");
    if (f.sample_dt) cfg.sample_dt = parse_number(*f.sample_dt, "--sample-dt");
    if (f.seed) {
      const std::string s = trim(*f.seed);
      std::uint64_t seed = 0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), seed);
      if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ConfigError("--seed must be a non-negative integer");
      }
      cfg.seed = seed;
    }
    if (f.kappa_grid) cfg.kappa_grid = parse_number_list(*f.kappa_grid);
    if (f.jobs) cfg.jobs = static_cast<unsigned>(std::max<std::uint64_t>(1, count(*f.jobs, "--jobs")));
    if (f.out) cfg.out_dir = *f.out;
    if (f.window_fraction) cfg.window_fraction = parse_number(*f.window_fraction, "--window-fraction");
    if (f.slope_tol) cfg.slope_tol = parse_number(*f.slope_tol, "--slope-tol");

    if (cfg.subcommand == "simulate") return cmd_simulate(cfg, out);
    if (cfg.subcommand == "predict") return cmd_predict(cfg, out);
    if (cfg.subcommand == "kappa-critical") return cmd_kappa_critical(cfg, out);
    if (cfg.subcommand == "sweep") return cmd_sweep(cfg, out);
    if (cfg.subcommand == "verify") return cmd_verify(cfg, out);
    if (cfg.subcommand == "equilibrium") return cmd_equilibrium(cfg, out);
    throw ConfigError("unknown subcommand");
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kDomainError;
  } catch (const StiffnessError& e) {
    err << "integration failed: " << e.what() << '\n';
    return kSolverError;
  } catch (const SolverError& e) {
    err << "solver failed: " << e.what() << '\n';
    return kSolverError;
  } catch (const fs::filesystem_error& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace csflock::cli
