// Command-line front end. Every subcommand reads an optional config file,
// applies flag overrides, fills subcommand defaults, validates, echoes the
// resolved config into the output directory and then runs.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "stpnet/config.hpp"
#include "stpnet/error.hpp"
#include "stpnet/experiments.hpp"
#include "stpnet/io.hpp"
#include "stpnet/limit_analysis.hpp"
#include "stpnet/limit_ode.hpp"
#include "stpnet/limit_process.hpp"
#include "stpnet/particle.hpp"
#include "stpnet/stats.hpp"

namespace fs = std::filesystem;
using namespace stpnet;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

const std::set<std::string> kStochastic{"simulate",  "limit-process", "convergence",
                                        "deviation", "memory",        "phase-portrait",
                                        "extinction"};

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::string init;
  double horizon = 0.0;
  std::size_t grid = 0;
  std::string strategy;
  std::string output;
  unsigned threads = 0;
  std::size_t replicas = 0;
  std::string n_list;
  double epsilon = 0.0;
  double T = 0.0;
};

struct Options {
  CLI::Option* seed = nullptr;
  CLI::Option* n = nullptr;
  CLI::Option* init = nullptr;
  CLI::Option* horizon = nullptr;
  CLI::Option* grid = nullptr;
  CLI::Option* strategy = nullptr;
  CLI::Option* output = nullptr;
  CLI::Option* threads = nullptr;
  CLI::Option* replicas = nullptr;
  CLI::Option* n_list = nullptr;
  CLI::Option* epsilon = nullptr;
  CLI::Option* T = nullptr;
};

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("--n-list expects comma-separated positive integers, got \"" + text + "\"");
    }
    out.push_back(std::stoull(item));
  }
  if (out.empty()) throw ConfigError("--n-list must not be empty");
  return out;
}

RunConfig build_config(const std::string& sub, const Flags& f, const Options& o) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (o.seed->count()) c.run.seed = f.seed;
  if (o.n->count()) c.run.n = f.n;
  if (o.init->count()) {
    const auto [u, r] = parse_pair(f.init);
    c.init.u = u;
    c.init.r = r;
  }
  if (o.horizon->count()) c.run.horizon = f.horizon;
  if (o.grid->count()) c.run.grid = f.grid;
  if (o.strategy->count()) c.run.strategy = f.strategy;
  if (o.output->count()) c.run.output = f.output;
  if (o.threads->count()) c.run.threads = f.threads;
  if (o.replicas->count()) c.study.replicas = f.replicas;
  if (o.n_list->count()) c.study.n_list = parse_size_list(f.n_list);
  if (o.epsilon->count()) c.study.epsilon = f.epsilon;
  if (o.T->count()) c.study.T = f.T;
  resolve_defaults(c, sub);
  validate_config(c);
  if (kStochastic.count(sub) && !c.run.seed) {
    throw ConfigError(sub + " needs a seed: pass --seed or set run.seed in the config");
  }
  return c;
}

PointMass point_init(const RunConfig& c, const std::string& sub) {
  const InitSpec init = make_init(c);
  if (!std::holds_alternative<PointMass>(init)) {
    throw ConfigError(sub + " compares against the limit from a point mass; set init.kind = \"point\"");
  }
  return std::get<PointMass>(init);
}

ReplicaSettings replica_settings(const RunConfig& c) {
  return {*c.run.seed, c.run.threads, make_strategy(c)};
}

void echo_config(const RunConfig& c) {
  write_text_file(fs::path(c.run.output) / "resolved_config.toml", to_toml(c));
}

void finish_report(const RunConfig& c, const ExperimentReport& report) {
  const fs::path out(c.run.output);
  write_report(report, out / "report.json", c.run.record_timing);
  write_text_file(out / "report.csv", report_rows_csv(report));
  std::cout << dump_json(report_to_json(report, c.run.record_timing));
}

int run_simulate(const RunConfig& c) {
  const ModelParams params = make_params(c);
  SimulationOptions opts;
  opts.strategy = make_strategy(c);
  opts.max_logged_events = c.run.max_events;
  opts.per_neuron_snapshots = c.run.per_neuron;
  const auto grid = uniform_grid(*c.run.horizon, *c.run.grid);
  const Trajectory traj =
      simulate(params, *c.run.n, make_init(c), *c.run.horizon, grid, *c.run.seed, opts);
  const fs::path out(c.run.output);
  write_trajectory(traj, out / "trajectory.csv");
  write_text_file(out / "events.csv", events_csv(traj.events));
  const nlohmann::json summary{{"n", traj.n},
                               {"total_events", traj.total_events},
                               {"logged_events", traj.events.size()},
                               {"extinct", traj.extinct},
                               {"extinction_time", traj.extinction_time},
                               {"last_spike_time", traj.last_spike_time},
                               {"final_mean_u", traj.mean_u.back()},
                               {"final_mean_r", traj.mean_r.back()}};
  write_text_file(out / "summary.json", dump_json(summary));
  std::cout << dump_json(summary);
  return 0;
}

int run_limit_ode(const RunConfig& c) {
  const ModelParams params = make_params(c);
  const auto [u0, r0] = init_means(make_init(c));
  const auto grid = uniform_grid(*c.run.horizon, *c.run.grid);
  const LimitTrajectory traj =
      integrate_ode(params, u0, r0, *c.run.horizon, grid, make_ode_options(c));
  const fs::path out(c.run.output);
  write_trajectory(traj, out / "limit.csv");
  std::cout << "final u " << format_double(traj.u.back()) << " r "
            << format_double(traj.r.back()) << " steps " << traj.stats.accepted << "\n";
  return 0;
}

int run_limit_process(const RunConfig& c) {
  const ModelParams params = make_params(c);
  const InitSpec init = make_init(c);
  if (!has_deterministic_potential(init)) {
    throw ConfigError("limit-process needs a deterministic initial potential (point or sampled)");
  }
  CalciumLaw law;
  double u0 = 0.0;
  if (const auto* s = std::get_if<Sampled>(&init)) {
    law = s->calcium;
    u0 = s->u0;
  } else {
    const auto& p = std::get<PointMass>(init);
    law.kind = CalciumLaw::Kind::kPoint;
    law.p1 = p.r0;
    u0 = p.u0;
  }
  const double horizon = *c.run.horizon;
  const auto grid = uniform_grid(horizon, *c.run.grid);
  const LimitTrajectory limit =
      integrate_ode(params, u0, law.mean(), horizon, grid, make_ode_options(c));
  const std::size_t replicas = *c.study.replicas;
  const fs::path out(c.run.output);
  if (replicas == 1) {
    auto rng = replica_stream(*c.run.seed, 1, 0);
    const LimitProcessPath path = simulate_limit_process(params, limit, law, horizon, rng);
    write_text_file(out / "limit_process.csv", limit_process_csv(path));
    write_text_file(out / "spikes.csv", spikes_csv(path));
    std::cout << "spikes " << path.spike_times.size() << "\n";
    return 0;
  }
  std::vector<std::vector<double>> samples(grid.size());
  for (std::size_t k = 0; k < replicas; ++k) {
    auto rng = replica_stream(*c.run.seed, 1, k);
    const LimitProcessPath path = simulate_limit_process(params, limit, law, horizon, rng);
    for (std::size_t i = 0; i < grid.size(); ++i) samples[i].push_back(path.r[i]);
  }
  std::ostringstream csv;
  csv << "t,mean_r,std_error,ode_r\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const MeanSE m = mean_se(samples[i]);
    csv << format_double(grid[i]) << ',' << format_double(m.mean) << ','
        << format_double(m.std_error) << ',' << format_double(limit.r[i]) << '\n';
  }
  write_text_file(out / "limit_process_mean.csv", csv.str());
  std::cout << "replicas " << replicas << "\n";
  return 0;
}

int run_equilibria(const RunConfig& c) {
  const ModelParams params = make_params(c);
  const nlohmann::json j = equilibria_json(params, equilibria(params, c.study.search_max));
  write_text_file(fs::path(c.run.output) / "equilibria.json", dump_json(j));
  std::cout << dump_json(j);
  return 0;
}

int run_nullclines(const RunConfig& c) {
  const ModelParams params = make_params(c);
  const auto grid = uniform_grid(c.study.u_max, c.study.nullcline_points);
  write_text_file(fs::path(c.run.output) / "nullclines.csv",
                  nullclines_csv(nullclines(params, grid)));
  return 0;
}

int run_bifurcation(const RunConfig& c) {
  const ModelParams params = make_params(c);
  std::vector<double> kappas(c.study.kappa_points);
  for (std::size_t k = 0; k < kappas.size(); ++k) {
    kappas[k] = c.study.kappa_min + (c.study.kappa_max - c.study.kappa_min) *
                                        static_cast<double>(k) /
                                        static_cast<double>(kappas.size() - 1);
  }
  kappas.back() = c.study.kappa_max;
  const BifurcationScan scan = bifurcation_scan(params.rate(), kappas);
  const fs::path out(c.run.output);
  write_text_file(out / "bifurcation.csv", bifurcation_csv(scan));
  const nlohmann::json j = bifurcation_json(scan);
  write_text_file(out / "bifurcation.json", dump_json(j));
  std::cout << "kappa_c " << (scan.kappa_c ? format_double(*scan.kappa_c) : "none") << "\n";
  return 0;
}

int run_convergence(const RunConfig& c) {
  ConvergenceConfig cfg;
  cfg.init = point_init(c, "convergence");
  cfg.T = *c.study.T;
  cfg.n_list = *c.study.n_list;
  cfg.replicas = *c.study.replicas;
  cfg.grid_points = *c.run.grid;
  cfg.ode = make_ode_options(c);
  cfg.run = replica_settings(c);
  finish_report(c, convergence_study(make_params(c), cfg));
  return 0;
}

int run_deviation(const RunConfig& c) {
  DeviationConfig cfg;
  cfg.init = point_init(c, "deviation");
  cfg.T = *c.study.T;
  cfg.epsilon = *c.study.epsilon;
  cfg.n_list = *c.study.n_list;
  cfg.replicas = *c.study.replicas;
  cfg.grid_points = *c.run.grid;
  cfg.ode = make_ode_options(c);
  cfg.run = replica_settings(c);
  finish_report(c, deviation_study(make_params(c), cfg));
  return 0;
}

int run_memory(const RunConfig& c) {
  MemoryConfig cfg;
  cfg.epsilon = *c.study.epsilon;
  cfg.n_list = *c.study.n_list;
  cfg.replicas = *c.study.replicas;
  cfg.horizon = *c.run.horizon;
  cfg.run = replica_settings(c);
  finish_report(c, memory_study(make_params(c), cfg));
  return 0;
}

int run_extinction(const RunConfig& c) {
  const ModelParams base = make_params(c);
  ExtinctionConfig cfg;
  cfg.n = *c.run.n;
  cfg.replicas = *c.study.replicas;
  cfg.horizon = *c.run.horizon;
  cfg.init = make_init(c);
  cfg.run = replica_settings(c);
  finish_report(c, extinction_study(base.with_alpha(base.alpha() * c.study.alpha_scale), cfg));
  return 0;
}

int run_phase_portrait(const RunConfig& c) {
  PhasePortraitConfig cfg;
  cfg.inits.clear();
  for (const auto& s : c.study.inits) cfg.inits.push_back(parse_pair(s));
  cfg.n = *c.run.n;
  cfg.horizon = *c.run.horizon;
  cfg.grid_points = *c.run.grid;
  cfg.relative_width = c.init.width;
  cfg.ode = make_ode_options(c);
  cfg.nullcline_points = c.study.nullcline_points;
  cfg.nullcline_u_max = c.study.u_max;
  cfg.run = replica_settings(c);
  const PhasePortrait portrait = phase_portrait(make_params(c), cfg);
  const fs::path out(c.run.output);
  for (std::size_t k = 0; k < portrait.runs.size(); ++k) {
    const auto& run = portrait.runs[k];
    write_trajectory(run.particle, out / ("particle_" + std::to_string(k) + ".csv"));
    write_trajectory(run.ode, out / ("ode_" + std::to_string(k) + ".csv"));
  }
  write_text_file(out / "nullclines.csv", nullclines_csv(portrait.nullclines));
  const nlohmann::json summary = summarize_portrait(portrait);
  write_text_file(out / "summary.json", dump_json(summary));
  std::cout << dump_json(summary);
  return 0;
}

int run_validate(const RunConfig& c) {
  const ModelParams params = make_params(c);
  const Diagnostics d = validate_params(params, c.model.D);
  std::cout << "kappa " << format_double(d.kappa) << "\n"
            << "K " << format_double(d.sup_rate) << "\n"
            << "L " << format_double(d.lipschitz) << "\n"
            << "phi'(0) " << format_double(d.derivative_at_zero) << "\n"
            << "equilibria " << d.root_count << "\n"
            << "equilibria_at_D " << d.root_count_at_D << "\n"
            << "kappa_at_least_D " << (d.kappa_at_least_D ? "yes" : "no") << "\n"
            << "rate_nondecreasing " << (d.rate_nondecreasing ? "yes" : "no") << "\n"
            << "rate_strictly_positive " << (d.rate_strictly_positive ? "yes" : "no") << "\n"
            << "three_root_structure " << (d.three_root_structure ? "yes" : "no") << "\n";
  return 0;
}

int dispatch(const std::string& sub, const RunConfig& c) {
  if (sub == "validate") return run_validate(c);
  echo_config(c);
  if (sub == "simulate") return run_simulate(c);
  if (sub == "limit-ode") return run_limit_ode(c);
  if (sub == "limit-process") return run_limit_process(c);
  if (sub == "equilibria") return run_equilibria(c);
  if (sub == "nullclines") return run_nullclines(c);
  if (sub == "bifurcation") return run_bifurcation(c);
  if (sub == "convergence") return run_convergence(c);
  if (sub == "deviation") return run_deviation(c);
  if (sub == "memory") return run_memory(c);
  if (sub == "extinction") return run_extinction(c);
  if (sub == "phase-portrait") return run_phase_portrait(c);
  throw ConfigError("unknown subcommand " + sub);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field spiking network with short-term facilitation"};
  app.require_subcommand(1);
  Flags f;
  Options o;
  const std::vector<std::pair<std::string, std::string>> subs{
      {"simulate", "exact event-driven particle run"},
      {"limit-ode", "integrate the limit ODE"},
      {"limit-process", "sample the one-particle limit process"},
      {"equilibria", "fixed points and their stability (JSON)"},
      {"nullclines", "null-cline curves (CSV)"},
      {"bifurcation", "root count against kappa and kappa_c"},
      {"convergence", "mean-field convergence rate study"},
      {"deviation", "deviation probability study"},
      {"memory", "exit time from a ball around the upper equilibrium"},
      {"phase-portrait", "particle and ODE runs from several initial pairs"},
      {"extinction", "finite-N extinction study"},
      {"validate", "model diagnostics"}};
  std::vector<CLI::App*> apps;
  for (const auto& [name, desc] : subs) {
    CLI::App* s = app.add_subcommand(name, desc);
    s->add_option("--config", f.config, "config file")->check(CLI::ExistingFile);
    o.seed = s->add_option("--seed", f.seed, "master seed (u64)");
    o.n = s->add_option("--n", f.n, "number of neurons");
    o.init = s->add_option("--init", f.init, "initial means as u,r");
    o.horizon = s->add_option("--horizon", f.horizon, "time horizon");
    o.grid = s->add_option("--grid", f.grid, "recording grid points");
    o.strategy = s->add_option("--strategy", f.strategy, "global | monotone");
    o.output = s->add_option("--output", f.output, "output directory");
    o.threads = s->add_option("--threads", f.threads, "replica threads (0 = all)");
    o.replicas = s->add_option("--replicas", f.replicas, "replicas per size");
    o.n_list = s->add_option("--n-list", f.n_list, "comma-separated system sizes");
    o.epsilon = s->add_option("--epsilon", f.epsilon, "study epsilon");
    o.T = s->add_option("--T", f.T, "study horizon T");
    apps.push_back(s);
  }

  if (argc > 1 && argv[1][0] != '-') {
    const std::string first = argv[1];
    const bool known = std::any_of(subs.begin(), subs.end(),
                                   [&](const auto& entry) { return entry.first == first; });
    if (!known) {
      std::cerr << "error: unknown subcommand '" << first << "'\n\n" << app.help();
      return kExitConfig;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  std::string sub;
  for (CLI::App* s : apps) {
    if (s->parsed()) {
      sub = s->get_name();
      // Options belong to the subcommand that was parsed.
      o.seed = s->get_option("--seed");
      o.n = s->get_option("--n");
      o.init = s->get_option("--init");
      o.horizon = s->get_option("--horizon");
      o.grid = s->get_option("--grid");
      o.strategy = s->get_option("--strategy");
      o.output = s->get_option("--output");
      o.threads = s->get_option("--threads");
      o.replicas = s->get_option("--replicas");
      o.n_list = s->get_option("--n-list");
      o.epsilon = s->get_option("--epsilon");
      o.T = s->get_option("--T");
    }
  }

  try {
    const RunConfig c = build_config(sub, f, o);
    return dispatch(sub, c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
