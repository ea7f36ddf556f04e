#include "stpnet/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "stpnet/error.hpp"
#include "stpnet/parallel.hpp"
#include "stpnet/stats.hpp"

namespace stpnet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string strategy_name(ThinningStrategy s) {
  return s == ThinningStrategy::kGlobal ? "global" : "monotone";
}

nlohmann::json ode_json(const OdeOptions& o) {
  return {{"rel_tol", o.rel_tol}, {"abs_tol", o.abs_tol}};
}

nlohmann::json run_json(const ReplicaSettings& r) {
  return {{"seed", r.seed}, {"strategy", strategy_name(r.strategy)}};
}

nlohmann::json params_json(const ModelParams& p) {
  nlohmann::json j{{"alpha", p.alpha()}, {"beta", p.beta()}, {"lambda", p.lambda()},
                   {"kappa", p.kappa()}};
  const auto& phi = p.rate();
  if (phi.kind() == RateFunction::Kind::kSigmoid) {
    j["rate"] = {{"kind", "sigmoid"}, {"a", phi.inflexion()}};
  } else {
    j["rate"] = {{"kind", "table"},
                 {"x", std::vector<double>(phi.knots_x().begin(), phi.knots_x().end())},
                 {"y", std::vector<double>(phi.knots_y().begin(), phi.knots_y().end())}};
  }
  return j;
}

void check_n_list(const std::vector<std::size_t>& n_list, bool need_spread) {
  if (n_list.empty()) throw ConfigError("study needs a nonempty list of system sizes");
  for (const auto n : n_list) {
    if (n == 0) throw ConfigError("system sizes must be >= 1");
  }
  if (!need_spread) return;
  const std::set<std::size_t> distinct(n_list.begin(), n_list.end());
  const double lo = static_cast<double>(*distinct.begin());
  const double hi = static_cast<double>(*distinct.rbegin());
  if (distinct.size() < 4 || std::log10(hi / lo) < 1.5) {
    throw ConfigError(
        "convergence study needs >= 4 distinct system sizes spanning >= 1.5 decades");
  }
}

// Largest l1 deviation of the particle means from the limit over the grid.
double sup_grid_error(const Trajectory& traj, const LimitTrajectory& ode) {
  double sup = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    sup = std::max(sup, std::abs(traj.mean_u[k] - ode.u[k]) + std::abs(traj.mean_r[k] - ode.r[k]));
  }
  return sup;
}

std::vector<double> sup_errors(const ModelParams& params, const PointMass& init, double T,
                               const std::vector<double>& grid, const LimitTrajectory& ode,
                               std::size_t n, std::size_t replicas, const ReplicaSettings& run) {
  SimulationOptions opts;
  opts.strategy = run.strategy;
  return parallel_map(replicas, run.threads, [&](std::size_t rep) {
    auto rng = replica_stream(run.seed, n, rep);
    const Trajectory traj = simulate(params, n, init, T, grid, rng, opts);
    return sup_grid_error(traj, ode);
  });
}

}  // namespace

Xoroshiro128Plus replica_stream(std::uint64_t seed, std::size_t n, std::size_t replica) {
  return Xoroshiro128Plus(stream_seed(stream_seed(seed, n), replica));
}

ExperimentReport convergence_study(const ModelParams& params, const ConvergenceConfig& config) {
  const auto start = Clock::now();
  check_n_list(config.n_list, true);
  if (config.replicas < 2) throw ConfigError("convergence study needs >= 2 replicas");
  if (!(config.T > 0.0)) throw ConfigError("convergence study needs T > 0");
  check_strategy(params, config.run.strategy);

  const auto grid = uniform_grid(config.T, config.grid_points);
  const LimitTrajectory ode =
      integrate_ode(params, config.init.u0, config.init.r0, config.T, grid, config.ode);

  ExperimentReport report;
  report.name = "convergence";
  report.master_seed = config.run.seed;
  report.config = {{"params", params_json(params)},
                   {"init", {config.init.u0, config.init.r0}},
                   {"T", config.T},
                   {"n_list", config.n_list},
                   {"replicas", config.replicas},
                   {"grid_points", config.grid_points},
                   {"ode", ode_json(config.ode)},
                   {"run", run_json(config.run)}};

  std::vector<double> xs, ys, sigmas;
  bool degenerate = false;
  for (const auto n : config.n_list) {
    const auto errs = sup_errors(params, config.init, config.T, grid, ode, n, config.replicas,
                                 config.run);
    const MeanSE m = mean_se(errs);
    ReportRow row;
    row.n = static_cast<double>(n);
    row.replicas = errs.size();
    row.mean = m.mean;
    row.std_error = m.std_error;
    row.median = quantile(errs, 0.5);
    report.rows.push_back(row);
    if (!(m.mean > 0.0) || !(m.std_error > 0.0)) {
      degenerate = true;
      continue;
    }
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(m.mean));
    // Delta method: sd(log e) ~ se(e) / e.
    sigmas.push_back(m.std_error / m.mean);
  }
  report.degenerate_fit = degenerate;
  if (!degenerate) {
    const LineFit f = weighted_line_fit(xs, ys, sigmas);
    report.fit = SlopeFit{f.slope, f.intercept, f.ci_lo, f.ci_hi};
    report.values["slope_ci_half_width"] = 0.5 * (f.ci_hi - f.ci_lo);
  }
  report.values["theoretical_slope"] = -0.5;
  report.wall_seconds = seconds_since(start);
  return report;
}

ExperimentReport deviation_study(const ModelParams& params, const DeviationConfig& config) {
  const auto start = Clock::now();
  check_n_list(config.n_list, false);
  if (!(config.epsilon > 0.0)) throw ConfigError("deviation study needs epsilon > 0");
  if (!(config.T > 0.0)) throw ConfigError("deviation study needs T > 0");
  if (config.replicas == 0) throw ConfigError("deviation study needs >= 1 replica");
  check_strategy(params, config.run.strategy);

  const auto grid = uniform_grid(config.T, config.grid_points);
  const LimitTrajectory ode =
      integrate_ode(params, config.init.u0, config.init.r0, config.T, grid, config.ode);

  ExperimentReport report;
  report.name = "deviation";
  report.master_seed = config.run.seed;
  report.config = {{"params", params_json(params)},
                   {"init", {config.init.u0, config.init.r0}},
                   {"T", config.T},
                   {"epsilon", config.epsilon},
                   {"n_list", config.n_list},
                   {"replicas", config.replicas},
                   {"grid_points", config.grid_points},
                   {"ode", ode_json(config.ode)},
                   {"run", run_json(config.run)}};

  for (const auto n : config.n_list) {
    const auto errs = sup_errors(params, config.init, config.T, grid, ode, n, config.replicas,
                                 config.run);
    const double threshold = std::pow(static_cast<double>(n), -0.2) * config.epsilon;
    const auto hits = static_cast<std::size_t>(
        std::count_if(errs.begin(), errs.end(), [&](double e) { return e >= threshold; }));
    const Interval iv = wilson_interval(hits, errs.size());
    const MeanSE m = mean_se(errs);
    ReportRow row;
    row.n = static_cast<double>(n);
    row.replicas = errs.size();
    row.mean = m.mean;
    row.std_error = m.std_error;
    row.threshold = threshold;
    row.successes = hits;
    row.probability = static_cast<double>(hits) / static_cast<double>(errs.size());
    row.wilson_lo = iv.lo;
    row.wilson_hi = iv.hi;
    report.rows.push_back(row);
  }

  bool nonincreasing = true;
  bool separated = true;
  for (std::size_t k = 1; k < report.rows.size(); ++k) {
    const auto& a = report.rows[k - 1];
    const auto& b = report.rows[k];
    const bool overlap = !(*b.wilson_hi < *a.wilson_lo || *a.wilson_hi < *b.wilson_lo);
    if (!(*b.probability <= *a.probability || overlap)) nonincreasing = false;
    const bool strictly_below = *b.wilson_hi < *a.wilson_lo;
    const bool nested_to_zero =
        *b.successes == 0 && *b.probability <= *a.probability && *b.wilson_hi <= *a.wilson_hi;
    if (!(strictly_below || nested_to_zero)) separated = false;
  }
  report.checks["nonincreasing"] = nonincreasing;
  report.checks["separated_or_nested_to_zero"] = separated;
  report.wall_seconds = seconds_since(start);
  return report;
}

double exit_time(const ModelParams& params, std::size_t n, Vec2 centre, double radius,
                 double horizon, ThinningStrategy strategy, Xoroshiro128Plus& rng) {
  ParticleState state = init_state(n, PointMass{centre[0], centre[1]}, params, rng);
  const double beta = params.beta(), lambda = params.lambda();
  auto dist = [&](double mu, double mr) {
    return std::abs(mu - centre[0]) + std::abs(mr - centre[1]);
  };
  double mu = state.mean_potential();
  double mr = state.mean_calcium();
  double t0 = 0.0;
  if (dist(mu, mr) >= radius) return 0.0;

  auto d_at = [&](double s) { return dist(mu * std::exp(-beta * s), mr * std::exp(-lambda * s)); };
  // Between spikes the distance is smooth except at kinks (local minima), so
  // its maxima on [0, span] are at span or at the stationary point s* of
  // mu e^{-beta s} - mr e^{-lambda s}.
  auto first_exit = [&](double span) -> std::optional<double> {
    std::vector<double> probes;
    if (beta != lambda && mu > 0.0 && mr > 0.0) {
      const double s_star = std::log(beta * mu / (lambda * mr)) / (beta - lambda);
      if (s_star > 0.0 && s_star < span) probes.push_back(s_star);
    }
    probes.push_back(span);
    double prev = 0.0;
    for (const double p : probes) {
      if (d_at(p) >= radius) {
        double lo = prev, hi = p;
        while (hi - lo > 1e-12 * std::max(1.0, t0)) {
          const double mid = 0.5 * (lo + hi);
          if (d_at(mid) >= radius) {
            hi = mid;
          } else {
            lo = mid;
          }
        }
        return hi;
      }
      prev = p;
    }
    return std::nullopt;
  };

  while (true) {
    const auto ev = next_event(state, params, horizon, strategy, rng);
    const double end = ev ? ev->time : horizon;
    if (const auto s = first_exit(end - t0)) return std::min(t0 + *s, horizon);
    if (!ev) return horizon;
    t0 = ev->time;
    mu = state.mean_potential();
    mr = state.mean_calcium();
    if (dist(mu, mr) >= radius) return t0;
  }
}

ExperimentReport memory_study(const ModelParams& params, const MemoryConfig& config) {
  const auto start = Clock::now();
  check_n_list(config.n_list, false);
  if (!(config.epsilon > 0.0)) throw ConfigError("memory study needs epsilon > 0");
  if (!(config.horizon > 0.0)) throw ConfigError("memory study needs a positive horizon");
  if (config.replicas == 0) throw ConfigError("memory study needs >= 1 replica");
  check_strategy(params, config.run.strategy);

  const Equilibrium top = upper_equilibrium(params);
  const Vec2 centre{top.u_star, top.r_star};
  const double radius = 2.0 * config.epsilon;

  ExperimentReport report;
  report.name = "memory";
  report.master_seed = config.run.seed;
  report.config = {{"params", params_json(params)},
                   {"epsilon", config.epsilon},
                   {"n_list", config.n_list},
                   {"replicas", config.replicas},
                   {"horizon", config.horizon},
                   {"run", run_json(config.run)}};
  report.values["u_max"] = top.u_star;
  report.values["r_max"] = top.r_star;
  report.values["radius"] = radius;

  // The limit ODE started at the equilibrium stays there.
  {
    const auto grid = uniform_grid(config.horizon, 1001);
    const LimitTrajectory ode = integrate_ode(params, centre[0], centre[1], config.horizon, grid);
    double limit_exit = config.horizon;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (std::abs(ode.u[k] - centre[0]) + std::abs(ode.r[k] - centre[1]) >= radius) {
        limit_exit = grid[k];
        break;
      }
    }
    report.values["limit_exit_time"] = limit_exit;
  }

  for (const auto n : config.n_list) {
    const auto times = parallel_map(config.replicas, config.run.threads, [&](std::size_t rep) {
      auto rng = replica_stream(config.run.seed, n, rep);
      return exit_time(params, n, centre, radius, config.horizon, config.run.strategy, rng);
    });
    const MeanSE m = mean_se(times);
    const auto capped = static_cast<std::size_t>(std::count_if(
        times.begin(), times.end(), [&](double t) { return t >= config.horizon; }));
    ReportRow row;
    row.n = static_cast<double>(n);
    row.replicas = times.size();
    row.mean = m.mean;
    row.std_error = m.std_error;
    row.median = quantile(times, 0.5);
    row.q1 = quantile(times, 0.25);
    row.q3 = quantile(times, 0.75);
    row.successes = capped;
    row.probability = static_cast<double>(capped) / static_cast<double>(times.size());
    const Interval iv = wilson_interval(capped, times.size());
    row.wilson_lo = iv.lo;
    row.wilson_hi = iv.hi;
    report.rows.push_back(row);
  }
  bool nondecreasing = true;
  bool increasing = true;
  for (std::size_t k = 1; k < report.rows.size(); ++k) {
    if (*report.rows[k].median < *report.rows[k - 1].median) nondecreasing = false;
    if (!(*report.rows[k].median > *report.rows[k - 1].median)) increasing = false;
  }
  report.checks["median_nondecreasing"] = nondecreasing;
  report.checks["median_strictly_increasing"] = increasing;
  report.wall_seconds = seconds_since(start);
  return report;
}

ExperimentReport extinction_study(const ModelParams& params, const ExtinctionConfig& config) {
  const auto start = Clock::now();
  if (config.n == 0) throw ConfigError("extinction study needs N >= 1");
  if (config.replicas == 0) throw ConfigError("extinction study needs >= 1 replica");
  if (!(config.horizon > 0.0)) throw ConfigError("extinction study needs a positive horizon");
  validate_init(config.init);
  check_strategy(params, config.run.strategy);

  SimulationOptions opts;
  opts.strategy = config.run.strategy;
  const std::vector<double> grid{config.horizon};
  const auto infos = parallel_map(config.replicas, config.run.threads, [&](std::size_t rep) {
    auto rng = replica_stream(config.run.seed, config.n, rep);
    return extinction_time(simulate(params, config.n, config.init, config.horizon, grid, rng, opts));
  });

  std::vector<double> last;
  std::size_t extinct = 0;
  for (const auto& info : infos) {
    last.push_back(info.last_spike_time);
    if (info.extinct) ++extinct;
  }
  const auto [mu, mr] = init_means(config.init);

  ExperimentReport report;
  report.name = "extinction";
  report.master_seed = config.run.seed;
  report.config = {{"params", params_json(params)}, {"n", config.n},
                   {"replicas", config.replicas},   {"horizon", config.horizon},
                   {"init_means", {mu, mr}},        {"run", run_json(config.run)}};
  const MeanSE m = mean_se(last);
  const Interval iv = wilson_interval(extinct, infos.size());
  ReportRow row;
  row.n = static_cast<double>(config.n);
  row.replicas = infos.size();
  row.mean = m.mean;
  row.std_error = m.std_error;
  row.median = quantile(last, 0.5);
  row.q1 = quantile(last, 0.25);
  row.q3 = quantile(last, 0.75);
  row.successes = extinct;
  row.probability = static_cast<double>(extinct) / static_cast<double>(infos.size());
  row.wilson_lo = iv.lo;
  row.wilson_hi = iv.hi;
  report.rows.push_back(row);
  report.values["max_last_spike_time"] = *std::max_element(last.begin(), last.end());
  report.checks["all_extinct"] = extinct == infos.size();
  report.wall_seconds = seconds_since(start);
  return report;
}

PhasePortrait phase_portrait(const ModelParams& params, const PhasePortraitConfig& config) {
  if (config.inits.empty()) throw ConfigError("phase portrait needs at least one initial pair");
  if (config.n == 0) throw ConfigError("phase portrait needs N >= 1");
  check_strategy(params, config.run.strategy);

  PhasePortrait out;
  out.upper = upper_equilibrium(params);
  const auto grid = uniform_grid(config.horizon, config.grid_points);
  SimulationOptions opts;
  opts.strategy = config.run.strategy;
  out.runs = parallel_map(config.inits.size(), config.run.threads, [&](std::size_t k) {
    const auto [u0, r0] = config.inits[k];
    PortraitRun run;
    run.u0 = u0;
    run.r0 = r0;
    auto rng = replica_stream(config.run.seed, config.n, k);
    run.particle = simulate(params, config.n, UniformBand{u0, r0, config.relative_width},
                            config.horizon, grid, rng, opts);
    run.ode = integrate_ode(params, u0, r0, config.horizon, grid, config.ode);
    return run;
  });
  const auto u_grid = uniform_grid(config.nullcline_u_max, config.nullcline_points);
  out.nullclines = nullclines(params, u_grid);
  return out;
}

nlohmann::json summarize_portrait(const PhasePortrait& portrait) {
  const double um = portrait.upper.u_star, rm = portrait.upper.r_star;
  const double tol = 0.1 * (um + rm);
  nlohmann::json runs = nlohmann::json::array();
  auto summarize = [&](const std::vector<double>& t, const std::vector<double>& u,
                       const std::vector<double>& r) {
    nlohmann::json j;
    std::optional<double> reach;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (std::abs(u[k] - um) + std::abs(r[k] - rm) < tol) {
        reach = t[k];
        break;
      }
    }
    const double uf = u.empty() ? 0.0 : u.back();
    const double rf = r.empty() ? 0.0 : r.back();
    j["final_u"] = uf;
    j["final_r"] = rf;
    j["reach_time"] = reach ? nlohmann::json(*reach) : nlohmann::json(nullptr);
    j["ends_nearer_origin"] =
        std::abs(uf) + std::abs(rf) < std::abs(uf - um) + std::abs(rf - rm);
    return j;
  };
  for (const auto& run : portrait.runs) {
    nlohmann::json j;
    j["init"] = {run.u0, run.r0};
    j["particle"] = summarize(run.particle.times, run.particle.mean_u, run.particle.mean_r);
    j["particle"]["extinct"] = run.particle.extinct;
    j["particle"]["events"] = run.particle.total_events;
    j["ode"] = summarize(run.ode.times, run.ode.u, run.ode.r);
    runs.push_back(j);
  }
  return {{"u_max", um}, {"r_max", rm}, {"reach_tolerance", tol}, {"runs", runs}};
}

}  // namespace stpnet
