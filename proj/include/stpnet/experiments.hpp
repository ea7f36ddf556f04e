#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stpnet/limit_analysis.hpp"
#include "stpnet/limit_ode.hpp"
#include "stpnet/model.hpp"
#include "stpnet/particle.hpp"

namespace stpnet {

/// One line of a study table, usually one system size N.
struct ReportRow {
  double n = 0.0;
  std::size_t replicas = 0;
  std::optional<double> mean;
  std::optional<double> std_error;
  std::optional<std::size_t> successes;
  std::optional<double> probability;
  std::optional<double> wilson_lo;
  std::optional<double> wilson_hi;
  std::optional<double> median;
  std::optional<double> q1;
  std::optional<double> q3;
  std::optional<double> threshold;

  bool operator==(const ReportRow&) const = default;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;

  bool operator==(const SlopeFit&) const = default;
};

/// Output of a Monte Carlo study. Everything except wall_seconds is a
/// deterministic function of (config, master_seed).
struct ExperimentReport {
  std::string name;
  nlohmann::json config;
  std::vector<ReportRow> rows;
  std::optional<SlopeFit> fit;
  /// Set when the log-log fit is impossible (a zero error, a zero spread).
  bool degenerate_fit = false;
  std::map<std::string, bool> checks;
  std::map<std::string, double> values;
  std::uint64_t master_seed = 0;
  std::optional<double> wall_seconds;

  bool operator==(const ExperimentReport&) const = default;
};

struct ReplicaSettings {
  std::uint64_t seed = 0;
  /// 0 = all hardware threads.
  unsigned threads = 0;
  ThinningStrategy strategy = ThinningStrategy::kMonotone;
};

/// Generator for replica `replica` of the batch with system size n.
Xoroshiro128Plus replica_stream(std::uint64_t seed, std::size_t n, std::size_t replica);

struct ConvergenceConfig {
  PointMass init{2.0, 1.0};
  double T = 2.0;
  std::vector<std::size_t> n_list{100, 316, 1000, 3162, 10000};
  std::size_t replicas = 200;
  std::size_t grid_points = 200;
  OdeOptions ode;
  ReplicaSettings run;
};

/// e(N) = E[ max over the grid of |U^N_t - u_t| + |mean R^N_t - r_t| ]
/// against the limit ODE, and the weighted log-log slope of e(N) with its
/// Monte Carlo 95% interval. Throws ConfigError unless n_list has >= 4
/// distinct sizes spanning >= 1.5 decades.
ExperimentReport convergence_study(const ModelParams& params, const ConvergenceConfig& config);

struct DeviationConfig {
  PointMass init{2.0, 1.0};
  double T = 1.0;
  double epsilon = 50.0;
  std::vector<std::size_t> n_list{100, 1000, 10000};
  std::size_t replicas = 500;
  std::size_t grid_points = 200;
  OdeOptions ode;
  ReplicaSettings run;
};

/// Empirical P(sup_grid |U^N - u| + |mean R^N - r| >= N^(-1/5) epsilon)
/// with Wilson intervals.
///  checks.nonincreasing: each p(N) is below its predecessor or their
///    intervals overlap;
///  checks.separated_or_nested_to_zero: for each adjacent pair the larger-N
///    interval lies strictly below the other, or has p = 0 with its upper
///    end not above the other's.
ExperimentReport deviation_study(const ModelParams& params, const DeviationConfig& config);

struct MemoryConfig {
  double epsilon = 0.5;
  std::vector<std::size_t> n_list{50, 200, 1000};
  std::size_t replicas = 100;
  double horizon = 50.0;
  ReplicaSettings run;
};

/// Exit time of (mean U, mean R) from the l1-ball of radius 2 epsilon
/// around (u_max, r_max), started there, capped at the horizon. Exits
/// between spikes are located exactly (the means decay in closed form).
/// Throws NumericalError without a stable non-trivial equilibrium.
ExperimentReport memory_study(const ModelParams& params, const MemoryConfig& config);

/// First time in [0, horizon] at which one particle run started at the
/// point mass `centre` leaves the l1-ball of radius `radius`, or horizon.
double exit_time(const ModelParams& params, std::size_t n, Vec2 centre, double radius,
                 double horizon, ThinningStrategy strategy, Xoroshiro128Plus& rng);

struct ExtinctionConfig {
  std::size_t n = 5;
  std::size_t replicas = 100;
  double horizon = 1e3;
  InitSpec init = PointMass{2.0, 1.0};
  ReplicaSettings run;
};

/// Fraction of replicas that hit the extinction cutoff before the horizon
/// and the distribution of last-spike times.
ExperimentReport extinction_study(const ModelParams& params, const ExtinctionConfig& config);

struct PhasePortraitConfig {
  std::vector<std::pair<double, double>> inits{
      {2.0, 1.0}, {1.0, 2.0}, {10.0, 0.25}, {0.75, 0.5}, {1.0, 1.5}};
  std::size_t n = 1000;
  double horizon = 20.0;
  std::size_t grid_points = 401;
  double relative_width = 0.1;
  OdeOptions ode;
  std::size_t nullcline_points = 2001;
  double nullcline_u_max = 200.0;
  ReplicaSettings run;
};

struct PortraitRun {
  double u0 = 0.0;
  double r0 = 0.0;
  Trajectory particle;
  LimitTrajectory ode;
};

struct PhasePortrait {
  std::vector<PortraitRun> runs;
  Nullclines nullclines;
  Equilibrium upper;
};

/// For each initial pair: one particle run from a uniform band around it and
/// the limit ODE from the pair itself, on a common grid.
PhasePortrait phase_portrait(const ModelParams& params, const PhasePortraitConfig& config);

/// Summary of a phase portrait: for each run the final means, the first
/// grid time within 10% of (u_max + r_max) of the upper equilibrium (l1),
/// and whether the run ends nearer the origin than the upper equilibrium.
nlohmann::json summarize_portrait(const PhasePortrait& portrait);

}  // namespace stpnet
