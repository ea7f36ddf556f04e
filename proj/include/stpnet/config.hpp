#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stpnet/model.hpp"
#include "stpnet/limit_ode.hpp"
#include "stpnet/particle.hpp"

namespace stpnet {

// Schema of the run configuration file. The file is a TOML subset:
// [section] headers, `key = value` lines, double-quoted strings, numbers,
// booleans, single-line arrays and `#` comments. Unknown sections and keys
// are rejected.
//
//   [model]  alpha beta lambda D
//   [rate]   kind ("sigmoid" | "table")  a  x  y
//   [init]   kind ("point" | "band" | "sampled")  u  r  width
//            calcium_law ("point" | "uniform" | "exponential")
//            calcium_p1  calcium_p2
//   [run]    n  horizon  grid  strategy ("global" | "monotone")  seed
//            output  threads  max_events  per_neuron  record_timing
//   [ode]    rel_tol  abs_tol
//   [study]  n_list  replicas  epsilon  T  alpha_scale  inits
//            kappa_min  kappa_max  kappa_points  search_max
//            u_max  nullcline_points
//
// Keys left optional here depend on the subcommand; resolve_defaults fills
// them before anything runs.

struct ModelConfig {
  double alpha = 107.78;
  double beta = 50.0;
  double lambda = 2.16;
  double D = 1.0;
  bool operator==(const ModelConfig&) const = default;
};

struct RateConfig {
  std::string kind = "sigmoid";
  double a = 3.0;
  std::vector<double> x;
  std::vector<double> y;
  bool operator==(const RateConfig&) const = default;
};

struct InitConfig {
  std::string kind = "point";
  double u = 2.0;
  double r = 1.0;
  double width = 0.1;
  std::string calcium_law = "point";
  double calcium_p1 = 1.0;
  double calcium_p2 = 0.0;
  bool operator==(const InitConfig&) const = default;
};

struct RunSection {
  std::optional<std::size_t> n;
  std::optional<double> horizon;
  std::optional<std::size_t> grid;
  std::string strategy = "monotone";
  std::optional<std::uint64_t> seed;
  std::string output = "out";
  unsigned threads = 0;
  std::size_t max_events = 1000000;
  bool per_neuron = false;
  bool record_timing = false;
  bool operator==(const RunSection&) const = default;
};

struct OdeConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  bool operator==(const OdeConfig&) const = default;
};

struct StudyConfig {
  std::optional<std::vector<std::size_t>> n_list;
  std::optional<std::size_t> replicas;
  std::optional<double> epsilon;
  std::optional<double> T;
  double alpha_scale = 0.1;
  std::vector<std::string> inits{"2,1", "1,2", "10,0.25", "0.75,0.5", "1,1.5"};
  double kappa_min = 0.01;
  double kappa_max = 0.2;
  std::size_t kappa_points = 400;
  double search_max = 0.0;
  double u_max = 200.0;
  std::size_t nullcline_points = 2001;
  bool operator==(const StudyConfig&) const = default;
};

struct RunConfig {
  ModelConfig model;
  RateConfig rate;
  InitConfig init;
  RunSection run;
  OdeConfig ode;
  StudyConfig study;
  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError with a line number on any syntax or schema error.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical text form; parse_config(to_toml(c)) == c.
std::string to_toml(const RunConfig& config);

/// Fills the subcommand-dependent optionals with that subcommand's defaults.
void resolve_defaults(RunConfig& config, const std::string& subcommand);

/// Semantic checks beyond the syntax (positivity, known enums, sizes).
void validate_config(const RunConfig& config);

ModelParams make_params(const RunConfig& config);
InitSpec make_init(const RunConfig& config);
ThinningStrategy make_strategy(const RunConfig& config);
OdeOptions make_ode_options(const RunConfig& config);
/// "u,r" -> (u, r); throws ConfigError.
std::pair<double, double> parse_pair(const std::string& text);

}  // namespace stpnet
