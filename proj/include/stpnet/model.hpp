#pragma once

#include <cstddef>
#include <string>
#include <variant>

#include "stpnet/rate_function.hpp"

namespace stpnet {

/// Interaction strength alpha (potential), potential leak beta and calcium
/// decay lambda (both 1/time), and the spiking-rate function.
class ModelParams {
 public:
  /// Throws ConfigError unless alpha, beta, lambda are finite and > 0.
  ModelParams(double alpha, double beta, double lambda, RateFunction rate);

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double lambda() const { return lambda_; }
  const RateFunction& rate() const { return rate_; }

  /// kappa = alpha / (beta * lambda); the fixed points of the limit system
  /// solve x = kappa * phi(x)^2.
  double kappa() const { return alpha_ / (beta_ * lambda_); }

  /// Copy with alpha replaced; used by the extinction study.
  ModelParams with_alpha(double alpha) const;

 private:
  double alpha_;
  double beta_;
  double lambda_;
  RateFunction rate_;
};

/// Every neuron starts at (u0, r0).
struct PointMass {
  double u0 = 0.0;
  double r0 = 0.0;
};

/// Each coordinate drawn uniformly on mean * [1 - w/2, 1 + w/2], i.e. a
/// range of w times the mean centred on it.
struct UniformBand {
  double u_mean = 0.0;
  double r_mean = 0.0;
  double relative_width = 0.1;
};

/// Law of the initial calcium when the potential is held fixed.
struct CalciumLaw {
  enum class Kind { kPoint, kUniform, kExponential };
  Kind kind = Kind::kPoint;
  double p1 = 0.0;  // point value | lower bound | mean
  double p2 = 0.0;  // upper bound (uniform only)

  double mean() const;
};

/// Potential fixed at u0, calcium i.i.d. from a given law.
struct Sampled {
  double u0 = 0.0;
  CalciumLaw calcium;
};

using InitSpec = std::variant<PointMass, UniformBand, Sampled>;

/// Throws ConfigError for negative values, a band width outside [0, 1), or
/// an ill-formed calcium law.
void validate_init(const InitSpec& init);

/// Mean initial (potential, calcium) implied by an init spec.
std::pair<double, double> init_means(const InitSpec& init);

/// Whether every neuron gets the same potential (the mean-field reduction to
/// a deterministic potential applies).
bool has_deterministic_potential(const InitSpec& init);

/// Outcome of checking the model against the standing assumptions.
struct Diagnostics {
  double kappa = 0.0;
  double sup_rate = 0.0;        // K
  double lipschitz = 0.0;       // L_phi
  double derivative_at_zero = 0.0;
  double D = 1.0;
  bool kappa_at_least_D = false;
  bool rate_nondecreasing = false;
  bool rate_strictly_positive = false;
  /// Roots of x - kappa * phi(x)^2 on [0, 2 kappa K^2] (origin included).
  std::size_t root_count = 0;
  /// Roots of x - D * phi(x)^2 on [0, 2 D K^2].
  std::size_t root_count_at_D = 0;
  /// Exactly three roots for kappa.
  bool three_root_structure = false;
};

/// Never throws on assumption failures; everything is reported.
Diagnostics validate_params(const ModelParams& params, double D = 1.0);

}  // namespace stpnet
