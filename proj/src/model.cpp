#include "stpnet/model.hpp"

#include <cmath>
#include <sstream>

#include "stpnet/error.hpp"
#include "stpnet/limit_analysis.hpp"

namespace stpnet {

namespace {

void require_positive(const char* name, double v) {
  if (!std::isfinite(v) || !(v > 0.0)) {
    std::ostringstream msg;
    msg << "model parameter " << name << " must be finite and > 0 (got " << v << ")";
    throw ConfigError(msg.str());
  }
}

void require_nonnegative(const char* name, double v) {
  if (!std::isfinite(v) || v < 0.0) {
    std::ostringstream msg;
    msg << "initial condition " << name << " must be finite and >= 0 (got " << v << ")";
    throw ConfigError(msg.str());
  }
}

}  // namespace

ModelParams::ModelParams(double alpha, double beta, double lambda, RateFunction rate)
    : alpha_(alpha), beta_(beta), lambda_(lambda), rate_(std::move(rate)) {
  require_positive("alpha", alpha_);
  require_positive("beta", beta_);
  require_positive("lambda", lambda_);
  if (!std::isfinite(kappa()) || !(kappa() > 0.0)) {
    throw ConfigError("model parameters give a non-finite kappa");
  }
}

ModelParams ModelParams::with_alpha(double alpha) const {
  return ModelParams(alpha, beta_, lambda_, rate_);
}

double CalciumLaw::mean() const {
  switch (kind) {
    case Kind::kPoint:
      return p1;
    case Kind::kUniform:
      return 0.5 * (p1 + p2);
    case Kind::kExponential:
      return p1;
  }
  return p1;
}

void validate_init(const InitSpec& init) {
  std::visit(
      [](const auto& spec) {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          require_nonnegative("u0", spec.u0);
          require_nonnegative("r0", spec.r0);
        } else if constexpr (std::is_same_v<T, UniformBand>) {
          require_nonnegative("u_mean", spec.u_mean);
          require_nonnegative("r_mean", spec.r_mean);
          if (!(spec.relative_width >= 0.0 && spec.relative_width < 1.0)) {
            throw ConfigError("uniform band relative width must lie in [0, 1)");
          }
        } else {
          require_nonnegative("u0", spec.u0);
          const auto& law = spec.calcium;
          require_nonnegative("calcium parameter", law.p1);
          if (law.kind == CalciumLaw::Kind::kUniform) {
            require_nonnegative("calcium upper bound", law.p2);
            if (law.p2 < law.p1) throw ConfigError("uniform calcium law needs lower <= upper");
          }
        }
      },
      init);
}

std::pair<double, double> init_means(const InitSpec& init) {
  return std::visit(
      [](const auto& spec) -> std::pair<double, double> {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return {spec.u0, spec.r0};
        } else if constexpr (std::is_same_v<T, UniformBand>) {
          return {spec.u_mean, spec.r_mean};
        } else {
          return {spec.u0, spec.calcium.mean()};
        }
      },
      init);
}

bool has_deterministic_potential(const InitSpec& init) {
  if (const auto* band = std::get_if<UniformBand>(&init)) {
    return band->relative_width == 0.0 || band->u_mean == 0.0;
  }
  return true;
}

Diagnostics validate_params(const ModelParams& params, double D) {
  Diagnostics d;
  const auto& phi = params.rate();
  d.kappa = params.kappa();
  d.sup_rate = phi.sup();
  d.lipschitz = phi.lipschitz();
  d.derivative_at_zero = phi.derivative(0.0);
  d.D = D;
  d.kappa_at_least_D = d.kappa >= D;
  d.rate_nondecreasing = phi.nondecreasing();
  d.rate_strictly_positive = phi.strictly_positive();
  d.root_count = fixed_point_roots(phi, d.kappa).size();
  if (std::isfinite(D) && D > 0.0) d.root_count_at_D = fixed_point_roots(phi, D).size();
  d.three_root_structure = d.root_count == 3;
  return d;
}

}  // namespace stpnet
