#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "stpnet/model.hpp"

namespace stpnet {

using Vec2 = std::array<double, 2>;

/// Vector field of the mean-field limit:
///   du/dt = -beta u + alpha phi(u) r,   dr/dt = -lambda r + phi(u).
Vec2 drift(double u, double r, const ModelParams& params);

struct OdeOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  /// 0 selects a starting step from the initial vector field.
  double initial_step = 0.0;
  std::size_t max_steps = 50'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  /// Largest normalised error estimate among accepted steps (<= 1).
  double max_error_estimate = 0.0;
  std::size_t rhs_evaluations = 0;
};

/// One accepted step with its cubic Hermite interpolant.
struct DenseSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  Vec2 y0{};
  Vec2 y1{};
  Vec2 f0{};
  Vec2 f1{};

  Vec2 at(double t) const;
};

/// Solution of the limit ODE: values on the requested grid (steps land
/// exactly on grid times) plus a dense interpolant over [0, horizon].
struct LimitTrajectory {
  double horizon = 0.0;
  std::vector<double> times;
  std::vector<double> u;
  std::vector<double> r;
  OdeStats stats;
  std::vector<DenseSegment> segments;

  /// Dense value at t in [0, horizon].
  Vec2 at(double t) const;
};

/// Embedded Runge-Kutta-Fehlberg 4(5) stepper with a PI step-size
/// controller. The fifth-order solution is propagated; the difference to
/// the fourth-order one is the local error estimate.
class LimitIntegrator {
 public:
  LimitIntegrator(const ModelParams& params, double u0, double r0, double horizon,
                  const OdeOptions& options);

  double time() const { return t_; }
  Vec2 state() const { return y_; }
  const OdeStats& stats() const { return stats_; }

  /// Takes one accepted step that does not pass t_stop and returns it.
  /// Throws NumericalError when the step size underflows.
  DenseSegment step(double t_stop);

 private:
  Vec2 rhs(const Vec2& y);
  double error_norm(const Vec2& err, const Vec2& y0, const Vec2& y1) const;

  ModelParams params_;
  OdeOptions options_;
  double horizon_;
  double t_ = 0.0;
  Vec2 y_{};
  Vec2 f_{};
  double h_ = 0.0;
  double prev_error_ = 1e-4;
  bool last_rejected_ = false;
  OdeStats stats_;
};

/// Integrates from (u0, r0) over [0, horizon]. Throws ConfigError on bad
/// tolerances/horizon/grid and NumericalError on step-size underflow
/// (below 1e-14 * horizon).
LimitTrajectory integrate_ode(const ModelParams& params, double u0, double r0, double horizon,
                              std::span<const double> grid, const OdeOptions& options = {});

}  // namespace stpnet
