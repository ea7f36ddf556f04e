#include "stpnet/limit_ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stpnet/error.hpp"

namespace stpnet {

Vec2 drift(double u, double r, const ModelParams& params) {
  // Intermediate Runge-Kutta stages may undershoot zero by rounding; phi is
  // only defined on [0, inf) and phi(0) = 0.
  const double rate = params.rate()(std::max(u, 0.0));
  return {-params.beta() * u + params.alpha() * rate * r, -params.lambda() * r + rate};
}

Vec2 DenseSegment::at(double t) const {
  const double h = t1 - t0;
  if (h <= 0.0) return y0;
  const double s = (t - t0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  Vec2 out;
  for (int k = 0; k < 2; ++k) {
    out[k] = h00 * y0[k] + h10 * h * f0[k] + h01 * y1[k] + h11 * h * f1[k];
  }
  return out;
}

Vec2 LimitTrajectory::at(double t) const {
  if (segments.empty()) {
    return u.empty() ? Vec2{0.0, 0.0} : Vec2{u.front(), r.front()};
  }
  if (t <= segments.front().t0) return segments.front().y0;
  if (t >= segments.back().t1) return segments.back().y1;
  const auto it = std::upper_bound(segments.begin(), segments.end(), t,
                                   [](double v, const DenseSegment& s) { return v < s.t1; });
  return it->at(t);
}

namespace {

// Fehlberg 4(5) tableau (nodes 0, 1/4, 3/8, 12/13, 1, 1/2; the field is
// autonomous so they do not appear).
constexpr double a21 = 1.0 / 4.0;
constexpr double a31 = 3.0 / 32.0, a32 = 9.0 / 32.0;
constexpr double a41 = 1932.0 / 2197.0, a42 = -7200.0 / 2197.0, a43 = 7296.0 / 2197.0;
constexpr double a51 = 439.0 / 216.0, a52 = -8.0, a53 = 3680.0 / 513.0, a54 = -845.0 / 4104.0;
constexpr double a61 = -8.0 / 27.0, a62 = 2.0, a63 = -3544.0 / 2565.0, a64 = 1859.0 / 4104.0,
                 a65 = -11.0 / 40.0;
constexpr double b1 = 16.0 / 135.0, b3 = 6656.0 / 12825.0, b4 = 28561.0 / 56430.0,
                 b5 = -9.0 / 50.0, b6 = 2.0 / 55.0;
// (fifth order) - (fourth order) weights.
constexpr double e1 = b1 - 25.0 / 216.0, e3 = b3 - 1408.0 / 2565.0, e4 = b4 - 2197.0 / 4104.0,
                 e5 = b5 + 1.0 / 5.0, e6 = b6;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;
constexpr double kAlphaPI = 0.7 / 5.0;
constexpr double kBetaPI = 0.4 / 5.0;

}  // namespace

LimitIntegrator::LimitIntegrator(const ModelParams& params, double u0, double r0,
                                 double horizon, const OdeOptions& options)
    : params_(params), options_(options), horizon_(horizon), y_{u0, r0} {
  if (!(options.rel_tol > 0.0 && options.rel_tol <= 1e-2) ||
      !(options.abs_tol > 0.0 && options.abs_tol <= 1e-2)) {
    throw ConfigError("ODE tolerances must lie in (0, 1e-2]");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("ODE horizon must be finite and > 0");
  }
  if (!(u0 >= 0.0) || !(r0 >= 0.0) || !std::isfinite(u0) || !std::isfinite(r0)) {
    throw ConfigError("ODE initial values must be finite and >= 0");
  }
  f_ = rhs(y_);
  if (options.initial_step > 0.0) {
    h_ = options.initial_step;
  } else {
    // Step whose explicit-Euler increment is about 1% of the state scale.
    double d0 = 0.0, d1 = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double sc = options.abs_tol + options.rel_tol * std::abs(y_[k]);
      d0 = std::max(d0, std::abs(y_[k]) / sc);
      d1 = std::max(d1, std::abs(f_[k]) / sc);
    }
    h_ = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h_ = std::min(h_, 0.1 * horizon);
  }
}

Vec2 LimitIntegrator::rhs(const Vec2& y) {
  ++stats_.rhs_evaluations;
  return drift(y[0], y[1], params_);
}

double LimitIntegrator::error_norm(const Vec2& err, const Vec2& y0, const Vec2& y1) const {
  double sum = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double sc =
        options_.abs_tol + options_.rel_tol * std::max(std::abs(y0[k]), std::abs(y1[k]));
    const double q = err[k] / sc;
    sum += q * q;
  }
  return std::sqrt(sum / 2.0);
}

DenseSegment LimitIntegrator::step(double t_stop) {
  if (t_stop <= t_) throw std::logic_error("LimitIntegrator::step: nothing to integrate");
  const double h_min = 1e-14 * horizon_;
  while (true) {
    if (stats_.accepted + stats_.rejected >= options_.max_steps) {
      throw NumericalError("ODE integration exceeded the maximum number of steps");
    }
    bool lands = false;
    double h = h_;
    if (t_ + h >= t_stop || t_ + 1.01 * h >= t_stop) {
      h = t_stop - t_;
      lands = true;
    }
    if (!(h >= h_min) && !lands) {
      std::ostringstream msg;
      msg << "ODE step size underflow at t = " << t_ << " (h = " << h << ")";
      throw NumericalError(msg.str());
    }

    const Vec2& y = y_;
    const Vec2& k1 = f_;
    Vec2 tmp;
    for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    const Vec2 k2 = rhs(tmp);
    for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    const Vec2 k3 = rhs(tmp);
    for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    const Vec2 k4 = rhs(tmp);
    for (int i = 0; i < 2; ++i) {
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    }
    const Vec2 k5 = rhs(tmp);
    for (int i = 0; i < 2; ++i) {
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    }
    const Vec2 k6 = rhs(tmp);

    Vec2 y_new;
    Vec2 err;
    for (int i = 0; i < 2; ++i) {
      y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i]);
    }
    const double en = error_norm(err, y, y_new);

    if (en <= 1.0 && std::isfinite(en)) {
      // PI controller (Gustafsson); no growth right after a rejection.
      const double e = std::max(en, 1e-10);
      double factor = kSafety * std::pow(e, -kAlphaPI) * std::pow(prev_error_, kBetaPI);
      factor = std::clamp(factor, kMinFactor, kMaxFactor);
      if (last_rejected_) factor = std::min(factor, 1.0);
      prev_error_ = e;
      last_rejected_ = false;

      DenseSegment seg;
      seg.t0 = t_;
      seg.t1 = lands ? t_stop : t_ + h;
      seg.y0 = y_;
      seg.y1 = y_new;
      seg.f0 = f_;
      // The vector field points inward on both axes; clip rounding below zero.
      for (int i = 0; i < 2; ++i) seg.y1[i] = std::max(seg.y1[i], 0.0);
      seg.f1 = rhs(seg.y1);

      t_ = seg.t1;
      y_ = seg.y1;
      f_ = seg.f1;
      ++stats_.accepted;
      stats_.max_error_estimate = std::max(stats_.max_error_estimate, en);
      // A step shortened to land on t_stop says little about the next size.
      if (!(lands && h < h_)) h_ = h * factor;
      return seg;
    }
    ++stats_.rejected;
    last_rejected_ = true;
    const double e = std::isfinite(en) ? en : 1e10;
    h_ = h * std::max(kMinFactor, kSafety * std::pow(e, -0.2));
    if (!(h_ >= h_min)) {
      std::ostringstream msg;
      msg << "ODE step size underflow at t = " << t_ << " (h = " << h_ << ")";
      throw NumericalError(msg.str());
    }
  }
}

LimitTrajectory integrate_ode(const ModelParams& params, double u0, double r0, double horizon,
                              std::span<const double> grid, const OdeOptions& options) {
  if (!std::is_sorted(grid.begin(), grid.end()) ||
      (!grid.empty() && (grid.front() < 0.0 || grid.back() > horizon))) {
    throw ConfigError("ODE output grid must be sorted and lie within [0, horizon]");
  }
  LimitIntegrator integ(params, u0, r0, horizon, options);
  LimitTrajectory traj;
  traj.horizon = horizon;
  traj.times.assign(grid.begin(), grid.end());
  traj.u.reserve(grid.size());
  traj.r.reserve(grid.size());

  auto record = [&]() {
    const Vec2 y = integ.state();
    traj.u.push_back(y[0]);
    traj.r.push_back(y[1]);
  };

  for (const double g : grid) {
    while (integ.time() < g) traj.segments.push_back(integ.step(g));
    record();
  }
  while (integ.time() < horizon) traj.segments.push_back(integ.step(horizon));
  traj.stats = integ.stats();
  return traj;
}

}  // namespace stpnet
