#include "stpnet/rate_function.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stpnet/error.hpp"

namespace stpnet {

RateFunction RateFunction::sigmoid(double a) {
  if (!std::isfinite(a) || !(a > 1.0)) {
    std::ostringstream msg;
    msg << "sigmoid rate: inflexion point must satisfy a > 1 (got a = " << a << ")";
    throw ConstraintViolation(msg.str());
  }
  if (!(4.0 * a < 1.0 + std::exp(a))) {
    std::ostringstream msg;
    msg << "sigmoid rate: constraint 4a < 1 + e^a violated (4a = " << 4.0 * a
        << ", 1 + e^a = " << 1.0 + std::exp(a) << ")";
    throw ConstraintViolation(msg.str());
  }
  RateFunction f;
  f.kind_ = Kind::kSigmoid;
  f.a_ = a;
  // Same expression as operator()(0) so that phi(0) cancels to exactly 0.
  f.offset_ = 4.0 * a / (1.0 + std::exp(-(0.0 - a)));
  f.sup_ = 4.0 * a - f.offset_;
  f.lipschitz_ = a;
  f.nondecreasing_ = true;
  f.strictly_positive_ = true;
  return f;
}

RateFunction RateFunction::table(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw ConfigError("table rate: need at least two knots and equal-length x/y lists");
  }
  if (xs.front() != 0.0 || ys.front() != 0.0) {
    throw ConstraintViolation("table rate: first knot must be (0, 0) so that phi(0) = 0");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw ConfigError("table rate: knots must be finite");
    }
    if (ys[i] < 0.0) {
      throw ConstraintViolation("table rate: values must be nonnegative");
    }
    if (i > 0 && !(xs[i] > xs[i - 1])) {
      throw ConstraintViolation(
          "table rate: knot abscissae must be strictly increasing (a repeated x would "
          "make phi discontinuous)");
    }
  }
  RateFunction f;
  f.kind_ = Kind::kTable;
  f.sup_ = *std::max_element(ys.begin(), ys.end());
  f.lipschitz_ = 0.0;
  f.nondecreasing_ = true;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double slope = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
    f.lipschitz_ = std::max(f.lipschitz_, std::abs(slope));
    if (ys[i] < ys[i - 1]) f.nondecreasing_ = false;
  }
  // Linear interpolation is positive on (0, x_1) iff y_1 > 0, and positive
  // on the remaining pieces iff no later knot is zero.
  f.strictly_positive_ =
      std::all_of(ys.begin() + 1, ys.end(), [](double y) { return y > 0.0; });
  f.xs_ = std::move(xs);
  f.ys_ = std::move(ys);
  return f;
}

double RateFunction::operator()(double x) const {
  if (x < 0.0 || std::isnan(x)) {
    throw ConfigError("rate function evaluated at a negative potential");
  }
  if (kind_ == Kind::kSigmoid) {
    return 4.0 * a_ / (1.0 + std::exp(-(x - a_))) - offset_;
  }
  return eval_table(x);
}

double RateFunction::eval_table(double x) const {
  if (x >= xs_.back()) return ys_.back();
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - xs_.begin());
  const std::size_t lo = hi - 1;
  const double w = (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
  return ys_[lo] + w * (ys_[hi] - ys_[lo]);
}

double RateFunction::derivative(double x) const {
  if (x < 0.0) throw ConfigError("rate derivative evaluated at a negative potential");
  if (kind_ == Kind::kSigmoid) {
    const double e = std::exp(-(x - a_));
    if (!std::isfinite(e)) return 0.0;
    const double d = 1.0 + e;
    return 4.0 * a_ * e / (d * d);
  }
  const double h = 1e-6 * std::max(1.0, x);
  if (x < h) return (eval_table(x + h) - eval_table(x)) / h;
  return (eval_table(x + h) - eval_table(x - h)) / (2.0 * h);
}

}  // namespace stpnet
