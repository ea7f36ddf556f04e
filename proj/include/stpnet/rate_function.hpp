#pragma once

#include <span>
#include <vector>

namespace stpnet {

/// Bounded, Lipschitz spiking-rate function phi: [0, inf) -> [0, inf).
///
/// Two kinds are supported:
///  - sigmoid with inflexion point a:
///      phi(x) = 4a / (1 + exp(-(x - a))) - 4a / (1 + exp(a)),
///    for which the bound K and the Lipschitz constant (= a) are exact;
///  - piecewise-linear table through knots (x_i, y_i) starting at (0, 0),
///    clamped to the last value beyond the last knot.
///
/// Instances are immutable and cheap to copy.
class RateFunction {
 public:
  enum class Kind { kSigmoid, kTable };

  /// Requires a > 1 and 4a < 1 + e^a; throws ConstraintViolation otherwise.
  static RateFunction sigmoid(double a);

  /// Requires x_0 = 0, y_0 = 0, nondecreasing x, finite nonnegative y.
  /// Strict positivity on (0, inf) is reported, not enforced, so that
  /// degenerate rates (e.g. identically zero) remain usable in tests.
  static RateFunction table(std::vector<double> xs, std::vector<double> ys);

  Kind kind() const { return kind_; }

  /// phi(x); x must be >= 0.
  double operator()(double x) const;

  /// phi'(x). Closed form for sigmoid; central difference with
  /// h = 1e-6 * max(1, x) for tables (one-sided at x = 0).
  double derivative(double x) const;

  /// K = sup phi.
  double sup() const { return sup_; }
  /// L_phi = sup |phi'|.
  double lipschitz() const { return lipschitz_; }
  bool nondecreasing() const { return nondecreasing_; }
  /// phi(x) > 0 for every x > 0.
  bool strictly_positive() const { return strictly_positive_; }

  /// Sigmoid inflexion point; 0 for tables.
  double inflexion() const { return a_; }
  std::span<const double> knots_x() const { return xs_; }
  std::span<const double> knots_y() const { return ys_; }

 private:
  RateFunction() = default;

  double eval_table(double x) const;

  Kind kind_ = Kind::kSigmoid;
  double a_ = 0.0;
  double offset_ = 0.0;  // 4a / (1 + e^a)
  std::vector<double> xs_;
  std::vector<double> ys_;
  double sup_ = 0.0;
  double lipschitz_ = 0.0;
  bool nondecreasing_ = true;
  bool strictly_positive_ = true;
};

}  // namespace stpnet
