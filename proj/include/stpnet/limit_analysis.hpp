#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stpnet/limit_ode.hpp"
#include "stpnet/model.hpp"

namespace stpnet {

/// Number of scan subintervals used by fixed_point_roots.
inline constexpr std::size_t kRootScanIntervals = 10'000;

/// Roots of g(x) = x - kappa * phi(x)^2 on [0, search_max], sorted, the
/// origin included. search_max <= 0 selects 2 * kappa * K^2, which bounds
/// every root since phi <= K. Sign changes on a uniform scan are refined
/// by bisection to full precision; discrete local extrema of g that do not
/// change sign are minimised locally so that close root pairs and
/// tangencies are not missed (a tangency is returned once).
std::vector<double> fixed_point_roots(const RateFunction& phi, double kappa,
                                      double search_max = 0.0);

enum class Stability { kStable, kSaddle, kUnstable, kMarginal };

std::string to_string(Stability s);

struct Equilibrium {
  double u_star = 0.0;
  double r_star = 0.0;
  /// (lambda r* - phi(u*)) and (beta u* - alpha phi(u*) r*), each divided by
  /// the magnitude of its terms (absolute when those vanish).
  double residual_r = 0.0;
  double residual_u = 0.0;
  double jacobian[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  std::complex<double> eigenvalues[2];
  /// g'(u*) for g(x) = x - kappa phi(x)^2.
  double g_slope = 0.0;
  Stability stability = Stability::kMarginal;
};

/// All stationary points of the limit ODE. Roots with |g'| < 1e-8 are
/// classified marginal; otherwise stability follows the Jacobian
/// eigenvalues.
std::vector<Equilibrium> equilibria(const ModelParams& params, double search_max = 0.0);

/// Builds the Equilibrium record (Jacobian, eigenvalues, class) at u*.
Equilibrium make_equilibrium(const ModelParams& params, double u_star);

/// The attracting non-trivial equilibrium (largest root). Throws
/// NumericalError when the three-root structure is absent.
Equilibrium upper_equilibrium(const ModelParams& params);

struct Nullclines {
  std::vector<double> u;
  /// dr/dt = 0: r = phi(u) / lambda.
  std::vector<double> r_nullcline_r;
  /// du/dt = 0: r = (beta / alpha) u / phi(u), continued at u = 0 by
  /// (beta / alpha) / phi'(0).
  std::vector<double> r_nullcline_u;
};

/// Throws ConfigError for an unsorted/negative grid, or where phi(u) = 0
/// for some u > 0, or phi'(0) = 0 at u = 0.
Nullclines nullclines(const ModelParams& params, std::span<const double> u_grid);

enum class Region { kR1, kR2, kR3, kR4, kR5, kBoundary };

std::string to_string(Region region);

/// Partition of the positive quadrant by the two null-clines and the
/// non-trivial roots x1 < x2:
///   R1: u <= x1, phi/lambda <= r <= (beta/alpha) u/phi
///   R2: r below both curves
///   R3: u >= x2, between the curves (same ordering as R1)
///   R4: r above both curves
///   R5: x1 <= u <= x2, (beta/alpha) u/phi <= r <= phi/lambda
/// Points within 1e-9 of either curve are kBoundary.
class RegionClassifier {
 public:
  /// Throws NumericalError unless exactly three equilibria exist.
  explicit RegionClassifier(const ModelParams& params);

  Region classify(double u, double r) const;
  double x1() const { return x1_; }
  double x2() const { return x2_; }
  double r_curve(double u) const;
  double u_curve(double u) const;

  static constexpr double kBoundaryTolerance = 1e-9;

 private:
  ModelParams params_;
  double x1_ = 0.0;
  double x2_ = 0.0;
};

Region classify_region(const ModelParams& params, double u, double r);

struct HittingTime {
  /// First time with |u - u_max| + |r - r_max| < epsilon; empty when not
  /// attracted.
  std::optional<double> time;
  enum class Outcome { kHit, kOriginFirst, kHorizonCap } outcome = Outcome::kHit;
};

inline constexpr double kHittingHorizonCap = 1e3;

/// Integrates from (u0, r0) and locates the first entry into the epsilon
/// l1-ball around (u_max, r_max) by bisection on the dense output (time
/// tolerance 1e-9). Gives up when the epsilon-ball around the origin is
/// entered first or after `cap` time units.
HittingTime hitting_time_t1(const ModelParams& params, double u0, double r0, double epsilon,
                            const OdeOptions& options = {},
                            double cap = kHittingHorizonCap);

struct BifurcationScan {
  std::vector<double> kappas;
  std::vector<std::size_t> root_counts;
  /// Bracket on the count transition 1 -> more, refined to width < 1e-6.
  std::optional<double> kappa_c;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

/// Root counts of x = kappa phi(x)^2 along a sorted positive kappa grid.
BifurcationScan bifurcation_scan(const RateFunction& phi, std::span<const double> kappa_grid);

}  // namespace stpnet
