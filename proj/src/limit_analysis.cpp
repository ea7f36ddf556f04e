#include "stpnet/limit_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stpnet/error.hpp"

namespace stpnet {

namespace {

bool negative(double v) { return v < 0.0; }

template <class G>
double bisect(const G& g, double lo, double hi, double g_lo) {
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const double g_mid = g(mid);
    if (g_mid == 0.0) return mid;
    if (negative(g_mid) == negative(g_lo)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Minimises sign * g on [lo, hi] by golden-section search.
template <class G>
std::pair<double, double> golden_extremum(const G& g, double lo, double hi, double sign) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = sign * g(c);
  double fd = sign * g(d);
  for (int it = 0; it < 200 && (b - a) > 4.0 * std::numeric_limits<double>::epsilon() *
                                               std::max(1.0, std::abs(a));
       ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = sign * g(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = sign * g(d);
    }
  }
  const double x = fc < fd ? c : d;
  return {x, g(x)};
}

}  // namespace

std::vector<double> fixed_point_roots(const RateFunction& phi, double kappa, double search_max) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw ConfigError("fixed-point scan needs a finite kappa >= 0");
  }
  const double K = phi.sup();
  const double L = search_max > 0.0 ? search_max : 2.0 * kappa * K * K;
  std::vector<double> roots{0.0};
  if (!(L > 0.0)) return roots;

  auto g = [&](double x) {
    const double p = phi(x);
    return x - kappa * p * p;
  };
  const std::size_t m = kRootScanIntervals;
  std::vector<double> xs(m + 1);
  std::vector<double> gs(m + 1);
  for (std::size_t k = 0; k <= m; ++k) {
    xs[k] = L * static_cast<double>(k) / static_cast<double>(m);
    gs[k] = g(xs[k]);
  }
  xs[m] = L;
  gs[m] = g(L);

  for (std::size_t k = 1; k <= m; ++k) {
    if (gs[k] == 0.0) {
      roots.push_back(xs[k]);
    } else if (gs[k - 1] != 0.0 && negative(gs[k - 1]) != negative(gs[k])) {
      roots.push_back(bisect(g, xs[k - 1], xs[k], gs[k - 1]));
    }
  }

  // A pair of close roots (or a tangency) can hide inside one cell without
  // producing a sign change on the scan.
  for (std::size_t j = 1; j < m; ++j) {
    const double a = gs[j - 1], b = gs[j], c = gs[j + 1];
    if (a == 0.0 || b == 0.0 || c == 0.0) continue;
    if (negative(a) != negative(b) || negative(b) != negative(c)) continue;
    const double sign = negative(b) ? -1.0 : 1.0;
    if (!(sign * b <= sign * a && sign * b <= sign * c)) continue;
    const auto [xe, ge] = golden_extremum(g, xs[j - 1], xs[j + 1], sign);
    const double scale = std::max(std::abs(xe), 1e-300);
    if (sign * ge < 0.0) {
      roots.push_back(bisect(g, xs[j - 1], xe, a));
      roots.push_back(bisect(g, xe, xs[j + 1], ge));
    } else if (std::abs(ge) <= 16.0 * std::numeric_limits<double>::epsilon() * scale) {
      roots.push_back(xe);
    }
  }

  std::sort(roots.begin(), roots.end());
  const double merge_tol = 1e-12 * L;
  std::vector<double> unique;
  for (const double x : roots) {
    if (unique.empty() || x - unique.back() > merge_tol) unique.push_back(x);
  }
  return unique;
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::kStable:
      return "stable";
    case Stability::kSaddle:
      return "saddle";
    case Stability::kUnstable:
      return "unstable";
    case Stability::kMarginal:
      return "marginal";
  }
  return "marginal";
}

namespace {

double relative_residual(double lhs, double rhs) {
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return scale > 0.0 ? (lhs - rhs) / scale : 0.0;
}

}  // namespace

Equilibrium make_equilibrium(const ModelParams& params, double u_star) {
  const auto& phi = params.rate();
  const double alpha = params.alpha(), beta = params.beta(), lambda = params.lambda();
  Equilibrium eq;
  eq.u_star = u_star;
  const double p = phi(u_star);
  const double dp = phi.derivative(u_star);
  eq.r_star = p / lambda;
  eq.residual_r = relative_residual(lambda * eq.r_star, p);
  eq.residual_u = relative_residual(beta * u_star, alpha * p * eq.r_star);
  eq.jacobian[0][0] = -beta + alpha * dp * eq.r_star;
  eq.jacobian[0][1] = alpha * p;
  eq.jacobian[1][0] = dp;
  eq.jacobian[1][1] = -lambda;
  eq.g_slope = 1.0 - 2.0 * params.kappa() * p * dp;

  const double tr = eq.jacobian[0][0] + eq.jacobian[1][1];
  const double det =
      eq.jacobian[0][0] * eq.jacobian[1][1] - eq.jacobian[0][1] * eq.jacobian[1][0];
  const double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    // Roots of x^2 - tr x + det without cancellation.
    const double q = 0.5 * (tr + std::copysign(s, tr));
    double l1 = q;
    double l2 = q != 0.0 ? det / q : 0.0;
    if (l1 > l2) std::swap(l1, l2);
    eq.eigenvalues[0] = {l1, 0.0};
    eq.eigenvalues[1] = {l2, 0.0};
  } else {
    const double im = 0.5 * std::sqrt(-disc);
    eq.eigenvalues[0] = {0.5 * tr, -im};
    eq.eigenvalues[1] = {0.5 * tr, im};
  }

  const double re_max = std::max(eq.eigenvalues[0].real(), eq.eigenvalues[1].real());
  const double re_min = std::min(eq.eigenvalues[0].real(), eq.eigenvalues[1].real());
  const double eig_scale = std::max(std::abs(tr), std::sqrt(std::abs(det)));
  if (std::abs(eq.g_slope) < 1e-8 || std::abs(re_max) <= 1e-12 * eig_scale) {
    eq.stability = Stability::kMarginal;
  } else if (det < 0.0) {
    eq.stability = Stability::kSaddle;
  } else if (re_max < 0.0) {
    eq.stability = Stability::kStable;
  } else if (re_min > 0.0) {
    eq.stability = Stability::kUnstable;
  } else {
    eq.stability = Stability::kSaddle;
  }
  return eq;
}

std::vector<Equilibrium> equilibria(const ModelParams& params, double search_max) {
  std::vector<Equilibrium> out;
  for (const double x : fixed_point_roots(params.rate(), params.kappa(), search_max)) {
    out.push_back(make_equilibrium(params, x));
  }
  return out;
}

Equilibrium upper_equilibrium(const ModelParams& params) {
  auto eqs = equilibria(params);
  if (eqs.size() != 3) {
    std::ostringstream msg;
    msg << "expected three equilibria (0 < x1 < x2) but found " << eqs.size()
        << "; kappa = " << params.kappa();
    throw NumericalError(msg.str());
  }
  if (eqs.back().stability != Stability::kStable) {
    throw NumericalError("the largest equilibrium is not attracting");
  }
  return eqs.back();
}

Nullclines nullclines(const ModelParams& params, std::span<const double> u_grid) {
  if (!std::is_sorted(u_grid.begin(), u_grid.end()) ||
      (!u_grid.empty() && u_grid.front() < 0.0)) {
    throw ConfigError("null-cline grid must be sorted and nonnegative");
  }
  const auto& phi = params.rate();
  const double ratio = params.beta() / params.alpha();
  Nullclines nc;
  nc.u.assign(u_grid.begin(), u_grid.end());
  nc.r_nullcline_r.reserve(u_grid.size());
  nc.r_nullcline_u.reserve(u_grid.size());
  for (const double u : u_grid) {
    const double p = phi(u);
    nc.r_nullcline_r.push_back(p / params.lambda());
    if (u == 0.0) {
      const double d0 = phi.derivative(0.0);
      if (!(d0 > 0.0)) {
        throw ConfigError("u null-cline undefined at u = 0: phi'(0) must be > 0");
      }
      nc.r_nullcline_u.push_back(ratio / d0);
    } else {
      if (!(p > 0.0)) {
        std::ostringstream msg;
        msg << "u null-cline undefined: phi(" << u << ") = 0 for a positive potential";
        throw ConfigError(msg.str());
      }
      nc.r_nullcline_u.push_back(ratio * u / p);
    }
  }
  return nc;
}

std::string to_string(Region region) {
  switch (region) {
    case Region::kR1:
      return "R1";
    case Region::kR2:
      return "R2";
    case Region::kR3:
      return "R3";
    case Region::kR4:
      return "R4";
    case Region::kR5:
      return "R5";
    case Region::kBoundary:
      return "boundary";
  }
  return "boundary";
}

RegionClassifier::RegionClassifier(const ModelParams& params) : params_(params) {
  const auto roots = fixed_point_roots(params.rate(), params.kappa());
  if (roots.size() != 3) {
    std::ostringstream msg;
    msg << "region classification needs exactly three equilibria, found " << roots.size();
    throw NumericalError(msg.str());
  }
  x1_ = roots[1];
  x2_ = roots[2];
}

double RegionClassifier::r_curve(double u) const {
  return params_.rate()(u) / params_.lambda();
}

double RegionClassifier::u_curve(double u) const {
  const double ratio = params_.beta() / params_.alpha();
  if (u == 0.0) return ratio / params_.rate().derivative(0.0);
  return ratio * u / params_.rate()(u);
}

Region RegionClassifier::classify(double u, double r) const {
  if (!(u >= 0.0) || !(r >= 0.0)) throw ConfigError("region query needs u, r >= 0");
  const double rr = r_curve(u);
  const double ru = u_curve(u);
  if (std::abs(r - rr) <= kBoundaryTolerance || std::abs(r - ru) <= kBoundaryTolerance) {
    return Region::kBoundary;
  }
  if (r < std::min(rr, ru)) return Region::kR2;
  if (r > std::max(rr, ru)) return Region::kR4;
  if (u < x1_) return Region::kR1;
  if (u > x2_) return Region::kR3;
  return Region::kR5;
}

Region classify_region(const ModelParams& params, double u, double r) {
  return RegionClassifier(params).classify(u, r);
}

HittingTime hitting_time_t1(const ModelParams& params, double u0, double r0, double epsilon,
                            const OdeOptions& options, double cap) {
  if (!(epsilon > 0.0)) throw ConfigError("hitting time needs epsilon > 0");
  if (!(cap > 0.0)) throw ConfigError("hitting time needs a positive horizon cap");
  const Equilibrium top = upper_equilibrium(params);
  auto dist = [&](const Vec2& y) {
    return std::abs(y[0] - top.u_star) + std::abs(y[1] - top.r_star);
  };
  auto near_origin = [&](const Vec2& y) { return std::abs(y[0]) + std::abs(y[1]) < epsilon; };

  HittingTime result;
  if (dist({u0, r0}) < epsilon) {
    result.time = 0.0;
    return result;
  }
  if (near_origin({u0, r0})) {
    result.outcome = HittingTime::Outcome::kOriginFirst;
    return result;
  }
  LimitIntegrator integ(params, u0, r0, cap, options);
  while (integ.time() < cap) {
    const DenseSegment seg = integ.step(cap);
    if (dist(seg.y1) < epsilon) {
      double lo = seg.t0, hi = seg.t1;
      while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (dist(seg.at(mid)) < epsilon) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      result.time = hi;
      return result;
    }
    if (near_origin(seg.y1)) {
      result.outcome = HittingTime::Outcome::kOriginFirst;
      return result;
    }
  }
  result.outcome = HittingTime::Outcome::kHorizonCap;
  return result;
}

BifurcationScan bifurcation_scan(const RateFunction& phi, std::span<const double> kappa_grid) {
  if (kappa_grid.empty() || !std::is_sorted(kappa_grid.begin(), kappa_grid.end()) ||
      !(kappa_grid.front() > 0.0)) {
    throw ConfigError("kappa grid must be nonempty, sorted and positive");
  }
  BifurcationScan scan;
  scan.kappas.assign(kappa_grid.begin(), kappa_grid.end());
  for (const double k : kappa_grid) scan.root_counts.push_back(fixed_point_roots(phi, k).size());

  for (std::size_t j = 1; j < scan.kappas.size(); ++j) {
    if (scan.root_counts[j - 1] == 1 && scan.root_counts[j] > 1) {
      double lo = scan.kappas[j - 1], hi = scan.kappas[j];
      while (hi - lo >= 1e-6) {
        const double mid = 0.5 * (lo + hi);
        if (fixed_point_roots(phi, mid).size() == 1) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      scan.bracket_lo = lo;
      scan.bracket_hi = hi;
      scan.kappa_c = 0.5 * (lo + hi);
      break;
    }
  }
  return scan;
}

}  // namespace stpnet
