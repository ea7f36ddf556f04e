#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace stpnet {

struct MeanSE {
  double mean = 0.0;
  double std_error = 0.0;
  double std_dev = 0.0;
  std::size_t n = 0;
};

/// Sample mean with the standard error sd / sqrt(n) (sd with n - 1).
MeanSE mean_se(std::span<const double> xs);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion (z = 1.96 by default).
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

/// Linear interpolation quantile (type 7) of unsorted data.
double quantile(std::vector<double> xs, double p);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

/// Weighted least squares y = a + b x with known standard errors sigma_i of
/// y_i; the 95% normal-theory interval on b uses those errors.
LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                          std::span<const double> sigma);

/// Ordinary least squares with a Student-t 95% interval from residuals.
LineFit ols_line_fit(std::span<const double> x, std::span<const double> y);

/// Kolmogorov survival function Q(t) = 2 sum_k (-1)^(k-1) exp(-2 k^2 t^2).
double kolmogorov_q(double t);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// One-sample KS test against a continuous cdf (asymptotic p-value with
/// Stephens' small-sample correction).
KsResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf);

/// Two-sample KS test (asymptotic, effective size nm/(n+m)). For discrete
/// data the p-value is conservative.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Upper tail P(X >= stat) of a chi-square with `dof` degrees of freedom.
double chi_square_sf(double stat, double dof);

}  // namespace stpnet
