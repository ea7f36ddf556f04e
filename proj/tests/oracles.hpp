#pragma once

// Reference computations written independently of the library: closed-form
// sigmoid, plain bisection, a time-stepped Bernoulli simulator.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

inline double sigmoid(double a, double x) {
  return 4.0 * a / (1.0 + std::exp(-(x - a))) - 4.0 * a / (1.0 + std::exp(a));
}

inline double sigmoid_sup(double a) { return 4.0 * a - 4.0 * a / (1.0 + std::exp(a)); }

inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 400 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Reference-parameter values frozen from 30-digit evaluation.
inline constexpr double kKappa = 0.997962962962963;
inline constexpr double kSup = 11.4308895218692;
inline constexpr double kPhi3 = 5.43088952186920;
inline constexpr double kPhi2 = 2.65818657830914;
inline constexpr double kPhiPrime0 = 0.542119916770946;
inline constexpr double kUNullclineAt0 = 0.855729417623691;
inline constexpr double kX1 = 1.16274690778637;
inline constexpr double kX2 = 130.399065337499;
inline constexpr double kR1 = 0.499725640817594;
inline constexpr double kRMax = 5.29207848234685;
inline constexpr double kKappaC = 0.0495943044076513;
inline constexpr double kUnitX1 = 1.16159831231856;
inline constexpr double kUnitX2 = 130.665235261179;

struct BernoulliSample {
  double spikes = 0.0;
  double mean_u = 0.0;
};

// Fixed-step discretisation: exact decay over dt, then each neuron in index
// order spikes with probability phi(U_i) dt, kicking every potential by
// alpha R_i / N and its own calcium by 1.
inline BernoulliSample bernoulli_run(double alpha, double beta, double lambda, double a,
                                     std::size_t n, double u0, double r0, double horizon,
                                     double dt, std::mt19937_64& gen) {
  std::vector<double> u(n, u0), r(n, r0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double du = std::exp(-beta * dt), dr = std::exp(-lambda * dt);
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  BernoulliSample out;
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      u[i] *= du;
      r[i] *= dr;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (unif(gen) < sigmoid(a, u[i]) * dt) {
        const double kick = alpha * r[i] / static_cast<double>(n);
        for (auto& v : u) v += kick;
        r[i] += 1.0;
        out.spikes += 1.0;
      }
    }
  }
  for (const double v : u) out.mean_u += v;
  out.mean_u /= static_cast<double>(n);
  return out;
}

}  // namespace oracle
