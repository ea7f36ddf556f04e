#pragma once

#include <cstdint>
#include <vector>

#include "stpnet/limit_ode.hpp"
#include "stpnet/model.hpp"
#include "stpnet/rng.hpp"

namespace stpnet {

/// One sampled path of the tagged-neuron calcium in the mean-field limit.
struct LimitProcessPath {
  double r0 = 0.0;
  /// Spikes of the inhomogeneous Poisson process with rate phi(u_t).
  std::vector<double> spike_times;
  /// R_t at the trajectory's grid times.
  std::vector<double> times;
  std::vector<double> r;
};

/// Samples R on [0, horizon] given the deterministic potential path u_t of
/// `limit`: spikes by thinning with envelope K (candidates at rate K,
/// accepted with probability phi(u_t) / K), exponential decay at rate
/// lambda between spikes, +1 at each spike. R_0 is drawn from r0_law.
/// Throws ConfigError when `limit` does not cover [0, horizon].
LimitProcessPath simulate_limit_process(const ModelParams& params, const LimitTrajectory& limit,
                                        const CalciumLaw& r0_law, double horizon,
                                        Xoroshiro128Plus& rng);

LimitProcessPath simulate_limit_process(const ModelParams& params, const LimitTrajectory& limit,
                                        const CalciumLaw& r0_law, double horizon,
                                        std::uint64_t seed);

/// Draws one value from a calcium law.
double sample_calcium(const CalciumLaw& law, Xoroshiro128Plus& rng);

}  // namespace stpnet
