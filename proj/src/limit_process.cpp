#include "stpnet/limit_process.hpp"

#include <cmath>

#include "stpnet/error.hpp"

namespace stpnet {

double sample_calcium(const CalciumLaw& law, Xoroshiro128Plus& rng) {
  switch (law.kind) {
    case CalciumLaw::Kind::kPoint:
      return law.p1;
    case CalciumLaw::Kind::kUniform:
      return law.p1 + (law.p2 - law.p1) * rng.uniform();
    case CalciumLaw::Kind::kExponential:
      return law.p1 > 0.0 ? rng.exponential(1.0 / law.p1) : 0.0;
  }
  return law.p1;
}

LimitProcessPath simulate_limit_process(const ModelParams& params, const LimitTrajectory& limit,
                                        const CalciumLaw& r0_law, double horizon,
                                        Xoroshiro128Plus& rng) {
  if (!(horizon > 0.0) || limit.horizon < horizon) {
    throw ConfigError("limit trajectory must cover [0, horizon]");
  }
  const auto& phi = params.rate();
  const double envelope = phi.sup();
  const double lambda = params.lambda();

  LimitProcessPath path;
  path.r0 = sample_calcium(r0_law, rng);

  double r_last = path.r0;  // value right after the last spike (or at 0)
  double t_last = 0.0;
  auto r_at = [&](double t) { return r_last * std::exp(-lambda * (t - t_last)); };

  std::size_t next_grid = 0;
  auto record_until = [&](double t) {
    while (next_grid < limit.times.size() && limit.times[next_grid] <= t &&
           limit.times[next_grid] <= horizon) {
      path.times.push_back(limit.times[next_grid]);
      path.r.push_back(r_at(limit.times[next_grid]));
      ++next_grid;
    }
  };

  double t = 0.0;
  if (envelope > 0.0) {
    while (true) {
      t += rng.exponential(envelope);
      if (t > horizon) break;
      const double u = limit.at(t)[0];
      const double accept = rng.uniform() * envelope;
      if (accept < phi(std::max(u, 0.0))) {
        // Grid points strictly before the spike see the pre-spike value.
        while (next_grid < limit.times.size() && limit.times[next_grid] < t) {
          path.times.push_back(limit.times[next_grid]);
          path.r.push_back(r_at(limit.times[next_grid]));
          ++next_grid;
        }
        r_last = r_at(t) + 1.0;
        t_last = t;
        path.spike_times.push_back(t);
      }
    }
  }
  record_until(horizon);
  return path;
}

LimitProcessPath simulate_limit_process(const ModelParams& params, const LimitTrajectory& limit,
                                        const CalciumLaw& r0_law, double horizon,
                                        std::uint64_t seed) {
  Xoroshiro128Plus rng(seed);
  return simulate_limit_process(params, limit, r0_law, horizon, rng);
}

}  // namespace stpnet
