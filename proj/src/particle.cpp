#include "stpnet/particle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "stpnet/error.hpp"

namespace stpnet {

ParticleState::ParticleState(std::vector<double> u_init, std::vector<double> r_init,
                             const ModelParams& params)
    : u_init_(std::move(u_init)),
      r_value_(std::move(r_init)),
      alpha_(params.alpha()),
      beta_(params.beta()),
      lambda_(params.lambda()) {
  if (u_init_.empty()) throw ConfigError("particle system needs N >= 1 neurons");
  if (u_init_.size() != r_value_.size()) {
    throw ConfigError("potential and calcium vectors differ in length");
  }
  for (std::size_t i = 0; i < u_init_.size(); ++i) {
    if (!(u_init_[i] >= 0.0) || !(r_value_[i] >= 0.0) || !std::isfinite(u_init_[i]) ||
        !std::isfinite(r_value_[i])) {
      throw ConfigError("initial potentials and calcium values must be finite and >= 0");
    }
  }
  r_touch_.assign(u_init_.size(), 0.0);
  const auto [lo, hi] = std::minmax_element(u_init_.begin(), u_init_.end());
  u_init_min_ = *lo;
  u_init_max_ = *hi;
  u_init_mean_ = std::accumulate(u_init_.begin(), u_init_.end(), 0.0) /
                 static_cast<double>(u_init_.size());
  r_sum_ = std::accumulate(r_value_.begin(), r_value_.end(), 0.0);
}

double ParticleState::calcium(std::size_t i) const {
  return r_value_[i] * std::exp(-lambda_ * (t_ - r_touch_[i]));
}

double ParticleState::exact_calcium_sum() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < size(); ++i) sum += calcium(i);
  return sum;
}

bool ParticleState::uniform_potential() const {
  return u_init_min_ == u_init_max_ ||
         scale_ * u_init_min_ + offset_ == scale_ * u_init_max_ + offset_;
}

std::vector<double> ParticleState::potentials() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = potential(i);
  return out;
}

std::vector<double> ParticleState::calciums() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = calcium(i);
  return out;
}

void ParticleState::advance_to(double t) {
  const double dt = t - t_;
  if (dt < 0.0) throw std::logic_error("particle state cannot move backwards in time");
  if (dt == 0.0) return;
  const double fu = std::exp(-beta_ * dt);
  scale_ *= fu;
  offset_ *= fu;
  r_sum_ *= std::exp(-lambda_ * dt);
  t_ = t;
}

Event ParticleState::apply_spike(std::size_t i) {
  Event ev;
  ev.time = t_;
  ev.neuron = i;
  ev.r_before = calcium(i);
  ev.u_before = potential(i);
  offset_ += alpha_ * ev.r_before / static_cast<double>(size());
  r_value_[i] = ev.r_before + 1.0;
  r_touch_[i] = t_;
  r_sum_ += 1.0;
  ++spikes_;
  last_spike_ = t_;
  if (++since_rebuild_ >= kCalciumRebuildInterval) rebuild_calcium_sum();
  return ev;
}

void ParticleState::rebuild_calcium_sum() {
  r_sum_ = exact_calcium_sum();
  since_rebuild_ = 0;
}

void ParticleState::mark_extinct() { mark_extinct_at(t_); }

void ParticleState::mark_extinct_at(double t) {
  if (!extinct_) {
    extinct_ = true;
    extinction_time_ = t;
  }
}

ParticleState init_state(std::size_t n, const InitSpec& init, const ModelParams& params,
                         Xoroshiro128Plus& rng) {
  if (n == 0) throw ConfigError("particle system needs N >= 1 neurons");
  validate_init(init);
  std::vector<double> u(n);
  std::vector<double> r(n);
  if (const auto* pm = std::get_if<PointMass>(&init)) {
    std::fill(u.begin(), u.end(), pm->u0);
    std::fill(r.begin(), r.end(), pm->r0);
  } else if (const auto* band = std::get_if<UniformBand>(&init)) {
    const double w = band->relative_width;
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = band->u_mean * (1.0 + w * (rng.uniform() - 0.5));
      r[i] = band->r_mean * (1.0 + w * (rng.uniform() - 0.5));
    }
  } else {
    const auto& s = std::get<Sampled>(init);
    std::fill(u.begin(), u.end(), s.u0);
    for (std::size_t i = 0; i < n; ++i) {
      switch (s.calcium.kind) {
        case CalciumLaw::Kind::kPoint:
          r[i] = s.calcium.p1;
          break;
        case CalciumLaw::Kind::kUniform:
          r[i] = s.calcium.p1 + (s.calcium.p2 - s.calcium.p1) * rng.uniform();
          break;
        case CalciumLaw::Kind::kExponential:
          r[i] = s.calcium.p1 > 0.0 ? rng.exponential(1.0 / s.calcium.p1) : 0.0;
          break;
      }
    }
  }
  return ParticleState(std::move(u), std::move(r), params);
}

void check_strategy(const ModelParams& params, ThinningStrategy strategy) {
  if (strategy == ThinningStrategy::kMonotone && !params.rate().nondecreasing()) {
    throw ConfigError(
        "monotone thinning requires a nondecreasing rate function; use the global strategy");
  }
}

namespace {

// Total rate at the current time.
double total_rate(const ParticleState& state, const RateFunction& phi) {
  const auto n = static_cast<double>(state.size());
  if (state.uniform_potential()) return n * phi(state.potential(0));
  double sum = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) sum += phi(state.potential(i));
  return sum;
}

}  // namespace

std::optional<Event> next_event(ParticleState& state, const ModelParams& params,
                                double horizon, ThinningStrategy strategy,
                                Xoroshiro128Plus& rng, double rate_floor) {
  const auto& phi = params.rate();
  const std::size_t n = state.size();
  const auto nd = static_cast<double>(n);
  if (state.time() > horizon) throw std::logic_error("next_event: state is past the horizon");
  if (state.extinct()) {
    state.advance_to(horizon);
    return std::nullopt;
  }
  double envelope = -1.0;
  while (state.time() < horizon) {
    const double peak = nd * phi(state.max_potential());
    if (!(peak >= rate_floor)) {
      state.mark_extinct();
      state.advance_to(horizon);
      return std::nullopt;
    }
    if (envelope < 0.0) {
      envelope = strategy == ThinningStrategy::kGlobal ? nd * phi.sup() : total_rate(state, phi);
    }
    const double candidate = state.time() + rng.exponential(envelope);
    if (!(candidate <= horizon)) break;
    state.advance_to(candidate);

    const double target = rng.uniform() * envelope;
    double total = 0.0;
    if (state.uniform_potential()) {
      const double rate = phi(state.potential(0));
      total = nd * rate;
      if (target < total) {
        const auto i = static_cast<std::size_t>(target / rate);
        return state.apply_spike(std::min(i, n - 1));
      }
    } else {
      // Cumulative-sum inversion; the first index whose cumulative rate
      // strictly exceeds the target wins.
      auto& cum = state.rate_buffer();
      cum.resize(n);
      double running = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        running += phi(state.potential(i));
        cum[i] = running;
      }
      total = running;
      if (target < total) {
        const auto it = std::upper_bound(cum.begin(), cum.end(), target);
        return state.apply_spike(static_cast<std::size_t>(it - cum.begin()));
      }
    }
    if (strategy == ThinningStrategy::kMonotone) envelope = total;
  }
  // No spike before the horizon. The cutoff may have been crossed while the
  // potentials decayed; locate the crossing when phi is monotone.
  const double t_prev = state.time();
  const double m_prev = state.max_potential();
  state.advance_to(horizon);
  if (!(nd * phi(state.max_potential()) >= rate_floor)) {
    double crossing = horizon;
    if (phi.nondecreasing()) {
      double lo = t_prev, hi = horizon;
      for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double m = m_prev * std::exp(-params.beta() * (mid - t_prev));
        if (nd * phi(std::max(m, 0.0)) >= rate_floor) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      crossing = hi;
    }
    state.mark_extinct_at(crossing);
  }
  return std::nullopt;
}

std::vector<double> uniform_grid(double horizon, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {horizon};
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k) {
    grid[k] = horizon * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  grid.back() = horizon;
  return grid;
}

Trajectory simulate(const ModelParams& params, std::size_t n, const InitSpec& init,
                    double horizon, std::span<const double> grid, std::uint64_t seed,
                    const SimulationOptions& options) {
  Xoroshiro128Plus rng(seed);
  return simulate(params, n, init, horizon, grid, rng, options);
}

Trajectory simulate(const ModelParams& params, std::size_t n, const InitSpec& init,
                    double horizon, std::span<const double> grid, Xoroshiro128Plus& rng,
                    const SimulationOptions& options) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("simulation horizon must be finite and > 0");
  }
  if (!std::is_sorted(grid.begin(), grid.end()) ||
      (!grid.empty() && (grid.front() < 0.0 || grid.back() > horizon))) {
    throw ConfigError("recording grid must be sorted and lie within [0, horizon]");
  }
  check_strategy(params, options.strategy);

  ParticleState state = init_state(n, init, params, rng);
  Trajectory traj;
  traj.n = n;
  traj.times.assign(grid.begin(), grid.end());
  traj.mean_u.reserve(grid.size());
  traj.mean_r.reserve(grid.size());

  auto run_until = [&](double t) {
    while (auto ev = next_event(state, params, t, options.strategy, rng, options.rate_floor)) {
      ++traj.total_events;
      if (traj.events.size() < options.max_logged_events) traj.events.push_back(*ev);
    }
  };

  for (const double g : grid) {
    run_until(g);
    traj.mean_u.push_back(state.mean_potential());
    traj.mean_r.push_back(state.mean_calcium());
    if (options.per_neuron_snapshots) {
      traj.u_snapshots.push_back(state.potentials());
      traj.r_snapshots.push_back(state.calciums());
    }
  }
  run_until(horizon);

  traj.extinct = state.extinct();
  traj.extinction_time = state.extinction_time();
  traj.last_spike_time = state.last_spike_time();
  return traj;
}

double generator_apply(const TestFunction& f, const ParticleState& state,
                       const ModelParams& params) {
  const std::size_t n = state.size();
  const std::vector<double> u = state.potentials();
  const std::vector<double> r = state.calciums();
  std::vector<double> du(n, 0.0);
  std::vector<double> dr(n, 0.0);
  f.gradient(u, r, du, dr);

  double drift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    drift -= params.beta() * u[i] * du[i] + params.lambda() * r[i] * dr[i];
  }

  const double base = f.value(u, r);
  double jumps = 0.0;
  std::vector<double> uj(n);
  std::vector<double> rj(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rate = params.rate()(u[i]);
    if (rate == 0.0) continue;
    const double kick = params.alpha() * r[i] / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) uj[j] = u[j] + kick;
    rj = r;
    rj[i] += 1.0;
    jumps += rate * (f.value(uj, rj) - base);
  }
  return drift + jumps;
}

ExtinctionInfo extinction_time(const Trajectory& trajectory) {
  return {trajectory.last_spike_time, trajectory.extinct};
}

}  // namespace stpnet
