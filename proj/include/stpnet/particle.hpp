#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "stpnet/model.hpp"
#include "stpnet/rng.hpp"

namespace stpnet {

/// One accepted spike.
struct Event {
  double time = 0.0;
  std::size_t neuron = 0;
  double r_before = 0.0;  // spiker's calcium at t-
  double u_before = 0.0;  // spiker's potential at t-
};

/// How the thinning envelope is chosen.
///  - kGlobal: N * K, valid for any bounded rate.
///  - kMonotone: the total rate at the start of the candidate interval.
///    Valid only for nondecreasing phi, since potentials only decay between
///    spikes.
enum class ThinningStrategy { kGlobal, kMonotone };

/// Total network rate below which the run is declared extinct.
inline constexpr double kDefaultRateFloor = 1e-12;
/// Events between exact recomputations of the running calcium sum.
inline constexpr std::uint64_t kCalciumRebuildInterval = 1'000'000;

/// State of the N-neuron system with lazy exact decay.
///
/// Potentials are stored as U_t(i) = scale(t) * u_init(i) + offset(t): decay
/// multiplies both scale and offset, and a spike adds the same kick to the
/// offset for every neuron, so both are O(1). Calcium is stored per neuron
/// as (value, last update time) and decoded on demand; the sum over neurons
/// is tracked separately and rebuilt exactly every kCalciumRebuildInterval
/// spikes.
class ParticleState {
 public:
  /// Decay rates and kick size are taken from params.
  ParticleState(std::vector<double> u_init, std::vector<double> r_init,
                const ModelParams& params);

  double time() const { return t_; }
  std::size_t size() const { return u_init_.size(); }
  std::uint64_t spike_count() const { return spikes_; }
  bool extinct() const { return extinct_; }
  /// Time at which the extinction cutoff was declared (valid if extinct()).
  double extinction_time() const { return extinction_time_; }
  /// Time of the last accepted spike, 0 when there was none.
  double last_spike_time() const { return last_spike_; }

  double potential(std::size_t i) const { return scale_ * u_init_[i] + offset_; }
  double calcium(std::size_t i) const;
  double max_potential() const { return scale_ * u_init_max_ + offset_; }
  double mean_potential() const { return scale_ * u_init_mean_ + offset_; }
  double calcium_sum() const { return r_sum_; }
  double mean_calcium() const { return r_sum_ / static_cast<double>(size()); }
  /// Sum of decoded per-neuron calcium values, O(N).
  double exact_calcium_sum() const;
  /// True when every neuron's potential evaluates to the same double.
  bool uniform_potential() const;

  std::vector<double> potentials() const;
  std::vector<double> calciums() const;

  /// Exact decay to time t >= time().
  void advance_to(double t);
  /// Spike of neuron i at the current time: every potential (the spiker's
  /// included) gains alpha * R(i) / N, and R(i) gains 1.
  Event apply_spike(std::size_t i);
  void rebuild_calcium_sum();
  void mark_extinct();
  /// Same, recording an earlier crossing time t <= time().
  void mark_extinct_at(double t);

  /// Scratch space for per-neuron rates; reused across calls.
  std::vector<double>& rate_buffer() const { return rates_; }

 private:
  double t_ = 0.0;
  double scale_ = 1.0;
  double offset_ = 0.0;
  std::vector<double> u_init_;
  double u_init_mean_ = 0.0;
  double u_init_min_ = 0.0;
  double u_init_max_ = 0.0;
  std::vector<double> r_value_;
  std::vector<double> r_touch_;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double lambda_ = 0.0;
  double r_sum_ = 0.0;
  std::uint64_t spikes_ = 0;
  std::uint64_t since_rebuild_ = 0;
  bool extinct_ = false;
  double extinction_time_ = 0.0;
  double last_spike_ = 0.0;
  mutable std::vector<double> rates_;
};

/// Draws the initial configuration at t = 0. Throws ConfigError for N = 0
/// or an invalid init spec.
ParticleState init_state(std::size_t n, const InitSpec& init, const ModelParams& params,
                         Xoroshiro128Plus& rng);

/// Throws ConfigError when the strategy is not valid for this rate.
void check_strategy(const ModelParams& params, ThinningStrategy strategy);

/// Ogata thinning step. Returns the next spike at a time <= horizon with the
/// state advanced through it, or nullopt with the state advanced to horizon.
/// When the total rate bound N * phi(max U) falls below rate_floor the state
/// is marked extinct and no further events are produced.
std::optional<Event> next_event(ParticleState& state, const ModelParams& params,
                                double horizon, ThinningStrategy strategy,
                                Xoroshiro128Plus& rng, double rate_floor = kDefaultRateFloor);

struct SimulationOptions {
  ThinningStrategy strategy = ThinningStrategy::kMonotone;
  double rate_floor = kDefaultRateFloor;
  /// Keep the first max_logged_events events; later ones are only counted.
  std::size_t max_logged_events = 0;
  bool per_neuron_snapshots = false;
};

struct Trajectory {
  std::size_t n = 0;
  std::vector<double> times;
  std::vector<double> mean_u;
  std::vector<double> mean_r;
  /// Per grid time, per neuron (only with per_neuron_snapshots).
  std::vector<std::vector<double>> u_snapshots;
  std::vector<std::vector<double>> r_snapshots;
  std::vector<Event> events;
  std::uint64_t total_events = 0;
  bool extinct = false;
  double extinction_time = 0.0;
  double last_spike_time = 0.0;
};

/// Runs one realisation to `horizon`, recording observables at each grid
/// time. Fully determined by (params, n, init, grid, options, seed).
Trajectory simulate(const ModelParams& params, std::size_t n, const InitSpec& init,
                    double horizon, std::span<const double> grid, std::uint64_t seed,
                    const SimulationOptions& options = {});

/// Same, with a caller-owned generator (replica studies).
Trajectory simulate(const ModelParams& params, std::size_t n, const InitSpec& init,
                    double horizon, std::span<const double> grid, Xoroshiro128Plus& rng,
                    const SimulationOptions& options = {});

/// `count` equally spaced points on [0, horizon], both ends included.
std::vector<double> uniform_grid(double horizon, std::size_t count);

/// A smooth test function on R_+^{2N} with its gradient.
struct TestFunction {
  std::function<double(std::span<const double> u, std::span<const double> r)> value;
  /// Writes df/du_i into du and df/dr_i into dr.
  std::function<void(std::span<const double> u, std::span<const double> r,
                     std::span<double> du, std::span<double> dr)>
      gradient;
};

/// Generator of the particle system applied to f at the current state:
///   -sum_i (beta u_i df/du_i + lambda r_i df/dr_i)
///   + sum_i phi(u_i) [f(jump_i(u, r)) - f(u, r)].
double generator_apply(const TestFunction& f, const ParticleState& state,
                       const ModelParams& params);

struct ExtinctionInfo {
  double last_spike_time = 0.0;
  bool extinct = false;
};

ExtinctionInfo extinction_time(const Trajectory& trajectory);

}  // namespace stpnet
