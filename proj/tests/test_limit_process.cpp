#include <doctest.h>

#include <boost/math/distributions/poisson.hpp>
#include <cmath>

#include "oracles.hpp"
#include "stpnet/error.hpp"
#include "stpnet/limit_ode.hpp"
#include "stpnet/limit_process.hpp"
#include "stpnet/particle.hpp"
#include "stpnet/rng.hpp"
#include "stpnet/stats.hpp"

using namespace stpnet;

namespace {

ModelParams reference() { return ModelParams(107.78, 50.0, 2.16, RateFunction::sigmoid(3.0)); }

LimitTrajectory constant_potential(double c, double horizon, std::vector<double> grid) {
  LimitTrajectory traj;
  traj.horizon = horizon;
  traj.times = grid;
  traj.u.assign(grid.size(), c);
  traj.r.assign(grid.size(), 0.0);
  DenseSegment seg;
  seg.t0 = 0.0;
  seg.t1 = horizon;
  seg.y0 = {c, 0.0};
  seg.y1 = {c, 0.0};
  traj.segments.push_back(seg);
  return traj;
}

}  // namespace

TEST_CASE("zero potential: no spikes and deterministic decay") {
  const auto p = reference();
  const auto grid = uniform_grid(3.0, 7);
  const auto limit = constant_potential(0.0, 3.0, grid);
  const auto path =
      simulate_limit_process(p, limit, CalciumLaw{CalciumLaw::Kind::kPoint, 2.0, 0.0}, 3.0, 1);
  CHECK(path.spike_times.empty());
  REQUIRE(path.r.size() == grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(path.r[k] == doctest::Approx(2.0 * std::exp(-p.lambda() * grid[k])).epsilon(1e-14));
  }
}

TEST_CASE("constant potential gives Poisson spike counts") {
  const auto p = reference();
  const double c = 3.0, T = 1.0;
  const double mean = p.rate()(c) * T;
  const auto limit = constant_potential(c, T, {T});
  const int samples = 10000;
  const int top = 14;
  std::vector<double> observed(top + 1, 0.0);
  for (int k = 0; k < samples; ++k) {
    auto rng = replica_rng(3, k);
    const auto path =
        simulate_limit_process(p, limit, CalciumLaw{CalciumLaw::Kind::kPoint, 0.0, 0.0}, T, rng);
    observed[std::min<std::size_t>(path.spike_times.size(), top)] += 1.0;
  }
  const boost::math::poisson_distribution<double> law(mean);
  double stat = 0.0;
  for (int j = 0; j <= top; ++j) {
    const double prob = j < top ? boost::math::pdf(law, j) : boost::math::cdf(complement(law, top - 1));
    const double expected = prob * samples;
    stat += (observed[j] - expected) * (observed[j] - expected) / expected;
  }
  CHECK(chi_square_sf(stat, top) > 0.01);
}

TEST_CASE("Monte Carlo mean calcium follows the ODE") {
  const auto p = reference();
  SUBCASE("at the upper equilibrium") {
    const std::vector<double> grid{1.0, 5.0};
    const auto limit = integrate_ode(p, oracle::kX2, oracle::kRMax, 5.0, grid);
    std::vector<std::vector<double>> r(grid.size());
    for (int k = 0; k < 10000; ++k) {
      auto rng = replica_rng(4, k);
      const auto path = simulate_limit_process(
          p, limit, CalciumLaw{CalciumLaw::Kind::kPoint, oracle::kRMax, 0.0}, 5.0, rng);
      for (std::size_t i = 0; i < grid.size(); ++i) r[i].push_back(path.r[i]);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto m = mean_se(r[i]);
      CHECK(std::abs(m.mean - limit.r[i]) < 3.0 * m.std_error);
    }
  }
  SUBCASE("random initial calcium") {
    const std::vector<double> grid{0.5, 2.0};
    const CalciumLaw law{CalciumLaw::Kind::kExponential, 1.0, 0.0};
    const auto limit = integrate_ode(p, 2.0, law.mean(), 2.0, grid);
    std::vector<std::vector<double>> r(grid.size());
    for (int k = 0; k < 10000; ++k) {
      auto rng = replica_rng(5, k);
      const auto path = simulate_limit_process(p, limit, law, 2.0, rng);
      for (std::size_t i = 0; i < grid.size(); ++i) r[i].push_back(path.r[i]);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto m = mean_se(r[i]);
      CHECK(std::abs(m.mean - limit.r[i]) < 3.0 * m.std_error);
    }
  }
}

TEST_CASE("calcium laws and coverage errors") {
  Xoroshiro128Plus rng(2);
  CHECK(sample_calcium({CalciumLaw::Kind::kPoint, 1.5, 0.0}, rng) == 1.5);
  for (int k = 0; k < 1000; ++k) {
    const double u = sample_calcium({CalciumLaw::Kind::kUniform, 1.0, 2.0}, rng);
    CHECK(u >= 1.0);
    CHECK(u <= 2.0);
    CHECK(sample_calcium({CalciumLaw::Kind::kExponential, 1.0, 0.0}, rng) >= 0.0);
  }
  const auto p = reference();
  const auto limit = integrate_ode(p, 2.0, 1.0, 1.0, std::vector<double>{1.0});
  CHECK_THROWS_AS(simulate_limit_process(p, limit, {}, 2.0, 1), ConfigError);
}
