#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "stpnet/error.hpp"
#include "stpnet/model.hpp"
#include "stpnet/rate_function.hpp"

using namespace stpnet;

TEST_CASE("sigmoid values match the closed form") {
  const auto phi = RateFunction::sigmoid(3.0);
  CHECK(phi(0.0) == 0.0);
  CHECK(phi(3.0) == doctest::Approx(oracle::kPhi3).epsilon(1e-13));
  CHECK(phi(2.0) == doctest::Approx(oracle::kPhi2).epsilon(1e-13));
  CHECK(phi.sup() == doctest::Approx(oracle::kSup).epsilon(1e-13));
  CHECK(phi.sup() == doctest::Approx(12.0 * std::exp(3.0) / (1.0 + std::exp(3.0))).epsilon(1e-14));
  CHECK(phi(1e3) == doctest::Approx(phi.sup()).epsilon(1e-14));
  CHECK(phi.lipschitz() == 3.0);
  CHECK(phi.derivative(0.0) == doctest::Approx(oracle::kPhiPrime0).epsilon(1e-12));
  CHECK(phi.nondecreasing());
  CHECK(phi.strictly_positive());
  for (double x : {0.1, 0.7, 2.5, 4.0, 9.0, 40.0}) {
    CHECK(phi(x) == doctest::Approx(oracle::sigmoid(3.0, x)).epsilon(1e-14));
  }
}

TEST_CASE("sigmoid phi(0) is exactly zero for any valid a") {
  for (double a : {2.2, 2.5, 3.0, 4.7, 10.0, 25.0}) {
    CHECK(RateFunction::sigmoid(a)(0.0) == 0.0);
  }
}

TEST_CASE("sigmoid grid properties: monotone, slope and sup") {
  for (double a : {2.5, 3.0, 6.0}) {
    const auto phi = RateFunction::sigmoid(a);
    const double top = 2.0 * a + 40.0;
    const int n = 10000;
    double prev = phi(0.0), max_slope = 0.0, max_val = 0.0;
    bool monotone = true;
    for (int k = 1; k <= n; ++k) {
      const double x = top * k / n;
      const double v = phi(x);
      if (v < prev) monotone = false;
      max_slope = std::max(max_slope, (v - prev) / (top / n));
      max_val = std::max(max_val, v);
      prev = v;
    }
    CHECK(monotone);
    CHECK(std::abs(max_slope - a) / a < 0.01);
    CHECK(std::abs(max_val - phi.sup()) < 1e-6);
  }
}

TEST_CASE("sigmoid constraint violations") {
  CHECK_THROWS_AS(RateFunction::sigmoid(1.0), ConstraintViolation);
  CHECK_THROWS_AS(RateFunction::sigmoid(0.5), ConstraintViolation);
  // 4a >= 1 + e^a holds on (1, ~1.92].
  CHECK_THROWS_AS(RateFunction::sigmoid(1.5), ConstraintViolation);
  CHECK_NOTHROW(RateFunction::sigmoid(2.0));
  CHECK_THROWS_AS(RateFunction::sigmoid(std::nan("")), ConstraintViolation);
  CHECK_NOTHROW(RateFunction::sigmoid(2.2));
  const auto message = [](double a) {
    try {
      RateFunction::sigmoid(a);
    } catch (const ConstraintViolation& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(1.0).find("a > 1") != std::string::npos);
  CHECK(message(1.5).find("4a < 1 + e^a") != std::string::npos);
}

TEST_CASE("negative argument rejected") {
  const auto phi = RateFunction::sigmoid(3.0);
  CHECK_THROWS_AS(phi(-1e-9), ConfigError);
}

TEST_CASE("table rate: interpolation, clamping, constants") {
  const auto phi = RateFunction::table({0.0, 1.0, 3.0}, {0.0, 2.0, 5.0});
  CHECK(phi(0.0) == 0.0);
  CHECK(phi(0.5) == doctest::Approx(1.0));
  CHECK(phi(2.0) == doctest::Approx(3.5));
  CHECK(phi(3.0) == 5.0);
  CHECK(phi(100.0) == 5.0);
  CHECK(phi.sup() == 5.0);
  CHECK(phi.lipschitz() == doctest::Approx(2.0));
  CHECK(phi.nondecreasing());
  CHECK(phi.strictly_positive());
  CHECK(phi.derivative(0.5) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(phi.derivative(0.0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(phi.derivative(10.0) == doctest::Approx(0.0));
}

TEST_CASE("table rate: validation and flags") {
  CHECK_THROWS_AS(RateFunction::table({0.0}, {0.0}), ConfigError);
  CHECK_THROWS_AS(RateFunction::table({0.0, 1.0}, {1.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(RateFunction::table({0.5, 1.0}, {0.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(RateFunction::table({0.0, 1.0, 1.0}, {0.0, 1.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(RateFunction::table({0.0, 1.0}, {0.0, -1.0}), ConfigError);
  CHECK_THROWS_AS(RateFunction::table({0.0, 1.0}, {0.0}), ConfigError);
  const auto bump = RateFunction::table({0.0, 1.0, 2.0}, {0.0, 3.0, 1.0});
  CHECK_FALSE(bump.nondecreasing());
  const auto zero = RateFunction::table({0.0, 1.0}, {0.0, 0.0});
  CHECK_FALSE(zero.strictly_positive());
  CHECK(zero.sup() == 0.0);
}

TEST_CASE("model parameters") {
  const ModelParams p(107.78, 50.0, 2.16, RateFunction::sigmoid(3.0));
  CHECK(p.kappa() == doctest::Approx(oracle::kKappa).epsilon(1e-14));
  CHECK(std::abs(p.kappa() * p.beta() * p.lambda() - p.alpha()) <= 4e-16 * p.alpha());
  CHECK(p.with_alpha(10.0).alpha() == 10.0);
  CHECK(p.with_alpha(10.0).beta() == 50.0);
  CHECK_THROWS_AS(ModelParams(0.0, 1.0, 1.0, RateFunction::sigmoid(3.0)), ConfigError);
  CHECK_THROWS_AS(ModelParams(1.0, -1.0, 1.0, RateFunction::sigmoid(3.0)), ConfigError);
  CHECK_THROWS_AS(ModelParams(1.0, 1.0, INFINITY, RateFunction::sigmoid(3.0)), ConfigError);
  CHECK_THROWS_AS(ModelParams(NAN, 1.0, 1.0, RateFunction::sigmoid(3.0)), ConfigError);
}

TEST_CASE("init specs") {
  CHECK_NOTHROW(validate_init(PointMass{2.0, 1.0}));
  CHECK_THROWS_AS(validate_init(PointMass{-1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(validate_init(UniformBand{1.0, 1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(validate_init(UniformBand{1.0, 1.0, -0.1}), ConfigError);
  CHECK_NOTHROW(validate_init(UniformBand{1.0, 1.0, 0.0}));
  CHECK_THROWS_AS(validate_init(Sampled{1.0, {CalciumLaw::Kind::kUniform, 2.0, 1.0}}),
                  ConfigError);
  CHECK_THROWS_AS(validate_init(Sampled{1.0, {CalciumLaw::Kind::kExponential, -1.0, 0.0}}),
                  ConfigError);
  CHECK(init_means(UniformBand{10.0, 0.25, 0.1}) == std::pair{10.0, 0.25});
  CHECK(init_means(Sampled{2.0, {CalciumLaw::Kind::kUniform, 1.0, 3.0}}) ==
        std::pair{2.0, 2.0});
  CHECK(has_deterministic_potential(PointMass{1.0, 1.0}));
  CHECK(has_deterministic_potential(Sampled{1.0, {}}));
  CHECK_FALSE(has_deterministic_potential(UniformBand{1.0, 1.0, 0.1}));
}

TEST_CASE("diagnostics on the standard parameter sets") {
  const auto phi = RateFunction::sigmoid(3.0);
  SUBCASE("reference parameters") {
    const auto d = validate_params(ModelParams(107.78, 50.0, 2.16, phi), 1.0);
    CHECK(d.kappa == doctest::Approx(0.99796).epsilon(1e-5));
    CHECK_FALSE(d.kappa_at_least_D);
    CHECK(d.root_count == 3);
    CHECK(d.root_count_at_D == 3);
    CHECK(d.three_root_structure);
    CHECK(d.sup_rate == doctest::Approx(11.4309).epsilon(1e-5));
    CHECK(d.lipschitz == 3.0);
  }
  SUBCASE("unit parameters") {
    const auto d = validate_params(ModelParams(1.0, 1.0, 1.0, phi), 1.0);
    CHECK(d.kappa == 1.0);
    CHECK(d.kappa_at_least_D);
    CHECK(d.root_count == 3);
  }
  SUBCASE("weak coupling") {
    const auto d = validate_params(ModelParams(0.01, 50.0, 2.16, phi), 1.0);
    CHECK(d.kappa < 1e-4);
    CHECK(d.root_count == 1);
    CHECK_FALSE(d.three_root_structure);
  }
}
