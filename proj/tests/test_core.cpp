#include "optrec/core.hpp"

#include <cmath>

#include "catch2/catch_amalgamated.hpp"
#include "optrec/quadrature.hpp"

using namespace optrec;

TEST_CASE("exact information samples the function at the given points") {
  InformationOperator info;
  info.points = {0.0, 0.5, 1.0};
  const DataVector d = apply_information(info, [](double t) { return t * t; });
  REQUIRE(d.values == std::vector<double>{0.0, 0.25, 1.0});
  REQUIRE_FALSE(d.seed.has_value());
  REQUIRE(d.provenance.points == info.points);
}

TEST_CASE("operator validation rejects bad configurations") {
  InformationOperator info;
  SECTION("no points") {
    REQUIRE_THROWS_AS(apply_information(info, [](double) { return 0.0; }), usage_error);
  }
  SECTION("point outside the domain") {
    info.points = {0.5, 1.5};
    REQUIRE_THROWS_AS(apply_information(info, [](double) { return 0.0; }), domain_error);
  }
  SECTION("inverted domain") {
    info.points = {0.5};
    info.domain_lo = 1.0;
    info.domain_hi = 0.0;
    REQUIRE_THROWS_AS(apply_information(info, [](double) { return 0.0; }), usage_error);
  }
  SECTION("randomized without sample count") {
    info.randomized = true;
    REQUIRE_THROWS_AS(apply_information(info, [](double) { return 0.0; }, 1u), usage_error);
  }
  SECTION("empty function") {
    info.points = {0.5};
    REQUIRE_THROWS_AS(apply_information(info, RealFunction{}), usage_error);
  }
}

TEST_CASE("seed is mandatory exactly when randomness is involved") {
  InformationOperator info;
  info.points = {0.25, 0.75};
  auto f = [](double t) { return t; };

  SECTION("noisy operator without seed") {
    info.noise = NoiseModel::gaussian(0.1);
    REQUIRE_THROWS_AS(apply_information(info, f), usage_error);
  }
  SECTION("randomized operator without seed") {
    info.points.clear();
    info.randomized = true;
    info.sample_count = 3;
    REQUIRE_THROWS_AS(apply_information(info, f), usage_error);
  }
  SECTION("deterministic operator tolerates an unused seed") {
    const DataVector d = apply_information(info, f, 42u);
    REQUIRE(d.values == std::vector<double>{0.25, 0.75});
  }
}

TEST_CASE("zero-variance gaussian noise reproduces exact values") {
  InformationOperator exact;
  exact.points = {0.1, 0.2, 0.9};
  InformationOperator noisy = exact;
  noisy.noise = NoiseModel::gaussian(0.0);
  auto f = [](double t) { return std::exp(t); };
  const DataVector a = apply_information(exact, f);
  const DataVector b = apply_information(noisy, f, 7u);
  REQUIRE(a.values == b.values);
}

TEST_CASE("gaussian noise is seed-deterministic with plausible statistics") {
  InformationOperator info;
  info.points.assign(4000, 0.5);
  info.noise = NoiseModel::gaussian(0.25);
  auto f = [](double) { return 1.0; };

  const DataVector a = apply_information(info, f, 123u);
  const DataVector b = apply_information(info, f, 123u);
  const DataVector c = apply_information(info, f, 124u);
  REQUIRE(a.values == b.values);
  REQUIRE(a.values != c.values);

  double mean = 0.0, var = 0.0;
  for (double v : a.values) mean += v;
  mean /= static_cast<double>(a.values.size());
  for (double v : a.values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(a.values.size() - 1);
  REQUIRE(mean == Catch::Approx(1.0).margin(0.25 * 5.0 / std::sqrt(4000.0)));
  REQUIRE(std::sqrt(var) == Catch::Approx(0.25).epsilon(0.1));
}

TEST_CASE("bounded noise stays inside its ball") {
  InformationOperator info;
  info.points = {0.1, 0.3, 0.5, 0.7, 0.9};
  info.noise = NoiseModel::bounded_l2(0.05);
  auto f = [](double t) { return t; };
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const DataVector d = apply_information(info, f, seed);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < d.values.size(); ++i) {
      const double n = d.values[i] - info.points[i];
      norm2 += n * n;
    }
    REQUIRE(std::sqrt(norm2) <= 0.05 + 1e-15);
  }
}

TEST_CASE("randomized operators draw nodes inside the domain and record them") {
  InformationOperator info;
  info.randomized = true;
  info.sample_count = 64;
  info.domain_lo = 2.0;
  info.domain_hi = 3.0;
  const DataVector d = apply_information(info, [](double t) { return 2.0 * t; }, 99u);
  REQUIRE(d.provenance.points.size() == 64);
  for (std::size_t i = 0; i < d.provenance.points.size(); ++i) {
    const double x = d.provenance.points[i];
    REQUIRE(x >= 2.0);
    REQUIRE(x < 3.0);
    REQUIRE(d.values[i] == 2.0 * x);
  }
}

TEST_CASE("provenance replays bit-for-bit") {
  auto f = [](double t) { return std::sin(3.0 * t); };

  InformationOperator noisy;
  noisy.points = {0.2, 0.4, 0.6, 0.8};
  noisy.noise = NoiseModel::gaussian(0.3);
  const DataVector a = apply_information(noisy, f, 2024u);
  const DataVector a2 = apply_information(a.provenance, f, *a.seed);
  REQUIRE(a.values == a2.values);

  InformationOperator random;
  random.randomized = true;
  random.sample_count = 17;
  random.noise = NoiseModel::gaussian(0.05);
  const DataVector b = apply_information(random, f, 5u);
  const DataVector b2 = apply_information(b.provenance, f, *b.seed);
  REQUIRE(b.values == b2.values);

  InformationOperator bounded;
  bounded.points = {0.25, 0.5, 0.75};
  bounded.noise = NoiseModel::bounded_l2(0.1);
  const DataVector c = apply_information(bounded, f, 6u);
  const DataVector c2 = apply_information(c.provenance, f, *c.seed);
  REQUIRE(c.values == c2.values);
}

TEST_CASE("running a trapezoid member matches the direct rule") {
  const Strategy trap = quadrature::trapezoid_strategy();
  auto f = [](double t) { return t * t; };

  // n = 2 on t^2: (1/4)(f(0) + f(1) + 2 f(1/2)) = 3/8.
  REQUIRE(run_strategy(trap.member(2), f) == 0.375);
  for (int n : {1, 3, 7, 20})
    REQUIRE(run_strategy(trap.member(n), f) == quadrature::trapezoid(f, n));
}

TEST_CASE("strategy bookkeeping") {
  const Strategy trap = quadrature::trapezoid_strategy();
  REQUIRE(trap.cost(1) == 2);
  REQUIRE(trap.cost(10) == 11);
  REQUIRE_THROWS_AS(trap.member(0), usage_error);
  REQUIRE_THROWS_AS(trap.cost(-3), usage_error);

  const Strategy gauss = quadrature::gauss_legendre_strategy();
  REQUIRE_THROWS_AS(gauss.member(65), usage_error);

  Strategy empty;
  REQUIRE_THROWS_AS(empty.member(1), usage_error);
}

TEST_CASE("algorithm failures carry context") {
  StrategyMember m;
  m.information.points = {0.5};
  m.algorithm = [](const DataVector&) -> double { throw std::runtime_error("boom"); };
  REQUIRE_THROWS_MATCHES(run_strategy(m, [](double) { return 0.0; }), numeric_error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("boom")));
}

TEST_CASE("distance between answers") {
  REQUIRE(distance(0.375, 1.0 / 3.0) == Catch::Approx(1.0 / 24.0).epsilon(1e-15));

  GriddedFunction a{{0.0, 0.5, 1.0}, {1.0, 2.0, 3.0}};
  GriddedFunction b{{0.0, 0.5, 1.0}, {1.5, 1.0, 3.25}};
  REQUIRE(distance(a, b) == 1.0);

  GriddedFunction short_grid{{0.0, 1.0}, {1.0, 3.0}};
  REQUIRE_THROWS_AS(distance(a, short_grid), usage_error);

  GriddedFunction other{{0.0, 0.25, 1.0}, {1.0, 2.0, 3.0}};
  REQUIRE_THROWS_AS(distance(a, other), usage_error);
}

TEST_CASE("problem construction is validated") {
  REQUIRE_THROWS_AS(Problem1D({}, 0.0, 1.0), usage_error);
  REQUIRE_THROWS_AS(
      Problem1D([](const RealFunction&) { return 0.0; }, 1.0, 0.0), usage_error);
  const Problem1D p = quadrature::integration_problem();
  REQUIRE(p.solution_map([](double t) { return t * t; }) == Catch::Approx(1.0 / 3.0).epsilon(1e-15));
}
