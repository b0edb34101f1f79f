// Worst/average-case errors, complexity profiles, and the strategy order.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "optrec/quadrature.hpp"
#include "optrec/settings.hpp"

using namespace optrec;
using namespace optrec::settings;
using quadrature::RuleKind;
using Catch::Approx;

namespace {

StrategyMember trap_member(int n) { return quadrature::trapezoid_strategy().member(n); }
StrategyMember simpson_member(int n) { return quadrature::simpson_strategy().member(n); }

std::vector<double> equispaced(int count) {
  std::vector<double> xs(count);
  for (int i = 0; i < count; ++i) xs[i] = double(i) / (count - 1);
  return xs;
}

StrategyMember zero_member(std::vector<double> nodes) {
  StrategyMember m;
  m.information.points = std::move(nodes);
  m.algorithm = [](const DataVector&) { return 0.0; };
  return m;
}

}  // namespace

TEST_CASE("bump profile matches hand-computed normalizers", "[settings]") {
  // (u(1-u))^1: integral 1/6; sup of value/first/second derivative = 1/4, 1, 2.
  auto b2 = detail::bump_profile(2);
  CHECK(b2.m == 1);
  CHECK(b2.unit_integral == Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(b2.scale == Approx(2.0).epsilon(1e-12));

  // (u(1-u))^2: integral (2!)^2/5! = 1/30; the fourth derivative (constant 24)
  // dominates every lower one.
  auto b4 = detail::bump_profile(4);
  CHECK(b4.m == 2);
  CHECK(b4.unit_integral == Approx(1.0 / 30.0).epsilon(1e-14));
  CHECK(b4.scale == Approx(24.0).epsilon(1e-12));

  auto b0 = detail::bump_profile(0);
  CHECK(b0.m == 1);
  CHECK(b0.scale == Approx(0.25).epsilon(1e-12));

  auto b1 = detail::bump_profile(1);
  CHECK(b1.m == 1);
  CHECK(b1.scale == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("adversarial lower bound reproduces closed forms", "[settings]") {
  // One gap [0,1], r = 2: scaled bump u(1-u)/2 integrates to 1/12.
  const double one_gap = worst_case_error_lower(trap_member(1), {2, 1.0});
  CHECK(one_gap == Approx(1.0 / 12.0).epsilon(1e-12));
  CHECK(one_gap >= 1.0 / 16.0);

  // Two gaps of width 1/2 scale each contribution by (1/2)^3.
  CHECK(worst_case_error_lower(trap_member(2), {2, 1.0}) == Approx(1.0 / 48.0).epsilon(1e-12));

  // r = 4 on one gap: (u(1-u))^2/24 integrates to 1/720.
  CHECK(worst_case_error_lower(trap_member(1), {4, 1.0}) == Approx(1.0 / 720.0).epsilon(1e-12));

  SECTION("linear in the ball bound, vanishing as it shrinks") {
    const double base = worst_case_error_lower(trap_member(3), {2, 1.0});
    CHECK(worst_case_error_lower(trap_member(3), {2, 0.01}) == Approx(0.01 * base).epsilon(1e-10));
    CHECK(worst_case_error_lower(trap_member(3), {2, 1e-12}) < 1e-12);
  }

  SECTION("equispaced nodes meet the trapezoid remainder exactly") {
    for (int n : {1, 2, 4, 8}) {
      const double lower = worst_case_error_lower(trap_member(n), {2, 1.0});
      CHECK(lower == Approx(1.0 / (12.0 * n * n)).epsilon(1e-12));
    }
  }
}

TEST_CASE("lower bound accounts for the algorithm's zero-data offset", "[settings]") {
  StrategyMember biased = zero_member({0.0, 1.0});
  biased.algorithm = [](const DataVector&) { return 5.0; };
  CHECK(worst_case_error_lower(biased, {2, 1.0}) == Approx(5.0 + 1.0 / 12.0).epsilon(1e-12));
  biased.algorithm = [](const DataVector&) { return -3.0; };
  CHECK(worst_case_error_lower(biased, {2, 1.0}) == Approx(3.0 + 1.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("lower bound never exceeds the analytic upper bound", "[settings]") {
  const std::vector<SmoothnessBall> balls = {{2, 1.0}, {2, 7.5}, {4, 1.0}, {4, 0.3}};
  for (const auto& ball : balls) {
    for (int n : {1, 2, 3, 5, 8, 13}) {
      const double lo_t = worst_case_error_lower(trap_member(n), ball);
      const double up_t = worst_case_error_upper({RuleKind::Trapezoid, n}, ball);
      CHECK(lo_t <= up_t * (1.0 + 1e-9));
      if (ball.r >= 4) {
        const double lo_s = worst_case_error_lower(simpson_member(n), ball);
        const double up_s = worst_case_error_upper({RuleKind::Simpson, n}, ball);
        CHECK(lo_s <= up_s * (1.0 + 1e-9));
      }
    }
  }

  SECTION("at equal cost Simpson's node set is never easier to fool") {
    for (int n = 1; n <= 6; ++n) {
      const double simpson = worst_case_error_lower(simpson_member(n), {4, 1.0});
      const double trap = worst_case_error_lower(trap_member(2 * n), {4, 1.0});
      CHECK(simpson <= trap + 1e-15);
    }
  }
}

TEST_CASE("lower bound rejects unusable members", "[settings]") {
  CHECK_THROWS_AS(worst_case_error_lower(quadrature::monte_carlo_strategy().member(8), {2, 1.0}),
                  usage_error);

  StrategyMember noisy = trap_member(2);
  noisy.information.noise = NoiseModel::gaussian(0.1);
  CHECK_THROWS_AS(worst_case_error_lower(noisy, {2, 1.0}), usage_error);

  StrategyMember shifted = zero_member({0.0, 2.0});
  shifted.information.domain_hi = 2.0;
  CHECK_THROWS_AS(worst_case_error_lower(shifted, {2, 1.0}), usage_error);

  StrategyMember empty = trap_member(2);
  empty.algorithm = nullptr;
  CHECK_THROWS_AS(worst_case_error_lower(empty, {2, 1.0}), usage_error);

  CHECK_THROWS_AS(worst_case_error_lower(trap_member(2), {-1, 1.0}), usage_error);
  CHECK_THROWS_AS(worst_case_error_lower(trap_member(2), {2, 0.0}), usage_error);
  CHECK_THROWS_AS(worst_case_error_lower(trap_member(2), {2, 1.0}, 1, -1), usage_error);
}

TEST_CASE("analytic upper bounds and their preconditions", "[settings]") {
  CHECK(worst_case_error_upper({RuleKind::Trapezoid, 10}, {2, 1.0}) ==
        Approx(1.0 / 1200.0).epsilon(1e-15));
  CHECK(worst_case_error_upper({RuleKind::Simpson, 10}, {4, 1.0}) ==
        Approx(1.0 / 2.88e7).epsilon(1e-15));

  // Doubling n quarters the trapezoid bound.
  for (int n : {1, 3, 7}) {
    const double full = worst_case_error_upper({RuleKind::Trapezoid, n}, {2, 2.0});
    const double half = worst_case_error_upper({RuleKind::Trapezoid, 2 * n}, {2, 2.0});
    CHECK(half == Approx(full / 4.0).epsilon(1e-15));
  }

  CHECK_THROWS_AS(worst_case_error_upper({RuleKind::Trapezoid, 4}, {1, 1.0}), usage_error);
  CHECK_THROWS_AS(worst_case_error_upper({RuleKind::Simpson, 4}, {3, 1.0}), usage_error);
  CHECK_THROWS_AS(worst_case_error_upper({RuleKind::GaussLegendre, 4}, {4, 1.0}), usage_error);
  CHECK_THROWS_AS(worst_case_error_upper({RuleKind::MonteCarlo, 4}, {4, 1.0}), usage_error);
  CHECK_THROWS_AS(worst_case_error_upper({RuleKind::Trapezoid, 0}, {2, 1.0}), usage_error);
}

TEST_CASE("path sampling is a seeded random walk with cumulative folds", "[settings]") {
  const WienerMeasure flat{0, 9};
  const GriddedFunction path = sample_path(flat, 99);
  REQUIRE(path.grid.size() == 9);
  CHECK(path.values[0] == 0.0);
  CHECK(path.grid.front() == 0.0);
  CHECK(path.grid.back() == 1.0);

  // Reproduce the walk directly from the same generator.
  SeededRng rng(99);
  double acc = 0.0;
  const double step = std::sqrt(1.0 / 8.0);
  for (std::size_t j = 1; j < 9; ++j) {
    acc += step * rng.normal();
    CHECK(path.values[j] == acc);
  }

  const GriddedFunction again = sample_path(flat, 99);
  CHECK(again.values == path.values);
  CHECK(sample_path(flat, 100).values != path.values);

  SECTION("one fold is the cumulative trapezoid integral of the walk") {
    const GriddedFunction folded = sample_path({1, 9}, 99);
    double run = 0.0;
    CHECK(folded.values[0] == 0.0);
    for (std::size_t j = 1; j < 9; ++j) {
      run += 0.5 * (1.0 / 8.0) * (path.values[j - 1] + path.values[j]);
      CHECK(folded.values[j] == Approx(run).margin(1e-15));
    }
  }

  CHECK_THROWS_AS(sample_path({-1, 9}, 0), usage_error);
  CHECK_THROWS_AS(sample_path({0, 1}, 0), usage_error);
}

TEST_CASE("path covariance matches min(s,t)", "[settings]") {
  const WienerMeasure measure{0, 512};
  const int paths = 10000;
  double sum = 0.0, sumsq = 0.0;
  for (int t = 0; t < paths; ++t) {
    const GriddedFunction path = sample_path(measure, derive_seed(7777, t));
    const double prod =
        detail::eval_linear(path, 0.3) * detail::eval_linear(path, 0.7);
    sum += prod;
    sumsq += prod * prod;
  }
  const double mean = sum / paths;
  const double var = (sumsq - paths * mean * mean) / (paths - 1.0);
  const double se = std::sqrt(var / paths);
  CHECK(std::abs(mean - 0.3) <= 3.0 * se);
  CHECK(std::abs(mean - 0.3) < 0.02);
}

TEST_CASE("average error of the trapezoid member follows the bridge law", "[settings]") {
  // Panel-wise Brownian bridges make the n-panel trapezoid error a centered
  // Gaussian with variance 1/(12 n^2), so the mean absolute error is
  // sqrt(2/pi) / (sqrt(12) n).  The grid is chosen so rule nodes land on
  // grid points.
  const WienerMeasure measure{0, 4097};
  const AverageCaseResult r8 = average_case_error(trap_member(8), measure, 2000, 42);
  const double expected = std::sqrt(2.0 / pi) / (std::sqrt(12.0) * 8.0);
  CHECK(r8.trials == 2000);
  CHECK(std::abs(r8.mean - expected) < 2.5e-3);
  CHECK(r8.std_error > 2e-4);
  CHECK(r8.std_error < 8e-4);

  SECTION("deterministic for a fixed seed") {
    const AverageCaseResult again = average_case_error(trap_member(8), measure, 2000, 42);
    CHECK(again.mean == r8.mean);
    CHECK(again.std_error == r8.std_error);
    const AverageCaseResult other = average_case_error(trap_member(8), measure, 2000, 43);
    CHECK(other.mean != r8.mean);
  }

  SECTION("more panels help, far beyond the Monte Carlo noise") {
    const AverageCaseResult r64 = average_case_error(trap_member(64), measure, 2000, 42);
    const double gap = r8.mean - r64.mean;
    CHECK(gap > 5.0 * std::sqrt(r8.std_error * r8.std_error + r64.std_error * r64.std_error));
  }
}

TEST_CASE("average-case preconditions", "[settings]") {
  CHECK_THROWS_AS(average_case_error(trap_member(4), {0, 4096}, 99, 1), usage_error);
  // 10 nodes cannot be resolved by an 8-point grid.
  CHECK_THROWS_AS(average_case_error(trap_member(9), {0, 8}, 200, 1), usage_error);
  StrategyMember shifted = zero_member({0.0, 2.0});
  shifted.information.domain_hi = 2.0;
  CHECK_THROWS_AS(average_case_error(shifted, {0, 4096}, 200, 1), usage_error);
  CHECK_THROWS_AS(average_case_error(trap_member(4), {0, 1}, 200, 1), usage_error);
}

TEST_CASE("complexity profiles pick the minimal guaranteed n", "[settings]") {
  // Ball bound 12 makes the trapezoid guarantee exactly n^-2.
  const auto profile =
      complexity(quadrature::trapezoid_strategy(), {2, 12.0}, {1e-2, 2.0, 1e-4, 0.1, 1e-2});
  REQUIRE(profile.epsilons == std::vector<double>{2.0, 0.1, 1e-2, 1e-4});
  CHECK(profile.indices == std::vector<int>{1, 4, 10, 100});
  CHECK(profile.costs == std::vector<long>{2, 5, 11, 101});
  CHECK(profile.flagged == std::vector<char>{1, 0, 0, 0});
  for (std::size_t i = 1; i < profile.costs.size(); ++i)
    CHECK(profile.costs[i] >= profile.costs[i - 1]);
  CHECK(profile.to_csv().rfind("epsilon,index,cost,flagged,slope\n", 0) == 0);

  const auto simpson = complexity(quadrature::simpson_strategy(), {4, 2880.0}, {1e-4});
  CHECK(simpson.indices == std::vector<int>{10});
  CHECK(simpson.costs == std::vector<long>{21});

  SECTION("huge tolerance is satisfied by the smallest member, flagged") {
    const auto loose = complexity(quadrature::trapezoid_strategy(), {2, 1.0}, {1e6, 2e6});
    CHECK(loose.costs == std::vector<long>{2, 2});
    CHECK(loose.flagged == std::vector<char>{1, 1});
    CHECK_FALSE(loose.slope_defined);
  }
}

TEST_CASE("complexity slopes track the convergence orders", "[settings]") {
  const std::vector<double> eps{1e-2, 1e-3, 1e-4, 1e-5};
  const auto trap = complexity(quadrature::trapezoid_strategy(), {4, 1e8}, eps);
  REQUIRE(trap.slope_defined);
  CHECK(trap.slope == Approx(0.5).margin(0.02));

  const auto simpson = complexity(quadrature::simpson_strategy(), {4, 1e8}, eps);
  REQUIRE(simpson.slope_defined);
  CHECK(simpson.slope == Approx(0.25).margin(0.02));

  SECTION("slope is the reciprocal of the fitted convergence exponent") {
    const auto probe = [](double t) { return std::exp(t); };
    const std::vector<int> ns{4, 8, 16, 32, 64};
    const auto ft = quadrature::estimate_exponent(RuleKind::Trapezoid, probe, ns);
    const auto fs = quadrature::estimate_exponent(RuleKind::Simpson, probe, ns);
    CHECK(std::abs(trap.slope - 1.0 / ft.fitted_exponent) < 0.05);
    CHECK(std::abs(simpson.slope - 1.0 / fs.fitted_exponent) < 0.05);
  }
}

TEST_CASE("complexity preconditions", "[settings]") {
  CHECK_THROWS_AS(complexity(quadrature::gauss_legendre_strategy(), {4, 1.0}, {1e-3}),
                  usage_error);
  CHECK_THROWS_AS(complexity(quadrature::monte_carlo_strategy(), {4, 1.0}, {1e-3}), usage_error);
  CHECK_THROWS_AS(complexity(quadrature::trapezoid_strategy(), {1, 1.0}, {1e-3}), usage_error);
  CHECK_THROWS_AS(complexity(quadrature::trapezoid_strategy(), {2, 1.0}, {}), usage_error);
  CHECK_THROWS_AS(complexity(quadrature::trapezoid_strategy(), {2, 1.0}, {1e-3, -1.0}),
                  usage_error);
}

TEST_CASE("criterion and outcome names round trip", "[settings]") {
  for (Criterion c : {Criterion::Exponent, Criterion::WorstCase, Criterion::AverageCase,
                      Criterion::Complexity})
    CHECK(criterion_from_name(criterion_name(c)) == c);
  CHECK_THROWS_AS(criterion_from_name("fastest"), usage_error);
  CHECK(std::string(outcome_name(Outcome::Equivalent)) == "equivalent");
  CHECK(std::string(outcome_name(Outcome::Incomparable)) == "incomparable");
}

TEST_CASE("every criterion is reflexively equivalent", "[settings]") {
  const Strategy trap = quadrature::trapezoid_strategy();
  CompareOptions opts;
  opts.ball = {4, 1.0};
  opts.measure = {0, 1024};
  opts.trials = 200;
  opts.max_index = 4;
  for (Criterion c : {Criterion::Exponent, Criterion::WorstCase, Criterion::AverageCase,
                      Criterion::Complexity}) {
    const ComparisonVerdict v = compare(trap, trap, c, opts);
    INFO(criterion_name(c));
    CHECK(v.outcome == Outcome::Equivalent);
    CHECK_FALSE(v.evidence.empty());
  }
}

TEST_CASE("exponent criterion orders the composite rules", "[settings]") {
  const Strategy trap = quadrature::trapezoid_strategy();
  const Strategy simpson = quadrature::simpson_strategy();
  const ComparisonVerdict v = compare(simpson, trap, Criterion::Exponent);
  CHECK(v.outcome == Outcome::FirstNotWorse);
  CHECK(v.evidence.size() == CompareOptions{}.exponent_indices.size());
  CHECK(v.detail.find("fitted exponents") != std::string::npos);
  CHECK(compare(trap, simpson, Criterion::Exponent).outcome == Outcome::SecondNotWorse);

  // An exactly-integrating family beats any fixed finite order.
  const ComparisonVerdict g =
      compare(quadrature::gauss_legendre_strategy(), trap, Criterion::Exponent);
  CHECK(g.outcome == Outcome::FirstNotWorse);
}

TEST_CASE("complexity criterion matches the known cost growth", "[settings]") {
  const Strategy trap = quadrature::trapezoid_strategy();
  const Strategy simpson = quadrature::simpson_strategy();
  CompareOptions opts;
  opts.ball = {4, 1.0};
  CHECK(compare(trap, simpson, Criterion::Complexity, opts).outcome ==
        Outcome::SecondNotWorse);
  CHECK(compare(simpson, trap, Criterion::Complexity, opts).outcome ==
        Outcome::FirstNotWorse);

  SECTION("needs three epsilons binding for both strategies") {
    opts.epsilons = {1e-2, 1e-3};
    CHECK_THROWS_AS(compare(trap, simpson, Criterion::Complexity, opts), usage_error);
  }
}

TEST_CASE("matched-cost domination detects a one-sided family", "[settings]") {
  const Strategy trap = quadrature::trapezoid_strategy();
  Strategy lazy;
  lazy.name = "lazy";
  lazy.member_at = [](int) { return quadrature::trapezoid_strategy().member(1); };
  lazy.cost_of = [](int) { return 2L; };

  CompareOptions opts;
  opts.ball = {2, 1.0};
  opts.max_index = 6;
  const ComparisonVerdict w = compare(trap, lazy, Criterion::WorstCase, opts);
  CHECK(w.outcome == Outcome::FirstNotWorse);
  CHECK(compare(lazy, trap, Criterion::WorstCase, opts).outcome == Outcome::SecondNotWorse);
  for (std::size_t i = 1; i < w.evidence.size(); ++i)
    CHECK(w.evidence[i].at > w.evidence[i - 1].at);

  SECTION("the same ordering shows up on average") {
    opts.measure = {0, 1024};
    opts.trials = 300;
    const ComparisonVerdict a = compare(trap, lazy, Criterion::AverageCase, opts);
    CHECK(a.outcome == Outcome::FirstNotWorse);
  }
}

TEST_CASE("strategies that trade wins are incomparable", "[settings]") {
  const auto family = [](bool odd_is_poor) {
    Strategy s;
    s.name = odd_is_poor ? "alternating-a" : "alternating-b";
    s.member_at = [odd_is_poor](int i) {
      const bool poor = odd_is_poor ? (i % 2 == 1) : (i % 2 == 0);
      return zero_member(poor ? std::vector<double>{0.0, 1.0} : equispaced(65));
    };
    s.cost_of = [](int i) { return long(i); };
    return s;
  };
  CompareOptions opts;
  opts.ball = {2, 1.0};
  opts.max_index = 6;
  const ComparisonVerdict v =
      compare(family(true), family(false), Criterion::WorstCase, opts);
  CHECK(v.outcome == Outcome::Incomparable);
}

TEST_CASE("comparison preconditions", "[settings]") {
  const Strategy trap = quadrature::trapezoid_strategy();
  const Strategy mc = quadrature::monte_carlo_strategy();

  CompareOptions bad;
  bad.min_index = 0;
  CHECK_THROWS_AS(compare(trap, trap, Criterion::Exponent, bad), usage_error);

  CHECK_THROWS_AS(compare(mc, trap, Criterion::WorstCase), usage_error);
  CHECK_THROWS_AS(compare(quadrature::gauss_legendre_strategy(), trap, Criterion::Complexity),
                  usage_error);

  CompareOptions few;
  few.exponent_indices = {4, 8};
  CHECK_THROWS_AS(compare(trap, trap, Criterion::Exponent, few), usage_error);

  CompareOptions under;
  under.trials = 50;
  under.max_index = 2;
  CHECK_THROWS_AS(compare(trap, trap, Criterion::AverageCase, under), usage_error);
}
