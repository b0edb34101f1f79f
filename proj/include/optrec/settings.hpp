#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "optrec/common.hpp"
#include "optrec/core.hpp"
#include "optrec/parallel.hpp"
#include "optrec/quadrature.hpp"

// Error criteria for integration strategies and the partial order they
// induce.  The true worst-case error over a smoothness ball is not computable
// exactly, so it is bracketed: a certified adversarial lower bound (built
// from polynomial bumps that vanish on the information nodes) and an analytic
// upper bound for the composite rules.  Average-case errors are Monte Carlo
// means over integrated-random-walk paths.  Complexity profiles always use
// the analytic upper bound, so a profile is a guarantee rather than an
// estimate, while comparisons at matched cost use the adversarial bound,
// which is available for any fixed-node member.

namespace optrec::settings {

// F0 = {f in C^r([0,1]) : |f^(k)| <= bound for all 0 <= k <= r}.
struct SmoothnessBall {
  int r = 2;
  double bound = 1.0;

  void validate() const {
    if (r < 0 || r > 40)
      throw usage_error("SmoothnessBall: derivative order must be in [0, 40]");
    if (!(bound > 0.0) || !std::isfinite(bound))
      throw usage_error("SmoothnessBall: bound must be positive and finite");
  }
};

// fold-times integrated Brownian motion on [0,1], represented by its values
// on a uniform grid and treated as piecewise linear in between.  Paths start
// at 0; each integration is a cumulative trapezoid sum.
struct WienerMeasure {
  int fold = 0;
  int grid_size = 4096;

  void validate() const {
    if (fold < 0) throw usage_error("WienerMeasure: fold must be >= 0");
    if (grid_size < 2) throw usage_error("WienerMeasure: grid_size must be >= 2");
  }
};

namespace detail {

// Monomial coefficients (ascending powers) of b(u) = (u(1-u))^m.
inline std::vector<double> bump_coefficients(int m) {
  std::vector<double> c(2 * m + 1, 0.0);
  double binom = 1.0;  // C(m, j)
  for (int j = 0; j <= m; ++j) {
    c[static_cast<std::size_t>(m + j)] = (j % 2 == 0) ? binom : -binom;
    binom = binom * (m - j) / (j + 1);
  }
  return c;
}

inline std::vector<double> poly_derivative(const std::vector<double>& c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = c[k] * static_cast<double>(k);
  return d;
}

inline double poly_eval(const std::vector<double>& c, double u) {
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) acc = acc * u + c[k];
  return acc;
}

// sup |p| on [0,1]: dense scan plus a golden-section polish of the best
// bracket.  Used to normalize the bump so the scaled copy stays in the ball;
// an overestimate would only make the lower bound smaller, never invalid.
inline double poly_sup(const std::vector<double>& c) {
  constexpr int grid = 4096;
  double best = 0.0;
  int best_i = 0;
  for (int i = 0; i <= grid; ++i) {
    const double v = std::abs(poly_eval(c, static_cast<double>(i) / grid));
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  double lo = std::max(0.0, (best_i - 1.0) / grid);
  double hi = std::min(1.0, (best_i + 1.0) / grid);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = std::abs(poly_eval(c, x1)), f2 = std::abs(poly_eval(c, x2));
  while (hi - lo > 1e-14) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = std::abs(poly_eval(c, x2));
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = std::abs(poly_eval(c, x1));
    }
  }
  return std::max({best, f1, f2});
}

// Shared data for the per-gap bump construction: b(u) = (u(1-u))^m with
// m = max(1, ceil(r/2)), its integral over [0,1] (the Beta value
// (m!)^2/(2m+1)!) and the normalizer max_{k<=r} sup |b^(k)|.  A gap of width
// h carries the scaled copy bound * h^r / scale * b((t-lo)/h), whose k-th
// derivative is at most bound * h^(r-k) <= bound, and whose integral is
// bound * h^(r+1) * unit_integral / scale.
struct BumpProfile {
  int m = 1;
  double unit_integral = 0.0;
  double scale = 0.0;
};

inline BumpProfile bump_profile(int r) {
  BumpProfile b;
  b.m = std::max(1, (r + 1) / 2);
  double central = 1.0;  // C(2m, m)
  for (int k = 1; k <= b.m; ++k) central = central * (b.m + k) / k;
  b.unit_integral = 1.0 / ((2.0 * b.m + 1.0) * central);
  auto c = bump_coefficients(b.m);
  double sup = poly_sup(c);
  for (int k = 1; k <= r; ++k) {
    c = poly_derivative(c);
    sup = std::max(sup, poly_sup(c));
  }
  b.scale = sup;
  return b;
}

// Widths of the maximal node-free intervals of [0,1].
inline std::vector<double> node_gaps(std::vector<double> nodes) {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  std::vector<double> gaps;
  double prev = 0.0;
  for (double x : nodes) {
    if (x - prev > 0.0) gaps.push_back(x - prev);
    prev = x;
  }
  if (1.0 - prev > 0.0) gaps.push_back(1.0 - prev);
  return gaps;
}

}  // namespace detail

// Certified lower bound on sup{|S(f) - A(N f)| : f in the ball} for the
// integration problem S = int_0^1.  Builds one scaled bump per node-free gap
// (the data N f* is then identically zero, so the algorithm output is the
// fixed value A(0)) and searches signed gap amplitudes for the largest
// |S(f*) - A(0)|.  The objective is linear in the amplitudes, so the signed
// extremes are evaluated directly and a seeded random-restart coordinate
// ascent over the first 32 gap amplitudes is run on top, as a guard for
// algorithms whose A(0) offset makes one sign pattern better than the other.
inline double worst_case_error_lower(const StrategyMember& member, const SmoothnessBall& ball,
                                     std::uint64_t seed = 0x5e771e5, int restarts = 8) {
  ball.validate();
  member.information.validate();
  if (!member.algorithm) throw usage_error("worst_case_error_lower: member has no algorithm");
  if (member.information.randomized || member.information.noise.kind != NoiseKind::Exact ||
      member.information.domain_lo != 0.0 || member.information.domain_hi != 1.0)
    throw usage_error(
        "worst_case_error_lower: unsupported member; needs exact fixed-node evaluation on "
        "[0,1]");
  if (restarts < 0) throw usage_error("worst_case_error_lower: restarts must be >= 0");

  DataVector zero;
  zero.provenance = member.information;
  zero.values.assign(member.information.points.size(), 0.0);
  double a0 = 0.0;
  try {
    a0 = member.algorithm(zero);
  } catch (const std::exception& e) {
    throw numeric_error(std::string("worst_case_error_lower: algorithm failed on zero data: ") +
                        e.what());
  }
  if (!std::isfinite(a0))
    throw numeric_error("worst_case_error_lower: algorithm is not finite on zero data");

  const detail::BumpProfile bump = detail::bump_profile(ball.r);
  std::vector<double> contrib;
  for (double h : detail::node_gaps(member.information.points))
    contrib.push_back(ball.bound * std::pow(h, ball.r + 1) * bump.unit_integral / bump.scale);

  double total = 0.0;
  for (double c : contrib) total += c;
  // Extremes of the linear objective |sum a_j c_j - a0| over a in [-1,1]^G.
  double best = std::max(std::abs(total - a0), std::abs(-total - a0));

  const std::size_t searched = std::min<std::size_t>(contrib.size(), 32);
  double pinned = 0.0;  // gaps beyond the searched block stay at +1
  for (std::size_t j = searched; j < contrib.size(); ++j) pinned += contrib[j];

  SeededRng rng(seed);
  std::vector<double> amp(searched);
  for (int round = 0; round < restarts && searched > 0; ++round) {
    for (double& a : amp) a = rng.uniform(-1.0, 1.0);
    double sum = pinned;
    for (std::size_t j = 0; j < searched; ++j) sum += amp[j] * contrib[j];
    bool moved = true;
    for (int sweep = 0; sweep < 64 && moved; ++sweep) {
      moved = false;
      for (std::size_t j = 0; j < searched; ++j) {
        const double rest = sum - amp[j] * contrib[j];
        const double up = std::abs(rest + contrib[j] - a0);
        const double dn = std::abs(rest - contrib[j] - a0);
        const double pick = (up >= dn) ? 1.0 : -1.0;
        if (pick != amp[j]) {
          amp[j] = pick;
          sum = rest + pick * contrib[j];
          moved = true;
        }
      }
    }
    best = std::max(best, std::abs(sum - a0));
  }
  return best;
}

// Analytic worst-case bound over the ball for the composite rules: the
// classical remainder terms bound/(12 n^2) for the trapezoid rule (valid once
// second derivatives are constrained) and bound/(2880 n^4) for Simpson
// (fourth derivatives).  Other rules have no comparable closed form here.
inline double worst_case_error_upper(const quadrature::QuadratureRule& rule,
                                     const SmoothnessBall& ball) {
  ball.validate();
  if (rule.n < 1) throw usage_error("worst_case_error_upper: rule needs n >= 1");
  const double n = rule.n;
  switch (rule.kind) {
    case quadrature::RuleKind::Trapezoid:
      if (ball.r < 2)
        throw usage_error("worst_case_error_upper: trapezoid bound needs derivative order >= 2");
      return ball.bound / (12.0 * n * n);
    case quadrature::RuleKind::Simpson:
      if (ball.r < 4)
        throw usage_error("worst_case_error_upper: Simpson bound needs derivative order >= 4");
      return ball.bound / (2880.0 * n * n * n * n);
    default:
      throw usage_error("worst_case_error_upper: no analytic bound for rule '" +
                        std::string(quadrature::rule_name(rule.kind)) + "'");
  }
}

// One path of the measure.  The base walk has increments sqrt(dt) * N(0,1);
// each fold is a cumulative trapezoid integration of the previous level.
inline GriddedFunction sample_path(const WienerMeasure& measure, std::uint64_t seed) {
  measure.validate();
  const std::size_t n = static_cast<std::size_t>(measure.grid_size);
  const double dt = 1.0 / (static_cast<double>(n) - 1.0);
  GriddedFunction path;
  path.grid.resize(n);
  for (std::size_t j = 0; j < n; ++j) path.grid[j] = static_cast<double>(j) * dt;
  path.grid.back() = 1.0;

  SeededRng rng(seed);
  path.values.assign(n, 0.0);
  const double step = std::sqrt(dt);
  for (std::size_t j = 1; j < n; ++j) path.values[j] = path.values[j - 1] + step * rng.normal();
  for (int fold = 0; fold < measure.fold; ++fold) {
    std::vector<double> integrated(n, 0.0);
    for (std::size_t j = 1; j < n; ++j)
      integrated[j] = integrated[j - 1] + 0.5 * dt * (path.values[j - 1] + path.values[j]);
    path.values = std::move(integrated);
  }
  return path;
}

namespace detail {

inline double eval_linear(const GriddedFunction& g, double t) {
  if (t <= g.grid.front()) return g.values.front();
  if (t >= g.grid.back()) return g.values.back();
  const auto it = std::upper_bound(g.grid.begin(), g.grid.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - g.grid.begin());
  const double w = (t - g.grid[hi - 1]) / (g.grid[hi] - g.grid[hi - 1]);
  return (1.0 - w) * g.values[hi - 1] + w * g.values[hi];
}

// Exact integral of the piecewise-linear interpolant.
inline double integrate_linear(const GriddedFunction& g) {
  double acc = 0.0;
  for (std::size_t j = 1; j < g.grid.size(); ++j)
    acc += 0.5 * (g.grid[j] - g.grid[j - 1]) * (g.values[j] + g.values[j - 1]);
  return acc;
}

}  // namespace detail

struct AverageCaseResult {
  double mean = 0.0;
  double std_error = 0.0;
  int trials = 0;
};

// Monte Carlo estimate of the mean absolute integration error over paths of
// the measure.  Each trial draws one path (substream 2t of the seed), applies
// the member to its piecewise-linear interpolant (substream 2t+1 feeds any
// randomness in the member itself), and compares with the interpolant's
// exact integral.  Trials run in parallel; the reduction order is fixed, so
// results are reproducible for a given seed regardless of thread count.
inline AverageCaseResult average_case_error(const StrategyMember& member,
                                            const WienerMeasure& measure, int trials,
                                            std::uint64_t seed) {
  measure.validate();
  member.information.validate();
  if (trials < 100) throw usage_error("average_case_error: needs at least 100 trials");
  if (member.information.size() > static_cast<std::size_t>(measure.grid_size))
    throw usage_error("average_case_error: path grid is coarser than the member's node set");
  if (member.information.domain_lo != 0.0 || member.information.domain_hi != 1.0)
    throw usage_error("average_case_error: member must sample on [0,1]");

  std::vector<double> errs(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    const GriddedFunction path = sample_path(measure, derive_seed(seed, 2 * t));
    const RealFunction f = [&path](double x) { return detail::eval_linear(path, x); };
    const double exact = detail::integrate_linear(path);
    const double approx = run_strategy(member, f, derive_seed(seed, 2 * t + 1));
    errs[t] = std::abs(exact - approx);
  });

  AverageCaseResult result;
  result.trials = trials;
  double sum = 0.0;
  for (double e : errs) sum += e;
  result.mean = sum / trials;
  double ss = 0.0;
  for (double e : errs) ss += (e - result.mean) * (e - result.mean);
  result.std_error = std::sqrt(ss / (static_cast<double>(trials) - 1.0) / trials);
  return result;
}

// Cost of guaranteed accuracy: for each epsilon the cheapest member whose
// analytic worst-case bound meets it, plus the fitted growth rate of cost
// against 1/epsilon.  Entries already met by the smallest member are flagged
// (the target does not bind there) and excluded from the fit.
struct ComplexityProfile {
  std::string strategy;
  std::vector<double> epsilons;  // strictly decreasing
  std::vector<int> indices;      // minimal member index per epsilon
  std::vector<long> costs;
  std::vector<char> flagged;  // 1 when the smallest member already suffices
  double slope = 0.0;         // log cost vs log(1/epsilon), unflagged entries
  bool slope_defined = false;

  std::string to_csv() const {
    std::ostringstream os;
    os << "epsilon,index,cost,flagged,slope\n";
    for (std::size_t i = 0; i < epsilons.size(); ++i)
      os << g17(epsilons[i]) << ',' << indices[i] << ',' << costs[i] << ','
         << int(flagged[i]) << ',' << (slope_defined ? g17(slope) : "nan") << '\n';
    return os.str();
  }
};

inline ComplexityProfile complexity(const Strategy& strategy, const SmoothnessBall& ball,
                                    std::vector<double> epsilons) {
  ball.validate();
  if (epsilons.empty()) throw usage_error("complexity: needs at least one epsilon");
  for (double e : epsilons)
    if (!(e > 0.0) || !std::isfinite(e))
      throw usage_error("complexity: epsilon values must be positive and finite");
  std::sort(epsilons.begin(), epsilons.end(), std::greater<double>());
  epsilons.erase(std::unique(epsilons.begin(), epsilons.end()), epsilons.end());

  quadrature::RuleKind kind;
  try {
    kind = quadrature::rule_from_name(strategy.name);
  } catch (const usage_error&) {
    throw usage_error("complexity: strategy '" + strategy.name + "' has no analytic bound");
  }
  const auto bound_at = [&](int n) {
    return worst_case_error_upper(quadrature::QuadratureRule{kind, n}, ball);
  };
  bound_at(1);  // surfaces unsupported rule/order pairings before any search

  ComplexityProfile profile;
  profile.strategy = strategy.name;
  profile.epsilons = epsilons;
  for (double eps : epsilons) {
    int n;
    if (kind == quadrature::RuleKind::Trapezoid)
      n = static_cast<int>(std::ceil(std::sqrt(ball.bound / (12.0 * eps))));
    else
      n = static_cast<int>(std::ceil(std::pow(ball.bound / (2880.0 * eps), 0.25)));
    n = std::max(n, 1);
    while (bound_at(n) > eps) ++n;
    while (n > 1 && bound_at(n - 1) <= eps) --n;
    profile.indices.push_back(n);
    profile.costs.push_back(strategy.cost(n));
    profile.flagged.push_back(bound_at(1) <= eps ? 1 : 0);
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (std::size_t i = 0; i < profile.epsilons.size(); ++i) {
    if (profile.flagged[i]) continue;
    const double x = std::log(1.0 / profile.epsilons[i]);
    const double y = std::log(static_cast<double>(profile.costs[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++used;
  }
  const double denom = used * sxx - sx * sx;
  if (used >= 2 && denom > 0.0) {
    profile.slope = (used * sxy - sx * sy) / denom;
    profile.slope_defined = true;
  }
  return profile;
}

// ---------------------------------------------------------------------------
// The partial order on strategies

enum class Criterion { Exponent, WorstCase, AverageCase, Complexity };
enum class Outcome { FirstNotWorse, SecondNotWorse, Equivalent, Incomparable };

inline const char* criterion_name(Criterion c) {
  switch (c) {
    case Criterion::Exponent: return "exponent";
    case Criterion::WorstCase: return "worst-case";
    case Criterion::AverageCase: return "average-case";
    case Criterion::Complexity: return "complexity";
  }
  return "?";
}

inline Criterion criterion_from_name(const std::string& s) {
  if (s == "exponent") return Criterion::Exponent;
  if (s == "worst-case") return Criterion::WorstCase;
  if (s == "average-case") return Criterion::AverageCase;
  if (s == "complexity") return Criterion::Complexity;
  throw usage_error("unknown comparison criterion '" + s + "'");
}

inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::FirstNotWorse: return "first-not-worse";
    case Outcome::SecondNotWorse: return "second-not-worse";
    case Outcome::Equivalent: return "equivalent";
    case Outcome::Incomparable: return "incomparable";
  }
  return "?";
}

struct CompareOptions {
  SmoothnessBall ball{4, 1.0};
  WienerMeasure measure{};
  std::vector<double> epsilons{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  int min_index = 1;  // member range for the matched-cost criteria
  int max_index = 8;
  int trials = 200;                           // average-case trials per member
  std::vector<int> exponent_indices{4, 8, 16, 32, 64};
  RealFunction probe;                         // exponent test integrand; default e^t
  std::optional<double> reference;            // its integral; default from the problem
  std::uint64_t seed = 0x0c0a57;
  double exponent_tol = 0.25;                 // |alpha1 - alpha2| within => tie
  double domination_rel_tol = 1e-9;           // slack when checking e1 <= e2
  double domination_abs_tol = 1e-12;
  double ratio_slack = 0.25;                  // cost-ratio growth allowance
};

// One tested point: the criterion's abscissa (cost budget, epsilon, or
// member index) and the two strategies' numbers there.
struct ComparisonEvidence {
  double at = 0.0;
  double first = 0.0;
  double second = 0.0;
};

struct ComparisonVerdict {
  Outcome outcome = Outcome::Incomparable;
  Criterion criterion = Criterion::Exponent;
  std::string first;
  std::string second;
  std::vector<ComparisonEvidence> evidence;
  std::string detail;
};

namespace detail {

inline Outcome outcome_from(bool first_ok, bool second_ok) {
  if (first_ok && second_ok) return Outcome::Equivalent;
  if (first_ok) return Outcome::FirstNotWorse;
  if (second_ok) return Outcome::SecondNotWorse;
  return Outcome::Incomparable;
}

// Largest member index affordable within the budget, or nullopt.
inline std::optional<int> best_affordable(const Strategy& s, long budget, int lo, int hi) {
  std::optional<int> pick;
  const int top = std::min(hi, s.max_index);
  for (int i = lo; i <= top; ++i)
    if (s.cost(i) <= budget) pick = i;
  return pick;
}

inline std::string short_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

}  // namespace detail

// Decides whether either strategy is "not worse" than the other under one
// criterion.  Exponent fits the convergence order on a smooth probe
// integrand; WorstCase and AverageCase demand domination at every matched
// cost budget in the tested index range; Complexity checks that the cost
// ratio stays bounded across the profile's three smallest epsilon values.
// All randomness is seeded through the options, so verdicts are
// deterministic, and the numbers behind the decision are returned as
// evidence.
inline ComparisonVerdict compare(const Strategy& u1, const Strategy& u2, Criterion criterion,
                                 const CompareOptions& options = {}) {
  if (options.min_index < 1 || options.max_index < options.min_index)
    throw usage_error("compare: need 1 <= min_index <= max_index");

  ComparisonVerdict verdict;
  verdict.criterion = criterion;
  verdict.first = u1.name;
  verdict.second = u2.name;

  switch (criterion) {
    case Criterion::Exponent: {
      if (options.exponent_indices.size() < 3)
        throw usage_error("compare: exponent criterion needs at least 3 indices");
      const RealFunction probe =
          options.probe ? options.probe : RealFunction([](double t) { return std::exp(t); });
      const double ref = options.reference
                             ? *options.reference
                             : quadrature::integration_problem().solution_map(probe);
      std::vector<double> ns, e1, e2;
      for (int i : options.exponent_indices) {
        const double a = run_strategy(u1.member(i), probe, derive_seed(options.seed, i));
        const double b = run_strategy(u2.member(i), probe, derive_seed(options.seed, i));
        ns.push_back(i);
        e1.push_back(std::abs(ref - a));
        e2.push_back(std::abs(ref - b));
        verdict.evidence.push_back({static_cast<double>(i), e1.back(), e2.back()});
      }
      constexpr double floor = quadrature::ConvergenceReport::error_floor;
      const auto f1 = quadrature::fit_power_law(ns, e1, floor);
      const auto f2 = quadrature::fit_power_law(ns, e2, floor);
      bool first_ok, second_ok;
      if (f1.exact_within_precision && f2.exact_within_precision) {
        first_ok = second_ok = true;
      } else {
        first_ok = f1.exponent >= f2.exponent - options.exponent_tol;
        second_ok = f2.exponent >= f1.exponent - options.exponent_tol;
      }
      verdict.outcome = detail::outcome_from(first_ok, second_ok);
      verdict.detail = "fitted exponents " + detail::short_num(f1.exponent) + " vs " +
                       detail::short_num(f2.exponent) + " (tol " +
                       detail::short_num(options.exponent_tol) + ")";
      return verdict;
    }

    case Criterion::WorstCase:
    case Criterion::AverageCase: {
      std::vector<long> budgets;
      for (int i = options.min_index; i <= std::min(options.max_index, u1.max_index); ++i)
        budgets.push_back(u1.cost(i));
      for (int i = options.min_index; i <= std::min(options.max_index, u2.max_index); ++i)
        budgets.push_back(u2.cost(i));
      std::sort(budgets.begin(), budgets.end());
      budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());

      const auto error_at = [&](const Strategy& s, int index, long budget) {
        if (criterion == Criterion::WorstCase)
          return worst_case_error_lower(s.member(index), options.ball,
                                        derive_seed(options.seed, budget));
        return average_case_error(s.member(index), options.measure, options.trials,
                                  derive_seed(options.seed, budget))
            .mean;
      };

      bool first_ok = true, second_ok = true;
      int tested = 0;
      for (long budget : budgets) {
        const auto i1 =
            detail::best_affordable(u1, budget, options.min_index, options.max_index);
        const auto i2 =
            detail::best_affordable(u2, budget, options.min_index, options.max_index);
        if (!i1 || !i2) continue;  // matched costs only
        const double a = error_at(u1, *i1, budget);
        const double b = error_at(u2, *i2, budget);
        verdict.evidence.push_back({static_cast<double>(budget), a, b});
        const double slack_ab = b * options.domination_rel_tol + options.domination_abs_tol;
        const double slack_ba = a * options.domination_rel_tol + options.domination_abs_tol;
        if (a > b + slack_ab) first_ok = false;
        if (b > a + slack_ba) second_ok = false;
        ++tested;
      }
      if (tested == 0)
        throw usage_error("compare: no cost budget admits members of both strategies");
      verdict.outcome = detail::outcome_from(first_ok, second_ok);
      verdict.detail = std::string(criterion == Criterion::WorstCase ? "adversarial"
                                                                     : "average") +
                       " errors compared at " + std::to_string(tested) + " matched budgets";
      return verdict;
    }

    case Criterion::Complexity: {
      const ComplexityProfile p1 = complexity(u1, options.ball, options.epsilons);
      const ComplexityProfile p2 = complexity(u2, options.ball, options.epsilons);
      std::vector<double> ratios;  // ordered by decreasing epsilon
      for (std::size_t i = 0; i < p1.epsilons.size(); ++i) {
        if (p1.flagged[i] || p2.flagged[i]) continue;
        ratios.push_back(static_cast<double>(p1.costs[i]) / static_cast<double>(p2.costs[i]));
        verdict.evidence.push_back({p1.epsilons[i], static_cast<double>(p1.costs[i]),
                                    static_cast<double>(p2.costs[i])});
      }
      if (ratios.size() < 3)
        throw usage_error("compare: complexity criterion needs at least 3 binding epsilons");
      // Keep only the three smallest epsilons; bounded ratio there stands in
      // for a bounded limit superior.
      const std::size_t k = ratios.size();
      const double r_small = ratios[k - 1];
      const double r_prev = std::max(ratios[k - 2], ratios[k - 3]);
      const bool first_ok = r_small <= r_prev * (1.0 + options.ratio_slack);
      const bool second_ok = 1.0 / r_small <= (1.0 / std::min(ratios[k - 2], ratios[k - 3])) *
                                                  (1.0 + options.ratio_slack);
      verdict.outcome = detail::outcome_from(first_ok, second_ok);
      verdict.detail = "cost ratios at the three smallest epsilons: " +
                       detail::short_num(ratios[k - 3]) + ", " + detail::short_num(ratios[k - 2]) +
                       ", " + detail::short_num(r_small) + " (slack " +
                       detail::short_num(options.ratio_slack) + ")";
      return verdict;
    }
  }
  throw usage_error("compare: unknown criterion");
}

}  // namespace optrec::settings
