#pragma once

// Quadrature rules on [0,1] — composite trapezoid and Simpson, Gauss-Legendre,
// and a plain Monte Carlo mean — plus an empirical convergence-order fit.
// Every rule is exposed both as a direct function and as a Strategy whose
// member n carries explicit nodes/weights, so the same arithmetic backs both.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "optrec/common.hpp"
#include "optrec/core.hpp"

namespace optrec::quadrature {

enum class RuleKind { Trapezoid, Simpson, GaussLegendre, MonteCarlo };

inline const char* rule_name(RuleKind k) {
  switch (k) {
    case RuleKind::Trapezoid: return "trapezoid";
    case RuleKind::Simpson: return "simpson";
    case RuleKind::GaussLegendre: return "gauss-legendre";
    case RuleKind::MonteCarlo: return "monte-carlo";
  }
  return "?";
}

inline RuleKind rule_from_name(const std::string& s) {
  if (s == "trapezoid") return RuleKind::Trapezoid;
  if (s == "simpson") return RuleKind::Simpson;
  if (s == "gauss-legendre") return RuleKind::GaussLegendre;
  if (s == "monte-carlo") return RuleKind::MonteCarlo;
  throw usage_error("unknown quadrature rule '" + s + "'");
}

struct QuadratureRule {
  RuleKind kind = RuleKind::Trapezoid;
  int n = 1;

  // Number of function samples the rule consumes.
  long cost() const {
    switch (kind) {
      case RuleKind::Trapezoid: return static_cast<long>(n) + 1;
      case RuleKind::Simpson: return 2L * n + 1;
      case RuleKind::GaussLegendre: return n;
      case RuleKind::MonteCarlo: return n;
    }
    return 0;
  }
};

namespace detail {

struct NodesWeights {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Composite trapezoid with n panels: (1/2n)(f(0) + f(1) + 2*sum interior).
inline NodesWeights trapezoid_scheme(int n) {
  if (n < 1) throw usage_error("trapezoid: n must be >= 1");
  NodesWeights s;
  const double h = 1.0 / n;
  s.nodes.resize(n + 1);
  s.weights.assign(n + 1, h);
  for (int i = 0; i <= n; ++i) s.nodes[i] = static_cast<double>(i) / n;
  s.weights.front() = s.weights.back() = h / 2.0;
  return s;
}

// Composite Simpson with n panels, midpoints included:
// (1/6n)(f(0) + f(1) + 4*sum of midpoints + 2*sum of interior knots).
inline NodesWeights simpson_scheme(int n) {
  if (n < 1) throw usage_error("simpson: n must be >= 1");
  NodesWeights s;
  const double w = 1.0 / (6.0 * n);
  s.nodes.push_back(0.0);
  s.weights.push_back(w);
  for (int i = 1; i <= n; ++i) {
    s.nodes.push_back((i - 0.5) / n);
    s.weights.push_back(4.0 * w);
    if (i < n) {
      s.nodes.push_back(static_cast<double>(i) / n);
      s.weights.push_back(2.0 * w);
    }
  }
  s.nodes.push_back(1.0);
  s.weights.push_back(w);
  return s;
}

inline constexpr int gauss_max_n = 64;

// Legendre P_n and its derivative at x, by the three-term recurrence.
inline void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  p = (n == 0) ? 1.0 : p1;
  dp = (n == 0) ? 0.0 : n * (x * p1 - p0) / (x * x - 1.0);
}

// Gauss-Legendre nodes/weights on [0,1].  Roots of P_n found by Newton from
// the Chebyshev-angle initial guesses; all tables up to gauss_max_n are built
// on first use and cached.
inline const NodesWeights& gauss_scheme(int n) {
  static const std::array<NodesWeights, gauss_max_n> tables = [] {
    std::array<NodesWeights, gauss_max_n> all;
    for (int n = 1; n <= gauss_max_n; ++n) {
      NodesWeights s;
      s.nodes.resize(n);
      s.weights.resize(n);
      for (int i = 1; i <= n; ++i) {
        double x = std::cos(pi * (i - 0.25) / (n + 0.5));
        double p = 0.0, dp = 1.0;
        for (int iter = 0; iter < 100; ++iter) {
          legendre(n, x, p, dp);
          const double step = p / dp;
          x -= step;
          if (std::abs(step) < 1e-15) break;
        }
        legendre(n, x, p, dp);
        // Map [-1,1] -> [0,1]; note the orientation: i = 1 is the largest root.
        s.nodes[n - i] = 0.5 * (x + 1.0);
        s.weights[n - i] = 1.0 / ((1.0 - x * x) * dp * dp);
      }
      all[n - 1] = std::move(s);
    }
    return all;
  }();
  if (n < 1 || n > gauss_max_n)
    throw usage_error("gauss_legendre: n must be in [1, " + std::to_string(gauss_max_n) + "]");
  return tables[n - 1];
}

inline NodesWeights scheme(RuleKind kind, int n) {
  switch (kind) {
    case RuleKind::Trapezoid: return trapezoid_scheme(n);
    case RuleKind::Simpson: return simpson_scheme(n);
    case RuleKind::GaussLegendre: return gauss_scheme(n);
    case RuleKind::MonteCarlo:
      throw usage_error("monte-carlo rule has no fixed nodes");
  }
  throw usage_error("unknown rule kind");
}

inline double check_finite(double v, double x) {
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "integrand returned non-finite value " << v << " at x = " << x;
    throw numeric_error(os.str());
  }
  return v;
}

inline double weighted_sum(const NodesWeights& s, const RealFunction& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.nodes.size(); ++i)
    acc += s.weights[i] * check_finite(f(s.nodes[i]), s.nodes[i]);
  return acc;
}

}  // namespace detail

inline double trapezoid(const RealFunction& f, int n) {
  return detail::weighted_sum(detail::trapezoid_scheme(n), f);
}

inline double simpson(const RealFunction& f, int n) {
  return detail::weighted_sum(detail::simpson_scheme(n), f);
}

inline double gauss_legendre(const RealFunction& f, int n) {
  return detail::weighted_sum(detail::gauss_scheme(n), f);
}

// Mean of f over n seeded uniform draws.  Runs through the same information
// pipeline as the strategy form, so the two agree sample for sample.
inline double monte_carlo(const RealFunction& f, int n, std::uint64_t seed) {
  if (n < 1) throw usage_error("monte_carlo: n must be >= 1");
  InformationOperator info;
  info.randomized = true;
  info.sample_count = n;
  const DataVector data = apply_information(info, f, seed);
  double acc = 0.0;
  for (std::size_t i = 0; i < data.values.size(); ++i)
    acc += detail::check_finite(data.values[i], data.provenance.points[i]);
  return acc / n;
}

inline double integrate(RuleKind kind, const RealFunction& f, int n, std::uint64_t seed = 0) {
  if (kind == RuleKind::MonteCarlo) return monte_carlo(f, n, seed);
  return detail::weighted_sum(detail::scheme(kind, n), f);
}

// The canonical problem these rules address: integration over [0,1].
// The 64-point Gauss rule serves as the reference solution operator; for the
// smooth integrands used throughout it is exact to machine precision.
inline Problem1D integration_problem() {
  return Problem1D([](const RealFunction& f) { return gauss_legendre(f, 64); }, 0.0, 1.0);
}

namespace detail {

inline StrategyMember fixed_rule_member(RuleKind kind, int n) {
  auto s = scheme(kind, n);
  StrategyMember m;
  m.information.points = s.nodes;
  auto weights = std::move(s.weights);
  m.algorithm = [weights](const DataVector& d) {
    if (d.values.size() != weights.size())
      throw usage_error("quadrature member: data size does not match rule");
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
      acc += weights[i] * check_finite(d.values[i], d.provenance.points[i]);
    return acc;
  };
  return m;
}

}  // namespace detail

// Indexed strategies.  Member i of each family is the rule with parameter i;
// costs count samples (trapezoid i+1, Simpson 2i+1, Gauss and Monte Carlo i).
inline Strategy trapezoid_strategy() {
  Strategy s;
  s.name = "trapezoid";
  s.member_at = [](int i) { return detail::fixed_rule_member(RuleKind::Trapezoid, i); };
  s.cost_of = [](int i) { return static_cast<long>(i) + 1; };
  return s;
}

inline Strategy simpson_strategy() {
  Strategy s;
  s.name = "simpson";
  s.member_at = [](int i) { return detail::fixed_rule_member(RuleKind::Simpson, i); };
  s.cost_of = [](int i) { return 2L * i + 1; };
  return s;
}

inline Strategy gauss_legendre_strategy() {
  Strategy s;
  s.name = "gauss-legendre";
  s.member_at = [](int i) { return detail::fixed_rule_member(RuleKind::GaussLegendre, i); };
  s.cost_of = [](int i) { return static_cast<long>(i); };
  s.max_index = detail::gauss_max_n;
  return s;
}

inline Strategy monte_carlo_strategy() {
  Strategy s;
  s.name = "monte-carlo";
  s.member_at = [](int i) {
    StrategyMember m;
    m.information.randomized = true;
    m.information.sample_count = i;
    m.algorithm = [i](const DataVector& d) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d.values.size(); ++j)
        acc += detail::check_finite(d.values[j], d.provenance.points[j]);
      return acc / static_cast<double>(i);
    };
    return m;
  };
  s.cost_of = [](int i) { return static_cast<long>(i); };
  return s;
}

inline Strategy strategy_for(RuleKind kind) {
  switch (kind) {
    case RuleKind::Trapezoid: return trapezoid_strategy();
    case RuleKind::Simpson: return simpson_strategy();
    case RuleKind::GaussLegendre: return gauss_legendre_strategy();
    case RuleKind::MonteCarlo: return monte_carlo_strategy();
  }
  throw usage_error("unknown rule kind");
}

// Least-squares fit of error ~ K * n^(-p) in log-log coordinates.  Errors at
// or below `floor` count as exact and are excluded; with fewer than two
// usable points the data is declared exact within working precision.
struct PowerLawFit {
  double exponent = 0.0;
  double constant = 0.0;
  bool exact_within_precision = false;
  int points_used = 0;
};

inline PowerLawFit fit_power_law(const std::vector<double>& ns,
                                 const std::vector<double>& errors, double floor) {
  if (ns.size() != errors.size()) throw usage_error("fit_power_law: length mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (errors[i] <= floor) continue;
    if (!(ns[i] > 0.0) || !std::isfinite(errors[i]))
      throw usage_error("fit_power_law: needs positive n and finite errors");
    const double x = std::log(ns[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++used;
  }
  PowerLawFit fit;
  fit.points_used = used;
  if (used < 2) {
    fit.exact_within_precision = true;
    fit.exponent = std::numeric_limits<double>::infinity();
    return fit;
  }
  const double denom = used * sxx - sx * sx;
  if (denom <= 0.0) throw usage_error("fit_power_law: n values must not all coincide");
  const double slope = (used * sxy - sx * sy) / denom;
  fit.exponent = -slope;
  fit.constant = std::exp((sy - slope * sx) / used);
  return fit;
}

// Result of fitting error ~ K * n^(-p) on a sequence of panel counts.
// Errors at or below error_floor are treated as exact and excluded from the
// fit; if fewer than two points remain the rule is reported as exact within
// working precision and the fitted fields are not meaningful.
struct ConvergenceReport {
  std::vector<int> ns;
  std::vector<double> errors;
  double fitted_exponent = 0.0;
  double fitted_constant = 0.0;
  bool exact_within_precision = false;

  static constexpr double error_floor = 1e-13;

  std::string to_csv() const {
    std::ostringstream os;
    os << "n,error,fitted_exponent,fitted_constant\n";
    for (std::size_t i = 0; i < ns.size(); ++i)
      os << ns[i] << ',' << g17(errors[i]) << ',' << g17(fitted_exponent) << ','
         << g17(fitted_constant) << '\n';
    return os.str();
  }
};

// Measures |reference - rule(f, n)| over the given n values and fits the decay
// order by least squares on (log n, log error).  When no reference is given,
// the 64-point Gauss value is used; it carries far more correct digits than
// any of the rules under test ever reach on smooth integrands.  Monte Carlo
// runs draw an independent substream per n from `seed`.
inline ConvergenceReport estimate_exponent(RuleKind kind, const RealFunction& f,
                                           const std::vector<int>& ns,
                                           std::optional<double> reference = std::nullopt,
                                           std::uint64_t seed = 0) {
  if (ns.size() < 3) throw usage_error("estimate_exponent: need at least 3 values of n");
  for (int n : ns)
    if (n < 1) throw usage_error("estimate_exponent: n values must be >= 1");

  const double ref = reference ? *reference : gauss_legendre(f, 64);
  if (!std::isfinite(ref)) throw numeric_error("estimate_exponent: reference is not finite");

  ConvergenceReport report;
  report.ns = ns;
  report.errors.reserve(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double approx = integrate(kind, f, ns[i], derive_seed(seed, ns[i]));
    report.errors.push_back(std::abs(ref - approx));
  }

  std::vector<double> xs(ns.begin(), ns.end());
  const PowerLawFit fit = fit_power_law(xs, report.errors, ConvergenceReport::error_floor);
  report.exact_within_precision = fit.exact_within_precision;
  report.fitted_exponent = fit.exponent;
  report.fitted_constant = fit.exact_within_precision ? 0.0 : fit.constant;
  return report;
}

}  // namespace optrec::quadrature
