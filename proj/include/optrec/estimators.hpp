#pragma once

// Scalar estimation from one noisy observation y = f + n, n ~ N(0, sigma^2):
// classic estimators (identity, clamping to a known bound, linear shrinkage)
// and their pointwise, worst-case and Bayes root-mean-square errors.
//
// Priors carry the parameter tau: Bounded means |f| <= tau, Gaussian means
// f ~ N(0, tau^2).  Shrinkage uses the coefficient tau^2 / (tau^2 + sigma^2),
// the factor that minimizes the Gaussian-prior risk among linear rules.

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "optrec/common.hpp"

namespace optrec::estimators {

enum class PriorKind { Bounded, Gaussian };

struct ScalarEstimationSetting {
  double sigma = 1.0;    // noise standard deviation, >= 0
  PriorKind prior = PriorKind::Gaussian;
  double tau = 1.0;      // prior scale, > 0
};

struct ScalarAlgorithm {
  std::string name;
  std::function<double(double)> map;

  static ScalarAlgorithm identity() {
    return {"identity", [](double y) { return y; }};
  }

  // median(-tau, y, tau): never leaves the prior interval.
  static ScalarAlgorithm clamp(double tau) {
    if (!(tau > 0.0)) throw usage_error("clamp: tau must be positive");
    return {"clamp", [tau](double y) { return std::min(std::max(y, -tau), tau); }};
  }

  static ScalarAlgorithm shrink(double sigma, double tau) {
    if (!(tau > 0.0)) throw usage_error("shrink: tau must be positive");
    if (sigma < 0.0) throw usage_error("shrink: sigma must be >= 0");
    const double c = tau * tau / (tau * tau + sigma * sigma);
    return {"shrink", [c](double y) { return c * y; }};
  }

  static ScalarAlgorithm linear(double a) {
    return {"linear(" + g17(a) + ")", [a](double y) { return a * y; }};
  }
};

inline double apply(const ScalarAlgorithm& algorithm, double y) {
  if (!algorithm.map) throw usage_error("apply: empty algorithm");
  return algorithm.map(y);
}

namespace detail {

inline constexpr int hermite_n = 64;

struct HermiteTable {
  std::array<double, hermite_n> node;
  std::array<double, hermite_n> weight;  // for the e^{-x^2} weight function
};

// Golub-Welsch on the Jacobi matrix of the (physicists') Hermite polynomials:
// zero diagonal, off-diagonal sqrt(k/2).  Weights are sqrt(pi) times the
// squared first eigenvector components.
inline const HermiteTable& hermite64() {
  static const HermiteTable table = [] {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(hermite_n);
    Eigen::VectorXd sub(hermite_n - 1);
    for (int k = 1; k < hermite_n; ++k) sub[k - 1] = std::sqrt(k / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub);
    HermiteTable t;
    for (int k = 0; k < hermite_n; ++k) {
      t.node[k] = solver.eigenvalues()[k];
      const double v0 = solver.eigenvectors()(0, k);
      t.weight[k] = std::sqrt(pi) * v0 * v0;
    }
    return t;
  }();
  return table;
}

// E[h(n)] for n ~ N(0, sigma^2), by Gauss-Hermite (n = sqrt(2) sigma x).
template <typename H>
double gaussian_expectation(double sigma, const H& h) {
  const HermiteTable& t = hermite64();
  const double scale = std::sqrt(2.0) * sigma;
  double acc = 0.0;
  for (int k = 0; k < hermite_n; ++k) acc += t.weight[k] * h(scale * t.node[k]);
  return acc / std::sqrt(pi);
}

// Golden-section maximization on [lo, hi] to absolute tolerance tol.
template <typename G>
double golden_max(double lo, double hi, double tol, const G& g) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double gc = g(c), gd = g(d);
  while (b - a > tol) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = g(d);
    }
  }
  return std::max(gc, gd);
}

}  // namespace detail

// Root-mean-square error at a fixed truth f: sqrt(E[(A(f + n) - f)^2]).
inline double pointwise_error(const ScalarAlgorithm& algorithm, double f, double sigma) {
  if (!algorithm.map) throw usage_error("pointwise_error: empty algorithm");
  if (sigma < 0.0) throw usage_error("pointwise_error: sigma must be >= 0");
  const double mse = detail::gaussian_expectation(sigma, [&](double n) {
    const double d = algorithm.map(f + n) - f;
    return d * d;
  });
  return std::sqrt(std::max(mse, 0.0));
}

// Worst pointwise error over the bounded prior |f| <= tau: dense scan plus a
// golden-section polish around the best bracket.
inline double worst_case_error(const ScalarAlgorithm& algorithm,
                               const ScalarEstimationSetting& setting) {
  if (setting.prior != PriorKind::Bounded)
    throw usage_error("worst_case_error: needs the bounded prior");
  if (!(setting.tau > 0.0)) throw usage_error("worst_case_error: tau must be positive");

  const auto e = [&](double f) { return pointwise_error(algorithm, f, setting.sigma); };
  const int grid = 2001;
  double best = 0.0;
  int best_i = 0;
  for (int i = 0; i < grid; ++i) {
    const double f = -setting.tau + 2.0 * setting.tau * i / (grid - 1);
    const double v = e(f);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  const double step = 2.0 * setting.tau / (grid - 1);
  const double lo = std::max(-setting.tau, -setting.tau + (best_i - 1) * step);
  const double hi = std::min(setting.tau, -setting.tau + (best_i + 1) * step);
  return std::max(best, detail::golden_max(lo, hi, 1e-6, e));
}

// Bayes risk under the Gaussian prior f ~ N(0, tau^2): the squared pointwise
// error averaged in f, computed by a second Gauss-Hermite layer.
inline double bayes_error(const ScalarAlgorithm& algorithm,
                          const ScalarEstimationSetting& setting) {
  if (setting.prior != PriorKind::Gaussian)
    throw usage_error("bayes_error: needs the gaussian prior");
  if (!(setting.tau > 0.0)) throw usage_error("bayes_error: tau must be positive");

  const double mean_sq = detail::gaussian_expectation(setting.tau, [&](double f) {
    const double e = pointwise_error(algorithm, f, setting.sigma);
    return e * e;
  });
  return std::sqrt(std::max(mean_sq, 0.0));
}

// The best achievable Bayes error in this setting,
// sigma * tau / sqrt(sigma^2 + tau^2); attained by the shrinkage rule.
inline double bayes_optimal_error(double sigma, double tau) {
  if (sigma < 0.0 || !(tau > 0.0)) throw usage_error("bayes_optimal_error: bad parameters");
  return sigma * tau / std::sqrt(sigma * sigma + tau * tau);
}

}  // namespace optrec::estimators
