#pragma once

// Cubic splines with natural boundary: interpolation, roughness-penalized
// smoothing, the exact bending energy, and leave-one-out selection of the
// fidelity weight lambda.
//
// The smoothing problem minimizes
//     integral of s''(t)^2  +  (lambda / n) * sum of (y_i - s(t_i))^2
// over natural cubic splines with the given knots, where n is the number of
// knot intervals.  Note the orientation: lambda multiplies the data term, so
// large lambda trusts the data (lambda -> infinity interpolates) and small
// lambda flattens the fit toward the least-squares line.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "optrec/common.hpp"

namespace optrec::splines {

namespace detail {

inline void check_sites(const std::vector<double>& t, const std::vector<double>& y,
                        std::size_t min_count) {
  if (t.size() != y.size()) throw usage_error("spline: knots and values differ in length");
  if (t.size() < min_count)
    throw usage_error("spline: need at least " + std::to_string(min_count) + " points");
  for (std::size_t i = 0; i + 1 < t.size(); ++i)
    if (!(t[i] < t[i + 1])) throw usage_error("spline: knots must be strictly increasing");
  for (double v : t)
    if (!std::isfinite(v)) throw usage_error("spline: knots must be finite");
  for (double v : y)
    if (!std::isfinite(v)) throw usage_error("spline: values must be finite");
}

}  // namespace detail

// Piecewise cubic in value/second-derivative form: on [t_i, t_i+1] with
// h = t_i+1 - t_i, A = (t_i+1 - u)/h, B = (u - t_i)/h,
//   s(u) = A a_i + B a_i+1 + ((A^3 - A) M_i + (B^3 - B) M_i+1) h^2 / 6,
// which makes s''(u) the linear interpolant of the M_i.  Outside the knot
// hull the spline continues linearly (consistent with zero end moments).
class CubicSpline {
 public:
  CubicSpline(std::vector<double> knots, std::vector<double> values,
              std::vector<double> moments, std::optional<double> lambda = std::nullopt)
      : t_(std::move(knots)), a_(std::move(values)), m_(std::move(moments)), lambda_(lambda) {
    detail::check_sites(t_, a_, 2);
    if (m_.size() != t_.size())
      throw usage_error("spline: moments and knots differ in length");
  }

  double operator()(double u) const {
    if (u <= t_.front()) return a_.front() + left_slope() * (u - t_.front());
    if (u >= t_.back()) return a_.back() + right_slope() * (u - t_.back());
    const std::size_t i = interval(u);
    const double h = t_[i + 1] - t_[i];
    const double A = (t_[i + 1] - u) / h, B = (u - t_[i]) / h;
    return A * a_[i] + B * a_[i + 1] +
           ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
  }

  double second_derivative(double u) const {
    if (u <= t_.front()) return 0.0;
    if (u >= t_.back()) return 0.0;
    const std::size_t i = interval(u);
    const double h = t_[i + 1] - t_[i];
    return ((t_[i + 1] - u) * m_[i] + (u - t_[i]) * m_[i + 1]) / h;
  }

  const std::vector<double>& knots() const { return t_; }
  const std::vector<double>& values() const { return a_; }
  const std::vector<double>& moments() const { return m_; }
  std::optional<double> lambda() const { return lambda_; }

  // True when the end moments vanish, i.e. the curve straightens into its
  // linear extension at both ends.
  bool natural_boundary() const { return m_.front() == 0.0 && m_.back() == 0.0; }

 private:
  std::size_t interval(double u) const {
    const auto it = std::upper_bound(t_.begin(), t_.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - t_.begin());
    return std::min(std::max<std::size_t>(i, 1), t_.size() - 1) - 1;
  }

  double left_slope() const {
    const double h = t_[1] - t_[0];
    return (a_[1] - a_[0]) / h - h * (2.0 * m_[0] + m_[1]) / 6.0;
  }
  double right_slope() const {
    const std::size_t n = t_.size() - 1;
    const double h = t_[n] - t_[n - 1];
    return (a_[n] - a_[n - 1]) / h + h * (m_[n - 1] + 2.0 * m_[n]) / 6.0;
  }

  std::vector<double> t_, a_, m_;
  std::optional<double> lambda_;
};

// Integral of s''^2: s'' is linear on each interval, so each piece contributes
// h (M_i^2 + M_i M_i+1 + M_i+1^2) / 3 exactly.
inline double bending_energy(const CubicSpline& s) {
  const auto& t = s.knots();
  const auto& m = s.moments();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double h = t[i + 1] - t[i];
    acc += h * (m[i] * m[i] + m[i] * m[i + 1] + m[i + 1] * m[i + 1]) / 3.0;
  }
  return acc;
}

// Natural interpolant: interior moments solve the standard tridiagonal system
//   (h_i-1/6) M_i-1 + ((h_i-1 + h_i)/3) M_i + (h_i/6) M_i+1 = d_i - d_i-1,
// with d_i the divided difference on interval i and M_0 = M_n = 0.
inline CubicSpline natural_cubic_spline(const std::vector<double>& knots,
                                        const std::vector<double>& values) {
  detail::check_sites(knots, values, 2);
  const std::size_t n = knots.size() - 1;
  std::vector<double> m(knots.size(), 0.0);
  if (n >= 2) {
    std::vector<double> diag(n - 1), lower(n - 1), upper(n - 1), rhs(n - 1);
    for (std::size_t i = 1; i < n; ++i) {
      const double hl = knots[i] - knots[i - 1];
      const double hr = knots[i + 1] - knots[i];
      lower[i - 1] = hl / 6.0;
      diag[i - 1] = (hl + hr) / 3.0;
      upper[i - 1] = hr / 6.0;
      rhs[i - 1] = (values[i + 1] - values[i]) / hr - (values[i] - values[i - 1]) / hl;
    }
    // Thomas elimination; the system is strictly diagonally dominant.
    for (std::size_t i = 1; i < n - 1; ++i) {
      const double w = lower[i] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m[n - 1] = rhs[n - 2] / diag[n - 2];
    for (std::size_t i = n - 1; i-- > 1;)
      m[i] = (rhs[i - 1] - upper[i - 1] * m[i + 1]) / diag[i - 1];
  }
  return CubicSpline(knots, values, std::move(m));
}

struct SmoothingProblem {
  std::vector<double> knots;
  std::vector<double> y;
  double lambda = 1.0;
};

namespace detail {

// Second-difference map Q ((n+1) x (n-1)) and the energy Gram matrix R
// ((n-1) x (n-1)) of the natural-spline basis: for fitted values a the
// interior moments are gamma = R^-1 Q^T a and the energy is gamma^T R gamma.
inline void build_qr(const std::vector<double>& t, Eigen::MatrixXd& Q, Eigen::MatrixXd& R) {
  const Eigen::Index n = static_cast<Eigen::Index>(t.size()) - 1;
  Q = Eigen::MatrixXd::Zero(n + 1, n - 1);
  R = Eigen::MatrixXd::Zero(n - 1, n - 1);
  for (Eigen::Index j = 1; j < n; ++j) {
    const double hl = t[j] - t[j - 1];
    const double hr = t[j + 1] - t[j];
    Q(j - 1, j - 1) = 1.0 / hl;
    Q(j, j - 1) = -1.0 / hl - 1.0 / hr;
    Q(j + 1, j - 1) = 1.0 / hr;
    R(j - 1, j - 1) = (hl + hr) / 3.0;
    if (j + 1 < n) {
      R(j - 1, j) = hr / 6.0;
      R(j, j - 1) = hr / 6.0;
    }
  }
}

}  // namespace detail

// Reinsch-style solve.  Stationarity of the objective gives
//   a = y - alpha Q gamma,   (R + alpha Q^T Q) gamma = Q^T y,
// with alpha = n / lambda.  For alpha > 1 the system is solved in the scaled
// variable g = alpha gamma, i.e. (R/alpha + Q^T Q) g = Q^T y, which stays
// well-conditioned as lambda -> 0 where the fit collapses to the
// least-squares line through the data.
inline CubicSpline smoothing_spline(const SmoothingProblem& problem) {
  detail::check_sites(problem.knots, problem.y, 2);
  if (!(problem.lambda > 0.0) || !std::isfinite(problem.lambda))
    throw usage_error("smoothing_spline: lambda must be positive and finite");

  const std::size_t count = problem.knots.size();
  if (count == 2) {
    // Any line has zero energy, so the data term alone decides: interpolate.
    return CubicSpline(problem.knots, problem.y, {0.0, 0.0}, problem.lambda);
  }

  const double n = static_cast<double>(count - 1);
  const double alpha = n / problem.lambda;

  Eigen::MatrixXd Q, R;
  detail::build_qr(problem.knots, Q, R);
  const Eigen::VectorXd y =
      Eigen::Map<const Eigen::VectorXd>(problem.y.data(), static_cast<Eigen::Index>(count));
  const Eigen::VectorXd qty = Q.transpose() * y;

  Eigen::VectorXd gamma;
  Eigen::VectorXd a;
  if (alpha <= 1.0) {
    Eigen::MatrixXd sys = R + alpha * (Q.transpose() * Q);
    gamma = sys.ldlt().solve(qty);
    a = y - alpha * (Q * gamma);
  } else {
    Eigen::MatrixXd sys = R / alpha + Q.transpose() * Q;
    const Eigen::VectorXd g = sys.ldlt().solve(qty);
    gamma = g / alpha;
    a = y - Q * g;
  }

  std::vector<double> values(a.data(), a.data() + a.size());
  std::vector<double> moments(count, 0.0);
  for (Eigen::Index j = 0; j < gamma.size(); ++j) moments[j + 1] = gamma[j];
  return CubicSpline(problem.knots, std::move(values), std::move(moments), problem.lambda);
}

struct CrossValidationResult {
  double lambda = 0.0;                // winner (ties go to the larger lambda)
  std::vector<double> grid;           // ascending
  std::vector<double> scores;         // mean squared leave-one-out residual
};

// Leave-one-out selection: for each candidate lambda, drop each point in turn,
// smooth the rest with the same lambda, and score the prediction at the
// dropped site (endpoints are predicted by linear extension).
inline CrossValidationResult cross_validate_lambda(const std::vector<double>& knots,
                                                   const std::vector<double>& y,
                                                   const std::vector<double>& lambda_grid) {
  detail::check_sites(knots, y, 4);
  if (lambda_grid.empty()) throw usage_error("cross_validate_lambda: empty grid");
  for (double l : lambda_grid)
    if (!(l > 0.0) || !std::isfinite(l))
      throw usage_error("cross_validate_lambda: lambdas must be positive and finite");

  CrossValidationResult result;
  result.grid = lambda_grid;
  std::sort(result.grid.begin(), result.grid.end());
  result.scores.reserve(result.grid.size());

  const std::size_t count = knots.size();
  double best = std::numeric_limits<double>::infinity();
  for (double lambda : result.grid) {
    double score = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      SmoothingProblem reduced;
      reduced.lambda = lambda;
      reduced.knots.reserve(count - 1);
      reduced.y.reserve(count - 1);
      for (std::size_t i = 0; i < count; ++i) {
        if (i == k) continue;
        reduced.knots.push_back(knots[i]);
        reduced.y.push_back(y[i]);
      }
      const CubicSpline s = smoothing_spline(reduced);
      const double r = y[k] - s(knots[k]);
      score += r * r;
    }
    score /= static_cast<double>(count);
    result.scores.push_back(score);
    if (score <= best) {  // <= : later (larger) lambda wins ties
      best = score;
      result.lambda = lambda;
    }
  }
  return result;
}

}  // namespace optrec::splines
