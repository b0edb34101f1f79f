#pragma once

// Discrete distributions known only through a few linear moments:
//   F(y) = { p in the probability simplex : M p = y }.
// Three one-point summaries of F(y) are provided — the maximum-entropy
// element (dual Newton), the Chebyshev center (center of the smallest
// enclosing ball, via vertex enumeration), and the element of minimal
// uniform norm (bisection over LP feasibility) — plus the entropy itself.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "optrec/common.hpp"
#include "optrec/detail/min_ball.hpp"
#include "optrec/detail/simplex_lp.hpp"

namespace optrec::maxent {

// A point of the probability simplex.  Entries in [-1e-12, 0) are treated as
// roundoff and clamped to zero; anything more negative, or a total mass off
// by more than 1e-9, is rejected.
class ProbVector {
 public:
  explicit ProbVector(std::vector<double> p) : p_(std::move(p)) {
    if (p_.empty()) throw usage_error("ProbVector: empty");
    double sum = 0.0;
    for (double& v : p_) {
      if (!std::isfinite(v)) throw usage_error("ProbVector: non-finite entry");
      if (v < 0.0) {
        if (v < -1e-12)
          throw usage_error("ProbVector: negative entry " + g17(v));
        v = 0.0;
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw usage_error("ProbVector: mass " + g17(sum) + " is not 1 within 1e-9");
  }

  const std::vector<double>& values() const { return p_; }
  double operator[](std::size_t i) const { return p_[i]; }
  std::size_t size() const { return p_.size(); }

 private:
  std::vector<double> p_;
};

// Shannon entropy in nats, with the 0 log 0 = 0 convention.
inline double entropy(const ProbVector& p) {
  double h = 0.0;
  for (double v : p.values())
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

namespace detail {

// Euclidean projection onto the probability simplex (sort-based).
inline Eigen::VectorXd project_simplex(Eigen::VectorXd v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0, tau = 0.0;
  int support = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) {
      support = static_cast<int>(j + 1);
      tau = candidate;
    }
  }
  (void)support;
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::max(v[i] - tau, 0.0);
  return v;
}

// Best-effort minimizer of |M p - y| over the simplex (projected gradient);
// used only to certify infeasibility.
inline double simplex_distance(const Eigen::MatrixXd& M, const Eigen::VectorXd& y) {
  const Eigen::Index m = M.cols();
  Eigen::VectorXd p = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  const double lipschitz = std::max(M.squaredNorm(), 1e-12);
  for (int it = 0; it < 5000; ++it)
    p = project_simplex(p - (M.transpose() * (M * p - y)) / lipschitz);
  return (M * p - y).norm();
}

}  // namespace detail

// Moment constraints M p = y on an m-state distribution.  Requires fewer
// constraints than states, independent rows, and a nonempty F(y); emptiness
// is reported as infeasible_error carrying the least distance from the
// simplex to the constraint set.
class MomentConstraints {
 public:
  MomentConstraints(Eigen::MatrixXd M, Eigen::VectorXd y) : M_(std::move(M)), y_(std::move(y)) {
    const Eigen::Index n = M_.rows(), m = M_.cols();
    if (m < 1) throw usage_error("MomentConstraints: need at least one state");
    if (y_.size() != n) throw usage_error("MomentConstraints: y length must match row count");
    if (n >= m)
      throw usage_error("MomentConstraints: need fewer constraints than states (n < m)");
    if (!M_.allFinite() || !y_.allFinite())
      throw usage_error("MomentConstraints: non-finite entries");
    if (n > 0) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M_.transpose());
      if (qr.rank() < n)
        throw usage_error("MomentConstraints: constraint rows are linearly dependent");
    }
    const auto lp = optrec::detail::lp_feasible_point(stacked(), stacked_rhs());
    if (!lp.feasible) {
      const double certificate = detail::simplex_distance(M_, y_);
      throw infeasible_error(
          "MomentConstraints: no distribution satisfies the moments; nearest "
          "simplex point misses by " + g17(certificate),
          certificate);
    }
  }

  const Eigen::MatrixXd& moments() const { return M_; }
  const Eigen::VectorXd& targets() const { return y_; }
  Eigen::Index states() const { return M_.cols(); }
  Eigen::Index constraint_count() const { return M_.rows(); }

  // Constraint system including the mass row: A p = [y; 1].
  Eigen::MatrixXd stacked() const {
    Eigen::MatrixXd A(M_.rows() + 1, M_.cols());
    A << M_, Eigen::RowVectorXd::Ones(M_.cols());
    return A;
  }
  Eigen::VectorXd stacked_rhs() const {
    Eigen::VectorXd b(y_.size() + 1);
    b << y_, 1.0;
    return b;
  }

 private:
  Eigen::MatrixXd M_;
  Eigen::VectorXd y_;
};

struct MaxEntResult {
  ProbVector p;
  double entropy = 0.0;
  double residual = 0.0;   // max-norm constraint violation
  bool boundary = false;   // solution sits on the simplex boundary
  int iterations = 0;
};

namespace detail {

struct DualState {
  Eigen::VectorXd p;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Newton on the dual  phi(theta) = log Z(theta) - theta . y  with
// p_i proportional to exp((M^T theta)_i).  Converges iff the target moments
// admit a strictly positive solution; otherwise some theta runs to infinity
// and the caller shrinks the support.
inline DualState dual_newton(const Eigen::MatrixXd& M, const Eigen::VectorXd& y,
                             double tol, int max_iter) {
  const Eigen::Index n = M.rows(), m = M.cols();
  DualState st;
  if (n == 0) {
    st.p = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    st.converged = true;
    return st;
  }

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  const auto probs = [&](const Eigen::VectorXd& th) {
    Eigen::VectorXd s = M.transpose() * th;
    const double shift = s.maxCoeff();
    Eigen::VectorXd e = (s.array() - shift).exp();
    return std::pair<Eigen::VectorXd, double>(e / e.sum(), shift + std::log(e.sum()));
  };

  auto [p, logz] = probs(theta);
  double dual = logz - theta.dot(y);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd grad = M * p - y;
    st.iterations = it;
    st.residual = grad.lpNorm<Eigen::Infinity>();
    if (st.residual <= tol) {
      st.converged = true;
      break;
    }

    const Eigen::VectorXd mp = M * p;
    Eigen::MatrixXd H = M * p.asDiagonal() * M.transpose() - mp * mp.transpose();
    double ridge = 0.0;
    Eigen::VectorXd step;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::MatrixXd Hr = H;
      if (ridge > 0.0) Hr.diagonal().array() += ridge;
      step = Hr.ldlt().solve(-grad);
      if (step.allFinite() && grad.dot(step) < 0.0) break;
      ridge = ridge == 0.0 ? 1e-12 * (1.0 + H.cwiseAbs().maxCoeff()) : ridge * 100.0;
    }
    if (!step.allFinite() || grad.dot(step) >= 0.0) break;

    double t = 1.0;
    const double slope = grad.dot(step);
    bool moved = false;
    while (t > 1e-16) {
      const Eigen::VectorXd cand = theta + t * step;
      auto [pc, lc] = probs(cand);
      const double dc = lc - cand.dot(y);
      if (dc <= dual + 1e-4 * t * slope) {
        theta = cand;
        p = pc;
        dual = dc;
        moved = true;
        break;
      }
      t /= 2.0;
    }
    if (!moved) break;  // stalled: boundary case
  }
  st.p = p;
  st.residual = (M * p - y).lpNorm<Eigen::Infinity>();
  return st;
}

}  // namespace detail

namespace detail {

// Columns of M restricted to a support set, with/without the mass row.
inline Eigen::MatrixXd restrict_columns(const Eigen::MatrixXd& M,
                                        const std::vector<Eigen::Index>& keep) {
  Eigen::MatrixXd sub(M.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    sub.col(static_cast<Eigen::Index>(j)) = M.col(keep[j]);
  return sub;
}

inline bool support_feasible(const Eigen::MatrixXd& M, const Eigen::VectorXd& y,
                             const std::vector<Eigen::Index>& keep) {
  Eigen::MatrixXd Mk(M.rows() + 1, static_cast<Eigen::Index>(keep.size()));
  Mk.topRows(M.rows()) = restrict_columns(M, keep);
  Mk.row(M.rows()).setOnes();
  Eigen::VectorXd b(y.size() + 1);
  b << y, 1.0;
  return optrec::detail::lp_feasible_point(Mk, b).feasible;
}

}  // namespace detail

// Maximum-entropy element of F(y).  When the optimizer lies on (or within
// roundoff of) the simplex boundary the dual has no useful finite solution;
// vanishing states are detected, removed when the reduced moments remain
// reachable, and the reduced problem is re-solved.  Such results are flagged.
inline MaxEntResult maxent_solve(const MomentConstraints& constraints,
                                 double tol = 1e-9, int max_iter = 300) {
  const Eigen::MatrixXd& M = constraints.moments();
  const Eigen::VectorXd& y = constraints.targets();
  const Eigen::Index m = constraints.states();

  std::vector<Eigen::Index> support(m);
  std::iota(support.begin(), support.end(), 0);

  detail::DualState st;
  int total_iterations = 0;
  for (int round = 0; round <= static_cast<int>(m); ++round) {
    st = detail::dual_newton(detail::restrict_columns(M, support), y, tol, max_iter);
    total_iterations += st.iterations;

    std::vector<Eigen::Index> reduced;
    if (st.converged) {
      // States indistinguishable from zero mark a boundary solution; drop
      // them and polish, unless the moments genuinely need them positive.
      for (Eigen::Index i = 0; i < st.p.size(); ++i)
        if (st.p[i] > 1e-9) reduced.push_back(support[i]);
      if (reduced.size() == support.size() || reduced.empty()) break;
      if (!detail::support_feasible(M, y, reduced)) break;
      support = std::move(reduced);
      continue;
    }

    // Stalled: the iterate is running off to a face.  Drop near-zero states,
    // loosening the cut until the reduced moments stay reachable.
    bool advanced = false;
    for (double threshold : {1e-13, 1e-10, 1e-7, 1e-4}) {
      reduced.clear();
      for (Eigen::Index i = 0; i < st.p.size(); ++i)
        if (st.p[i] > threshold) reduced.push_back(support[i]);
      if (reduced.empty() || reduced.size() == support.size()) continue;
      if (!detail::support_feasible(M, y, reduced)) continue;
      support = std::move(reduced);
      advanced = true;
      break;
    }
    if (!advanced) break;
  }

  if (!st.converged)
    throw numeric_error("maxent_solve: dual iteration did not reach residual " + g17(tol) +
                        "; best residual " + g17(st.residual));
  const bool shrunk = static_cast<Eigen::Index>(support.size()) < m;

  std::vector<double> full(static_cast<std::size_t>(m), 0.0);
  for (std::size_t j = 0; j < support.size(); ++j)
    full[static_cast<std::size_t>(support[j])] = st.p[static_cast<Eigen::Index>(j)];

  MaxEntResult result{ProbVector(std::move(full)), 0.0, 0.0, shrunk, total_iterations};
  result.entropy = entropy(result.p);
  Eigen::Map<const Eigen::VectorXd> pv(result.p.values().data(), m);
  result.residual = constraints.constraint_count() == 0
                        ? 0.0
                        : (M * pv - y).lpNorm<Eigen::Infinity>();
  return result;
}

struct CenterResult {
  ProbVector center;
  double radius = 0.0;
  double diameter = 0.0;
  std::vector<std::vector<double>> vertices;
};

inline constexpr Eigen::Index vertex_enumeration_limit = 12;

namespace detail {

// All vertices of {p >= 0 : A p = b}: basic solutions over column subsets of
// size rank(A) that come out nonnegative.
inline std::vector<Eigen::VectorXd> polytope_vertices(const Eigen::MatrixXd& A,
                                                      const Eigen::VectorXd& b) {
  const Eigen::Index m = A.cols();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  const Eigen::Index rank = cod.rank();
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();

  std::vector<Eigen::VectorXd> vertices;
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(rank));
  std::iota(pick.begin(), pick.end(), 0);

  const auto consider = [&] {
    Eigen::MatrixXd Aj(A.rows(), rank);
    for (Eigen::Index j = 0; j < rank; ++j) Aj.col(j) = A.col(pick[static_cast<std::size_t>(j)]);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> sub(Aj);
    if (sub.rank() < rank) return;
    const Eigen::VectorXd xj = sub.solve(b);
    if ((Aj * xj - b).lpNorm<Eigen::Infinity>() > 1e-9 * scale) return;
    if ((xj.array() < -1e-9).any()) return;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
    for (Eigen::Index j = 0; j < rank; ++j)
      v[pick[static_cast<std::size_t>(j)]] = std::max(xj[j], 0.0);
    for (const auto& seen : vertices)
      if ((seen - v).lpNorm<Eigen::Infinity>() <= 1e-8) return;
    vertices.push_back(std::move(v));
  };

  // Lexicographic subsets of {0..m-1} of size rank.
  if (rank == 0) return vertices;
  for (;;) {
    consider();
    Eigen::Index i = rank - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == m - rank + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < rank; ++j)
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return vertices;
}

}  // namespace detail

// Center and radius of the smallest Euclidean ball enclosing F(y).  The
// polytope is compact, so it is the hull of its vertices and the minimal
// enclosing ball of the vertices encloses all of it; the center of that ball
// lies in the hull, hence in F(y).  Exponential vertex enumeration limits the
// state count.
inline CenterResult chebyshev_center(const MomentConstraints& constraints) {
  if (constraints.states() > vertex_enumeration_limit)
    throw usage_error("chebyshev_center: supported up to " +
                      std::to_string(vertex_enumeration_limit) + " states");

  const Eigen::MatrixXd A = constraints.stacked();
  const Eigen::VectorXd b = constraints.stacked_rhs();
  std::vector<Eigen::VectorXd> vertices = detail::polytope_vertices(A, b);
  if (vertices.empty())
    throw numeric_error("chebyshev_center: vertex enumeration found nothing");

  const optrec::detail::Ball ball = optrec::detail::min_enclosing_ball(vertices);

  // Re-impose the affine constraints exactly (the ball solve is agnostic to
  // them) and clean up roundoff before validating as a distribution.
  Eigen::VectorXd center = ball.center;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  center -= cod.pseudoInverse() * (A * center - b);
  double mass = 0.0;
  for (Eigen::Index i = 0; i < center.size(); ++i) {
    if (center[i] < 0.0 && center[i] > -1e-9) center[i] = 0.0;
    mass += center[i];
  }
  if (mass > 0.0) center /= mass;

  CenterResult result{ProbVector(std::vector<double>(center.data(), center.data() + center.size())),
                      0.0, 0.0, {}};
  for (const auto& v : vertices) {
    result.radius = std::max(result.radius, (v - center).norm());
    result.vertices.emplace_back(v.data(), v.data() + v.size());
  }
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (std::size_t j = i + 1; j < vertices.size(); ++j)
      result.diameter = std::max(result.diameter, (vertices[i] - vertices[j]).norm());
  return result;
}

struct MinMaxResult {
  ProbVector p;
  double value = 0.0;  // the minimized uniform norm, accurate to ~1e-9
};

// Smallest u such that F(y) contains a distribution with all entries <= u,
// by bisection on u with a phase-I LP deciding each level.  The witness from
// the last feasible level is returned.
inline MinMaxResult min_uniform_norm(const MomentConstraints& constraints) {
  if (constraints.states() > vertex_enumeration_limit)
    throw usage_error("min_uniform_norm: supported up to " +
                      std::to_string(vertex_enumeration_limit) + " states");

  const Eigen::Index m = constraints.states();
  const Eigen::MatrixXd A = constraints.stacked();
  const Eigen::VectorXd b = constraints.stacked_rhs();

  // Feasibility of {M p = y, sum p = 1, 0 <= p <= u} in equality form with
  // slacks: rows [A 0; I I], rhs [b; u 1].
  const auto level = [&](double u) {
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(A.rows() + m, 2 * m);
    big.topLeftCorner(A.rows(), m) = A;
    big.bottomLeftCorner(m, m) = Eigen::MatrixXd::Identity(m, m);
    big.bottomRightCorner(m, m) = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd rhs(A.rows() + m);
    rhs << b, Eigen::VectorXd::Constant(m, u);
    return optrec::detail::lp_feasible_point(big, rhs);
  };

  double lo = 1.0 / static_cast<double>(m), hi = 1.0;
  auto at_lo = level(lo);
  std::vector<double> witness;
  if (at_lo.feasible) {
    witness.assign(at_lo.point.begin(), at_lo.point.begin() + m);
    hi = lo;
  } else {
    auto at_hi = level(hi);
    if (!at_hi.feasible)
      throw numeric_error("min_uniform_norm: level 1 infeasible on feasible constraints");
    witness.assign(at_hi.point.begin(), at_hi.point.begin() + m);
    while (hi - lo > 1e-9) {
      const double mid = 0.5 * (lo + hi);
      auto at_mid = level(mid);
      if (at_mid.feasible) {
        hi = mid;
        witness.assign(at_mid.point.begin(), at_mid.point.begin() + m);
      } else {
        lo = mid;
      }
    }
  }

  MinMaxResult result{ProbVector(std::move(witness)), 0.0};
  for (double v : result.p.values()) result.value = std::max(result.value, v);
  return result;
}

}  // namespace optrec::maxent
