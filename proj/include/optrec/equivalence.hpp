#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "optrec/common.hpp"

// Finite-dimensional linear recovery: estimate S f from data y ~ N f given
// the a-priori bound f'Wf <= r^2 and the noise bound |Nf - y| <= delta.  In
// W-coordinates g = L' f (W = L L') the prior ball becomes Euclidean, so the
// exact-data feasible set is an ellipsoid section whose image under S has a
// computable center and radius.  Everything here works on such instances:
// the Chebyshev-center algorithm, interpolation via the minimal-norm
// element, the level-set optimization algorithm, and the nested-information
// error/bound experiment.

namespace optrec::equivalence {

struct LinearProblem {
  Eigen::MatrixXd S;  // p x d solution map
  Eigen::MatrixXd N;  // k x d information map, full row rank
  Eigen::MatrixXd W;  // d x d symmetric positive definite prior weight
  double r = 1.0;
  double delta = 0.0;

  LinearProblem(Eigen::MatrixXd S_, Eigen::MatrixXd N_, Eigen::MatrixXd W_, double r_,
                double delta_ = 0.0)
      : S(std::move(S_)), N(std::move(N_)), W(std::move(W_)), r(r_), delta(delta_) {
    const auto d = W.rows();
    if (d < 1 || W.cols() != d) throw usage_error("LinearProblem: W must be square");
    if (S.rows() < 1 || S.cols() != d)
      throw usage_error("LinearProblem: S must have one column per dimension");
    if (N.rows() < 1 || N.cols() != d)
      throw usage_error("LinearProblem: N must have one column per dimension");
    if (N.rows() > d) throw usage_error("LinearProblem: more functionals than dimensions");
    if (!(r > 0.0) || !std::isfinite(r)) throw usage_error("LinearProblem: r must be > 0");
    if (!(delta >= 0.0) || !std::isfinite(delta))
      throw usage_error("LinearProblem: delta must be >= 0");
    if ((W - W.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + W.cwiseAbs().maxCoeff()))
      throw usage_error("LinearProblem: W must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(W);
    if (llt.info() != Eigen::Success)
      throw usage_error("LinearProblem: W must be positive definite");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(N.transpose());
    if (qr.rank() < N.rows())
      throw usage_error("LinearProblem: information rows must be linearly independent");
  }

  Eigen::Index dim() const { return W.rows(); }
  Eigen::Index data_dim() const { return N.rows(); }
  Eigen::Index out_dim() const { return S.rows(); }
};

namespace detail {

// The problem rewritten in coordinates where the prior ball is Euclidean:
// g = L' f, so Nf = Nt g and Sf = St g with Nt = N L^-T, St = S L^-T.
struct Whitened {
  Eigen::MatrixXd Lt;  // L', upper triangular; f = Lt^-1 g
  Eigen::MatrixXd Nt;
  Eigen::MatrixXd St;
};

inline Whitened whiten(const LinearProblem& p) {
  Eigen::LLT<Eigen::MatrixXd> llt(p.W);
  Whitened w;
  w.Lt = llt.matrixL().transpose();
  // X = M L^-T solves X L' = M, i.e. L X' = M'.
  w.Nt = llt.matrixL().solve(p.N.transpose()).transpose();
  w.St = llt.matrixL().solve(p.S.transpose()).transpose();
  return w;
}

inline Eigen::VectorXd unwhiten(const Whitened& w, const Eigen::VectorXd& g) {
  return w.Lt.triangularView<Eigen::Upper>().solve(g);
}

// Orthonormal basis of ker(Nt); empty when Nt has full column rank.
inline Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& Nt) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Nt, Eigen::ComputeFullV);
  const Eigen::Index rank = Nt.rows();  // full row rank by construction
  return svd.matrixV().rightCols(Nt.cols() - rank);
}

inline double largest_singular_value(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
}

// Minimal-Euclidean-norm g with |Nt g - y| <= delta.  For delta = 0 this is
// the pseudoinverse solution; otherwise the shrinkage g(mu) = Nt'(Nt Nt' +
// mu I)^-1 y traces the norm/residual trade-off monotonically, so the mu
// with residual exactly delta is found by bisection.
inline Eigen::VectorXd min_norm_in_slab(const Eigen::MatrixXd& Nt, const Eigen::VectorXd& y,
                                        double delta) {
  if (y.size() != Nt.rows()) throw usage_error("data length does not match the information map");
  if (y.norm() <= delta) return Eigen::VectorXd::Zero(Nt.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Nt, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  const Eigen::VectorXd b = svd.matrixU().transpose() * y;

  const auto solution = [&](double mu) {
    Eigen::VectorXd coeffs(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
      coeffs(i) = s(i) * b(i) / (s(i) * s(i) + mu);
    return Eigen::VectorXd(svd.matrixV() * coeffs);
  };
  if (delta == 0.0) return solution(0.0);

  const auto residual = [&](double mu) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double t = mu * b(i) / (s(i) * s(i) + mu);
      acc += t * t;
    }
    return std::sqrt(acc);
  };
  double lo = 0.0, hi = 1.0;
  while (residual(hi) < delta) hi *= 2.0;
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) < delta ? lo : hi) = mid;
  }
  return solution(0.5 * (lo + hi));
}

}  // namespace detail

// The image S(F_y): its center, Chebyshev radius, and diameter, plus the
// feasible element realizing the center.  `exact` marks the delta = 0 case,
// where the set is an ellipsoid and the numbers are spectral; with noise the
// radius and diameter come from seeded random-restart ascent and are
// estimates (lower bounds up to search error).
struct FeasibleSetGeometry {
  Eigen::VectorXd center;
  Eigen::VectorXd f_center;  // element of F_y mapped to the center
  double radius = 0.0;
  double diameter = 0.0;
  bool exact = true;
};

inline FeasibleSetGeometry feasible_geometry(const LinearProblem& p, const Eigen::VectorXd& y,
                                             std::uint64_t seed = 0x9e0);

// Worst-case-optimal recovery: the center of S(F_y).
inline Eigen::VectorXd central_algorithm(const LinearProblem& p, const Eigen::VectorXd& y,
                                         std::uint64_t seed = 0x9e0) {
  return feasible_geometry(p, y, seed).center;
}

// Recovery through any interpolant of the data; the minimal-norm element is
// used, which keeps the output within twice the optimal worst-case error.
inline Eigen::VectorXd interpolatory_algorithm(const LinearProblem& p, const Eigen::VectorXd& y) {
  const detail::Whitened w = detail::whiten(p);
  const Eigen::VectorXd g = detail::min_norm_in_slab(w.Nt, y, p.delta);
  if (g.norm() > p.r * (1.0 + 1e-12))
    throw infeasible_error("interpolatory_algorithm: no element satisfies both constraints",
                           g.norm());
  return w.St * g;
}

inline FeasibleSetGeometry feasible_geometry(const LinearProblem& p, const Eigen::VectorXd& y,
                                             std::uint64_t seed) {
  const detail::Whitened w = detail::whiten(p);
  const Eigen::VectorXd g0 = detail::min_norm_in_slab(w.Nt, y, p.delta);
  if (g0.norm() > p.r * (1.0 + 1e-12))
    throw infeasible_error("feasible_geometry: the data admit no feasible element (needs norm " +
                               std::to_string(g0.norm()) + " > r = " + std::to_string(p.r) + ")",
                           g0.norm());

  FeasibleSetGeometry geo;
  geo.center = w.St * g0;
  geo.f_center = detail::unwhiten(w, g0);

  if (p.delta == 0.0) {
    // F_y in g-coordinates is {g0 + Z v : |v| <= rho} with Z spanning
    // ker(Nt) and g0 orthogonal to it, so S(F_y) is the ellipsoid
    // center + (St Z) v and the radius is rho * sigma_max(St Z).
    const double rho2 = p.r * p.r - g0.squaredNorm();
    const double rho = std::sqrt(std::max(0.0, rho2));
    const Eigen::MatrixXd Z = detail::kernel_basis(w.Nt);
    geo.radius = rho * detail::largest_singular_value(w.St * Z);
    geo.diameter = 2.0 * geo.radius;
    geo.exact = true;
    return geo;
  }

  // Noisy data: ascend |St g - center| (and pairwise |St g1 - St g2| for the
  // diameter) over the intersection of the prior ball and the noise slab,
  // projecting back with alternating projections after each step.
  geo.exact = false;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w.Nt, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto project = [&](Eigen::VectorXd g) {
    for (int pass = 0; pass < 64; ++pass) {
      bool moved = false;
      const Eigen::VectorXd resid = w.Nt * g - y;
      if (resid.norm() > p.delta * (1.0 + 1e-12)) {
        // least-squares correction toward the slab
        const Eigen::VectorXd shift =
            svd.solve(resid * (1.0 - p.delta / std::max(resid.norm(), 1e-300)));
        g -= shift;
        moved = true;
      }
      if (g.norm() > p.r) {
        g *= p.r / g.norm();
        moved = true;
      }
      if (!moved) break;
    }
    return g;
  };

  SeededRng rng(seed);
  const auto random_feasible = [&]() {
    Eigen::VectorXd g(w.Nt.cols());
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.normal();
    return project(g0 + g * (0.5 * p.r));
  };
  const auto ascend = [&](Eigen::VectorXd g, const auto& grad_dir) {
    double step = 0.25 * p.r;
    for (int it = 0; it < 200 && step > 1e-12 * p.r; ++it) {
      const Eigen::VectorXd dir = grad_dir(g);
      if (dir.norm() < 1e-300) break;
      const Eigen::VectorXd trial = project(g + step * (dir / dir.norm()));
      if ((w.St * trial - geo.center).norm() > (w.St * g - geo.center).norm())
        g = trial;
      else
        step *= 0.5;
    }
    return g;
  };

  double radius = 0.0;
  std::vector<Eigen::VectorXd> extremes;
  for (int restart = 0; restart < 64; ++restart) {
    const Eigen::VectorXd g = ascend(random_feasible(), [&](const Eigen::VectorXd& cur) {
      return Eigen::VectorXd(w.St.transpose() * (w.St * cur - geo.center));
    });
    radius = std::max(radius, (w.St * g - geo.center).norm());
    extremes.push_back(w.St * g);
  }
  double diameter = 0.0;
  for (std::size_t i = 0; i < extremes.size(); ++i)
    for (std::size_t j = i + 1; j < extremes.size(); ++j)
      diameter = std::max(diameter, (extremes[i] - extremes[j]).norm());
  geo.radius = std::max(radius, 0.5 * diameter);
  geo.diameter = std::max(diameter, radius);
  return geo;
}

// argmin over f of max(|f|_F, lambda * |Nf - y|).  Found by bisection on the
// objective level t: the level set {|g| <= t, |Nt g - y| <= t/lambda} is
// nonempty iff the smallest data residual attainable inside the t-ball (a
// regularized least-squares value) is at most t/lambda.  lambda = infinity
// asks for exact interpolation (the convention infinity * 0 = 0) and returns
// the minimal-norm interpolant directly.
inline Eigen::VectorXd optimization_algorithm(const LinearProblem& p, const Eigen::VectorXd& y,
                                              double lambda) {
  if (std::isnan(lambda) || lambda <= 0.0)
    throw usage_error("optimization_algorithm: lambda must be positive (or infinite)");
  const detail::Whitened w = detail::whiten(p);
  if (y.size() != w.Nt.rows())
    throw usage_error("optimization_algorithm: data length does not match the information map");
  if (std::isinf(lambda)) return w.St * detail::min_norm_in_slab(w.Nt, y, 0.0);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w.Nt, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  const Eigen::VectorXd b = svd.matrixU().transpose() * y;

  const auto coeffs_at = [&](double mu) {
    Eigen::VectorXd c(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) c(i) = s(i) * b(i) / (s(i) * s(i) + mu);
    return c;
  };
  const auto norm_at = [&](double mu) { return coeffs_at(mu).norm(); };
  const auto resid_at = [&](double mu) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double t = mu * b(i) / (s(i) * s(i) + mu);
      acc += t * t;
    }
    return std::sqrt(acc);
  };
  // g constrained to norm exactly t (t below the interpolant's norm).
  const auto mu_for_norm = [&](double t) {
    double lo = 0.0, hi = 1.0;
    while (norm_at(hi) > t) hi *= 2.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (norm_at(mid) > t ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };

  const double interp_norm = norm_at(0.0);
  if (interp_norm == 0.0) return Eigen::VectorXd::Zero(p.out_dim());
  const auto feasible = [&](double t) {
    if (interp_norm <= t) return true;  // residual zero within the ball
    return resid_at(mu_for_norm(t)) <= t / lambda;
  };

  double lo = 0.0, hi = interp_norm;
  while (hi - lo > 1e-9 * (1.0 + hi)) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  const Eigen::VectorXd coeffs =
      interp_norm <= hi ? coeffs_at(0.0) : coeffs_at(mu_for_norm(hi));
  return w.St * (svd.matrixV() * coeffs);
}

// Growing row sets of one fixed functional matrix.
struct NestedInformation {
  Eigen::MatrixXd full;  // d x d, rows are the functionals in order

  explicit NestedInformation(Eigen::MatrixXd rows) : full(std::move(rows)) {
    if (full.rows() < 1 || full.rows() != full.cols())
      throw usage_error("NestedInformation: needs a square functional matrix");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(full);
    if (qr.rank() < full.rows())
      throw usage_error("NestedInformation: functional rows must be linearly independent");
  }

  Eigen::MatrixXd first(Eigen::Index n) const { return full.topRows(n); }
};

struct AsymptoticRow {
  int n = 0;
  double error = 0.0;  // |S f - S(min-norm interpolant of N_n f)|
  double bound = 0.0;  // 2 |f|_F r(N_n)
  double ratio = 0.0;  // error / bound, 0 when both vanish
};

struct AsymptoticReport {
  double f_norm = 0.0;  // |f|_F
  std::vector<AsymptoticRow> rows;
};

// Tracks the minimal-norm interpolation error against the guaranteed decay
// 2 |f|_F r(N_n) as information accumulates.  r(N_n) is the radius of the
// image of the unit prior ball cut by ker(N_n), computed exactly.
inline AsymptoticReport asymptotic_experiment(const LinearProblem& p,
                                              const NestedInformation& nested,
                                              const Eigen::VectorXd& f,
                                              const std::vector<int>& ns) {
  if (p.delta != 0.0)
    throw usage_error("asymptotic_experiment: needs exact information (delta = 0)");
  if (nested.full.rows() != p.dim())
    throw usage_error("asymptotic_experiment: functional matrix does not match the dimension");
  if (f.size() != p.dim())
    throw usage_error("asymptotic_experiment: element length does not match the dimension");
  if (ns.empty()) throw usage_error("asymptotic_experiment: needs at least one n");
  for (int n : ns)
    if (n < 1 || n > p.dim())
      throw usage_error("asymptotic_experiment: n must lie in [1, dim]");

  const detail::Whitened w = detail::whiten(p);
  const Eigen::MatrixXd nested_t =
      Eigen::LLT<Eigen::MatrixXd>(p.W).matrixL().solve(nested.full.transpose()).transpose();
  const Eigen::VectorXd g_f = w.Lt.triangularView<Eigen::Upper>() * f;

  AsymptoticReport report;
  report.f_norm = g_f.norm();
  for (int n : ns) {
    const Eigen::MatrixXd Nt_n = nested_t.topRows(n);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Nt_n.transpose());
    if (qr.rank() < n)
      throw usage_error("asymptotic_experiment: leading functional rows are degenerate");
    const Eigen::VectorXd g0 = detail::min_norm_in_slab(Nt_n, Nt_n * g_f, 0.0);
    AsymptoticRow row;
    row.n = n;
    row.error = (w.St * (g_f - g0)).norm();
    row.bound = 2.0 * report.f_norm * detail::largest_singular_value(
                                          w.St * detail::kernel_basis(Nt_n));
    row.ratio = (row.error > 0.0 && row.bound > 0.0) ? row.error / row.bound : 0.0;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace optrec::equivalence
