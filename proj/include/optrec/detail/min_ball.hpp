#pragma once

// Minimal enclosing Euclidean ball of a finite point set (Welzl's algorithm
// with move-to-front), for the modest dimensions and point counts used here.
// The center of the result lies in the convex hull of its support points.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "optrec/common.hpp"

namespace optrec::detail {

struct Ball {
  Eigen::VectorXd center;
  double radius = -1.0;  // negative: empty ball containing nothing

  bool contains(const Eigen::VectorXd& p) const {
    if (radius < 0.0) return false;
    return (p - center).norm() <= radius * (1.0 + 1e-10) + 1e-12;
  }
};

// Smallest ball with the support points on its boundary: the circumball of
// their affine hull.  For support {s_0..s_k}, writing d_i = s_i - s_0 and the
// Gram matrix G = D D^T, the center is s_0 + D^T x with 2 G x = diag(G).
inline Ball circumball(const std::vector<Eigen::VectorXd>& support) {
  Ball b;
  if (support.empty()) return b;
  if (support.size() == 1) {
    b.center = support[0];
    b.radius = 0.0;
    return b;
  }
  const Eigen::Index k = static_cast<Eigen::Index>(support.size()) - 1;
  Eigen::MatrixXd D(k, support[0].size());
  for (Eigen::Index i = 0; i < k; ++i) D.row(i) = (support[i + 1] - support[0]).transpose();
  const Eigen::MatrixXd G = D * D.transpose();
  const Eigen::VectorXd rhs = 0.5 * G.diagonal();
  // Complete orthogonal decomposition tolerates (near-)degenerate supports.
  const Eigen::VectorXd x = G.completeOrthogonalDecomposition().solve(rhs);
  b.center = support[0] + D.transpose() * x;
  b.radius = 0.0;
  for (const auto& s : support) b.radius = std::max(b.radius, (s - b.center).norm());
  return b;
}

inline Ball welzl_recurse(std::vector<const Eigen::VectorXd*>& pts, std::size_t n,
                          std::vector<Eigen::VectorXd>& support, std::size_t dim) {
  if (n == 0 || support.size() == dim + 1) return circumball(support);
  Ball b = welzl_recurse(pts, n - 1, support, dim);
  const Eigen::VectorXd* p = pts[n - 1];
  if (b.contains(*p)) return b;
  support.push_back(*p);
  b = welzl_recurse(pts, n - 1, support, dim);
  support.pop_back();
  // Move-to-front keeps hard points early, the classic speedup.
  for (std::size_t i = n - 1; i > 0; --i) pts[i] = pts[i - 1];
  pts[0] = p;
  return b;
}

inline Ball min_enclosing_ball(const std::vector<Eigen::VectorXd>& points,
                               std::uint64_t seed = 0x5eedbull) {
  if (points.empty()) return {};
  std::vector<const Eigen::VectorXd*> pts(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) pts[i] = &points[i];
  // Deterministic shuffle; Welzl's expected-time bound needs random order.
  SeededRng rng(seed);
  for (std::size_t i = pts.size(); i > 1; --i)
    std::swap(pts[i - 1], pts[static_cast<std::size_t>(rng.uniform01() * i)]);
  std::vector<Eigen::VectorXd> support;
  support.reserve(points[0].size() + 1);
  return welzl_recurse(pts, pts.size(), support, static_cast<std::size_t>(points[0].size()));
}

}  // namespace optrec::detail
