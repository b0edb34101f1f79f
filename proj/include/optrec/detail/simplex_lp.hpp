#pragma once

// Phase-I simplex: decide whether {x >= 0 : Ax = b} is nonempty and produce a
// point when it is.  Minimizes the sum of artificial variables with Bland's
// anti-cycling rule; sizes here are tiny (tens of rows/columns), so a dense
// tableau is the simplest correct choice.

#include <vector>

#include <Eigen/Dense>

#include "optrec/common.hpp"

namespace optrec::detail {

struct LpFeasibility {
  bool feasible = false;
  std::vector<double> point;    // feasible x (size = cols) when feasible
  double artificial_sum = 0.0;  // phase-I optimum; > 0 certifies infeasibility
};

inline LpFeasibility lp_feasible_point(Eigen::MatrixXd A, Eigen::VectorXd b,
                                       double tol = 1e-10) {
  const Eigen::Index rows = A.rows(), cols = A.cols();
  if (b.size() != rows) throw usage_error("lp_feasible_point: shape mismatch");

  for (Eigen::Index i = 0; i < rows; ++i) {
    double scale = std::max(b[i] < 0 ? -b[i] : b[i], A.row(i).cwiseAbs().maxCoeff());
    if (scale > 0.0) {
      A.row(i) /= scale;
      b[i] /= scale;
    }
    if (b[i] < 0.0) {
      A.row(i) = -A.row(i);
      b[i] = -b[i];
    }
  }

  // Tableau over [x, artificials], artificial basis to start.
  Eigen::MatrixXd tab(rows, cols + rows);
  tab << A, Eigen::MatrixXd::Identity(rows, rows);
  Eigen::VectorXd rhs = b;
  std::vector<Eigen::Index> basis(rows);
  for (Eigen::Index i = 0; i < rows; ++i) basis[i] = cols + i;

  const auto phase1_cost = [&](Eigen::Index j) { return j >= cols ? 1.0 : 0.0; };

  for (long iter = 0; iter < 100000; ++iter) {
    // Reduced costs c_j - c_B^T tab_j; entering = smallest eligible index.
    Eigen::Index entering = -1;
    for (Eigen::Index j = 0; j < cols + rows; ++j) {
      double red = phase1_cost(j);
      for (Eigen::Index i = 0; i < rows; ++i)
        if (basis[i] >= cols) red -= tab(i, j);
      if (red < -tol) {
        entering = j;
        break;
      }
    }
    if (entering < 0) break;  // optimal

    Eigen::Index leaving = -1;
    double best_ratio = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (tab(i, entering) <= tol) continue;
      const double ratio = rhs[i] / tab(i, entering);
      if (leaving < 0 || ratio < best_ratio - 1e-14 ||
          (ratio < best_ratio + 1e-14 && basis[i] < basis[leaving])) {
        leaving = i;
        best_ratio = ratio;
      }
    }
    if (leaving < 0)
      throw numeric_error("lp_feasible_point: phase-I became unbounded");

    rhs[leaving] /= tab(leaving, entering);
    tab.row(leaving) /= tab(leaving, entering);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i == leaving) continue;
      const double factor = tab(i, entering);
      if (factor != 0.0) {
        tab.row(i) -= factor * tab.row(leaving);
        rhs[i] -= factor * rhs[leaving];
      }
    }
    basis[leaving] = entering;
  }

  LpFeasibility result;
  for (Eigen::Index i = 0; i < rows; ++i)
    if (basis[i] >= cols) result.artificial_sum += rhs[i];
  result.feasible = result.artificial_sum <= tol * static_cast<double>(std::max<Eigen::Index>(rows, 1));
  if (result.feasible) {
    result.point.assign(static_cast<std::size_t>(cols), 0.0);
    for (Eigen::Index i = 0; i < rows; ++i)
      if (basis[i] < cols)
        result.point[static_cast<std::size_t>(basis[i])] = std::max(0.0, rhs[i]);
  }
  return result;
}

}  // namespace optrec::detail
