#pragma once

// JSON records and CSV tables for the library's artifacts, plus atomic file
// output.  Matrices travel as row-major nested arrays; doubles keep 17
// significant digits so artifacts round-trip bit-exactly.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "optrec/common.hpp"
#include "optrec/equivalence.hpp"
#include "optrec/maxent.hpp"
#include "optrec/quadrature.hpp"
#include "optrec/settings.hpp"
#include "optrec/splines.hpp"

namespace optrec::serialize {

using json = nlohmann::json;

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw usage_error(what + ": expected an array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  if (rows > 0) {
    if (!j[0].is_array()) throw usage_error(what + ": rows must be arrays");
    cols = j[0].size();
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw usage_error(what + ": ragged rows");
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Eigen::VectorXd vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw usage_error(what + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

// ---- splines ----

inline json spline_to_json(const splines::CubicSpline& s) {
  json j{{"knots", s.knots()},
         {"values", s.values()},
         {"moments", s.moments()},
         {"boundary", s.natural_boundary() ? "natural" : "general"}};
  if (s.lambda()) j["lambda"] = *s.lambda();
  return j;
}

inline splines::CubicSpline spline_from_json(const json& j) {
  std::optional<double> lambda;
  if (j.contains("lambda")) lambda = j.at("lambda").get<double>();
  return splines::CubicSpline(j.at("knots").get<std::vector<double>>(),
                              j.at("values").get<std::vector<double>>(),
                              j.at("moments").get<std::vector<double>>(), lambda);
}

// ---- moment problems ----

inline json constraints_to_json(const maxent::MomentConstraints& c) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < c.constraint_count(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < c.states(); ++k) row.push_back(c.moments()(i, k));
    rows.push_back(std::move(row));
  }
  json y = json::array();
  for (Eigen::Index i = 0; i < c.constraint_count(); ++i) y.push_back(c.targets()[i]);
  return json{{"m", c.states()}, {"rows", std::move(rows)}, {"y", std::move(y)}};
}

inline maxent::MomentConstraints constraints_from_json(const json& j) {
  const auto m = j.at("m").get<Eigen::Index>();
  if (m < 1) throw usage_error("moment problem: m must be at least 1");
  const json& rows = j.at("rows");
  if (!rows.is_array()) throw usage_error("moment problem: rows must be an array");
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), m);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || static_cast<Eigen::Index>(rows[i].size()) != m)
      throw usage_error("moment problem: each row needs exactly m entries");
    for (Eigen::Index k = 0; k < m; ++k)
      M(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)].get<double>();
  }
  Eigen::VectorXd y = vector_from_json(j.at("y"), "moment problem y");
  if (y.size() != M.rows())
    throw usage_error("moment problem: y length must equal the number of rows");
  return maxent::MomentConstraints(std::move(M), std::move(y));
}

inline json maxent_to_json(const maxent::MaxEntResult& r) {
  return json{{"method", "maximum-entropy"},
              {"p", r.p.values()},
              {"entropy", r.entropy},
              {"residual", r.residual},
              {"boundary", r.boundary}};
}

inline json center_to_json(const maxent::CenterResult& r) {
  return json{{"method", "chebyshev-center"},
              {"p", r.center.values()},
              {"entropy", maxent::entropy(r.center)},
              {"residual", 0.0},
              {"radius", r.radius},
              {"diameter", r.diameter}};
}

inline json minmax_to_json(const maxent::MinMaxResult& r) {
  return json{{"method", "min-uniform-norm"},
              {"p", r.p.values()},
              {"entropy", maxent::entropy(r.p)},
              {"residual", 0.0},
              {"max_probability", r.value}};
}

// ---- quadrature / settings reports ----

inline json convergence_to_json(const quadrature::ConvergenceReport& r) {
  return json{{"ns", r.ns},
              {"errors", r.errors},
              {"fitted_exponent", r.fitted_exponent},
              {"fitted_constant", r.fitted_constant},
              {"exact_within_precision", r.exact_within_precision}};
}

inline json profile_to_json(const settings::ComplexityProfile& p) {
  json flagged = json::array();
  for (char f : p.flagged) flagged.push_back(f != 0);
  json j{{"strategy", p.strategy},
         {"epsilons", p.epsilons},
         {"indices", p.indices},
         {"costs", p.costs},
         {"flagged", std::move(flagged)}};
  if (p.slope_defined) j["slope"] = p.slope;
  return j;
}

inline json verdict_to_json(const settings::ComparisonVerdict& v) {
  json evidence = json::array();
  for (const auto& e : v.evidence)
    evidence.push_back(json{{"at", e.at}, {"first", e.first}, {"second", e.second}});
  return json{{"outcome", settings::outcome_name(v.outcome)},
              {"criterion", settings::criterion_name(v.criterion)},
              {"first", v.first},
              {"second", v.second},
              {"detail", v.detail},
              {"evidence", std::move(evidence)}};
}

// ---- linear recovery instances ----

inline json problem_to_json(const equivalence::LinearProblem& p) {
  return json{{"S", matrix_to_json(p.S)},
              {"N", matrix_to_json(p.N)},
              {"W", matrix_to_json(p.W)},
              {"r", p.r},
              {"delta", p.delta}};
}

inline equivalence::LinearProblem problem_from_json(const json& j) {
  return equivalence::LinearProblem(
      matrix_from_json(j.at("S"), "instance S"), matrix_from_json(j.at("N"), "instance N"),
      matrix_from_json(j.at("W"), "instance W"), j.at("r").get<double>(),
      j.value("delta", 0.0));
}

inline json asymptotic_to_json(const equivalence::AsymptoticReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back(json{{"n", row.n}, {"error", row.error}, {"bound", row.bound},
                        {"ratio", row.ratio}});
  return json{{"f_norm", r.f_norm}, {"rows", std::move(rows)}};
}

// ---- CSV tables ----

// One row per (algorithm, sigma, tau) cell of an estimator sweep.
struct EstimatorRow {
  std::string algorithm;
  double sigma = 0.0;
  double tau = 0.0;
  std::string prior;
  double error = 0.0;
};

inline std::string estimator_csv(const std::vector<EstimatorRow>& rows) {
  std::ostringstream os;
  os << "algorithm,sigma,tau,prior,error\n";
  for (const auto& r : rows)
    os << r.algorithm << ',' << g17(r.sigma) << ',' << g17(r.tau) << ',' << r.prior << ','
       << g17(r.error) << '\n';
  return os.str();
}

// Shared shape for the recovery experiments: the varying parameter is a
// dimension, a lambda, or a nesting level depending on the experiment.
struct RecoveryRow {
  long instance_id = 0;
  double parameter = 0.0;
  double error = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
};

inline std::string recovery_csv(const std::string& parameter_name,
                                const std::vector<RecoveryRow>& rows) {
  std::ostringstream os;
  os << "instance_id," << parameter_name << ",error,bound,ratio\n";
  for (const auto& r : rows)
    os << r.instance_id << ',' << g17(r.parameter) << ',' << g17(r.error) << ','
       << g17(r.bound) << ',' << g17(r.ratio) << '\n';
  return os.str();
}

inline std::string grid_csv(const std::string& x_name, const std::string& y_name,
                            const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw usage_error("grid_csv: column length mismatch");
  std::ostringstream os;
  os << x_name << ',' << y_name << '\n';
  for (std::size_t i = 0; i < xs.size(); ++i) os << g17(xs[i]) << ',' << g17(ys[i]) << '\n';
  return os.str();
}

// ---- atomic file output ----

// Writes via a sibling temp file and rename so readers never observe a
// partial artifact.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  fs::path tmp = dir / (path.filename().string() + ".tmp");
  for (int attempt = 0; fs::exists(tmp) && attempt < 1000; ++attempt)
    tmp = dir / (path.filename().string() + ".tmp" + std::to_string(attempt));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw numeric_error("write_text_atomic: cannot open " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw numeric_error("write_text_atomic: write failed on " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw numeric_error("write_text_atomic: rename failed: " + ec.message());
  }
}

}  // namespace optrec::serialize
