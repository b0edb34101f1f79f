// Experiment runner: one subcommand per library module, config-file driven,
// emitting CSV or JSON artifacts that embed the fully resolved configuration
// so every run can be reproduced byte for byte.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "optrec/common.hpp"
#include "optrec/core.hpp"
#include "optrec/equivalence.hpp"
#include "optrec/estimators.hpp"
#include "optrec/maxent.hpp"
#include "optrec/quadrature.hpp"
#include "optrec/serialize.hpp"
#include "optrec/settings.hpp"
#include "optrec/splines.hpp"

namespace {

using json = nlohmann::json;
using optrec::usage_error;

constexpr double kPi = 3.14159265358979323846;

// ---- config plumbing ----

struct FlagOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw usage_error("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw usage_error("config file '" + path + "' must hold a JSON object");
  return j;
}

// Defaults overlaid by the file, overlaid by flags; unknown or missing keys
// are reported by name.
json resolve_config(const std::string& subcommand, const json& schema,
                    const std::vector<std::string>& required, const json& file_cfg,
                    const FlagOverrides& flags) {
  json cfg = schema;
  for (const auto& [key, value] : file_cfg.items()) {
    if (key == "subcommand") continue;
    if (!cfg.contains(key))
      throw usage_error("config key '" + key + "' is not recognized by '" + subcommand + "'");
    cfg[key] = value;
  }
  if (flags.seed) cfg["seed"] = *flags.seed;
  if (flags.out) cfg["out"] = *flags.out;
  if (flags.format) cfg["format"] = *flags.format;
  const std::string format = cfg.at("format").get<std::string>();
  if (format != "csv" && format != "json")
    throw usage_error("config key 'format' must be \"csv\" or \"json\"");
  for (const std::string& key : required)
    if (cfg.at(key).is_null())
      throw usage_error("config key '" + key + "' is required by '" + subcommand + "'");
  cfg["subcommand"] = subcommand;
  return cfg;
}

std::string csv_artifact(const json& cfg, const std::vector<std::string>& notes,
                         const std::string& table) {
  std::string s = "# config = " + cfg.dump() + "\n";
  for (const std::string& note : notes) s += "# " + note + "\n";
  return s + table;
}

std::string json_artifact(const json& cfg, json body) {
  const json out{{"config", cfg}, {"results", std::move(body)}};
  return out.dump(2) + "\n";
}

template <typename T>
std::vector<T> list_of(const json& cfg, const std::string& key) {
  const json& j = cfg.at(key);
  if (!j.is_array() || j.empty())
    throw usage_error("config key '" + key + "' must be a non-empty array");
  return j.get<std::vector<T>>();
}

// ---- named probe integrands ----

optrec::RealFunction named_function(const std::string& name) {
  if (name == "exp") return [](double t) { return std::exp(t); };
  if (name == "sin") return [](double t) { return std::sin(kPi * t); };
  if (name == "runge") return [](double t) { return 1.0 / (1.0 + 25.0 * (t - 0.5) * (t - 0.5)); };
  if (name == "quadratic") return [](double t) { return t * t; };
  if (name == "cubic") return [](double t) { return t * t * t - t; };
  throw usage_error("unknown integrand '" + name +
                    "' (expected exp, sin, runge, quadratic, or cubic)");
}

// ---- quadrature ----

std::string run_quad_converge(const json& cfg, const std::string& format) {
  const auto rule = optrec::quadrature::rule_from_name(cfg.at("rule").get<std::string>());
  const auto f = named_function(cfg.at("function").get<std::string>());
  const auto ns = list_of<int>(cfg, "ns");
  std::optional<double> reference;
  if (!cfg.at("reference").is_null()) reference = cfg.at("reference").get<double>();
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const auto report = optrec::quadrature::estimate_exponent(rule, f, ns, reference, seed);
  if (format == "json") return json_artifact(cfg, optrec::serialize::convergence_to_json(report));
  return csv_artifact(cfg, {}, report.to_csv());
}

std::string run_quad_complexity(const json& cfg, const std::string& format) {
  const auto rule = optrec::quadrature::rule_from_name(cfg.at("rule").get<std::string>());
  const optrec::settings::SmoothnessBall ball{cfg.at("r").get<int>(),
                                              cfg.at("bound").get<double>()};
  const auto profile = optrec::settings::complexity(optrec::quadrature::strategy_for(rule), ball,
                                                    list_of<double>(cfg, "epsilons"));
  if (format == "json") return json_artifact(cfg, optrec::serialize::profile_to_json(profile));
  return csv_artifact(cfg, {}, profile.to_csv());
}

// ---- splines ----

std::string spline_output(const json& cfg, const std::string& format,
                          const optrec::splines::CubicSpline& s) {
  const double energy = optrec::splines::bending_energy(s);
  if (format == "json") {
    json body = optrec::serialize::spline_to_json(s);
    body["energy"] = energy;
    return json_artifact(cfg, std::move(body));
  }
  const int grid = cfg.at("grid_points").get<int>();
  if (grid < 2) throw usage_error("config key 'grid_points' must be at least 2");
  const double lo = s.knots().front(), hi = s.knots().back();
  std::vector<double> ts(grid), vs(grid);
  for (int i = 0; i < grid; ++i) {
    ts[i] = lo + (hi - lo) * i / (grid - 1);
    vs[i] = s(ts[i]);
  }
  return csv_artifact(cfg, {"energy = " + optrec::g17(energy)},
                      optrec::serialize::grid_csv("t", "value", ts, vs));
}

std::string run_spline_fit(const json& cfg, const std::string& format) {
  const auto s = optrec::splines::natural_cubic_spline(list_of<double>(cfg, "knots"),
                                                       list_of<double>(cfg, "values"));
  return spline_output(cfg, format, s);
}

std::string run_spline_smooth(const json& cfg, const std::string& format) {
  optrec::splines::SmoothingProblem problem;
  problem.knots = list_of<double>(cfg, "knots");
  problem.y = list_of<double>(cfg, "values");
  problem.lambda = cfg.at("lambda").get<double>();
  return spline_output(cfg, format, optrec::splines::smoothing_spline(problem));
}

std::string run_spline_cv(const json& cfg, const std::string& format) {
  const auto result = optrec::splines::cross_validate_lambda(
      list_of<double>(cfg, "knots"), list_of<double>(cfg, "values"),
      list_of<double>(cfg, "lambdas"));
  if (format == "json")
    return json_artifact(cfg, json{{"lambdas", result.grid},
                                   {"scores", result.scores},
                                   {"best_lambda", result.lambda}});
  return csv_artifact(cfg, {"best_lambda = " + optrec::g17(result.lambda)},
                      optrec::serialize::grid_csv("lambda", "score", result.grid, result.scores));
}

// ---- maximum entropy ----

std::string probabilities_csv(const std::vector<double>& p) {
  std::string s = "index,p\n";
  for (std::size_t i = 0; i < p.size(); ++i) s += std::to_string(i) + "," + optrec::g17(p[i]) + "\n";
  return s;
}

std::string run_maxent(const json& cfg, const std::string& format, const std::string& kind) {
  const auto constraints = optrec::serialize::constraints_from_json(cfg);
  json body;
  std::vector<std::string> notes;
  std::vector<double> p;
  if (kind == "solve") {
    const auto r = optrec::maxent::maxent_solve(constraints);
    body = optrec::serialize::maxent_to_json(r);
    notes = std::vector<std::string>{"entropy = " + optrec::g17(r.entropy),
                                     "residual = " + optrec::g17(r.residual)};
    p = r.p.values();
  } else if (kind == "center") {
    const auto r = optrec::maxent::chebyshev_center(constraints);
    body = optrec::serialize::center_to_json(r);
    notes = {"radius = " + optrec::g17(r.radius), "diameter = " + optrec::g17(r.diameter)};
    p = r.center.values();
  } else {
    const auto r = optrec::maxent::min_uniform_norm(constraints);
    body = optrec::serialize::minmax_to_json(r);
    notes = {"max_probability = " + optrec::g17(r.value)};
    p = r.p.values();
  }
  if (format == "json") return json_artifact(cfg, std::move(body));
  return csv_artifact(cfg, notes, probabilities_csv(p));
}

// ---- estimators ----

std::string run_estimate_sweep(const json& cfg, const std::string& format) {
  const auto sigmas = list_of<double>(cfg, "sigmas");
  const auto taus = list_of<double>(cfg, "taus");
  const auto names = list_of<std::string>(cfg, "algorithms");
  const std::string prior = cfg.at("prior").get<std::string>();
  if (prior != "gaussian" && prior != "bounded")
    throw usage_error("config key 'prior' must be \"gaussian\" or \"bounded\"");
  std::vector<optrec::serialize::EstimatorRow> rows;
  for (const std::string& name : names)
    for (double sigma : sigmas)
      for (double tau : taus) {
        optrec::estimators::ScalarAlgorithm algorithm = [&] {
          if (name == "identity") return optrec::estimators::ScalarAlgorithm::identity();
          if (name == "clamp") return optrec::estimators::ScalarAlgorithm::clamp(tau);
          if (name == "shrink") return optrec::estimators::ScalarAlgorithm::shrink(sigma, tau);
          throw usage_error("unknown algorithm '" + name +
                            "' (expected identity, clamp, or shrink)");
        }();
        optrec::estimators::ScalarEstimationSetting setting;
        setting.sigma = sigma;
        setting.tau = tau;
        setting.prior = prior == "bounded" ? optrec::estimators::PriorKind::Bounded
                                           : optrec::estimators::PriorKind::Gaussian;
        const double error = prior == "bounded"
                                 ? optrec::estimators::worst_case_error(algorithm, setting)
                                 : optrec::estimators::bayes_error(algorithm, setting);
        rows.push_back({name, sigma, tau, prior, error});
      }
  if (format == "json") {
    json body = json::array();
    for (const auto& r : rows)
      body.push_back(json{{"algorithm", r.algorithm},
                          {"sigma", r.sigma},
                          {"tau", r.tau},
                          {"prior", r.prior},
                          {"error", r.error}});
    return json_artifact(cfg, std::move(body));
  }
  return csv_artifact(cfg, {}, optrec::serialize::estimator_csv(rows));
}

// ---- strategy comparison ----

std::string run_compare(const json& cfg, const std::string& format) {
  namespace st = optrec::settings;
  const auto first = optrec::quadrature::strategy_for(
      optrec::quadrature::rule_from_name(cfg.at("first").get<std::string>()));
  const auto second = optrec::quadrature::strategy_for(
      optrec::quadrature::rule_from_name(cfg.at("second").get<std::string>()));
  const auto criterion = st::criterion_from_name(cfg.at("criterion").get<std::string>());
  st::CompareOptions options;
  options.ball = {cfg.at("r").get<int>(), cfg.at("bound").get<double>()};
  options.measure = {cfg.at("fold").get<int>(), cfg.at("grid_size").get<int>()};
  options.epsilons = list_of<double>(cfg, "epsilons");
  options.min_index = cfg.at("min_index").get<int>();
  options.max_index = cfg.at("max_index").get<int>();
  options.trials = cfg.at("trials").get<int>();
  options.exponent_indices = list_of<int>(cfg, "exponent_indices");
  options.seed = cfg.at("seed").get<std::uint64_t>();
  const auto verdict = st::compare(first, second, criterion, options);
  if (format == "json") return json_artifact(cfg, optrec::serialize::verdict_to_json(verdict));
  std::string table = "at,first,second\n";
  for (const auto& e : verdict.evidence)
    table += optrec::g17(e.at) + "," + optrec::g17(e.first) + "," + optrec::g17(e.second) + "\n";
  return csv_artifact(cfg,
                      {"outcome = " + std::string(st::outcome_name(verdict.outcome)),
                       "criterion = " + std::string(st::criterion_name(verdict.criterion)),
                       "detail = " + verdict.detail},
                      table);
}

// ---- linear recovery experiments ----

Eigen::MatrixXd random_matrix(optrec::SeededRng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

Eigen::MatrixXd random_spd(optrec::SeededRng& rng, Eigen::Index d) {
  const Eigen::MatrixXd a = random_matrix(rng, d, d);
  return a.transpose() * a + Eigen::MatrixXd::Identity(d, d);
}

Eigen::MatrixXd random_full_row_rank(optrec::SeededRng& rng, Eigen::Index k, Eigen::Index d) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Eigen::MatrixXd n = random_matrix(rng, k, d);
    if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(n.transpose()).rank() == k) return n;
  }
  throw optrec::numeric_error("random_full_row_rank: could not draw a full-rank matrix");
}

double w_norm(const Eigen::MatrixXd& w, const Eigen::VectorXd& f) {
  return std::sqrt(std::max(0.0, f.dot(w * f)));
}

int uniform_int(optrec::SeededRng& rng, int lo, int hi) {
  const int span = hi - lo + 1;
  int v = lo + static_cast<int>(rng.uniform01() * span);
  return std::min(v, hi);
}

// Supremum of |S f - out| over chords of the feasible body through a known
// feasible anchor.  Each chord is clipped against the prior ball and, when
// delta > 0, the data slab; both clips are exact quadratic roots.
double sampled_worst_error(const optrec::equivalence::LinearProblem& p, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& anchor, const Eigen::VectorXd& out, int chords,
                           optrec::SeededRng& rng) {
  const Eigen::Index d = p.dim();
  Eigen::MatrixXd kernel;
  if (p.delta == 0.0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(p.N);
    kernel = lu.kernel();
    if (kernel.cols() == 1 && kernel.col(0).isZero(0.0)) return (p.S * anchor - out).norm();
  }
  const Eigen::VectorXd misfit = p.N * anchor - y;
  double worst = (p.S * anchor - out).norm();
  for (int c = 0; c < chords; ++c) {
    Eigen::VectorXd u;
    if (p.delta == 0.0) {
      u = kernel * random_matrix(rng, kernel.cols(), 1).col(0);
    } else {
      u = random_matrix(rng, d, 1).col(0);
    }
    const double len = u.norm();
    if (len < 1e-12) continue;
    u /= len;
    // prior ball: |anchor + t u|_W <= r
    const double a = u.dot(p.W * u);
    const double b = 2.0 * anchor.dot(p.W * u);
    const double c0 = anchor.dot(p.W * anchor) - p.r * p.r;
    const double disc = b * b - 4.0 * a * c0;
    if (disc < 0.0) continue;
    double lo = (-b - std::sqrt(disc)) / (2.0 * a);
    double hi = (-b + std::sqrt(disc)) / (2.0 * a);
    if (p.delta > 0.0) {
      // data slab: |misfit + t N u| <= delta
      const Eigen::VectorXd nu = p.N * u;
      const double alpha = nu.squaredNorm();
      if (alpha > 0.0) {
        const double beta = 2.0 * misfit.dot(nu);
        const double gamma = misfit.squaredNorm() - p.delta * p.delta;
        const double d2 = beta * beta - 4.0 * alpha * gamma;
        if (d2 < 0.0) continue;
        lo = std::max(lo, (-beta - std::sqrt(d2)) / (2.0 * alpha));
        hi = std::min(hi, (-beta + std::sqrt(d2)) / (2.0 * alpha));
      }
    }
    if (lo > hi) continue;
    for (double t : {lo, hi}) {
      const Eigen::VectorXd f = anchor + t * u;
      worst = std::max(worst, (p.S * f - out).norm());
    }
  }
  return worst;
}

struct GeneratedInstance {
  optrec::equivalence::LinearProblem problem;
  Eigen::VectorXd f_star;
};

GeneratedInstance random_instance(std::uint64_t seed, int max_dim) {
  optrec::SeededRng rng(seed);
  const int d = uniform_int(rng, 2, max_dim);
  const int k = uniform_int(rng, 1, d - 1);
  const int p_dim = uniform_int(rng, 1, 3);
  Eigen::MatrixXd s = random_matrix(rng, p_dim, d);
  Eigen::MatrixXd w = random_spd(rng, d);
  Eigen::MatrixXd n = random_full_row_rank(rng, k, d);
  const double r = 1.0 + rng.uniform01();
  Eigen::VectorXd f = random_matrix(rng, d, 1).col(0);
  const double target = (0.2 + 0.7 * rng.uniform01()) * r;
  f *= target / std::max(w_norm(w, f), 1e-12);
  return {optrec::equivalence::LinearProblem(std::move(s), std::move(n), std::move(w), r),
          std::move(f)};
}

std::string run_equiv_factor2(const json& cfg, const std::string& format) {
  const int count = cfg.at("count").get<int>();
  const int max_dim = cfg.at("max_dim").get<int>();
  const int chords = cfg.at("chords").get<int>();
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  if (count < 1) throw usage_error("config key 'count' must be positive");
  if (max_dim < 2 || max_dim > 32) throw usage_error("config key 'max_dim' must lie in [2, 32]");
  if (chords < 1) throw usage_error("config key 'chords' must be positive");
  std::vector<optrec::serialize::RecoveryRow> rows;
  for (int i = 0; i < count; ++i) {
    const auto inst = random_instance(optrec::derive_seed(seed, static_cast<std::uint64_t>(i)),
                                      max_dim);
    const Eigen::VectorXd y = inst.problem.N * inst.f_star;
    const auto geometry = optrec::equivalence::feasible_geometry(
        inst.problem, y, optrec::derive_seed(seed, 1000003ull + i));
    const Eigen::VectorXd out = optrec::equivalence::interpolatory_algorithm(inst.problem, y);
    optrec::SeededRng sampler(optrec::derive_seed(seed, 2000003ull + i));
    const double error =
        sampled_worst_error(inst.problem, y, inst.f_star, out, chords, sampler);
    const double ratio = geometry.radius > 1e-300 ? error / geometry.radius : 0.0;
    rows.push_back({i + 1, static_cast<double>(inst.problem.dim()), error,
                    2.0 * geometry.radius, ratio});
  }
  if (format == "json") {
    json body = json::array();
    for (const auto& r : rows)
      body.push_back(json{{"instance_id", r.instance_id},
                          {"dim", r.parameter},
                          {"error", r.error},
                          {"bound", r.bound},
                          {"ratio", r.ratio}});
    return json_artifact(cfg, std::move(body));
  }
  return csv_artifact(cfg, {}, optrec::serialize::recovery_csv("dim", rows));
}

std::string run_equiv_lambda(const json& cfg, const std::string& format) {
  const int chords = cfg.at("chords").get<int>();
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  if (chords < 1) throw usage_error("config key 'chords' must be positive");
  const json& lambda_cfg = cfg.at("lambdas");
  if (!lambda_cfg.is_array() || lambda_cfg.empty())
    throw usage_error("config key 'lambdas' must be a non-empty array");
  std::vector<double> lambdas;
  for (const auto& v : lambda_cfg) {
    if (v.is_string() && v.get<std::string>() == "inf")
      lambdas.push_back(std::numeric_limits<double>::infinity());
    else
      lambdas.push_back(v.get<double>());
  }
  for (double l : lambdas)
    if (!(l > 0.0)) throw usage_error("config key 'lambdas' entries must be positive");

  std::optional<optrec::equivalence::LinearProblem> base;
  Eigen::VectorXd f_star, y;
  if (!cfg.at("instance").is_null()) {
    base = optrec::serialize::problem_from_json(cfg.at("instance"));
    if (cfg.at("y").is_null())
      throw usage_error("config key 'y' is required when an instance is supplied");
    y = optrec::serialize::vector_from_json(cfg.at("y"), "config key 'y'");
    if (y.size() != base->N.rows())
      throw usage_error("config key 'y' length must match the information map");
    // Anchor for chord sampling: the least-squares data fit, accepted only
    // when it already satisfies the prior bound.
    f_star = base->N.colPivHouseholderQr().solve(y);
    if (w_norm(base->W, f_star) > base->r)
      throw optrec::infeasible_error("equiv lambda: least-squares anchor violates the prior ball",
                                     w_norm(base->W, f_star) - base->r);
  } else {
    const int dim = cfg.at("dim").get<int>();
    if (dim < 2 || dim > 32) throw usage_error("config key 'dim' must lie in [2, 32]");
    auto inst = random_instance(optrec::derive_seed(seed, 0), dim);
    f_star = inst.f_star;
    // Perturb the data inside the tightest slab so every lambda row is
    // feasible: |e| = 0.4 * r / max(lambda).
    double lambda_max = 0.0;
    for (double l : lambdas)
      if (std::isfinite(l)) lambda_max = std::max(lambda_max, l);
    y = inst.problem.N * f_star;
    if (lambda_max > 0.0) {
      optrec::SeededRng noise(optrec::derive_seed(seed, 17));
      Eigen::VectorXd e = random_matrix(noise, inst.problem.N.rows(), 1).col(0);
      if (e.norm() > 1e-12) e *= 0.4 * inst.problem.r / lambda_max / e.norm();
      y += e;
    }
    base = std::move(inst.problem);
  }

  std::vector<optrec::serialize::RecoveryRow> rows;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double lambda = lambdas[i];
    const double delta = std::isfinite(lambda) ? base->r / lambda : 0.0;
    optrec::equivalence::LinearProblem p(base->S, base->N, base->W, base->r, delta);
    const Eigen::VectorXd out = optrec::equivalence::optimization_algorithm(p, y, lambda);
    const auto geometry =
        optrec::equivalence::feasible_geometry(p, y, optrec::derive_seed(seed, 7001 + i));
    // Chords need an anchor inside the body; for exact-data rows the shared
    // anchor is first moved onto the slab N f = y by the minimal correction.
    Eigen::VectorXd anchor = f_star;
    if (delta == 0.0) {
      const Eigen::VectorXd misfit = y - p.N * anchor;
      anchor += p.N.transpose() * (p.N * p.N.transpose()).ldlt().solve(misfit);
      if (w_norm(p.W, anchor) > p.r * (1.0 + 1e-9))
        throw optrec::infeasible_error(
            "equiv lambda: exact-data anchor violates the prior ball",
            w_norm(p.W, anchor) - p.r);
    }
    optrec::SeededRng sampler(optrec::derive_seed(seed, 9001 + i));
    const double error = sampled_worst_error(p, y, anchor, out, chords, sampler);
    const double ratio = geometry.radius > 1e-300 ? error / geometry.radius : 0.0;
    rows.push_back({1, lambda, error, 2.0 * geometry.radius, ratio});
  }
  if (format == "json") {
    json body{{"instance", optrec::serialize::problem_to_json(*base)},
              {"y", optrec::serialize::vector_to_json(y)}};
    json table = json::array();
    for (const auto& r : rows)
      table.push_back(json{{"lambda", r.parameter},
                           {"error", r.error},
                           {"bound", r.bound},
                           {"ratio", r.ratio}});
    body["rows"] = std::move(table);
    return json_artifact(cfg, std::move(body));
  }
  return csv_artifact(cfg, {}, optrec::serialize::recovery_csv("lambda", rows));
}

std::string run_equiv_asymptotic(const json& cfg, const std::string& format) {
  namespace eq = optrec::equivalence;
  const std::string kind = cfg.at("kind").get<std::string>();
  const int dim = cfg.at("dim").get<int>();
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  if (dim < 2 || dim > 64) throw usage_error("config key 'dim' must lie in [2, 64]");

  Eigen::MatrixXd s, w, functionals;
  Eigen::VectorXd f(dim);
  if (kind == "diagonal") {
    w = Eigen::MatrixXd::Zero(dim, dim);
    for (int j = 0; j < dim; ++j) w(j, j) = std::ldexp(1.0, j);  // weights 1, 2, 4, ...
    s = Eigen::MatrixXd::Identity(dim, dim);
    functionals = Eigen::MatrixXd::Identity(dim, dim);
    for (int j = 0; j < dim; ++j) f[j] = std::ldexp(1.0, -j);  // coordinates 1, 1/2, 1/4, ...
  } else if (kind == "random") {
    optrec::SeededRng rng(seed);
    w = random_spd(rng, dim);
    s = random_matrix(rng, 2, dim);
    functionals = random_full_row_rank(rng, dim, dim);
    f = random_matrix(rng, dim, 1).col(0);
  } else {
    throw usage_error("config key 'kind' must be \"diagonal\" or \"random\"");
  }
  const eq::LinearProblem problem(std::move(s), functionals.topRows(1), std::move(w), 1.0);
  const eq::NestedInformation nested(std::move(functionals));
  std::vector<int> ns(dim);
  for (int n = 1; n <= dim; ++n) ns[n - 1] = n;
  const auto report = eq::asymptotic_experiment(problem, nested, f, ns);
  if (format == "json") {
    json body = optrec::serialize::asymptotic_to_json(report);
    body["kind"] = kind;
    return json_artifact(cfg, std::move(body));
  }
  std::vector<optrec::serialize::RecoveryRow> rows;
  for (const auto& row : report.rows)
    rows.push_back({1, static_cast<double>(row.n), row.error, row.bound, row.ratio});
  return csv_artifact(cfg, {"f_norm = " + optrec::g17(report.f_norm)},
                      optrec::serialize::recovery_csv("n", rows));
}

// ---- registry ----

struct Subcommand {
  json schema;
  std::vector<std::string> required;
  std::function<std::string(const json&, const std::string&)> run;
};

std::map<std::string, Subcommand> make_registry() {
  std::map<std::string, Subcommand> r;
  const json common{{"seed", 1}, {"out", ""}, {"format", "csv"}};
  auto with = [&common](json extra) {
    json s = common;
    for (auto& [k, v] : extra.items()) s[k] = v;
    return s;
  };

  r["quad-converge"] = {with({{"rule", "trapezoid"},
                              {"function", "exp"},
                              {"ns", json::array({4, 8, 16, 32, 64, 128, 256, 512})},
                              {"reference", nullptr}}),
                        {},
                        run_quad_converge};
  r["quad-complexity"] = {with({{"rule", "trapezoid"},
                                {"r", 2},
                                {"bound", 1.0},
                                {"epsilons", json::array({1e-2, 1e-3, 1e-4, 1e-5, 1e-6})}}),
                          {},
                          run_quad_complexity};
  r["spline fit"] = {with({{"knots", nullptr}, {"values", nullptr}, {"grid_points", 201}}),
                     {"knots", "values"},
                     run_spline_fit};
  r["spline smooth"] = {with({{"knots", nullptr},
                              {"values", nullptr},
                              {"lambda", 1.0},
                              {"grid_points", 201}}),
                        {"knots", "values"},
                        run_spline_smooth};
  r["spline cv"] = {with({{"knots", nullptr},
                          {"values", nullptr},
                          {"lambdas",
                           json::array({1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4})}}),
                    {"knots", "values"},
                    run_spline_cv};
  const json maxent_schema = with({{"m", nullptr}, {"rows", json::array()}, {"y", json::array()}});
  r["maxent solve"] = {maxent_schema, {"m"},
                       [](const json& c, const std::string& f) { return run_maxent(c, f, "solve"); }};
  r["maxent center"] = {maxent_schema, {"m"}, [](const json& c, const std::string& f) {
                          return run_maxent(c, f, "center");
                        }};
  r["maxent minmax"] = {maxent_schema, {"m"}, [](const json& c, const std::string& f) {
                          return run_maxent(c, f, "minmax");
                        }};
  r["estimate sweep"] = {with({{"sigmas", json::array({0.1, 0.5, 1.0, 2.0})},
                               {"taus", json::array({0.1, 0.5, 1.0, 2.0})},
                               {"prior", "gaussian"},
                               {"algorithms", json::array({"identity", "clamp", "shrink"})}}),
                         {},
                         run_estimate_sweep};
  r["compare"] = {with({{"first", "simpson"},
                        {"second", "trapezoid"},
                        {"criterion", "complexity"},
                        {"r", 4},
                        {"bound", 1.0},
                        {"fold", 0},
                        {"grid_size", 1024},
                        {"epsilons", json::array({1e-2, 1e-3, 1e-4, 1e-5, 1e-6})},
                        {"min_index", 1},
                        {"max_index", 8},
                        {"trials", 200},
                        {"exponent_indices", json::array({4, 8, 16, 32, 64})}}),
                  {},
                  run_compare};
  r["equiv factor2"] = {with({{"count", 100}, {"max_dim", 8}, {"chords", 2000}}),
                        {},
                        run_equiv_factor2};
  r["equiv lambda"] = {with({{"dim", 6},
                             {"lambdas", json::array({1.0, 2.0, 4.0, 8.0, 16.0, 32.0})},
                             {"chords", 4000},
                             {"instance", nullptr},
                             {"y", nullptr}}),
                       {},
                       run_equiv_lambda};
  r["equiv asymptotic"] = {with({{"kind", "diagonal"}, {"dim", 8}}), {}, run_equiv_asymptotic};
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal recovery experiment runner"};
  app.fallthrough();

  std::string config_path, out_flag, format_flag;
  std::uint64_t seed_flag = 0;
  auto* config_opt = app.add_option("--config", config_path, "JSON config file");
  auto* seed_opt = app.add_option("--seed", seed_flag, "override the config seed");
  auto* out_opt = app.add_option("--out", out_flag, "output file (stdout when omitted)");
  auto* format_opt = app.add_option("--format", format_flag, "csv or json")
                         ->check(CLI::IsMember({"csv", "json"}));

  auto* quad_converge = app.add_subcommand("quad-converge", "quadrature convergence fit");
  auto* quad_complexity = app.add_subcommand("quad-complexity", "epsilon-complexity profile");
  auto* spline = app.add_subcommand("spline", "cubic spline experiments");
  auto* spline_fit = spline->add_subcommand("fit", "natural interpolating spline");
  auto* spline_smooth = spline->add_subcommand("smooth", "penalized smoothing spline");
  auto* spline_cv = spline->add_subcommand("cv", "leave-one-out lambda selection");
  auto* maxent = app.add_subcommand("maxent", "moment-constrained distributions");
  auto* maxent_solve = maxent->add_subcommand("solve", "maximum entropy solution");
  auto* maxent_center = maxent->add_subcommand("center", "Chebyshev center of the feasible set");
  auto* maxent_minmax = maxent->add_subcommand("minmax", "minimal uniform-norm solution");
  auto* estimate = app.add_subcommand("estimate", "scalar estimation");
  auto* estimate_sweep = estimate->add_subcommand("sweep", "error table over a parameter grid");
  auto* compare = app.add_subcommand("compare", "strategy partial-order verdict");
  auto* equiv = app.add_subcommand("equiv", "linear recovery experiments");
  auto* equiv_factor2 = equiv->add_subcommand("factor2", "interpolatory error vs radius");
  auto* equiv_lambda = equiv->add_subcommand("lambda", "regularization trade-off sweep");
  auto* equiv_asymptotic = equiv->add_subcommand("asymptotic", "nested information decay");
  for (auto* group : {spline, maxent, estimate, equiv}) group->require_subcommand(0, 1);
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string chosen;
  if (quad_converge->parsed()) chosen = "quad-converge";
  if (quad_complexity->parsed()) chosen = "quad-complexity";
  if (spline_fit->parsed()) chosen = "spline fit";
  if (spline_smooth->parsed()) chosen = "spline smooth";
  if (spline_cv->parsed()) chosen = "spline cv";
  if (maxent_solve->parsed()) chosen = "maxent solve";
  if (maxent_center->parsed()) chosen = "maxent center";
  if (maxent_minmax->parsed()) chosen = "maxent minmax";
  if (estimate_sweep->parsed()) chosen = "estimate sweep";
  if (compare->parsed()) chosen = "compare";
  if (equiv_factor2->parsed()) chosen = "equiv factor2";
  if (equiv_lambda->parsed()) chosen = "equiv lambda";
  if (equiv_asymptotic->parsed()) chosen = "equiv asymptotic";

  try {
    const json file_cfg = config_path.empty() ? json::object() : load_config_file(config_path);
    if (chosen.empty() && file_cfg.contains("subcommand"))
      chosen = file_cfg.at("subcommand").get<std::string>();
    if (chosen.empty())
      throw usage_error("no subcommand given (on the command line or as config 'subcommand')");
    const auto registry = make_registry();
    const auto it = registry.find(chosen);
    if (it == registry.end()) throw usage_error("unknown subcommand '" + chosen + "'");

    FlagOverrides flags;
    if (seed_opt->count() > 0) flags.seed = seed_flag;
    if (out_opt->count() > 0) flags.out = out_flag;
    if (format_opt->count() > 0) flags.format = format_flag;
    (void)config_opt;

    const json cfg =
        resolve_config(chosen, it->second.schema, it->second.required, file_cfg, flags);
    const std::string content = it->second.run(cfg, cfg.at("format").get<std::string>());
    const std::string out_path = cfg.at("out").get<std::string>();
    if (out_path.empty()) {
      std::fwrite(content.data(), 1, content.size(), stdout);
    } else {
      optrec::serialize::write_text_atomic(out_path, content);
    }
    return 0;
  } catch (const usage_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const optrec::infeasible_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const optrec::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
