#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "optrec/serialize.hpp"
#include "oracle_helpers.hpp"

using namespace optrec;
using serialize::json;

namespace {

Eigen::MatrixXd rand_mat(SeededRng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("matrices and vectors survive the JSON round trip bit for bit", "[serialize]") {
  SeededRng rng(99);
  const Eigen::MatrixXd m = rand_mat(rng, 3, 4);
  const Eigen::MatrixXd back = serialize::matrix_from_json(serialize::matrix_to_json(m), "m");
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 4);
  REQUIRE((back - m).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd v = rand_mat(rng, 5, 1).col(0);
  const Eigen::VectorXd vback = serialize::vector_from_json(serialize::vector_to_json(v), "v");
  REQUIRE((vback - v).cwiseAbs().maxCoeff() == 0.0);

  REQUIRE_THROWS_AS(serialize::matrix_from_json(json::parse("[[1,2],[3]]"), "m"), usage_error);
  REQUIRE_THROWS_AS(serialize::matrix_from_json(json::parse("3"), "m"), usage_error);
  REQUIRE_THROWS_AS(serialize::vector_from_json(json::parse("{}"), "v"), usage_error);
}

TEST_CASE("spline records round trip and evaluate identically", "[serialize]") {
  const std::vector<double> knots{0.0, 0.25, 0.6, 1.0};
  const std::vector<double> values{0.0, 1.0, -0.5, 0.25};
  const auto s = splines::natural_cubic_spline(knots, values);
  const json j = serialize::spline_to_json(s);
  REQUIRE(j.at("boundary") == "natural");
  REQUIRE_FALSE(j.contains("lambda"));
  const auto back = serialize::spline_from_json(j);
  for (double t : {0.0, 0.1, 0.37, 0.61, 0.99, 1.0}) REQUIRE(back(t) == s(t));

  splines::SmoothingProblem problem;
  problem.knots = knots;
  problem.y = values;
  problem.lambda = 3.5;
  const auto smooth = splines::smoothing_spline(problem);
  const json js = serialize::spline_to_json(smooth);
  REQUIRE(js.at("lambda").get<double>() == 3.5);
  const auto smooth_back = serialize::spline_from_json(js);
  REQUIRE(smooth_back.lambda().has_value());
  for (double t : {0.05, 0.5, 0.95}) REQUIRE(smooth_back(t) == smooth(t));
}

TEST_CASE("moment problems round trip and reject malformed input", "[serialize]") {
  Eigen::MatrixXd m(2, 4);
  m << 0, 1, 2, 3, 1, 0, 1, 0;
  Eigen::VectorXd y(2);
  y << 1.4, 0.5;
  const maxent::MomentConstraints c(m, y);
  const json j = serialize::constraints_to_json(c);
  REQUIRE(j.at("m").get<int>() == 4);
  const auto back = serialize::constraints_from_json(j);
  REQUIRE((back.moments() - m).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((back.targets() - y).cwiseAbs().maxCoeff() == 0.0);

  REQUIRE_THROWS_AS(serialize::constraints_from_json(json::parse(R"({"m":0,"rows":[],"y":[]})")),
                    usage_error);
  REQUIRE_THROWS_AS(
      serialize::constraints_from_json(json::parse(R"({"m":3,"rows":[[1,2]],"y":[1]})")),
      usage_error);
  REQUIRE_THROWS_AS(
      serialize::constraints_from_json(json::parse(R"({"m":3,"rows":[[1,2,3]],"y":[1,2]})")),
      usage_error);
}

TEST_CASE("distribution results serialize with their method tags", "[serialize]") {
  Eigen::MatrixXd m(1, 3);
  m << 0, 1, 2;
  Eigen::VectorXd y(1);
  y << 1.0;
  const maxent::MomentConstraints c(m, y);

  const auto solved = maxent::maxent_solve(c);
  const json js = serialize::maxent_to_json(solved);
  REQUIRE(js.at("method") == "maximum-entropy");
  REQUIRE(js.at("p").get<std::vector<double>>() == solved.p.values());
  REQUIRE(js.at("entropy").get<double>() == solved.entropy);
  REQUIRE(js.at("residual").get<double>() == solved.residual);

  const auto center = maxent::chebyshev_center(c);
  const json jc = serialize::center_to_json(center);
  REQUIRE(jc.at("method") == "chebyshev-center");
  REQUIRE(jc.at("radius").get<double>() == center.radius);
  REQUIRE(jc.at("diameter").get<double>() == center.diameter);

  const auto minmax = maxent::min_uniform_norm(c);
  const json jm = serialize::minmax_to_json(minmax);
  REQUIRE(jm.at("method") == "min-uniform-norm");
  REQUIRE(jm.at("max_probability").get<double>() == minmax.value);
}

TEST_CASE("report serializers expose the fitted and flagged columns", "[serialize]") {
  const auto report = quadrature::estimate_exponent(
      quadrature::RuleKind::Trapezoid, [](double t) { return std::exp(t); }, {4, 8, 16, 32});
  const json jr = serialize::convergence_to_json(report);
  REQUIRE(jr.at("ns").get<std::vector<int>>() == report.ns);
  REQUIRE(jr.at("fitted_exponent").get<double>() == report.fitted_exponent);
  REQUIRE_FALSE(jr.at("exact_within_precision").get<bool>());

  const auto profile = settings::complexity(quadrature::trapezoid_strategy(),
                                            settings::SmoothnessBall{2, 12.0}, {2.0, 1e-2});
  const json jp = serialize::profile_to_json(profile);
  REQUIRE(jp.at("strategy") == "trapezoid");
  REQUIRE(jp.at("costs").get<std::vector<long>>() == profile.costs);
  REQUIRE(jp.at("flagged").at(0).get<bool>());

  const auto verdict =
      settings::compare(quadrature::trapezoid_strategy(), quadrature::trapezoid_strategy(),
                        settings::Criterion::Complexity);
  const json jv = serialize::verdict_to_json(verdict);
  REQUIRE(jv.at("outcome") == "equivalent");
  REQUIRE(jv.at("criterion") == "complexity");
  REQUIRE(jv.at("evidence").size() == verdict.evidence.size());
}

TEST_CASE("linear problems round trip with validation intact", "[serialize]") {
  SeededRng rng(1234);
  const Eigen::MatrixXd a = rand_mat(rng, 4, 4);
  const Eigen::MatrixXd w = a.transpose() * a + Eigen::MatrixXd::Identity(4, 4);
  const Eigen::MatrixXd s = rand_mat(rng, 2, 4);
  const Eigen::MatrixXd n = rand_mat(rng, 2, 4);
  const equivalence::LinearProblem p(s, n, w, 1.5, 0.25);
  const json j = serialize::problem_to_json(p);
  const auto back = serialize::problem_from_json(j);
  REQUIRE((back.S - s).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((back.N - n).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((back.W - w).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(back.r == 1.5);
  REQUIRE(back.delta == 0.25);

  json bad = j;
  bad["W"][0][1] = bad["W"][0][1].get<double>() + 1.0;  // break symmetry
  REQUIRE_THROWS_AS(serialize::problem_from_json(bad), usage_error);
  json no_delta = j;
  no_delta.erase("delta");
  REQUIRE(serialize::problem_from_json(no_delta).delta == 0.0);
}

TEST_CASE("CSV builders emit 17-digit reproducible tables", "[serialize]") {
  const std::vector<serialize::EstimatorRow> rows{{"shrink", 0.5, 2.0, "gaussian", 0.125}};
  REQUIRE(serialize::estimator_csv(rows) ==
          "algorithm,sigma,tau,prior,error\nshrink," + g17(0.5) + "," + g17(2.0) +
              ",gaussian," + g17(0.125) + "\n");

  const std::vector<serialize::RecoveryRow> rec{{3, 8.0, 0.25, 1.0, 0.5}};
  REQUIRE(serialize::recovery_csv("dim", rec) ==
          "instance_id,dim,error,bound,ratio\n3," + g17(8.0) + "," + g17(0.25) + "," + g17(1.0) +
              "," + g17(0.5) + "\n");

  REQUIRE(serialize::grid_csv("t", "value", {0.0, 1.0}, {2.0, 3.0}) ==
          "t,value\n" + g17(0.0) + "," + g17(2.0) + "\n" + g17(1.0) + "," + g17(3.0) + "\n");
  REQUIRE_THROWS_AS(serialize::grid_csv("t", "v", {0.0}, {1.0, 2.0}), usage_error);
}

TEST_CASE("atomic writes land complete and leave no temp files", "[serialize]") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "optrec_serialize_test";
  fs::create_directories(dir);
  const fs::path target = dir / "artifact.csv";

  serialize::write_text_atomic(target, "first\n");
  REQUIRE(slurp(target) == "first\n");
  serialize::write_text_atomic(target, "second run wins\n");
  REQUIRE(slurp(target) == "second run wins\n");

  int stray = 0;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().filename().string().find(".tmp") != std::string::npos) ++stray;
  REQUIRE(stray == 0);

  REQUIRE_THROWS_AS(
      serialize::write_text_atomic(dir / "missing" / "deep" / "artifact.csv", "x"),
      numeric_error);
  fs::remove_all(dir);
}
