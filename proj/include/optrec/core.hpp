#pragma once

// Vocabulary for approximation problems solved from finite information:
// a problem (solution operator on functions), an information operator
// (where we sample and how the samples are corrupted), algorithms that map
// data to answers, and indexed strategies with a cost per member.

#include <cstdint>
#include <optional>
#include <sstream>
#include <utility>

#include "optrec/common.hpp"

namespace optrec {

// A problem on real functions over an interval: f |-> solution_map(f).
struct Problem1D {
  std::function<double(const RealFunction&)> solution_map;
  double domain_lo = 0.0;
  double domain_hi = 1.0;

  Problem1D() = default;
  Problem1D(std::function<double(const RealFunction&)> map, double lo, double hi)
      : solution_map(std::move(map)), domain_lo(lo), domain_hi(hi) {
    if (!solution_map) throw usage_error("Problem1D: empty solution map");
    if (!(domain_lo < domain_hi)) throw usage_error("Problem1D: domain must satisfy lo < hi");
  }
};

enum class NoiseKind { Exact, GaussianIID, BoundedL2 };

// How observed values differ from true ones.  GaussianIID(0) behaves exactly
// like Exact apart from requiring a seed.
struct NoiseModel {
  NoiseKind kind = NoiseKind::Exact;
  double sigma = 0.0;  // GaussianIID: standard deviation per sample
  double delta = 0.0;  // BoundedL2: Euclidean norm bound on the noise vector

  static NoiseModel exact() { return {}; }
  static NoiseModel gaussian(double sigma) {
    if (sigma < 0.0) throw usage_error("NoiseModel: sigma must be >= 0");
    return {NoiseKind::GaussianIID, sigma, 0.0};
  }
  static NoiseModel bounded_l2(double delta) {
    if (delta < 0.0) throw usage_error("NoiseModel: delta must be >= 0");
    return {NoiseKind::BoundedL2, 0.0, delta};
  }
};

// Finite sampling scheme.  Either a fixed list of evaluation points, or
// (randomized = true) sample_count points drawn uniformly on the domain when
// the operator is applied.
struct InformationOperator {
  std::vector<double> points;
  NoiseModel noise;
  bool randomized = false;
  int sample_count = 0;       // used only when randomized
  double domain_lo = 0.0;
  double domain_hi = 1.0;

  std::size_t size() const {
    return randomized ? static_cast<std::size_t>(sample_count) : points.size();
  }

  void validate() const {
    if (!(domain_lo < domain_hi))
      throw usage_error("InformationOperator: domain must satisfy lo < hi");
    if (randomized) {
      if (sample_count < 1)
        throw usage_error("InformationOperator: randomized operator needs sample_count >= 1");
    } else {
      if (points.empty())
        throw usage_error("InformationOperator: fixed operator needs at least one point");
      for (double x : points)
        if (!(x >= domain_lo && x <= domain_hi)) {
          std::ostringstream os;
          os << "InformationOperator: point " << x << " outside [" << domain_lo << ", "
             << domain_hi << "]";
          throw domain_error(os.str());
        }
    }
  }
};

// Observed samples together with the operator that produced them and, when
// randomness was involved, the seed.  Keeping the provenance lets algorithms
// recover node locations and lets runs be replayed.
struct DataVector {
  std::vector<double> values;
  InformationOperator provenance;
  std::optional<std::uint64_t> seed;
};

// Samples f through the operator.  A seed is mandatory whenever the result
// depends on randomness (randomized node draw, or any noise model other than
// Exact); supplying one for a fully deterministic operator is harmless.
//
// Draw order is fixed: randomized nodes first (in index order), then the
// noise vector (one normal per sample for GaussianIID; for BoundedL2 a
// direction from sample_count normals plus one uniform for the radius, so the
// perturbation is uniform over the closed delta-ball).
inline DataVector apply_information(const InformationOperator& info, const RealFunction& f,
                                    std::optional<std::uint64_t> seed = std::nullopt) {
  info.validate();
  if (!f) throw usage_error("apply_information: empty function");
  const bool needs_seed = info.randomized || info.noise.kind != NoiseKind::Exact;
  if (needs_seed && !seed)
    throw usage_error("apply_information: operator is randomized or noisy, seed required");

  DataVector data;
  data.provenance = info;
  if (needs_seed) data.seed = seed;

  SeededRng rng(seed.value_or(0));
  std::vector<double> nodes;
  if (info.randomized) {
    nodes.resize(static_cast<std::size_t>(info.sample_count));
    for (double& x : nodes) x = rng.uniform(info.domain_lo, info.domain_hi);
    data.provenance.points = nodes;  // record the realized nodes
  } else {
    nodes = info.points;
  }

  data.values.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) data.values[i] = f(nodes[i]);

  switch (info.noise.kind) {
    case NoiseKind::Exact:
      break;
    case NoiseKind::GaussianIID:
      for (double& v : data.values) v += info.noise.sigma * rng.normal();
      break;
    case NoiseKind::BoundedL2: {
      std::vector<double> dir(data.values.size());
      double norm2 = 0.0;
      for (double& d : dir) {
        d = rng.normal();
        norm2 += d * d;
      }
      const double norm = std::sqrt(norm2);
      if (norm > 0.0) {
        const double radius =
            info.noise.delta *
            std::pow(rng.uniform01(), 1.0 / static_cast<double>(dir.size()));
        for (std::size_t i = 0; i < dir.size(); ++i)
          data.values[i] += radius * dir[i] / norm;
      }
      break;
    }
  }
  return data;
}

// An algorithm paired with the information it runs on.
struct StrategyMember {
  std::function<double(const DataVector&)> algorithm;
  InformationOperator information;
};

// Applies one member end to end: sample, then map data to an answer.
// Failures inside the algorithm are wrapped with the member's context.
inline double run_strategy(const StrategyMember& member, const RealFunction& f,
                           std::optional<std::uint64_t> seed = std::nullopt) {
  if (!member.algorithm) throw usage_error("run_strategy: member has no algorithm");
  const DataVector data = apply_information(member.information, f, seed);
  try {
    return member.algorithm(data);
  } catch (const std::exception& e) {
    throw numeric_error(std::string("run_strategy: algorithm failed on ") +
                        std::to_string(data.values.size()) + " samples: " + e.what());
  }
}

// An indexed family of members ordered by increasing effort.  cost_of(i)
// counts the function samples member i consumes.
struct Strategy {
  std::string name;
  std::function<StrategyMember(int)> member_at;  // index >= 1
  std::function<long(int)> cost_of;
  int max_index = 1 << 20;

  StrategyMember member(int index) const {
    check(index);
    return member_at(index);
  }
  long cost(int index) const {
    check(index);
    return cost_of(index);
  }

 private:
  void check(int index) const {
    if (!member_at || !cost_of) throw usage_error("Strategy '" + name + "' is empty");
    if (index < 1 || index > max_index)
      throw usage_error("Strategy '" + name + "': index " + std::to_string(index) +
                        " out of range [1, " + std::to_string(max_index) + "]");
  }
};

// Distance between answers.  Scalars: absolute difference.  Gridded
// functions: sup-norm over a shared grid; mismatched grids are an error, not
// something to silently interpolate over.
inline double distance(double a, double b) { return std::abs(a - b); }

inline double distance(const GriddedFunction& a, const GriddedFunction& b) {
  if (a.grid.size() != b.grid.size() || a.values.size() != a.grid.size() ||
      b.values.size() != b.grid.size())
    throw usage_error("distance: gridded functions have mismatched shapes");
  double sup = 0.0;
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    if (a.grid[i] != b.grid[i])
      throw usage_error("distance: gridded functions use different grids");
    sup = std::max(sup, std::abs(a.values[i] - b.values[i]));
  }
  return sup;
}

}  // namespace optrec
