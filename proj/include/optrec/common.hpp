#pragma once

// Shared vocabulary: error types, deterministic random numbers, and the
// gridded-function value type used by the path-sampling and comparison code.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace optrec {

// Caller passed arguments that violate a documented precondition.
class usage_error : public std::invalid_argument {
 public:
  explicit usage_error(const std::string& what) : std::invalid_argument(what) {}
};

// Argument is structurally fine but falls outside the supported domain
// (e.g. an evaluation node outside the problem interval).
class domain_error : public usage_error {
 public:
  explicit domain_error(const std::string& what) : usage_error(what) {}
};

// An iteration failed to converge or produced non-finite values.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// A constraint set turned out to be empty.  Carries the best residual found,
// which acts as a certificate of infeasibility.
class infeasible_error : public std::runtime_error {
 public:
  infeasible_error(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

using RealFunction = std::function<double(double)>;

inline constexpr double pi = 3.14159265358979323846;

// Deterministic random source.  std::mt19937_64 has a fully specified output
// sequence, and the uniform/normal transforms below are written out explicitly
// (53-bit uniforms, Box-Muller normals) instead of going through
// std::uniform_real_distribution / std::normal_distribution, whose algorithms
// are implementation-defined.  Streams are therefore reproducible across
// platforms and standard libraries, byte for byte.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * pi * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * pi * u2);
  }

  std::uint64_t next_raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Mixes a base seed with a stream index so that independent substreams
// (one per trial, per node count, ...) can be derived deterministically.
// Splitmix64 finalizer; good avalanche, cheap.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// A function known through its values on a finite grid.
struct GriddedFunction {
  std::vector<double> grid;
  std::vector<double> values;
};

// 17 significant digits: enough to round-trip any double exactly, so emitted
// files are bit-faithful records of the computation.
inline std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace optrec
