#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace tracemono {

/// Raised when a function is evaluated outside its domain (s <= 0 for a
/// singular Laplace transform, a singular shift, a negative weight...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Operand shapes disagree.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A configuration value violates its documented constraint.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Numerical integration did not converge.
struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tolerances shared by every module. Defaults are relative where the
/// quantity has a natural scale.
struct Tolerances {
  double eig = 1e-10;   // eigen-reconstruction, idempotence
  double orth = 1e-12;  // orthonormality of eigenvector / basis columns
  double cmp = 1e-9;    // inequality comparisons
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// splitmix64 finaliser applied to (master, index). Used everywhere a
/// per-trial seed is derived so results do not depend on scheduling.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seeded generator. Distributions are computed from raw engine bits so the
/// stream is identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Uniform integer in [lo, hi].
  int integer(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(engine_() % span);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tracemono
