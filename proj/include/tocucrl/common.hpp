#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tocucrl {

using Vec = std::vector<double>;
using ConstVecView = std::span<const double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Invalid indices, malformed arguments, out-of-domain inputs.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Incompatible combination of otherwise valid components (e.g. FW on a
/// non-smooth reward).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Reachability failure detected by a solver.
class NotCommunicatingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Norm { kL1, kL2, kLinf };

const char* to_string(Norm norm);

inline Norm dual_of(Norm norm) {
  switch (norm) {
    case Norm::kL1: return Norm::kLinf;
    case Norm::kLinf: return Norm::kL1;
    case Norm::kL2: return Norm::kL2;
  }
  return Norm::kL2;
}

double norm_of(ConstVecView x, Norm norm);

/// ||1_K|| in the given norm.
double ones_norm(std::size_t k, Norm norm);

double dot(ConstVecView a, ConstVecView b);

double distance(ConstVecView a, ConstVecView b, Norm norm);

/// Euclidean projection onto the centered ball of the given radius.
Vec project_l2_ball(Vec x, double radius);

/// Uniform double in [0, 1) built from the top 53 bits of a 64-bit draw.
/// Independent of the standard library's distribution implementations, so
/// traces are identical across toolchains.
template <class Engine>
double uniform01(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace tocucrl
