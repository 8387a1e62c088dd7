#include "tocucrl/common.hpp"

#include <algorithm>

namespace tocucrl {

const char* to_string(Norm norm) {
  switch (norm) {
    case Norm::kL1: return "l1";
    case Norm::kL2: return "l2";
    case Norm::kLinf: return "linf";
  }
  return "?";
}

double norm_of(ConstVecView x, Norm norm) {
  double acc = 0.0;
  switch (norm) {
    case Norm::kL1:
      for (double v : x) acc += std::abs(v);
      return acc;
    case Norm::kL2:
      for (double v : x) acc += v * v;
      return std::sqrt(acc);
    case Norm::kLinf:
      for (double v : x) acc = std::max(acc, std::abs(v));
      return acc;
  }
  return acc;
}

double ones_norm(std::size_t k, Norm norm) {
  switch (norm) {
    case Norm::kL1: return static_cast<double>(k);
    case Norm::kL2: return std::sqrt(static_cast<double>(k));
    case Norm::kLinf: return 1.0;
  }
  return 1.0;
}

double dot(ConstVecView a, ConstVecView b) {
  if (a.size() != b.size()) throw UsageError("dot: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double distance(ConstVecView a, ConstVecView b, Norm norm) {
  if (a.size() != b.size()) throw UsageError("distance: dimension mismatch");
  Vec diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  return norm_of(diff, norm);
}

Vec project_l2_ball(Vec x, double radius) {
  const double n = norm_of(x, Norm::kL2);
  if (n > radius) {
    const double scale = radius / n;
    for (double& v : x) v *= scale;
  }
  return x;
}

}  // namespace tocucrl
