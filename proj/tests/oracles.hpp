#pragma once

// Reference computations that share no code with the library solvers.
// Slow on purpose; only for tiny inputs.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "tocucrl/mdp.hpp"
#include "tocucrl/rewards.hpp"

namespace tocucrl::oracle {

/// max u^T p over {lo <= p <= hi, sum p = 1} by vertex enumeration: at a
/// vertex every coordinate but at most one sits on a bound.
inline double box_simplex_max(const Vec& u, const Vec& lo, const Vec& hi) {
  const std::size_t n = u.size();
  double best = -std::numeric_limits<double>::infinity();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < n; ++i) combos *= 2;
  for (std::size_t free = 0; free <= n; ++free) {
    for (std::size_t mask = 0; mask < combos; ++mask) {
      Vec p(n);
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == free) continue;
        p[i] = (mask >> i) & 1 ? hi[i] : lo[i];
        mass += p[i];
      }
      if (free < n) {
        p[free] = 1.0 - mass;
        if (p[free] < lo[free] - 1e-12 || p[free] > hi[free] + 1e-12) continue;
      } else if (std::abs(mass - 1.0) > 1e-12) {
        continue;
      }
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) v += u[i] * p[i];
      best = std::max(best, v);
    }
  }
  return best;
}

/// Best average reward c over all deterministic stationary policies and
/// their recurrent classes.
inline double best_policy_gain(const MdpInstance& m, const Vec& c) {
  const std::size_t n = m.num_states();
  std::vector<std::size_t> policy(n, 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    const auto chain = m.policy_chain(policy);
    for (const auto& cls : stationary_distributions(chain)) {
      double gain = 0.0;
      for (std::size_t s = 0; s < n; ++s)
        gain += cls.distribution[s] * c[m.pair_index(s, policy[s])];
      best = std::max(best, gain);
    }
    std::size_t s = 0;
    while (s < n && ++policy[s] == m.num_actions(s)) policy[s++] = 0;
    if (s == n) break;
  }
  return best;
}

/// Enumerates the cartesian product of per-coordinate candidate sets.
inline double grid_max(const std::vector<Vec>& candidates,
                       const std::function<double(const Vec&)>& f) {
  const std::size_t k = candidates.size();
  std::vector<std::size_t> idx(k, 0);
  Vec w(k);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t i = 0; i < k; ++i) w[i] = candidates[i][idx[i]];
    best = std::max(best, f(w));
    std::size_t i = 0;
    while (i < k && ++idx[i] == candidates[i].size()) idx[i++] = 0;
    if (i == k) break;
  }
  return best;
}

/// Golden-section maximum of a concave function on [0, 1], endpoints included.
inline double golden_max(const std::function<double(double)>& f) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < 200 && b - a > 1e-14; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    }
  }
  return std::max({f(0.0), f(1.0), f(0.5 * (a + b))});
}

/// Fenchel value g*(theta) from closed-form formulas written here, not the
/// library's: separable smooth families by per-coordinate golden section,
/// piecewise-linear ones by candidate grids.
inline double fenchel_value(const RewardSpec& spec, const Vec& theta,
                            const Vec& params = {}) {
  const std::size_t k = spec.dim();
  const double kd = static_cast<double>(k);
  auto lin = [&](const Vec& w) {
    double v = 0.0;
    for (std::size_t i = 0; i < k; ++i) v += theta[i] * w[i];
    return v;
  };
  switch (spec.kind()) {
    case RewardKind::kQuadraticBalance: {
      double total = 1.0;
      for (std::size_t i = 0; i < k; ++i) {
        total += golden_max([&](double x) {
          return -0.5 * (x - 1.0 / kd) * (x - 1.0 / kd) + theta[i] * x;
        });
      }
      return total;
    }
    case RewardKind::kTargetSe: {
      double total = 1.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double z = params[i];
        total += golden_max([&](double x) {
          const double d = std::max(0.0, z - x);
          return -d * d / kd + theta[i] * x;
        });
      }
      return total;
    }
    case RewardKind::kSmoothedEntropy: {
      const double mu = params[0];
      double total = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        total += golden_max([&](double x) {
          return x * std::log(1.0 / (x + mu)) / std::log(kd) + theta[i] * x;
        });
      }
      return total;
    }
    case RewardKind::kL1Balance: {
      std::vector<Vec> cand(k, Vec{0.0, 1.0 / kd, 1.0});
      return grid_max(cand, [&](const Vec& w) {
        double dev = 0.0;
        for (double x : w) dev += std::abs(x - 1.0 / kd);
        return 1.0 - 0.5 * dev + lin(w);
      });
    }
    case RewardKind::kFairness: {
      const auto kappa = static_cast<std::size_t>(params[0]);
      std::vector<Vec> cand(k, Vec{0.0, 1.0});
      return grid_max(cand, [&](const Vec& w) {
        Vec s = w;
        std::sort(s.begin(), s.end());
        double g = 0.0;
        for (std::size_t i = 0; i < kappa; ++i) g += s[i];
        return g + lin(w);
      });
    }
    case RewardKind::kKnapsack: {
      const double b = params[0];
      std::vector<Vec> cand(k, Vec{0.0, b, 1.0});
      cand[0] = {0.0, 1.0};
      return grid_max(cand, [&](const Vec& w) {
        double excess = 0.0;
        for (std::size_t i = 1; i < k; ++i) excess = std::max(excess, w[i] - b);
        return w[0] - 2.0 / b * excess + lin(w);
      });
    }
    case RewardKind::kLinear: {
      double total = 0.0;
      for (std::size_t i = 0; i < k; ++i) total += std::max(0.0, params[i] + theta[i]);
      return total;
    }
    case RewardKind::kCustom: break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace tocucrl::oracle

namespace tocucrl::oracle {

/// Mean outcomes of every deterministic policy's recurrent classes; these
/// are the vertices of the achievable set of long-run averages.
inline std::vector<Vec> policy_vertices(const MdpInstance& m) {
  const std::size_t n = m.num_states();
  std::vector<std::size_t> policy(n, 0);
  std::vector<Vec> out;
  while (true) {
    for (const auto& cls : stationary_distributions(m.policy_chain(policy))) {
      Vec w(m.outcome_dim(), 0.0);
      for (std::size_t s = 0; s < n; ++s) {
        const auto v = m.mean_outcome(s, policy[s]);
        for (std::size_t k = 0; k < w.size(); ++k) w[k] += cls.distribution[s] * v[k];
      }
      out.push_back(std::move(w));
    }
    std::size_t s = 0;
    while (s < n && ++policy[s] == m.num_actions(s)) policy[s++] = 0;
    if (s == n) break;
  }
  return out;
}

/// max average reward w_0 subject to w_1 <= b, over mixtures of two
/// vertices (enough for a single linear constraint).
inline double knapsack_opt(const MdpInstance& m, double b) {
  const auto verts = policy_vertices(m);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& u : verts) {
    if (u[1] <= b) best = std::max(best, u[0]);
    for (const auto& w : verts) {
      // mix alpha u + (1 - alpha) w with the constraint tight
      if (u[1] <= b || w[1] >= b) continue;
      const double alpha = (b - w[1]) / (u[1] - w[1]);
      if (alpha < 0.0 || alpha > 1.0) continue;
      best = std::max(best, alpha * u[0] + (1 - alpha) * w[0]);
    }
  }
  return best;
}

}  // namespace tocucrl::oracle
