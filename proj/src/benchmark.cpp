#include "tocucrl/benchmark.hpp"

#include <algorithm>

#include "tocucrl/ucrl.hpp"

namespace tocucrl {

Vec mean_outcome(const MdpInstance& instance, ConstVecView x) {
  if (x.size() != instance.num_pairs()) throw UsageError("occupancy size != number of pairs");
  Vec w(instance.outcome_dim(), 0.0);
  for (std::size_t pair = 0; pair < x.size(); ++pair) {
    if (x[pair] == 0.0) continue;
    const auto v = instance.mean_outcome(instance.pair_state(pair), instance.pair_action(pair));
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += x[pair] * v[k];
  }
  return w;
}

double flow_residual(const MdpInstance& instance, ConstVecView x) {
  if (x.size() != instance.num_pairs()) throw UsageError("occupancy size != number of pairs");
  Vec balance(instance.num_states(), 0.0);
  for (std::size_t pair = 0; pair < x.size(); ++pair) {
    const std::size_t s = instance.pair_state(pair);
    balance[s] += x[pair];
    const auto p = instance.transition(s, instance.pair_action(pair));
    for (std::size_t j = 0; j < p.size(); ++j) balance[j] -= p[j] * x[pair];
  }
  double worst = 0.0;
  for (double b : balance) worst = std::max(worst, std::abs(b));
  return worst;
}

namespace {

EviResult solve_scalar(const MdpInstance& instance, ConstVecView c) {
  if (c.size() != instance.num_pairs()) throw UsageError("one reward per state-action pair");
  const TransitionRegions regions = singleton_regions(instance);
  EviOptions options;
  options.epsilon = 1e-9;
  try {
    return evi(regions, c, options);
  } catch (const ConvergenceError&) {
    // Near-tied recurrent classes make the span shrink like 1/iterations.
    // A looser stop still gives a 1e-6-optimal greedy policy; a model that
    // is not communicating keeps its span away from zero and fails again.
  }
  options.epsilon = 1e-6;
  try {
    return evi(regions, c, options);
  } catch (const ConvergenceError& e) {
    throw NotCommunicatingError(std::string("linear oracle: ") + e.what());
  }
}

}  // namespace

OccupancyMeasure linear_oracle(const MdpInstance& instance, ConstVecView c) {
  const EviResult solved = solve_scalar(instance, c);
  const auto classes = stationary_distributions(instance.policy_chain(solved.policy));
  OccupancyMeasure best;
  best.value = -kInf;
  for (const RecurrentClass& cls : classes) {
    double value = 0.0;
    for (std::size_t s : cls.states) {
      value += cls.distribution[s] * c[instance.pair_index(s, solved.policy[s])];
    }
    if (value > best.value) {
      best.value = value;
      best.x.assign(instance.num_pairs(), 0.0);
      for (std::size_t s : cls.states) {
        best.x[instance.pair_index(s, solved.policy[s])] = cls.distribution[s];
      }
    }
  }
  return best;
}

OfflineSolution solve_offline(const MdpInstance& instance, const RewardSpec& spec, double tol,
                              std::size_t max_iters) {
  if (spec.dim() != instance.outcome_dim()) throw UsageError("reward dimension != instance K");
  const std::size_t pairs = instance.num_pairs();
  std::vector<Vec> v(pairs);
  for (std::size_t pair = 0; pair < pairs; ++pair) {
    const auto m = instance.mean_outcome(instance.pair_state(pair), instance.pair_action(pair));
    v[pair].assign(m.begin(), m.end());
  }
  auto linear_costs = [&](const Vec& grad) {
    Vec c(pairs);
    for (std::size_t pair = 0; pair < pairs; ++pair) c[pair] = dot(grad, v[pair]);
    return c;
  };

  OfflineSolution out;
  out.opt = -kInf;
  Vec x = linear_oracle(instance, linear_costs(spec.supergradient(Vec(spec.dim(), 0.0)))).x;
  for (std::size_t i = 0; i < max_iters; ++i) {
    const Vec w = mean_outcome(instance, x);
    const double value = spec.evaluate(w);
    const Vec grad = spec.supergradient(w);
    const OccupancyMeasure vertex = linear_oracle(instance, linear_costs(grad));
    const double gap = vertex.value - dot(grad, w);
    out.iterations = i + 1;
    out.gap = gap;
    if (value > out.opt) {
      out.opt = value;
      out.x = x;
      out.w = w;
      out.best_gap = gap;
    }
    if (gap <= tol) {
      out.converged = true;
      break;
    }
    const double step = 2.0 / (static_cast<double>(i) + 2.0);
    for (std::size_t pair = 0; pair < pairs; ++pair) {
      x[pair] += step * (vertex.x[pair] - x[pair]);
    }
  }
  return out;
}

DualCheck check_dual(const MdpInstance& instance, const RewardSpec& spec,
                     const DualCertificate& cert, double tol) {
  if (cert.gamma.size() != instance.num_states() || cert.theta.size() != spec.dim()) {
    throw UsageError("check_dual: certificate has the wrong dimensions");
  }
  DualCheck out;
  for (std::size_t pair = 0; pair < instance.num_pairs(); ++pair) {
    const std::size_t s = instance.pair_state(pair);
    const std::size_t a = instance.pair_action(pair);
    const double rhs = -dot(cert.theta, instance.mean_outcome(s, a)) +
                       dot(instance.transition(s, a), cert.gamma);
    out.max_violation = std::max(out.max_violation, rhs - cert.phi - cert.gamma[s]);
  }
  const bool in_ball = norm_of(cert.theta, spec.dual_norm()) <= spec.lipschitz() + 1e-9;
  out.feasible = in_ball && out.max_violation <= tol;
  if (in_ball) out.value = spec.fenchel(cert.theta).value + cert.phi;
  return out;
}

DualCertificate dual_certificate(const MdpInstance& instance, const RewardSpec& spec,
                                 ConstVecView w) {
  DualCertificate cert;
  const Vec grad = spec.supergradient(w);
  cert.theta = grad;
  for (double& t : cert.theta) t = -t;
  Vec c(instance.num_pairs());
  for (std::size_t pair = 0; pair < c.size(); ++pair) {
    c[pair] = dot(grad, instance.mean_outcome(instance.pair_state(pair),
                                              instance.pair_action(pair)));
  }
  const EviResult solved = solve_scalar(instance, c);
  cert.phi = solved.gain;
  cert.gamma = solved.bias;
  return cert;
}

KnapsackBenchmark solve_knapsack(const MdpInstance& instance, double b, std::size_t max_iters) {
  const std::size_t k = instance.outcome_dim();
  if (k < 2) throw UsageError("knapsack benchmark: need outcomes (R, C_1..)");
  if (!(b > 0.0 && b < 1.0)) throw UsageError("knapsack benchmark: b must lie in (0,1)");
  const std::size_t resources = k - 1;

  auto dual = [&](const Vec& lambda, Vec* usage) {
    Vec c(instance.num_pairs());
    for (std::size_t pair = 0; pair < c.size(); ++pair) {
      const auto v = instance.mean_outcome(instance.pair_state(pair), instance.pair_action(pair));
      c[pair] = v[0];
      for (std::size_t j = 0; j < resources; ++j) c[pair] -= lambda[j] * v[j + 1];
    }
    const OccupancyMeasure occ = linear_oracle(instance, c);
    if (usage) {
      const Vec w = mean_outcome(instance, occ.x);
      usage->assign(w.begin() + 1, w.end());
    }
    double value = occ.value;
    for (double l : lambda) value += b * l;
    return value;
  };

  KnapsackBenchmark out;
  if (resources == 1) {
    // Convex in lambda; the minimizer lies in [0, 2/b] since D(0) <= 1.
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0;
    double hi = 2.0 / b;
    double x1 = hi - ratio * (hi - lo);
    double x2 = lo + ratio * (hi - lo);
    double f1 = dual({x1}, nullptr);
    double f2 = dual({x2}, nullptr);
    std::size_t it = 0;
    for (; it < max_iters && hi - lo > 1e-10; ++it) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - ratio * (hi - lo);
        f1 = dual({x1}, nullptr);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + ratio * (hi - lo);
        f2 = dual({x2}, nullptr);
      }
    }
    const double f0 = dual({0.0}, nullptr);
    const double mid = 0.5 * (lo + hi);
    const double fm = dual({mid}, nullptr);
    out.opt = std::min({f0, f1, f2, fm});
    out.lambda = {out.opt == f0 ? 0.0 : out.opt == fm ? mid : out.opt == f1 ? x1 : x2};
    out.iterations = it;
    return out;
  }

  Vec lambda(resources, 0.0);
  Vec usage;
  out.opt = kInf;
  for (std::size_t it = 0; it < max_iters; ++it) {
    const double value = dual(lambda, &usage);
    if (value < out.opt) {
      out.opt = value;
      out.lambda = lambda;
    }
    const double step = 1.0 / (b * std::sqrt(static_cast<double>(it) + 1.0));
    for (std::size_t j = 0; j < resources; ++j) {
      lambda[j] = std::max(0.0, lambda[j] - step * (b - usage[j]));
    }
    out.iterations = it + 1;
  }
  return out;
}

}  // namespace tocucrl
