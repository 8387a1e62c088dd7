#include "tocucrl/ucrl.hpp"

#include <algorithm>
#include <numeric>

namespace tocucrl {

CountsTable::CountsTable(const MdpInstance& instance)
    : states_(instance.num_states()), k_(instance.outcome_dim()) {
  const std::size_t pairs = instance.num_pairs();
  for (std::size_t s = 0; s < states_; ++s) pair_offset_.push_back(instance.pair_index(s, 0));
  pair_offset_.push_back(pairs);
  n_.assign(pairs, 0);
  nu_.assign(pairs, 0);
  outcome_sum_.assign(pairs * k_, 0.0);
  pending_outcome_.assign(pairs * k_, 0.0);
  next_counts_.assign(pairs * states_, 0.0);
  pending_next_.assign(pairs * states_, 0.0);
  known_.resize(pairs);
  for (std::size_t pair = 0; pair < pairs; ++pair) {
    const Action& act = instance.action(instance.pair_state(pair), instance.pair_action(pair));
    if (act.outcome_known || act.null_action) known_[pair] = act.outcome.mean;
  }
}

void CountsTable::record(std::size_t pair, ConstVecView outcome, std::size_t next_state) {
  if (pair >= n_.size() || next_state >= states_ || outcome.size() != k_) {
    throw UsageError("CountsTable::record: index out of range");
  }
  ++nu_[pair];
  for (std::size_t k = 0; k < k_; ++k) pending_outcome_[pair * k_ + k] += outcome[k];
  pending_next_[pair * states_ + next_state] += 1.0;
}

void CountsTable::close_episode() {
  for (std::size_t pair = 0; pair < n_.size(); ++pair) {
    n_[pair] += nu_[pair];
    total_ += nu_[pair];
    nu_[pair] = 0;
  }
  for (std::size_t i = 0; i < outcome_sum_.size(); ++i) {
    outcome_sum_[i] += pending_outcome_[i];
    pending_outcome_[i] = 0.0;
  }
  for (std::size_t i = 0; i < next_counts_.size(); ++i) {
    next_counts_[i] += pending_next_[i];
    pending_next_[i] = 0.0;
  }
}

ConstVecView CountsTable::outcome_sum(std::size_t pair) const {
  return ConstVecView(outcome_sum_).subspan(pair * k_, k_);
}

ConstVecView CountsTable::next_counts(std::size_t pair) const {
  return ConstVecView(next_counts_).subspan(pair * states_, states_);
}

TransitionRegions singleton_regions(const MdpInstance& instance) {
  TransitionRegions regions;
  regions.states = instance.num_states();
  for (std::size_t s = 0; s < regions.states; ++s) {
    regions.pair_offset.push_back(instance.pair_index(s, 0));
  }
  regions.pair_offset.push_back(instance.num_pairs());
  for (std::size_t pair = 0; pair < instance.num_pairs(); ++pair) {
    const auto p = instance.transition(instance.pair_state(pair), instance.pair_action(pair));
    regions.p_hat.emplace_back(p.begin(), p.end());
    regions.rad.emplace_back(regions.states, 0.0);
  }
  return regions;
}

double confidence_radius(double mean, double log_term, std::size_t n_plus) {
  const double n = static_cast<double>(n_plus);
  return std::sqrt(2.0 * std::max(mean, 0.0) * log_term / n) + 3.0 * log_term / n;
}

ConfidenceRegions compute_regions(const CountsTable& counts, std::size_t tau, double delta) {
  if (tau < 1) throw UsageError("compute_regions: tau must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw UsageError("compute_regions: delta must lie in (0,1)");
  const double s = static_cast<double>(counts.num_states());
  const double sa = static_cast<double>(counts.num_pairs());
  const double k = static_cast<double>(counts.outcome_dim());
  const double t2 = static_cast<double>(tau) * static_cast<double>(tau);

  ConfidenceRegions out;
  out.tau = tau;
  out.delta = delta;
  out.log_v = std::log(12.0 * k * sa * t2 / delta);
  out.log_p = std::log(12.0 * s * sa * t2 / delta);
  out.p.states = counts.num_states();
  out.p.pair_offset = counts.pair_offset();

  for (std::size_t pair = 0; pair < counts.num_pairs(); ++pair) {
    const std::size_t n_plus = counts.n_plus(pair);
    const double denom = static_cast<double>(n_plus);
    Vec v_hat(counts.outcome_dim());
    Vec rad_v(counts.outcome_dim(), 0.0);
    if (const auto& known = counts.known_outcome(pair)) {
      v_hat = *known;
    } else {
      const auto sum = counts.outcome_sum(pair);
      for (std::size_t i = 0; i < v_hat.size(); ++i) {
        v_hat[i] = sum[i] / denom;
        rad_v[i] = confidence_radius(v_hat[i], out.log_v, n_plus);
      }
    }
    out.v_hat.push_back(std::move(v_hat));
    out.rad_v.push_back(std::move(rad_v));

    const auto next = counts.next_counts(pair);
    Vec p_hat(counts.num_states());
    Vec rad_p(counts.num_states());
    for (std::size_t j = 0; j < p_hat.size(); ++j) {
      p_hat[j] = next[j] / denom;
      rad_p[j] = confidence_radius(p_hat[j], out.log_p, n_plus);
    }
    out.p.p_hat.push_back(std::move(p_hat));
    out.p.rad.push_back(std::move(rad_p));
  }
  return out;
}

double optimistic_reward(const ConfidenceRegions& regions, ConstVecView theta, std::size_t pair) {
  const Vec& v = regions.v_hat.at(pair);
  const Vec& rad = regions.rad_v.at(pair);
  if (theta.size() != v.size()) throw UsageError("optimistic_reward: dimension mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double weight = -theta[k];
    if (weight > 0.0) {
      acc += weight * std::clamp(v[k] + rad[k], 0.0, 1.0);
    } else if (weight < 0.0) {
      acc += weight * std::clamp(v[k] - rad[k], 0.0, 1.0);
    }
  }
  return acc;
}

namespace {

/// States by decreasing u, ties to the lower index.
std::vector<std::size_t> descending_order(ConstVecView u) {
  std::vector<std::size_t> order(u.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return u[a] > u[b]; });
  return order;
}

}  // namespace

Vec inner_max_transition(ConstVecView u, ConstVecView p_hat, ConstVecView rad) {
  const std::size_t n = u.size();
  if (p_hat.size() != n || rad.size() != n) {
    throw UsageError("inner_max_transition: dimension mismatch");
  }
  Vec p(n);
  Vec upper(n);
  double residual = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = std::max(0.0, p_hat[i] - rad[i]);
    upper[i] = std::min(1.0, p_hat[i] + rad[i]);
    residual -= p[i];
  }
  for (std::size_t i : descending_order(u)) {
    if (residual <= 0.0) break;
    const double add = std::min(residual, upper[i] - p[i]);
    p[i] += add;
    residual -= add;
  }
  if (residual > 1e-9) throw std::logic_error("inner_max_transition: infeasible box");
  return p;
}

bool regions_contain(const ConfidenceRegions& regions, const MdpInstance& instance,
                     double slack) {
  for (std::size_t pair = 0; pair < instance.num_pairs(); ++pair) {
    const std::size_t s = instance.pair_state(pair);
    const std::size_t a = instance.pair_action(pair);
    const auto v = instance.mean_outcome(s, a);
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (std::abs(v[k] - regions.v_hat[pair][k]) > regions.rad_v[pair][k] + slack) return false;
    }
    const auto p = instance.transition(s, a);
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (std::abs(p[j] - regions.p.p_hat[pair][j]) > regions.p.rad[pair][j] + slack) {
        return false;
      }
    }
  }
  return true;
}

namespace {

/// Box bounds hoisted out of the iteration loop.
struct Boxes {
  std::size_t states;
  Vec lower;
  Vec width;
  Vec lower_mass;
};

Boxes make_boxes(const TransitionRegions& regions) {
  Boxes b;
  b.states = regions.states;
  const std::size_t pairs = regions.num_pairs();
  b.lower.assign(pairs * b.states, 0.0);
  b.width.assign(pairs * b.states, 0.0);
  b.lower_mass.assign(pairs, 0.0);
  for (std::size_t pair = 0; pair < pairs; ++pair) {
    const Vec& p = regions.p_hat[pair];
    const Vec& r = regions.rad[pair];
    if (p.size() != b.states || r.size() != b.states) {
      throw UsageError("evi: transition region has the wrong size");
    }
    for (std::size_t j = 0; j < b.states; ++j) {
      const double lo = std::max(0.0, p[j] - r[j]);
      const double hi = std::min(1.0, p[j] + r[j]);
      b.lower[pair * b.states + j] = lo;
      b.width[pair * b.states + j] = std::max(0.0, hi - lo);
      b.lower_mass[pair] += lo;
    }
  }
  return b;
}

double inner_value(const Boxes& b, std::size_t pair, const Vec& u,
                   const std::vector<std::size_t>& order) {
  const double* lo = b.lower.data() + pair * b.states;
  const double* wd = b.width.data() + pair * b.states;
  double value = 0.0;
  for (std::size_t j = 0; j < b.states; ++j) value += lo[j] * u[j];
  double residual = 1.0 - b.lower_mass[pair];
  for (std::size_t j : order) {
    if (residual <= 0.0) break;
    const double add = std::min(residual, wd[j]);
    value += add * u[j];
    residual -= add;
  }
  return value;
}

void sweep_state(const TransitionRegions& regions, const Boxes& boxes, ConstVecView rewards,
                 const Vec& u, const std::vector<std::size_t>& order, double keep, std::size_t s,
                 Vec& next, std::vector<std::size_t>& policy) {
  double best = -kInf;
  std::size_t arg = 0;
  const std::size_t first = regions.pair_offset[s];
  for (std::size_t pair = first; pair < regions.pair_offset[s + 1]; ++pair) {
    const double v = rewards[pair] + (1.0 - keep) * inner_value(boxes, pair, u, order);
    if (v > best) {
      best = v;
      arg = pair - first;
    }
  }
  next[s] = best + keep * u[s];
  policy[s] = arg;
}

template <bool kParallel>
EviResult run_evi(const TransitionRegions& regions, ConstVecView rewards,
                  const EviOptions& options) {
  if (!(options.epsilon > 0.0)) throw UsageError("evi: epsilon must be positive");
  if (!(options.aperiodicity >= 0.0 && options.aperiodicity < 1.0)) {
    throw UsageError("evi: aperiodicity weight must lie in [0,1)");
  }
  if (rewards.size() != regions.num_pairs()) throw UsageError("evi: one reward per pair");
  if (regions.pair_offset.size() != regions.states + 1) {
    throw UsageError("evi: malformed pair offsets");
  }
  const std::size_t n = regions.states;
  const Boxes boxes = make_boxes(regions);
  const double keep = options.aperiodicity;

  Vec u(n, 0.0);
  Vec next(n, 0.0);
  std::vector<std::size_t> policy(n, 0);
  for (std::size_t i = 0; i < options.max_iters; ++i) {
    const std::vector<std::size_t> order = descending_order(u);
    if constexpr (kParallel) {
      const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (count >= 32)
      for (std::ptrdiff_t s = 0; s < count; ++s) {
        sweep_state(regions, boxes, rewards, u, order, keep, static_cast<std::size_t>(s), next,
                    policy);
      }
    } else {
      for (std::size_t s = 0; s < n; ++s) {
        sweep_state(regions, boxes, rewards, u, order, keep, s, next, policy);
      }
    }
    double hi = -kInf;
    double lo = kInf;
    for (std::size_t s = 0; s < n; ++s) {
      const double d = next[s] - u[s];
      hi = std::max(hi, d);
      lo = std::min(lo, d);
    }
    if (hi - lo <= options.epsilon) {
      EviResult result;
      result.policy = std::move(policy);
      result.gain = hi;
      result.bias.resize(n);
      for (std::size_t s = 0; s < n; ++s) result.bias[s] = (1.0 - keep) * u[s];
      result.iterations = i + 1;
      result.final_span = hi - lo;
      return result;
    }
    const double floor = *std::min_element(next.begin(), next.end());
    for (std::size_t s = 0; s < n; ++s) u[s] = next[s] - floor;
  }
  throw ConvergenceError("EVI non-convergent after " + std::to_string(options.max_iters) +
                         " iterations (likely non-communicating optimistic model)");
}

}  // namespace

EviResult evi(const TransitionRegions& regions, ConstVecView rewards, const EviOptions& options) {
  return run_evi<true>(regions, rewards, options);
}

EviResult evi_serial(const TransitionRegions& regions, ConstVecView rewards,
                     const EviOptions& options) {
  return run_evi<false>(regions, rewards, options);
}

}  // namespace tocucrl
