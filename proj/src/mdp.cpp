#include "tocucrl/mdp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <sstream>

namespace tocucrl {

namespace {

constexpr double kStochasticTol = 1e-12;

void validate_action(const Action& action, std::size_t s, std::size_t num_states,
                     std::size_t outcome_dim) {
  auto where = [&] {
    std::ostringstream os;
    os << "state " << s << " action '" << action.name << "'";
    return os.str();
  };
  if (action.next.size() != num_states) {
    throw UsageError(where() + ": transition vector has wrong length");
  }
  double total = 0.0;
  for (double p : action.next) {
    if (!(p >= 0.0)) throw UsageError(where() + ": negative transition probability");
    total += p;
  }
  if (std::abs(total - 1.0) > kStochasticTol) {
    throw UsageError(where() + ": transition probabilities do not sum to 1");
  }
  if (action.outcome.mean.size() != outcome_dim) {
    throw UsageError(where() + ": outcome mean has wrong dimension");
  }
  for (double v : action.outcome.mean) {
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError(where() + ": outcome mean outside [0,1]");
  }
  if (action.null_action &&
      std::any_of(action.outcome.mean.begin(), action.outcome.mean.end(),
                  [](double v) { return v != 0.0; })) {
    throw UsageError(where() + ": null action must have zero outcome");
  }
}

Vec unit(std::size_t k, std::size_t i) {
  Vec e(k, 0.0);
  e[i] = 1.0;
  return e;
}

Action deterministic_move(std::string name, std::size_t num_states, std::size_t to,
                          Vec outcome) {
  Action a;
  a.name = std::move(name);
  a.next = unit(num_states, to);
  a.outcome = {OutcomeKind::kDeterministic, std::move(outcome)};
  return a;
}

std::size_t sample_index(ConstVecView probs, double u) {
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

}  // namespace

MdpInstance::MdpInstance(std::vector<std::string> state_names, std::size_t start,
                         std::size_t outcome_dim, std::vector<std::vector<Action>> actions)
    : names_(std::move(state_names)),
      start_(start),
      outcome_dim_(outcome_dim),
      actions_(std::move(actions)) {
  if (names_.empty()) throw UsageError("instance needs at least one state");
  if (actions_.size() != names_.size()) {
    throw UsageError("action lists must match the number of states");
  }
  if (start_ >= names_.size()) throw UsageError("start state out of range");
  if (outcome_dim_ == 0) throw UsageError("outcome dimension must be positive");
  for (std::size_t s = 0; s < actions_.size(); ++s) {
    if (actions_[s].empty()) throw UsageError("state " + names_[s] + " has no actions");
    pair_offset_.push_back(pair_state_.size());
    for (std::size_t a = 0; a < actions_[s].size(); ++a) {
      validate_action(actions_[s][a], s, names_.size(), outcome_dim_);
      pair_state_.push_back(s);
      pair_action_.push_back(a);
    }
  }
}

std::optional<std::size_t> MdpInstance::find_state(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

const Action& MdpInstance::action(std::size_t s, std::size_t a) const {
  if (s >= actions_.size()) throw UsageError("state index out of range");
  if (a >= actions_[s].size()) throw UsageError("action index out of range");
  return actions_[s][a];
}

std::size_t MdpInstance::pair_index(std::size_t s, std::size_t a) const {
  (void)action(s, a);
  return pair_offset_[s] + a;
}

std::optional<std::size_t> MdpInstance::null_action(std::size_t s) const {
  const auto& list = actions_.at(s);
  for (std::size_t a = 0; a < list.size(); ++a) {
    if (list[a].null_action) return a;
  }
  return std::nullopt;
}

MdpInstance MdpInstance::with_start(std::size_t start) const {
  MdpInstance copy = *this;
  if (start >= names_.size()) throw UsageError("start state out of range");
  copy.start_ = start;
  return copy;
}

std::vector<Vec> MdpInstance::policy_chain(const std::vector<std::size_t>& policy) const {
  if (policy.size() != num_states()) throw UsageError("policy has wrong length");
  std::vector<Vec> chain;
  chain.reserve(num_states());
  for (std::size_t s = 0; s < num_states(); ++s) chain.push_back(action(s, policy[s]).next);
  return chain;
}

Transition step(const MdpInstance& instance, std::size_t s, std::size_t a, Rng& rng) {
  const Action& act = instance.action(s, a);
  if (act.joint) return act.joint(rng);
  Transition out;
  out.next_state = sample_index(act.next, uniform01(rng));
  const Vec& mean = act.outcome.mean;
  if (act.outcome.kind == OutcomeKind::kDeterministic) {
    out.outcome = mean;
  } else {
    out.outcome.resize(mean.size());
    for (std::size_t k = 0; k < mean.size(); ++k) {
      out.outcome[k] = uniform01(rng) < mean[k] ? 1.0 : 0.0;
    }
  }
  return out;
}

MdpInstance build_star(std::size_t k, std::size_t diameter) {
  if (k < 2) throw UsageError("star needs K >= 2 branches");
  if (diameter < 2 || diameter % 2 != 0) throw UsageError("star needs an even D >= 2");
  const std::size_t half = diameter / 2;
  const std::size_t n = 1 + k * half;
  // Node j (1..half) of branch b sits at 1 + b*half + (j-1); node `half` is the leaf.
  auto node = [&](std::size_t b, std::size_t j) { return j == 0 ? 0 : 1 + b * half + (j - 1); };

  std::vector<std::string> names(n);
  std::vector<std::vector<Action>> actions(n);
  names[0] = "c";
  const Vec zero(k, 0.0);
  for (std::size_t b = 0; b < k; ++b) {
    actions[0].push_back(deterministic_move("to" + std::to_string(b + 1), n, node(b, 1), zero));
    for (std::size_t j = 1; j <= half; ++j) {
      const std::size_t s = node(b, j);
      if (j == half) {
        names[s] = "leaf" + std::to_string(b + 1);
        actions[s].push_back(deterministic_move("loop", n, s, unit(k, b)));
        actions[s].push_back(deterministic_move("exit", n, node(b, j - 1), zero));
      } else {
        names[s] = "b" + std::to_string(b + 1) + "_" + std::to_string(j);
        actions[s].push_back(deterministic_move("in", n, node(b, j + 1), zero));
        actions[s].push_back(deterministic_move("out", n, node(b, j - 1), zero));
      }
    }
  }
  return MdpInstance(std::move(names), 0, k, std::move(actions));
}

MdpInstance build_bandit(std::size_t k) {
  if (k < 1) throw UsageError("bandit needs K >= 1");
  std::vector<std::vector<Action>> actions(1);
  for (std::size_t i = 0; i < k; ++i) {
    actions[0].push_back(deterministic_move("arm" + std::to_string(i + 1), 1, 0, unit(k, i)));
  }
  return MdpInstance({"c"}, 0, k, std::move(actions));
}

MdpInstance build_cycle(std::size_t d) {
  if (d < 2) throw UsageError("cycle needs D >= 2");
  std::vector<std::string> names(d);
  std::vector<std::vector<Action>> actions(d);
  for (std::size_t i = 0; i < d; ++i) {
    names[i] = std::to_string(i + 1);
    actions[i].push_back(deterministic_move("a", d, (i + 1) % d, Vec{i == 0 ? 1.0 : 0.0}));
  }
  return MdpInstance(std::move(names), 0, 1, std::move(actions));
}

MdpInstance build_random(std::size_t states, std::size_t actions_per_state, std::size_t k,
                         std::uint64_t seed, std::size_t support) {
  if (states < 1 || actions_per_state < 1 || k < 1) {
    throw UsageError("random instance needs positive sizes");
  }
  support = std::clamp<std::size_t>(support, 1, states);
  Rng rng(seed);
  std::vector<std::string> names(states);
  std::vector<std::vector<Action>> actions(states);
  for (std::size_t s = 0; s < states; ++s) {
    names[s] = "s" + std::to_string(s);
    for (std::size_t a = 0; a < actions_per_state; ++a) {
      Action act;
      act.name = "a" + std::to_string(a);
      act.next.assign(states, 0.0);
      if (a == 0) {
        // Ring edge: keeps the instance communicating.
        act.next[(s + 1) % states] += 0.5 + 0.5 * uniform01(rng);
      }
      double rest = 1.0 - std::accumulate(act.next.begin(), act.next.end(), 0.0);
      Vec weights(support);
      std::vector<std::size_t> targets(support);
      double wsum = 0.0;
      for (std::size_t j = 0; j < support; ++j) {
        targets[j] = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(states));
        weights[j] = 0.05 + uniform01(rng);
        wsum += weights[j];
      }
      for (std::size_t j = 0; j < support; ++j) act.next[targets[j]] += rest * weights[j] / wsum;
      // Renormalize against rounding.
      const double total = std::accumulate(act.next.begin(), act.next.end(), 0.0);
      for (double& p : act.next) p /= total;
      act.outcome.kind = OutcomeKind::kBernoulli;
      act.outcome.mean.resize(k);
      for (double& v : act.outcome.mean) v = uniform01(rng);
      actions[s].push_back(std::move(act));
    }
  }
  return MdpInstance(std::move(names), 0, k, std::move(actions));
}

MdpInstance with_state_indicator_outcomes(const MdpInstance& instance) {
  const std::size_t n = instance.num_states();
  std::vector<std::string> names(n);
  std::vector<std::vector<Action>> actions(n);
  for (std::size_t s = 0; s < n; ++s) {
    names[s] = instance.state_name(s);
    for (std::size_t a = 0; a < instance.num_actions(s); ++a) {
      Action act = instance.action(s, a);
      act.outcome = {OutcomeKind::kDeterministic, unit(n, s)};
      act.outcome_known = true;
      act.null_action = false;
      act.joint = nullptr;
      actions[s].push_back(std::move(act));
    }
  }
  return MdpInstance(std::move(names), instance.start(), n, std::move(actions));
}

double diameter(const MdpInstance& instance, std::size_t state_cap) {
  const std::size_t n = instance.num_states();
  if (n > state_cap) throw UsageError("diameter: instance exceeds the state cap");
  if (n == 1) return 0.0;

  constexpr double kTol = 1e-11;
  constexpr std::size_t kMaxIters = 10'000'000;
  double worst = 0.0;
  std::vector<char> reaches(n);
  Vec h(n), next_h(n);
  for (std::size_t target = 0; target < n; ++target) {
    // Support-graph reachability first, so value iteration below has a
    // proper policy and converges.
    std::fill(reaches.begin(), reaches.end(), 0);
    reaches[target] = 1;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t s = 0; s < n; ++s) {
        if (reaches[s]) continue;
        for (std::size_t a = 0; a < instance.num_actions(s) && !reaches[s]; ++a) {
          const auto p = instance.transition(s, a);
          for (std::size_t t = 0; t < n; ++t) {
            if (p[t] > 0.0 && reaches[t]) {
              reaches[s] = 1;
              changed = true;
              break;
            }
          }
        }
      }
    }
    for (std::size_t s = 0; s < n; ++s) {
      if (!reaches[s]) {
        throw NotCommunicatingError("instance not communicating: state " +
                                    instance.state_name(s) + " cannot reach " +
                                    instance.state_name(target));
      }
    }

    std::fill(h.begin(), h.end(), 0.0);
    std::size_t iter = 0;
    for (;; ++iter) {
      if (iter >= kMaxIters) {
        throw NotCommunicatingError("diameter: hitting-time iteration cap hit");
      }
      double change = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        if (s == target) {
          next_h[s] = 0.0;
          continue;
        }
        double best = kInf;
        for (std::size_t a = 0; a < instance.num_actions(s); ++a) {
          const auto p = instance.transition(s, a);
          double v = 1.0;
          for (std::size_t t = 0; t < n; ++t) {
            if (t != target) v += p[t] * h[t];
          }
          best = std::min(best, v);
        }
        next_h[s] = best;
        change = std::max(change, std::abs(best - h[s]));
      }
      h.swap(next_h);
      if (change <= kTol * std::max(1.0, *std::max_element(h.begin(), h.end()))) break;
    }
    worst = std::max(worst, *std::max_element(h.begin(), h.end()));
  }
  return worst;
}

std::vector<RecurrentClass> stationary_distributions(const std::vector<Vec>& chain) {
  const std::size_t n = chain.size();
  for (const Vec& row : chain) {
    if (row.size() != n) throw UsageError("chain must be square");
  }

  // Tarjan's strongly connected components on the support graph.
  std::vector<std::size_t> index(n, SIZE_MAX), low(n, 0), comp(n, SIZE_MAX);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::size_t counter = 0, num_comp = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = 1;
    for (std::size_t w = 0; w < n; ++w) {
      if (chain[v][w] <= 0.0) continue;
      if (index[w] == SIZE_MAX) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = 0;
        comp[w] = num_comp;
      } while (w != v);
      ++num_comp;
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] == SIZE_MAX) visit(v);
  }

  std::vector<char> closed(num_comp, 1);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t w = 0; w < n; ++w) {
      if (chain[v][w] > 0.0 && comp[w] != comp[v]) closed[comp[v]] = 0;
    }
  }

  std::vector<RecurrentClass> classes;
  std::vector<char> done(num_comp, 0);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t c = comp[v];
    if (!closed[c] || done[c]) continue;
    done[c] = 1;
    RecurrentClass rc;
    for (std::size_t w = v; w < n; ++w) {
      if (comp[w] == c) rc.states.push_back(w);
    }
    const auto m = static_cast<Eigen::Index>(rc.states.size());
    // pi (P - I) = 0 with the last balance equation replaced by sum(pi) = 1.
    Eigen::MatrixXd a(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        a(i, j) = chain[rc.states[j]][rc.states[i]] - (i == j ? 1.0 : 0.0);
      }
    }
    a.row(m - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs(m - 1) = 1.0;
    const Eigen::VectorXd pi = a.partialPivLu().solve(rhs);
    rc.distribution.assign(n, 0.0);
    double total = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double value = std::max(0.0, pi(i));
      rc.distribution[rc.states[i]] = value;
      total += value;
    }
    for (double& x : rc.distribution) x /= total;
    classes.push_back(std::move(rc));
  }
  return classes;
}

void Trajectory::push(TrajectoryStep step) {
  if (step.outcome.size() != sum_.size()) throw UsageError("outcome dimension mismatch");
  for (std::size_t k = 0; k < sum_.size(); ++k) sum_[k] += step.outcome[k];
  steps_.push_back(std::move(step));
}

Vec Trajectory::average() const {
  Vec avg = sum_;
  if (!steps_.empty()) {
    for (double& x : avg) x /= static_cast<double>(steps_.size());
  }
  return avg;
}

Vec Trajectory::average_prefix(std::size_t t) const {
  if (t > steps_.size()) throw UsageError("prefix longer than trajectory");
  Vec avg(sum_.size(), 0.0);
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += steps_[i].outcome[k];
  }
  if (t > 0) {
    for (double& x : avg) x /= static_cast<double>(t);
  }
  return avg;
}

}  // namespace tocucrl
