#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tocucrl/common.hpp"

namespace tocucrl {

/// Seeded stream owned by a single run.
using Rng = std::mt19937_64;

enum class OutcomeKind { kDeterministic, kBernoulli };

struct OutcomeModel {
  OutcomeKind kind = OutcomeKind::kDeterministic;
  Vec mean;
};

/// One realized transition: next state and outcome vector V_t in [0,1]^K.
struct Transition {
  std::size_t next_state = 0;
  Vec outcome;
};

/// Optional replacement for the default "independent given (s,a)" sampling.
/// Must respect the pair's declared transition vector and mean outcome.
using JointSampler = std::function<Transition(Rng&)>;

struct Action {
  std::string name;
  /// Dense p(.|s,a) over all states.
  Vec next;
  OutcomeModel outcome;
  /// Declared null action a_0: V = 0_K with certainty, known to the learner.
  bool null_action = false;
  /// The learner may use the mean outcome as a singleton confidence region.
  bool outcome_known = false;
  JointSampler joint;
};

/// Finite MDP with vectorial outcomes. Immutable after construction.
///
/// States and actions are dense 0-based indices. State-action pairs are also
/// given a flat index, ordered by state and then by action, which the
/// learning and benchmark code uses for per-pair tables.
class MdpInstance {
 public:
  MdpInstance(std::vector<std::string> state_names, std::size_t start,
              std::size_t outcome_dim, std::vector<std::vector<Action>> actions);

  std::size_t num_states() const { return names_.size(); }
  std::size_t start() const { return start_; }
  std::size_t outcome_dim() const { return outcome_dim_; }
  std::size_t num_actions(std::size_t s) const { return actions_.at(s).size(); }
  std::size_t num_pairs() const { return pair_state_.size(); }

  const std::string& state_name(std::size_t s) const { return names_.at(s); }
  std::optional<std::size_t> find_state(const std::string& name) const;

  const Action& action(std::size_t s, std::size_t a) const;
  std::size_t pair_index(std::size_t s, std::size_t a) const;
  std::size_t pair_state(std::size_t pair) const { return pair_state_.at(pair); }
  std::size_t pair_action(std::size_t pair) const { return pair_action_.at(pair); }

  ConstVecView transition(std::size_t s, std::size_t a) const { return action(s, a).next; }
  ConstVecView mean_outcome(std::size_t s, std::size_t a) const {
    return action(s, a).outcome.mean;
  }

  std::optional<std::size_t> null_action(std::size_t s) const;

  MdpInstance with_start(std::size_t start) const;

  /// Transition matrix of a deterministic stationary policy.
  std::vector<Vec> policy_chain(const std::vector<std::size_t>& policy) const;

 private:
  std::vector<std::string> names_;
  std::size_t start_;
  std::size_t outcome_dim_;
  std::vector<std::vector<Action>> actions_;
  std::vector<std::size_t> pair_offset_;
  std::vector<std::size_t> pair_state_;
  std::vector<std::size_t> pair_action_;
};

/// Samples (s_{t+1}, V_t) for action a at state s.
Transition step(const MdpInstance& instance, std::size_t s, std::size_t a, Rng& rng);

/// Leaves s^k (self-loop yields e_k) joined to a center through paths, so
/// that leaf-to-leaf travel takes exactly `diameter` steps. Starts at the
/// center. Leaf actions are ordered {loop, exit}.
MdpInstance build_star(std::size_t k, std::size_t diameter);

/// One state, K self-loops; loop k yields e_k.
MdpInstance build_bandit(std::size_t k);

/// Directed cycle over D states with scalar outcome 1 at state 0 only.
MdpInstance build_cycle(std::size_t d);

/// Random instance whose every state has an action moving to the next state
/// on a ring, which makes it communicating. Other transitions are random
/// over `support` states; outcomes are Bernoulli with random means.
MdpInstance build_random(std::size_t states, std::size_t actions, std::size_t k,
                         std::uint64_t seed, std::size_t support = 2);

/// Replaces all outcomes by the deterministic state indicator e_s (K = S),
/// marked known to the learner.
MdpInstance with_state_indicator_outcomes(const MdpInstance& instance);

/// Index of the leaf self-loop / exit actions in build_star's layout.
inline constexpr std::size_t kStarLoopAction = 0;
inline constexpr std::size_t kStarExitAction = 1;

/// max over s != s' of the minimal expected hitting time, computed by
/// value iteration on the stochastic shortest path problems.
///
/// Throws NotCommunicatingError if some state cannot reach another, and
/// UsageError above the state cap.
double diameter(const MdpInstance& instance, std::size_t state_cap = 64);

struct RecurrentClass {
  std::vector<std::size_t> states;
  /// Stationary distribution over all states; zero outside `states`.
  Vec distribution;
};

/// Closed communicating classes of a stochastic matrix (rows = from-state)
/// with their stationary distributions.
std::vector<RecurrentClass> stationary_distributions(const std::vector<Vec>& chain);

struct TrajectoryStep {
  std::size_t t = 0;
  std::size_t state = 0;
  std::size_t action = 0;
  Vec outcome;
  std::size_t next_state = 0;
};

/// Realized path with its running outcome average.
class Trajectory {
 public:
  explicit Trajectory(std::size_t outcome_dim) : sum_(outcome_dim, 0.0) {}

  void push(TrajectoryStep step);
  std::size_t size() const { return steps_.size(); }
  const std::vector<TrajectoryStep>& steps() const { return steps_; }
  const TrajectoryStep& operator[](std::size_t i) const { return steps_[i]; }
  /// V-bar over all recorded steps (0_K when empty).
  Vec average() const;
  /// V-bar over the first t steps recomputed from the step list.
  Vec average_prefix(std::size_t t) const;

 private:
  std::vector<TrajectoryStep> steps_;
  Vec sum_;
};

}  // namespace tocucrl
