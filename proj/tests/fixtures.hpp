#pragma once

// Small instances shared by the unit and acceptance tests.

#include "tocucrl/mdp.hpp"

namespace tocucrl::fixtures {

inline Action move(std::string name, Vec next, OutcomeKind kind, Vec mean) {
  Action a;
  a.name = std::move(name);
  a.next = std::move(next);
  a.outcome.kind = kind;
  a.outcome.mean = std::move(mean);
  return a;
}

inline Action null_move(std::size_t states, std::size_t self, std::size_t k) {
  Action a;
  a.name = "null";
  a.next.assign(states, 0.0);
  a.next[self] = 1.0;
  a.outcome.mean.assign(k, 0.0);
  a.null_action = true;
  a.outcome_known = true;
  return a;
}

/// Three states, two outcome coordinates, stochastic transitions and
/// Bernoulli outcomes.
inline MdpInstance three_state() {
  const auto B = OutcomeKind::kBernoulli;
  std::vector<std::vector<Action>> actions(3);
  actions[0].push_back(move("stay", {0.8, 0.2, 0.0}, B, {0.6, 0.1}));
  actions[0].push_back(move("right", {0.1, 0.7, 0.2}, B, {0.0, 0.3}));
  actions[1].push_back(move("left", {0.6, 0.3, 0.1}, B, {0.2, 0.2}));
  actions[1].push_back(move("right", {0.0, 0.3, 0.7}, B, {0.4, 0.0}));
  actions[2].push_back(move("stay", {0.0, 0.1, 0.9}, B, {0.1, 0.7}));
  actions[2].push_back(move("home", {0.9, 0.0, 0.1}, B, {0.3, 0.3}));
  return MdpInstance({"s0", "s1", "s2"}, 0, 2, std::move(actions));
}

/// Four-state ring with sticky moves; outcomes are the state indicators,
/// known to the learner.
inline MdpInstance maxent_four_state() {
  const auto D = OutcomeKind::kDeterministic;
  std::vector<std::vector<Action>> actions(4);
  for (std::size_t s = 0; s < 4; ++s) {
    Vec stay(4, 0.0);
    stay[s] = 0.9;
    stay[(s + 1) % 4] = 0.1;
    Vec fwd(4, 0.0);
    fwd[(s + 1) % 4] = 0.8;
    fwd[s] = 0.2;
    Vec back(4, 0.0);
    back[(s + 3) % 4] = 0.6;
    back[(s + 2) % 4] = 0.4;
    actions[s].push_back(move("stay", stay, D, Vec(4, 0.0)));
    actions[s].push_back(move("fwd", fwd, D, Vec(4, 0.0)));
    if (s % 2 == 0) actions[s].push_back(move("back", back, D, Vec(4, 0.0)));
  }
  return with_state_indicator_outcomes(
      MdpInstance({"a", "b", "c", "d"}, 0, 4, std::move(actions)));
}

/// Three states, outcomes (R, C) with a null self-loop everywhere. The
/// cheap route earns less than the costly one, so the budget binds.
inline MdpInstance knapsack_three_state() {
  const auto B = OutcomeKind::kBernoulli;
  const auto D = OutcomeKind::kDeterministic;
  std::vector<std::vector<Action>> actions(3);
  actions[0].push_back(null_move(3, 0, 2));
  actions[0].push_back(move("go", {0.1, 0.9, 0.0}, D, {0.0, 0.0}));
  actions[1].push_back(null_move(3, 1, 2));
  actions[1].push_back(move("harvest", {0.0, 0.8, 0.2}, B, {0.9, 1.0}));
  actions[1].push_back(move("cheap", {0.0, 0.0, 1.0}, B, {0.3, 0.0}));
  actions[2].push_back(null_move(3, 2, 2));
  actions[2].push_back(move("back", {1.0, 0.0, 0.0}, B, {0.1, 0.0}));
  actions[2].push_back(move("graze", {0.0, 0.3, 0.7}, B, {0.6, 0.5}));
  return MdpInstance({"home", "field", "meadow"}, 0, 2, std::move(actions));
}

}  // namespace tocucrl::fixtures
