#include <cmath>
#include <numeric>

#include "doctest.h"
#include "fixtures.hpp"
#include "tocucrl/instance_io.hpp"
#include "tocucrl/mdp.hpp"

using namespace tocucrl;

TEST_CASE("cycle step moves forward with reward at state 1") {
  const auto m = build_cycle(4);
  Rng rng(3);
  const auto tr = step(m, 0, 0, rng);
  CHECK(tr.next_state == 1);
  REQUIRE(tr.outcome.size() == 1);
  CHECK(tr.outcome[0] == 1.0);
  CHECK(step(m, 1, 0, rng).outcome[0] == 0.0);
}

TEST_CASE("star self-loop yields the unit vector of its leaf") {
  const auto m = build_star(3, 4);
  Rng rng(1);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto leaf = *m.find_state("leaf" + std::to_string(k + 1));
    const auto tr = step(m, leaf, kStarLoopAction, rng);
    CHECK(tr.next_state == leaf);
    for (std::size_t j = 0; j < 3; ++j) CHECK(tr.outcome[j] == (j == k ? 1.0 : 0.0));
  }
}

TEST_CASE("zero outcome model gives zero outcomes") {
  const auto m = build_star(2, 2);
  const auto c = *m.find_state("c");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    for (double v : step(m, c, 0, rng).outcome) CHECK(v == 0.0);
  }
}

TEST_CASE("step rejects bad indices") {
  const auto m = build_cycle(3);
  Rng rng(0);
  CHECK_THROWS_AS(step(m, 5, 0, rng), UsageError);
  CHECK_THROWS_AS(step(m, 0, 1, rng), UsageError);
}

TEST_CASE("star sizes") {
  CHECK(build_star(3, 4).num_states() == 7);
  const auto small = build_star(2, 2);
  CHECK(small.num_states() == 3);
  CHECK_THROWS_AS(build_star(3, 3), UsageError);
  CHECK_THROWS_AS(build_star(1, 2), UsageError);
}

TEST_CASE("bandit outcomes") {
  const auto m = build_bandit(3);
  CHECK(m.num_states() == 1);
  CHECK(m.num_actions(0) == 3);
  Rng rng(0);
  const auto tr = step(m, 0, 1, rng);
  CHECK(tr.outcome == Vec{0, 1, 0});
  CHECK(step(build_bandit(1), 0, 0, rng).outcome == Vec{1});

  Trajectory traj(3);
  for (std::size_t t = 0; t < 3; ++t) {
    auto s = step(m, 0, t, rng);
    traj.push({t + 1, 0, t, s.outcome, s.next_state});
  }
  for (double x : traj.average()) CHECK(x == doctest::Approx(1.0 / 3));
}

TEST_CASE("cycle totals") {
  auto run_cycle = [](std::size_t d, std::size_t T) {
    const auto m = build_cycle(d);
    Rng rng(0);
    std::size_t s = 0;
    double total = 0;
    for (std::size_t t = 0; t < T; ++t) {
      auto tr = step(m, s, 0, rng);
      total += tr.outcome[0];
      s = tr.next_state;
    }
    return total;
  };
  CHECK(run_cycle(4, 4) == 1.0);
  CHECK(run_cycle(2, 6) == 3.0);
  for (std::size_t j = 1; j <= 4; ++j) {
    const std::size_t T = (j - 1) * 5 + 1;
    const double g = run_cycle(5, T) / static_cast<double>(T);
    CHECK(g == doctest::Approx(static_cast<double>(j) / T));
    CHECK(g > 0.2);
  }
}

TEST_CASE("diameter examples") {
  CHECK(diameter(build_cycle(4)) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(diameter(build_star(2, 4)) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(diameter(build_bandit(2)) == 0.0);
  for (std::size_t k = 2; k <= 4; ++k)
    for (std::size_t d = 2; d <= 8; d += 2)
      CHECK(diameter(build_star(k, d)) == doctest::Approx(static_cast<double>(d)).epsilon(1e-9));
}

TEST_CASE("diameter rejects a non-communicating instance") {
  std::vector<std::vector<Action>> acts(2);
  Action stay;
  stay.name = "stay";
  stay.outcome.mean = {0.0};
  stay.next = {1.0, 0.0};
  acts[0].push_back(stay);
  stay.next = {0.0, 1.0};
  acts[1].push_back(stay);
  MdpInstance m({"x", "y"}, 0, 1, std::move(acts));
  CHECK_THROWS_AS(diameter(m), NotCommunicatingError);
  CHECK_THROWS_AS(diameter(build_random(70, 1, 1, 0)), UsageError);
}

TEST_CASE("stationary distributions examples") {
  auto two = stationary_distributions({{0, 1}, {1, 0}});
  REQUIRE(two.size() == 1);
  CHECK(two[0].distribution[0] == doctest::Approx(0.5));
  CHECK(two[0].distribution[1] == doctest::Approx(0.5));

  auto id = stationary_distributions({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  REQUIRE(id.size() == 3);
  for (const auto& c : id) {
    CHECK(c.states.size() == 1);
    CHECK(c.distribution[c.states[0]] == doctest::Approx(1.0));
  }

  auto absorb = stationary_distributions({{0.5, 0.5}, {0, 1}});
  REQUIRE(absorb.size() == 1);
  CHECK(absorb[0].distribution[0] == 0.0);
  CHECK(absorb[0].distribution[1] == doctest::Approx(1.0));
}

TEST_CASE("stationary distributions solve pi P = pi on random chains") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto m = build_random(5, 2, 1, seed, 3);
    std::vector<std::size_t> policy(5);
    for (std::size_t s = 0; s < 5; ++s) policy[s] = (seed + s) % 2;
    const auto chain = m.policy_chain(policy);
    for (const auto& cls : stationary_distributions(chain)) {
      double sum = std::accumulate(cls.distribution.begin(), cls.distribution.end(), 0.0);
      CHECK(std::abs(sum - 1.0) <= 1e-10);
      for (std::size_t j = 0; j < 5; ++j) {
        double next = 0;
        for (std::size_t i = 0; i < 5; ++i) next += cls.distribution[i] * chain[i][j];
        CHECK(std::abs(next - cls.distribution[j]) <= 1e-10);
      }
    }
  }
}

TEST_CASE("sampled transition frequencies match the kernel") {
  const auto m = fixtures::three_state();
  Rng rng(42);
  const std::size_t n = 100000;
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t a = 0; a < m.num_actions(s); ++a) {
      Vec freq(3, 0.0), vsum(2, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        auto tr = step(m, s, a, rng);
        freq[tr.next_state] += 1.0;
        for (std::size_t k = 0; k < 2; ++k) vsum[k] += tr.outcome[k];
      }
      const auto p = m.transition(s, a);
      for (std::size_t j = 0; j < 3; ++j) {
        const double tol = 3 * std::sqrt(p[j] * (1 - p[j]) / n) + 1e-12;
        CHECK(std::abs(freq[j] / n - p[j]) <= tol);
      }
      const auto v = m.mean_outcome(s, a);
      for (std::size_t k = 0; k < 2; ++k)
        CHECK(std::abs(vsum[k] / n - v[k]) <= 4 * std::sqrt(v[k] * (1 - v[k]) / n) + 1e-12);
    }
  }
}

TEST_CASE("step is reproducible for a fixed seed") {
  const auto m = build_random(4, 3, 2, 9);
  auto trace = [&] {
    Rng rng(77);
    std::vector<std::size_t> out;
    std::size_t s = 0;
    for (int i = 0; i < 500; ++i) {
      auto tr = step(m, s, i % m.num_actions(s), rng);
      out.push_back(tr.next_state);
      for (double v : tr.outcome) out.push_back(v > 0.5);
      s = tr.next_state;
    }
    return out;
  };
  CHECK(trace() == trace());
}

TEST_CASE("trajectory average is recomputable") {
  const auto m = fixtures::three_state();
  Rng rng(5);
  Trajectory traj(2);
  std::size_t s = 0;
  for (std::size_t t = 1; t <= 1000; ++t) {
    auto tr = step(m, s, t % 2, rng);
    traj.push({t, s, t % 2, tr.outcome, tr.next_state});
    s = tr.next_state;
  }
  Vec direct(2, 0.0);
  for (const auto& st : traj.steps())
    for (std::size_t k = 0; k < 2; ++k) direct[k] += st.outcome[k] / 1000.0;
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(std::abs(traj.average()[k] - direct[k]) <= 1e-9);
    CHECK(std::abs(traj.average_prefix(1000)[k] - direct[k]) <= 1e-9);
  }
}

TEST_CASE("instance validation") {
  std::vector<std::vector<Action>> acts(1);
  Action bad;
  bad.name = "x";
  bad.next = {0.5};
  bad.outcome.mean = {0.0};
  acts[0].push_back(bad);
  CHECK_THROWS_AS(MdpInstance({"s"}, 0, 1, acts), UsageError);
  acts[0][0].next = {1.0};
  acts[0][0].outcome.mean = {1.5};
  CHECK_THROWS_AS(MdpInstance({"s"}, 0, 1, acts), UsageError);
}

TEST_CASE("instance JSON round trip") {
  const auto m = fixtures::knapsack_three_state();
  const auto back = parse_instance_json(to_instance_json(m));
  REQUIRE(back.num_states() == m.num_states());
  CHECK(back.num_pairs() == m.num_pairs());
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    CHECK(back.null_action(s) == m.null_action(s));
    for (std::size_t a = 0; a < m.num_actions(s); ++a) {
      CHECK(back.action(s, a).name == m.action(s, a).name);
      CHECK(back.action(s, a).next == m.action(s, a).next);
      CHECK(back.action(s, a).outcome.mean == m.action(s, a).outcome.mean);
    }
  }
  const auto star = instance_from_keyword("star:3,4");
  CHECK(star.num_states() == 7);
  CHECK(instance_from_keyword("cycle:5").num_states() == 5);
}

TEST_CASE("instance JSON errors") {
  CHECK_THROWS_AS(parse_instance_json("{"), UsageError);
  CHECK_THROWS_AS(
      parse_instance_json(R"({"states":["a"],"start":"b","K":1,"actions":[]})"), UsageError);
}
