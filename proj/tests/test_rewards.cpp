#include <cmath>

#include "doctest.h"
#include "properties.hpp"
#include "tocucrl/rewards.hpp"

using namespace tocucrl;
using doctest::Approx;

TEST_CASE("quadratic balance examples") {
  const auto g = make_quadratic_balance(2);
  CHECK(g.norm() == Norm::kL2);
  CHECK(g.beta().value() == 1.0);
  CHECK(g.evaluate(Vec{0.5, 0.5}) == 1.0);
  CHECK(g.supergradient(Vec{0.5, 0.5}) == Vec{0.0, 0.0});
  const Vec gr = g.supergradient(Vec{0.7, 0.3});
  CHECK(gr[0] == Approx(-0.2));
  CHECK(gr[1] == Approx(0.2));
  CHECK(g.evaluate(Vec{1.0, 1.0}) == Approx(0.75));
  // sup of the gradient norm over the cube
  CHECK(make_quadratic_balance(3).lipschitz() == Approx(std::sqrt(3.0) * 2.0 / 3.0));
}

TEST_CASE("quadratic balance fenchel clips 1/K + theta") {
  const auto g = make_quadratic_balance(2);
  const auto fp = g.fenchel(Vec{0.2, -0.2});
  CHECK(fp.argmax[0] == Approx(0.7));
  CHECK(fp.argmax[1] == Approx(0.3));
  CHECK(g.fenchel(Vec{0.0, 0.0}).value == Approx(1.0));
}

TEST_CASE("l1 balance examples") {
  const auto g = make_l1_balance(2);
  CHECK_FALSE(g.smooth());
  CHECK(g.lipschitz() == 0.5);
  CHECK(g.evaluate(Vec{0.5, 0.5}) == 1.0);
  CHECK(g.evaluate(Vec{1.0, 0.0}) == Approx(0.5));
  CHECK(make_l1_balance(3).supergradient(Vec(3, 1.0 / 3)) == Vec(3, 0.0));
}

TEST_CASE("target squared error examples") {
  const auto g = make_target_se({0.3, 0.6});
  CHECK(g.evaluate(Vec{0.5, 0.9}) == 1.0);
  CHECK(g.supergradient(Vec{0.5, 0.9}) == Vec{0.0, 0.0});
  CHECK(make_target_se({1.0}).evaluate(Vec{0.0}) == 0.0);
  const auto g4 = make_target_se(Vec(4, 1.0));
  CHECK(g4.evaluate(Vec(4, 0.0)) == Approx(0.0));
  for (double x : g4.supergradient(Vec(4, 0.0))) CHECK(x == Approx(0.5));
  CHECK(g4.lipschitz() == Approx(1.0));
  CHECK(g4.beta().value() == Approx(0.5));
}

TEST_CASE("fairness examples") {
  const auto g = make_fairness(3, 2);
  CHECK(g.evaluate(Vec{0.9, 0.1, 0.4}) == Approx(0.5));
  CHECK(g.supergradient(Vec{0.9, 0.1, 0.4}) == Vec{0, 1, 1});
  CHECK(make_fairness(3, 3).evaluate(Vec{0.2, 0.3, 0.4}) == Approx(0.9));
  CHECK(make_fairness(3, 1).evaluate(Vec{0.2, 0.05, 0.4}) == Approx(0.05));
  // ties go to the lowest index
  CHECK(g.supergradient(Vec{0.3, 0.3, 0.3}) == Vec{1, 1, 0});
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto w = props::random_point(3, rng);
    CHECK(norm_of(g.supergradient(w), Norm::kL1) == 2.0);
  }
}

TEST_CASE("smoothed entropy examples") {
  const auto h1 = make_smoothed_entropy(2, 1.0);
  CHECK(h1.evaluate(Vec{0.5, 0.5}) == Approx(std::log(1 / 1.5) / std::log(2.0)));
  CHECK(h1.evaluate(Vec{0.5, 0.5}) == Approx(-0.585).epsilon(1e-3));
  Rng rng(8);
  for (int i = 0; i < 50; ++i) CHECK(h1.evaluate(props::random_point(2, rng)) <= 0.0);
  CHECK(make_smoothed_entropy(4, 1e-9).evaluate(Vec(4, 0.25)) == Approx(1.0).epsilon(1e-6));
  // P_s + mu = 1 gives -P_s / log S
  const auto h = make_smoothed_entropy(3, 0.4);
  const auto gr = h.supergradient(Vec{0.6, 0.2, 0.2});
  CHECK(gr[0] == Approx(-0.6 / std::log(3.0)));
}

TEST_CASE("knapsack surrogate examples") {
  const auto g = make_knapsack_surrogate(2, 0.5);
  CHECK(g.lipschitz() == Approx(5.0));
  CHECK(g.evaluate(Vec{0.4, 0.3}) == Approx(0.4));
  CHECK(g.evaluate(Vec{0.4, 0.7}) == Approx(-0.4));
  CHECK(make_knapsack_surrogate(3, 0.25).evaluate(Vec{1.0, 0.25, 0.25}) == 1.0);
  CHECK(g.supergradient(Vec{0.4, 0.3}) == Vec{1.0, 0.0});
  CHECK(g.supergradient(Vec{0.4, 0.7}) == Vec{1.0, -4.0});
  const auto g3 = make_knapsack_surrogate(3, 0.5);
  CHECK(g3.supergradient(Vec{0.1, 0.8, 0.8}) == Vec{1.0, -4.0, 0.0});
  CHECK(norm_of(g3.supergradient(Vec{0.1, 0.8, 0.9}), Norm::kL1) == Approx(5.0));
}

TEST_CASE("linear fenchel is a sum of positive parts") {
  const auto g = make_linear({0.2, 0.5, 0.3});
  const auto fp = g.fenchel(Vec{-0.4, 0.1, -0.3});
  CHECK(fp.value == Approx(0.6));
  CHECK(fp.argmax == Vec{0, 1, 0});
}

TEST_CASE("fenchel at zero is the maximum") {
  for (const auto& fam : props::builtin_families()) {
    const auto g = reward_from_keyword(fam.keyword);
    const auto fp = g.fenchel(Vec(g.dim(), 0.0));
    Rng rng(2);
    for (int i = 0; i < 200; ++i)
      CHECK(g.evaluate(props::random_point(g.dim(), rng)) <= fp.value + 1e-9);
  }
}

TEST_CASE("fenchel rejects gradients outside the dual ball") {
  const auto g = make_quadratic_balance(2);
  CHECK_THROWS_AS(g.fenchel(Vec{2.0, 0.0}), UsageError);
  CHECK_THROWS_AS(make_fairness(3, 1).fenchel(Vec{0.5, 0.5, 0.5}), UsageError);
}

TEST_CASE("reward keywords") {
  CHECK(reward_from_keyword("quad:3").kind() == RewardKind::kQuadraticBalance);
  CHECK(reward_from_keyword("fair:4,2").dim() == 4);
  CHECK(reward_from_keyword("se:0.1,0.2").dim() == 2);
  CHECK_THROWS_AS(reward_from_keyword("nope:1"), UsageError);
  CHECK_THROWS_AS(reward_from_keyword("fair:2,3"), UsageError);
  CHECK_THROWS_AS(reward_from_keyword("knap:2,1.5"), UsageError);
}

TEST_CASE("reward property suites") {
  for (const auto& fam : props::builtin_families()) {
    const auto rep = props::check_family(fam, 200, 11);
    std::string msg;
    for (const auto& f : rep.failures) msg += f + "; ";
    CHECK_MESSAGE(rep.ok(), fam.keyword << ": " << msg);
  }
}

TEST_CASE("range holds on grids") {
  for (const auto& fam : props::builtin_families()) {
    if (fam.range == props::Range::kNone) continue;
    const auto g = reward_from_keyword(fam.keyword);
    std::vector<Vec> grid(g.dim(), Vec{0.0, 0.25, 0.5, 0.75, 1.0});
    oracle::grid_max(grid, [&](const Vec& w) {
      double total = 0.0;
      for (double x : w) total += x;
      if (fam.range == props::Range::kSubSimplex && total > 1.0) return 0.0;
      const double v = g.evaluate(w);
      CHECK(v >= -1e-12);
      CHECK(v <= 1.0 + 1e-12);
      return v;
    });
  }
}

TEST_CASE("fenchel young minimum over sampled gradients") {
  for (const auto& fam : props::builtin_families()) {
    const auto g = reward_from_keyword(fam.keyword);
    Rng rng(21);
    for (int i = 0; i < 5; ++i) {
      const auto w = props::random_point(g.dim(), rng);
      Vec neg = g.supergradient(w);
      for (auto& x : neg) x = -x;
      double best = g.fenchel(neg).value - dot(neg, w);
      for (int j = 0; j < 499; ++j) {
        const auto th = props::random_dual(g, rng);
        const double v = g.fenchel(th).value - dot(th, w);
        CHECK(v >= g.evaluate(w) - 1e-9);
        best = std::min(best, v);
      }
      CHECK(best == Approx(g.evaluate(w)).epsilon(1e-8));
    }
  }
}
