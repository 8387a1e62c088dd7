#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "tocucrl/harness.hpp"

using namespace tocucrl;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tocucrl_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_experiment_config(R"({
    "instance": "star:2,2", "reward": "quad:2", "oracle": ["fw", "tgd"],
    "Q": 0.5, "delta": 0.2, "T": [100, 1000], "seeds": {"start": 3, "count": 4},
    "opt": "solve", "traces": false })");
  CHECK(c.oracles.size() == 2);
  CHECK(resolve_q(c.q, make_quadratic_balance(2)) == 0.5);
  CHECK(c.delta == 0.2);
  CHECK(c.horizons == std::vector<std::size_t>{100, 1000});
  CHECK(c.seeds == std::vector<std::uint64_t>{3, 4, 5, 6});
  CHECK(c.solve_opt);
  CHECK_FALSE(c.write_traces);

  CHECK_THROWS_AS(parse_experiment_config(
                      R"({"instance":"x","reward":"quad:2","T":[10],"seeds":[]})"),
                  UsageError);
  CHECK_THROWS_AS(parse_experiment_config(
                      R"({"instance":"x","reward":"quad:2","T":[100,10],"seeds":[1]})"),
                  UsageError);
  CHECK_THROWS_AS(parse_experiment_config("not json"), UsageError);
  CHECK(std::isinf(resolve_q("inf", make_quadratic_balance(2))));
  CHECK(resolve_q("L", make_quadratic_balance(2)) == Approx(std::sqrt(2.0) / 2));
  CHECK_THROWS_AS(resolve_q("-1", make_quadratic_balance(2)), UsageError);
}

TEST_CASE("single run campaign summary equals the run") {
  ExperimentConfig c;
  c.instance = "star:2,2";
  c.reward = "quad:2";
  c.horizons = {300};
  c.seeds = {5};
  c.opt = 1.0;
  const auto s = run_campaign(c);
  REQUIRE(s.runs.size() == 1);
  REQUIRE(s.rows.size() == 1);
  const auto& r = s.runs[0];
  CHECK(r.status == "ok");
  CHECK(s.rows[0].mean_regret == r.regret);
  CHECK(s.rows[0].median_regret == r.regret);
  CHECK(s.rows[0].p90_regret == r.regret);
  CHECK(s.rows[0].mean_episodes == static_cast<double>(r.episodes));
  CHECK(s.rows[0].coverage == (r.covered ? 1.0 : 0.0));
  CHECK(r.regret == Approx(1.0 - r.reward));
}

TEST_CASE("identical seeds give identical rows") {
  ExperimentConfig c;
  c.instance = "star:2,2";
  c.reward = "quad:2";
  c.horizons = {200, 400};
  c.seeds = {7, 7};
  const auto s = run_campaign(c);
  REQUIRE(s.runs.size() == 4);
  for (std::size_t i = 0; i < 4; i += 2) {
    CHECK(s.runs[i].reward == s.runs[i + 1].reward);
    CHECK(s.runs[i].episodes == s.runs[i + 1].episodes);
    CHECK(s.runs[i].n_alt == s.runs[i + 1].n_alt);
  }
}

TEST_CASE("campaign files are consistent and re-aggregate exactly") {
  const auto dir = scratch("files");
  ExperimentConfig c;
  c.instance = "star:3,4";
  c.reward = "quad:3";
  c.oracles = {OracleKind::kFrankWolfe, OracleKind::kTmdL2};
  c.horizons = {100, 300};
  c.seeds = {1, 2, 3};
  c.solve_opt = true;
  c.out_dir = dir.string();
  const auto s = compare_oracles(c);
  CHECK_FALSE(s.any_failed());
  REQUIRE(s.opt.has_value());
  CHECK(*s.opt == Approx(1.0).epsilon(1e-3));
  const auto runs = slurp(dir / "runs.csv");
  const auto summary = slurp(dir / "summary.csv");
  CHECK(reaggregate(runs) == summary);
  CHECK(fs::exists(dir / "compare.csv"));
  CHECK(fs::exists(dir / "runs" / "tmd-l2_s2_T300_steps.csv"));
  CHECK(fs::exists(dir / "runs" / "fw_s1_T100_episodes.csv"));
  const auto cmp = slurp(dir / "compare.csv");
  CHECK(cmp.rfind("T,regret_fw,regret_tmd:l2\n100,", 0) == 0);
  for (const auto& row : s.rows) {
    CHECK(row.coverage >= 0.0);
    CHECK(row.coverage <= 1.0);
    std::size_t covered = 0;
    for (const auto& r : s.runs)
      if (r.oracle == row.oracle && r.horizon == row.horizon && r.covered) ++covered;
    CHECK(row.coverage == Approx(covered / 3.0));
    CHECK(row.mean_n_alt > 0.0);
  }
  fs::remove_all(dir);
}

TEST_CASE("per-run errors are recorded and the campaign continues") {
  ExperimentConfig c;
  c.instance = "star:2,2";
  c.reward = "l1:2";
  c.oracles = {OracleKind::kFrankWolfe, OracleKind::kTmdEntropy};
  c.horizons = {50};
  c.seeds = {1};
  const auto s = run_campaign(c);
  REQUIRE(s.runs.size() == 2);
  CHECK(s.runs[0].status == "error");
  CHECK(s.runs[0].error.find("smooth") != std::string::npos);
  CHECK(s.runs[1].status == "error");
  CHECK(s.any_failed());
  CHECK(s.rows[0].failed == 1);
}

TEST_CASE("constant gradients make the threshold irrelevant") {
  ExperimentConfig c;
  c.instance = "cycle:3";
  c.reward = "linear:1";
  c.horizons = {500};
  c.seeds = {4};
  c.q = "0.1";
  const auto a = run_campaign(c);
  c.q = "inf";
  const auto b = run_campaign(c);
  CHECK(a.runs[0].reward == b.runs[0].reward);
  CHECK(a.runs[0].episodes == b.runs[0].episodes);

  const auto m = build_star(2, 2);
  const auto g = make_linear({0.6, 0.4});
  AgentConfig x;
  x.q = 0.1;
  x.seed = 2;
  AgentConfig y = x;
  y.q = kInf;
  const auto rx = run(m, g, x, 400);
  const auto ry = run(m, g, y, 400);
  for (std::size_t t = 0; t < 400; ++t) CHECK(rx.trajectory[t].action == ry.trajectory[t].action);
}

TEST_CASE("oracle comparison on the star") {
  ExperimentConfig c;
  c.instance = "star:3,4";
  c.reward = "quad:3";
  c.oracles = {OracleKind::kFrankWolfe, OracleKind::kTgd};
  c.horizons = {1000, 10000};
  c.seeds = {1, 2, 3};
  c.opt = 1.0;
  const auto s = run_campaign(c);
  CHECK_FALSE(s.any_failed());
  // rows: fw@1e3, fw@1e4, tgd@1e3, tgd@1e4. Both rates shrink with T; at
  // these horizons TGD is ahead of FW (0.019 vs 0.040).
  REQUIRE(s.rows.size() == 4);
  CHECK(s.rows[1].mean_regret < s.rows[0].mean_regret);
  CHECK(s.rows[3].mean_regret < s.rows[2].mean_regret);
  const auto table = compare_csv(s.rows);
  CHECK(table.rfind("T,regret_fw,regret_tgd\n1000,", 0) == 0);
}

TEST_CASE("quantiles and binomial bounds") {
  CHECK(quantile({3, 1, 2}, 0.5) == 2.0);
  CHECK(quantile({1, 2, 3, 4}, 0.9) == Approx(3.7));
  CHECK(clopper_pearson_lower(200, 200) == Approx(std::pow(0.05, 1.0 / 200)));
  CHECK(clopper_pearson_lower(0, 10) == 0.0);
  // beta(8, 3) 5% quantile
  CHECK(clopper_pearson_lower(8, 10) == Approx(0.4931).epsilon(1e-3));
}

TEST_CASE("runs csv round trip") {
  RunRow r;
  r.oracle = "tgd";
  r.seed = 9;
  r.horizon = 10;
  r.reward = 0.1;
  r.regret = std::nan("");
  r.error = "";
  const auto parsed = parse_runs_csv(runs_csv({r}));
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].reward == 0.1);
  CHECK(std::isnan(parsed[0].regret));
  CHECK_THROWS_AS(parse_runs_csv("header\n1,2\n"), UsageError);
}
