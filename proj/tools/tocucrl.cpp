// Command-line front end: single runs, campaigns, offline benchmarks.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "tocucrl/agent.hpp"
#include "tocucrl/benchmark.hpp"
#include "tocucrl/harness.hpp"
#include "tocucrl/instance_io.hpp"

namespace fs = std::filesystem;
using namespace tocucrl;

namespace {

std::optional<double> resolve_opt(const std::string& text, const MdpInstance& instance,
                                  const RewardSpec& spec) {
  if (text.empty()) return std::nullopt;
  if (text == "solve") return solve_offline(instance, spec).opt;
  try {
    return std::stod(text);
  } catch (const std::exception&) {
    throw UsageError("--opt must be a number or \"solve\"");
  }
}

void write_run(const RunResult& result, const std::string& out_dir) {
  if (out_dir.empty()) return;
  fs::create_directories(out_dir);
  std::ofstream steps(fs::path(out_dir) / "steps.csv");
  write_steps_csv(steps, result);
  std::ofstream episodes(fs::path(out_dir) / "episodes.csv");
  write_episodes_csv(episodes, result);
}

void print_run(const RunResult& result) {
  std::cout << "T=" << result.horizon() << " g=" << format_real(result.final_reward());
  if (result.opt) std::cout << " regret=" << format_real(result.final_regret());
  std::cout << " episodes=" << result.num_episodes()
            << " bound=" << format_real(result.episode_bound) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-threshold UCRL2 for MDPs with global concave rewards"};
  app.require_subcommand(1);

  struct {
    std::string instance;
    std::string reward;
    std::string oracle = "fw";
    std::string q = "L";
    double delta = 0.1;
    std::size_t horizon = 1000;
    std::uint64_t seed = 0;
    std::string opt;
    std::string out_dir;
    bool anytime = false;
  } run_args;
  auto* run_cmd = app.add_subcommand("run", "Run the agent once");
  run_cmd
      ->add_option("--instance", run_args.instance,
                   "star:K,D | bandit:K | cycle:D | random:S,A,K,seed | file")
      ->required();
  run_cmd
      ->add_option("--reward", run_args.reward,
                   "quad:K | l1:K | se:z | fair:K,k | ent:S,mu | knap:K,b | linear:c")
      ->required();
  run_cmd->add_option("--oracle", run_args.oracle, "fw | tgd | tmd:l2 | tmd:ent");
  run_cmd->add_option("--Q", run_args.q, "gradient threshold: number, L or inf");
  run_cmd->add_option("--delta", run_args.delta);
  run_cmd->add_option("--T", run_args.horizon)->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run_args.seed);
  run_cmd->add_option("--opt", run_args.opt, "reference optimum, or 'solve'");
  run_cmd->add_option("--out-dir", run_args.out_dir);
  run_cmd->add_flag("--anytime", run_args.anytime, "doubling wrapper for TMD");

  std::string config_path;
  auto* campaign_cmd = app.add_subcommand("campaign", "Run a seeded campaign from a JSON config");
  campaign_cmd->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  std::string compare_path;
  auto* compare_cmd = app.add_subcommand("compare", "Campaign with one regret column per oracle");
  compare_cmd->add_option("--config", compare_path)->required()->check(CLI::ExistingFile);

  auto* bench_cmd = app.add_subcommand("bench", "Offline benchmark solvers");
  bench_cmd->require_subcommand(1);
  struct {
    std::string instance;
    std::string reward;
    double tol = 1e-6;
    std::size_t max_iters = 100000;
    double b = 0.5;
  } bench_args;
  auto* solve_cmd = bench_cmd->add_subcommand("solve", "opt(P_M) by Frank-Wolfe");
  solve_cmd->add_option("--instance", bench_args.instance)->required();
  solve_cmd->add_option("--reward", bench_args.reward)->required();
  solve_cmd->add_option("--tol", bench_args.tol);
  solve_cmd->add_option("--max-iters", bench_args.max_iters);
  auto* knap_cmd = bench_cmd->add_subcommand("knapsack", "opt(P_C(b)) by Lagrangian duality");
  knap_cmd->add_option("--instance", bench_args.instance)->required();
  knap_cmd->add_option("--b", bench_args.b)->required();

  struct {
    std::string instance;
    double b = 0.5;
    std::size_t horizon = 1000;
    double delta = 0.1;
    std::uint64_t seed = 0;
    bool anytime = false;
    std::string out_dir;
  } wk_args;
  auto* wk_cmd = app.add_subcommand("mdpwk", "Knapsack-constrained run with null actions");
  wk_cmd->add_option("--instance", wk_args.instance)->required();
  wk_cmd->add_option("--b", wk_args.b)->required();
  wk_cmd->add_option("--T", wk_args.horizon)->check(CLI::PositiveNumber);
  wk_cmd->add_option("--delta", wk_args.delta);
  wk_cmd->add_option("--seed", wk_args.seed);
  wk_cmd->add_flag("--anytime", wk_args.anytime);
  wk_cmd->add_option("--out-dir", wk_args.out_dir);

  std::string show_keyword;
  auto* show_cmd = app.add_subcommand("instance", "Print an instance as JSON with its diameter");
  show_cmd->add_option("keyword", show_keyword)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const MdpInstance instance = instance_from_keyword(run_args.instance);
      const RewardSpec spec = reward_from_keyword(run_args.reward);
      AgentConfig config;
      config.oracle = oracle_from_keyword(run_args.oracle);
      config.q = resolve_q(run_args.q, spec);
      config.delta = run_args.delta;
      config.seed = run_args.seed;
      config.opt = resolve_opt(run_args.opt, instance, spec);
      const bool tmd = config.oracle == OracleKind::kTmdL2 ||
                       config.oracle == OracleKind::kTmdEntropy;
      const RunResult result =
          run_args.anytime && tmd
              ? run_anytime_tmd(instance, spec, config, mirror_map_for(config.oracle, spec),
                                run_args.horizon)
              : run(instance, spec, config, run_args.horizon);
      write_run(result, run_args.out_dir);
      print_run(result);
      return 0;
    }
    if (*campaign_cmd || *compare_cmd) {
      const ExperimentConfig config =
          load_experiment_config(*campaign_cmd ? config_path : compare_path);
      const CampaignSummary summary =
          *campaign_cmd ? run_campaign(config) : compare_oracles(config);
      std::cout << (*campaign_cmd ? summary_csv(summary.rows) : compare_csv(summary.rows));
      for (const RunRow& r : summary.runs) {
        if (r.status != "ok") {
          std::cerr << r.oracle << " seed " << r.seed << " T " << r.horizon << ": " << r.status
                    << ' ' << r.error << '\n';
        }
      }
      return summary.any_failed() ? 1 : 0;
    }
    if (*solve_cmd) {
      const MdpInstance instance = instance_from_keyword(bench_args.instance);
      const RewardSpec spec = reward_from_keyword(bench_args.reward);
      const OfflineSolution sol =
          solve_offline(instance, spec, bench_args.tol, bench_args.max_iters);
      std::cout << "opt,gap,iterations,converged\n"
                << format_real(sol.opt) << ',' << format_real(sol.best_gap) << ','
                << sol.iterations << ',' << (sol.converged ? 1 : 0) << "\n\nstate,action,x\n";
      for (std::size_t pair = 0; pair < instance.num_pairs(); ++pair) {
        const std::size_t s = instance.pair_state(pair);
        const std::size_t a = instance.pair_action(pair);
        std::cout << instance.state_name(s) << ',' << instance.action(s, a).name << ','
                  << format_real(sol.x[pair]) << '\n';
      }
      return 0;
    }
    if (*knap_cmd) {
      const MdpInstance instance = instance_from_keyword(bench_args.instance);
      const KnapsackBenchmark bench = solve_knapsack(instance, bench_args.b);
      std::cout << "opt,iterations\n" << format_real(bench.opt) << ',' << bench.iterations << '\n';
      return 0;
    }
    if (*wk_cmd) {
      const MdpInstance instance = instance_from_keyword(wk_args.instance);
      MdpwkOptions options;
      options.delta = wk_args.delta;
      options.seed = wk_args.seed;
      options.anytime = wk_args.anytime;
      const MdpwkResult result = run_mdpwk(instance, wk_args.b, wk_args.horizon, options);
      write_run(result.run, wk_args.out_dir);
      std::cout << "stop_time=" << result.stop_time
                << " reward=" << format_real(result.collected_reward);
      for (std::size_t j = 0; j < result.consumption.size(); ++j) {
        std::cout << " used" << j + 1 << '=' << format_real(result.consumption[j]);
      }
      std::cout << '\n';
      return 0;
    }
    if (*show_cmd) {
      const MdpInstance instance = instance_from_keyword(show_keyword);
      std::cout << to_instance_json(instance) << '\n';
      std::cerr << "diameter " << format_real(diameter(instance)) << '\n';
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
