#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tocucrl/agent.hpp"

namespace tocucrl {

struct ExperimentConfig {
  /// Builder keyword or instance file.
  std::string instance;
  /// Reward keyword.
  std::string reward;
  std::vector<OracleKind> oracles{OracleKind::kFrankWolfe};
  /// A number, "L" (the reward's Lipschitz constant) or "inf".
  std::string q = "L";
  double delta = 0.1;
  std::vector<std::size_t> horizons;
  std::vector<std::uint64_t> seeds;
  /// Reference optimum; `solve_opt` computes it with solve_offline.
  std::optional<double> opt;
  bool solve_opt = false;
  /// Empty: nothing is written.
  std::string out_dir;
  /// Per-run step and episode CSVs under out_dir/runs.
  bool write_traces = true;
  /// TMD runs use the doubling wrapper instead of a known horizon.
  bool anytime = false;
  double aperiodicity = 0.5;
};

/// JSON keys: instance, reward, oracle (string or list), Q, delta, T (number
/// or list), seeds (list, or {"start": s, "count": n}), opt (number or
/// "solve"), out_dir, traces, anytime, aperiodicity.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Resolves the Q setting against the reward.
double resolve_q(const std::string& text, const RewardSpec& spec);

struct RunRow {
  std::string oracle;
  std::uint64_t seed = 0;
  std::size_t horizon = 0;
  /// "ok", "error" or "bound" (episode cap exceeded).
  std::string status = "ok";
  double reward = 0.0;
  double regret = 0.0;
  std::size_t episodes = 0;
  double bound = 0.0;
  /// True (v, p) inside the regions at every episode start.
  bool covered = false;
  /// Number of "exit" actions taken.
  std::size_t n_alt = 0;
  std::string error;
};

struct SummaryRow {
  std::string oracle;
  std::size_t horizon = 0;
  std::size_t runs = 0;
  std::size_t failed = 0;
  double mean_regret = 0.0;
  double median_regret = 0.0;
  double p90_regret = 0.0;
  double mean_reward = 0.0;
  double mean_episodes = 0.0;
  std::size_t max_episodes = 0;
  double max_bound = 0.0;
  std::size_t bound_violations = 0;
  double coverage = 0.0;
  double mean_n_alt = 0.0;
};

struct CampaignSummary {
  std::optional<double> opt;
  std::vector<RunRow> runs;
  std::vector<SummaryRow> rows;
  bool any_failed() const;
};

/// Executes every (oracle, seed, T) run, in parallel. Per-run failures are
/// recorded in the rows. With an output directory, writes runs.csv,
/// summary.csv, and (with traces) runs/<oracle>_s<seed>_T<T>_{steps,episodes}.csv.
CampaignSummary run_campaign(const ExperimentConfig& config);

/// Same instance and seeds for every oracle in the config; also writes
/// compare.csv with one mean-regret column per oracle.
CampaignSummary compare_oracles(const ExperimentConfig& config);

std::vector<SummaryRow> aggregate(const std::vector<RunRow>& runs);
std::string runs_csv(const std::vector<RunRow>& runs);
std::vector<RunRow> parse_runs_csv(const std::string& text);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string compare_csv(const std::vector<SummaryRow>& rows);
/// summary_csv(aggregate(parse_runs_csv(text))).
std::string reaggregate(const std::string& runs_csv_text);

/// Linear-interpolated quantile of a sample (q in [0,1]).
double quantile(std::vector<double> values, double q);

/// One-sided Clopper-Pearson lower confidence bound on a binomial rate.
double clopper_pearson_lower(std::size_t successes, std::size_t trials, double alpha = 0.05);

}  // namespace tocucrl
