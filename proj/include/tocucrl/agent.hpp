#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "tocucrl/mdp.hpp"
#include "tocucrl/oco.hpp"
#include "tocucrl/rewards.hpp"
#include "tocucrl/ucrl.hpp"

namespace tocucrl {

/// A recorded episode count exceeded its theoretical cap.
class BoundViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct AgentConfig {
  double delta = 0.1;
  /// Gradient threshold; kInf disables the drift trigger.
  double q = kInf;
  OracleKind oracle = OracleKind::kFrankWolfe;
  /// TMD horizon; run() falls back to its T.
  std::optional<std::size_t> horizon;
  std::uint64_t seed = 0;
  /// Honored by TGD only; FW and TMD prescribe their own start.
  std::optional<Vec> theta1;
  /// Reference opt(P_M) for the regret curve.
  std::optional<double> opt;
  double aperiodicity = 0.5;
  bool check_bounds = true;
};

enum class EpisodeTrigger {
  kPsiOverflow,
  kCountDoubling,
  /// Closed by a mega-episode boundary of the anytime wrapper.
  kRestart,
  /// Still running when the run stopped.
  kOpen,
};

const char* to_string(EpisodeTrigger trigger);

struct EpisodeRecord {
  std::size_t m = 0;
  std::size_t tau = 0;
  std::size_t length = 0;
  EpisodeTrigger trigger = EpisodeTrigger::kOpen;
  double gain = 0.0;
  std::size_t evi_iters = 0;
  std::vector<std::size_t> policy;
  Vec theta_ref;
  /// Psi when the episode closed.
  double psi = 0.0;
  /// For count-doubling: the pair whose guard failed, with nu and N+ then.
  std::size_t trigger_pair = 0;
  std::size_t trigger_nu = 0;
  std::size_t trigger_n_plus = 0;
};

/// Per-episode hook for diagnostics that need ground truth. The agent
/// itself never reads it.
using EpisodeObserver =
    std::function<void(const EpisodeRecord& episode, const ConfidenceRegions& regions)>;

/// Step-wise learner: recommend(s_t) then observe(V_t, s_{t+1}).
class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::size_t recommend(std::size_t state) = 0;
  virtual void observe(ConstVecView outcome, std::size_t next_state) = 0;
  /// theta_t used for the last recommendation.
  virtual const Vec& theta() const = 0;
  virtual double psi() const = 0;
  /// Global 1-based index of the current episode (0 before the first).
  virtual std::size_t episode() const = 0;
  /// Closed episodes plus the open one.
  virtual std::vector<EpisodeRecord> episodes() const = 0;
  /// Throws BoundViolation if a recorded episode count exceeds its cap.
  virtual void check_bounds() const = 0;
  virtual double episode_bound() const = 0;
};

/// Algorithm state of the gradient-threshold UCRL2 agent.
class TocUcrl2 final : public Learner {
 public:
  /// Only the structure of `instance` (states, actions, outcomes declared
  /// known) is read. `horizon` is used for the episode cap.
  TocUcrl2(const MdpInstance& instance, RewardSpec spec, std::unique_ptr<OcoOracle> oracle,
           double delta, double q, std::size_t horizon, double aperiodicity = 0.5,
           std::optional<double> l_prime = std::nullopt);

  std::size_t recommend(std::size_t state) override;
  void observe(ConstVecView outcome, std::size_t next_state) override;
  const Vec& theta() const override { return theta_used_; }
  double psi() const override { return psi_; }
  std::size_t episode() const override { return current_.m; }
  std::vector<EpisodeRecord> episodes() const override;
  void check_bounds() const override;
  double episode_bound() const override { return bound_; }

  void set_observer(EpisodeObserver observer) { observer_ = std::move(observer); }
  /// 1-based time of the next step.
  std::size_t time() const { return t_; }
  const CountsTable& counts() const { return counts_; }

 private:
  void start_episode();
  void close_episode(EpisodeTrigger trigger);

  std::size_t states_;
  std::vector<std::size_t> pair_offset_;
  RewardSpec spec_;
  std::unique_ptr<OcoOracle> oracle_;
  double delta_;
  double q_;
  double aperiodicity_;
  double bound_;
  CountsTable counts_;
  EpisodeObserver observer_;

  std::size_t t_ = 1;
  bool active_ = false;
  EpisodeRecord current_;
  std::vector<EpisodeRecord> closed_;
  double psi_ = 0.0;
  Vec average_;
  Vec theta_used_;
  std::size_t last_pair_ = 0;
  bool awaiting_observe_ = false;
};

/// Mega-episodes of length 2^h, h = 1, 2, ..., each a fresh TocUcrl2 with
/// TMD(F, 2^h) started from the current state at argmin F. Confidence
/// parameter delta for h = 1 and delta / 2^h afterwards.
class AnytimeTmd final : public Learner {
 public:
  AnytimeTmd(const MdpInstance& instance, RewardSpec spec, std::shared_ptr<const MirrorMap> map,
             double delta, double q, double aperiodicity = 0.5);

  std::size_t recommend(std::size_t state) override;
  void observe(ConstVecView outcome, std::size_t next_state) override;
  const Vec& theta() const override { return agent_->theta(); }
  double psi() const override { return agent_ ? agent_->psi() : 0.0; }
  std::size_t episode() const override;
  std::vector<EpisodeRecord> episodes() const override;
  void check_bounds() const override;
  double episode_bound() const override;

  void set_observer(EpisodeObserver observer) { observer_ = std::move(observer); }
  std::size_t mega_episode() const { return h_; }
  double mega_delta() const { return current_delta_; }
  static double delta_for(double delta, std::size_t h);

 private:
  void start_mega_episode();

  const MdpInstance* instance_;
  RewardSpec spec_;
  std::shared_ptr<const MirrorMap> map_;
  double delta_;
  double q_;
  double aperiodicity_;
  EpisodeObserver observer_;

  std::size_t h_ = 0;
  double current_delta_ = 0.0;
  std::size_t steps_in_mega_ = 0;
  std::size_t offset_t_ = 0;
  std::size_t offset_m_ = 0;
  std::unique_ptr<TocUcrl2> agent_;
  std::vector<EpisodeRecord> finished_;
  std::vector<std::string> bound_failures_;
  double bound_sum_ = 0.0;
};

/// Episode cap for the oracle: M_Psi(T) + SA(1 + log2 T). kInf when the
/// drift part is unbounded (Q = 0 with a moving gradient).
double episode_bound(OracleKind kind, const RewardSpec& spec, double q, std::size_t horizon,
                     std::size_t pairs, double l_prime = 0.0);

struct StepRecord {
  std::size_t episode = 0;
  double psi = 0.0;
  Vec theta;
  double reward = 0.0;
  double regret = 0.0;
};

struct RunResult {
  std::string reward_label;
  std::string oracle_label;
  Trajectory trajectory{1};
  /// Parallel to trajectory.
  std::vector<StepRecord> steps;
  std::vector<EpisodeRecord> episodes;
  std::optional<double> opt;
  double episode_bound = kInf;

  std::size_t horizon() const { return trajectory.size(); }
  std::size_t num_episodes() const { return episodes.size(); }
  double final_reward() const { return steps.empty() ? 0.0 : steps.back().reward; }
  /// NaN without a reference optimum.
  double final_regret() const { return steps.empty() ? 0.0 : steps.back().regret; }
};

/// Drives a learner for T steps on the instance, recording the trace.
RunResult drive(const MdpInstance& instance, const RewardSpec& spec, Learner& learner,
                std::size_t horizon, Rng& rng, std::optional<double> opt);

/// Gradient-threshold agent for T steps.
RunResult run(const MdpInstance& instance, const RewardSpec& spec, const AgentConfig& config,
              std::size_t horizon, EpisodeObserver observer = {});

/// Doubling-horizon TMD agent for T steps, truncating the last mega-episode.
RunResult run_anytime_tmd(const MdpInstance& instance, const RewardSpec& spec,
                          const AgentConfig& config, std::shared_ptr<const MirrorMap> map,
                          std::size_t horizon, EpisodeObserver observer = {});

struct MdpwkOptions {
  double delta = 0.1;
  std::uint64_t seed = 0;
  /// Use the doubling wrapper instead of one TMD(F_inf, T) agent.
  bool anytime = false;
  double aperiodicity = 0.5;
  std::optional<double> opt;
};

struct MdpwkResult {
  RunResult run;
  /// Number of steps played by the learner.
  std::size_t stop_time = 0;
  double collected_reward = 0.0;
  /// Sum of C_k over the learner's steps, per resource.
  Vec consumption;
  /// bT minus consumption.
  Vec inventory;
};

/// Knapsack-constrained run: outcomes are (R, C_1..C_{K-1}); inventories start at bT,
/// the learner plays while all are >= 0 and null actions afterwards.
MdpwkResult run_mdpwk(const MdpInstance& instance, double b, std::size_t horizon,
                      const MdpwkOptions& options);

/// %.17g, so CSVs round-trip exactly.
std::string format_real(double x);

/// t, s_t, a_t, V_t (K columns), g(V-bar_{1:t}), Reg(t), m(t), Psi.
void write_steps_csv(std::ostream& out, const RunResult& result);
/// m, tau(m), trigger, phi, evi_iters.
void write_episodes_csv(std::ostream& out, const RunResult& result);

}  // namespace tocucrl
