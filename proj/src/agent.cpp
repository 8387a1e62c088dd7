#include "tocucrl/agent.hpp"

#include <cstdio>

namespace tocucrl {

const char* to_string(EpisodeTrigger trigger) {
  switch (trigger) {
    case EpisodeTrigger::kPsiOverflow: return "psi";
    case EpisodeTrigger::kCountDoubling: return "count";
    case EpisodeTrigger::kRestart: return "restart";
    case EpisodeTrigger::kOpen: return "open";
  }
  return "?";
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double episode_bound(OracleKind kind, const RewardSpec& spec, double q, std::size_t horizon,
                     std::size_t pairs, double l_prime) {
  if (horizon == 0) return 1.0;
  const double t = static_cast<double>(horizon);
  const double ones = spec.ones();
  const double count_part = static_cast<double>(pairs) * (1.0 + std::log2(t));
  double drift_part = 1.0;
  if (q != kInf) {
    switch (kind) {
      case OracleKind::kFrankWolfe: {
        const double beta = spec.beta().value_or(kInf);
        if (beta == 0.0) break;
        if (q == 0.0) return kInf;
        drift_part = 1.0 + q / (2.0 * beta * ones) + std::sqrt(32.0 * beta * ones * t / q);
        break;
      }
      case OracleKind::kTgd: {
        if (q == 0.0) return kInf;
        const double l = spec.lipschitz();
        drift_part = 1.0 + std::pow(q / (2.0 * l), 0.75) +
                     std::sqrt(9.0 * l / q) * std::pow(t, 2.0 / 3.0);
        break;
      }
      case OracleKind::kTmdL2:
      case OracleKind::kTmdEntropy:
        if (q == 0.0) return kInf;
        drift_part = 1.0 + std::sqrt(l_prime / q) * std::pow(t, 2.0 / 3.0);
        break;
    }
  }
  return drift_part + count_part;
}

TocUcrl2::TocUcrl2(const MdpInstance& instance, RewardSpec spec,
                   std::unique_ptr<OcoOracle> oracle, double delta, double q,
                   std::size_t horizon, double aperiodicity, std::optional<double> l_prime)
    : states_(instance.num_states()),
      spec_(std::move(spec)),
      oracle_(std::move(oracle)),
      delta_(delta),
      q_(q),
      aperiodicity_(aperiodicity),
      counts_(instance) {
  if (!oracle_) throw UsageError("TocUcrl2: null oracle");
  if (!(delta_ > 0.0 && delta_ < 1.0)) throw UsageError("delta must lie in (0,1)");
  if (!(q_ >= 0.0)) throw UsageError("Q must be >= 0");
  if (spec_.dim() != instance.outcome_dim()) {
    throw UsageError("reward dimension " + std::to_string(spec_.dim()) +
                     " does not match the instance's K = " +
                     std::to_string(instance.outcome_dim()));
  }
  pair_offset_ = counts_.pair_offset();
  if (!l_prime) {
    if (const auto* tmd = dynamic_cast<const TmdOracle*>(oracle_.get())) {
      l_prime = tmd->map().l_prime();
    }
  }
  bound_ = tocucrl::episode_bound(oracle_->kind(), spec_, q_, horizon, instance.num_pairs(),
                                  l_prime.value_or(0.0));
  average_.assign(spec_.dim(), 0.0);
  theta_used_ = oracle_->theta();
}

void TocUcrl2::start_episode() {
  counts_.close_episode();
  EpisodeRecord next;
  next.m = current_.m + 1;
  next.tau = t_;
  const ConfidenceRegions regions = compute_regions(counts_, t_, delta_);
  next.theta_ref = oracle_->theta();
  Vec rewards(counts_.num_pairs());
  for (std::size_t pair = 0; pair < rewards.size(); ++pair) {
    rewards[pair] = optimistic_reward(regions, next.theta_ref, pair);
  }
  EviOptions options;
  options.epsilon = 1.0 / std::sqrt(static_cast<double>(t_));
  options.aperiodicity = aperiodicity_;
  EviResult solved = evi(regions.p, rewards, options);
  next.gain = solved.gain;
  next.evi_iters = solved.iterations;
  next.policy = std::move(solved.policy);
  current_ = std::move(next);
  psi_ = 0.0;
  active_ = true;
  if (observer_) observer_(current_, regions);
}

void TocUcrl2::close_episode(EpisodeTrigger trigger) {
  current_.trigger = trigger;
  current_.psi = psi_;
  closed_.push_back(current_);
  active_ = false;
}

std::size_t TocUcrl2::recommend(std::size_t state) {
  if (awaiting_observe_) throw UsageError("TocUcrl2: recommend called twice without observe");
  if (state >= states_) throw UsageError("TocUcrl2: state index out of range");
  if (!active_) {
    start_episode();
  } else {
    const std::size_t pair = pair_offset_[state] + current_.policy[state];
    if (!(psi_ <= q_)) {
      close_episode(EpisodeTrigger::kPsiOverflow);
      start_episode();
    } else if (counts_.nu(pair) >= counts_.n_plus(pair)) {
      current_.trigger_pair = pair;
      current_.trigger_nu = counts_.nu(pair);
      current_.trigger_n_plus = counts_.n_plus(pair);
      close_episode(EpisodeTrigger::kCountDoubling);
      start_episode();
    }
  }
  const std::size_t action = current_.policy[state];
  last_pair_ = pair_offset_[state] + action;
  theta_used_ = oracle_->theta();
  awaiting_observe_ = true;
  return action;
}

void TocUcrl2::observe(ConstVecView outcome, std::size_t next_state) {
  if (!awaiting_observe_) throw UsageError("TocUcrl2: observe without a recommendation");
  awaiting_observe_ = false;
  counts_.record(last_pair_, outcome, next_state);
  const double inv_t = 1.0 / static_cast<double>(t_);
  for (std::size_t k = 0; k < average_.size(); ++k) {
    average_[k] += (outcome[k] - average_[k]) * inv_t;
  }
  oracle_->observe(t_, outcome, average_);
  psi_ += distance(oracle_->theta(), current_.theta_ref, spec_.dual_norm());
  ++current_.length;
  ++t_;
}

std::vector<EpisodeRecord> TocUcrl2::episodes() const {
  std::vector<EpisodeRecord> out = closed_;
  if (active_) {
    EpisodeRecord open = current_;
    open.trigger = EpisodeTrigger::kOpen;
    open.psi = psi_;
    out.push_back(std::move(open));
  }
  return out;
}

void TocUcrl2::check_bounds() const {
  const auto m = static_cast<double>(current_.m);
  if (m > bound_ + 1e-9) {
    throw BoundViolation("episode count " + std::to_string(current_.m) + " exceeds the cap " +
                         format_real(bound_) + " for " + to_string(oracle_->kind()));
  }
}

AnytimeTmd::AnytimeTmd(const MdpInstance& instance, RewardSpec spec,
                       std::shared_ptr<const MirrorMap> map, double delta, double q,
                       double aperiodicity)
    : instance_(&instance),
      spec_(std::move(spec)),
      map_(std::move(map)),
      delta_(delta),
      q_(q),
      aperiodicity_(aperiodicity) {
  if (!map_) throw UsageError("AnytimeTmd: null mirror map");
  if (!(delta_ > 0.0 && delta_ < 1.0)) throw UsageError("delta must lie in (0,1)");
}

double AnytimeTmd::delta_for(double delta, std::size_t h) {
  return h <= 1 ? delta : delta / std::ldexp(1.0, static_cast<int>(h));
}

void AnytimeTmd::start_mega_episode() {
  if (agent_) {
    try {
      agent_->check_bounds();
    } catch (const BoundViolation& e) {
      bound_failures_.push_back("mega-episode " + std::to_string(h_) + ": " + e.what());
    }
    bound_sum_ += agent_->episode_bound();
    for (EpisodeRecord e : agent_->episodes()) {
      if (e.trigger == EpisodeTrigger::kOpen) e.trigger = EpisodeTrigger::kRestart;
      e.m += offset_m_;
      e.tau += offset_t_;
      finished_.push_back(std::move(e));
    }
    offset_m_ += agent_->episode();
    offset_t_ += steps_in_mega_;
  }
  ++h_;
  current_delta_ = delta_for(delta_, h_);
  const std::size_t length = std::size_t{1} << h_;
  auto oracle = std::make_unique<TmdOracle>(spec_, map_, length);
  agent_ = std::make_unique<TocUcrl2>(*instance_, spec_, std::move(oracle), current_delta_, q_,
                                      length, aperiodicity_);
  if (observer_) {
    agent_->set_observer([this, m0 = offset_m_, t0 = offset_t_](const EpisodeRecord& e,
                                                                const ConfidenceRegions& r) {
      EpisodeRecord shifted = e;
      shifted.m += m0;
      shifted.tau += t0;
      observer_(shifted, r);
    });
  }
  steps_in_mega_ = 0;
}

std::size_t AnytimeTmd::recommend(std::size_t state) {
  if (!agent_ || steps_in_mega_ == (std::size_t{1} << h_)) start_mega_episode();
  return agent_->recommend(state);
}

void AnytimeTmd::observe(ConstVecView outcome, std::size_t next_state) {
  if (!agent_) throw UsageError("AnytimeTmd: observe without a recommendation");
  agent_->observe(outcome, next_state);
  ++steps_in_mega_;
}

std::size_t AnytimeTmd::episode() const { return offset_m_ + (agent_ ? agent_->episode() : 0); }

std::vector<EpisodeRecord> AnytimeTmd::episodes() const {
  std::vector<EpisodeRecord> out = finished_;
  if (agent_) {
    for (EpisodeRecord e : agent_->episodes()) {
      e.m += offset_m_;
      e.tau += offset_t_;
      out.push_back(std::move(e));
    }
  }
  return out;
}

void AnytimeTmd::check_bounds() const {
  if (!bound_failures_.empty()) throw BoundViolation(bound_failures_.front());
  if (agent_) agent_->check_bounds();
}

double AnytimeTmd::episode_bound() const {
  return bound_sum_ + (agent_ ? agent_->episode_bound() : 0.0);
}

namespace {

void validate_run(const MdpInstance& instance, const RewardSpec& spec, std::size_t horizon) {
  if (horizon == 0) throw UsageError("T must be positive");
  if (spec.dim() != instance.outcome_dim()) {
    throw UsageError("reward dimension " + std::to_string(spec.dim()) +
                     " does not match the instance's K = " +
                     std::to_string(instance.outcome_dim()));
  }
}

StepRecord make_step(const Learner& learner, const RewardSpec& spec, const Trajectory& path,
                     std::optional<double> opt) {
  StepRecord rec;
  rec.episode = learner.episode();
  rec.psi = learner.psi();
  rec.theta = learner.theta();
  rec.reward = spec.evaluate(path.average());
  rec.regret = opt ? *opt - rec.reward : std::nan("");
  return rec;
}

}  // namespace

RunResult drive(const MdpInstance& instance, const RewardSpec& spec, Learner& learner,
                std::size_t horizon, Rng& rng, std::optional<double> opt) {
  validate_run(instance, spec, horizon);
  RunResult result;
  result.reward_label = spec.label();
  result.trajectory = Trajectory(instance.outcome_dim());
  result.opt = opt;
  result.steps.reserve(horizon);
  std::size_t s = instance.start();
  for (std::size_t t = 1; t <= horizon; ++t) {
    const std::size_t a = learner.recommend(s);
    Transition tr = step(instance, s, a, rng);
    learner.observe(tr.outcome, tr.next_state);
    result.trajectory.push({t, s, a, std::move(tr.outcome), tr.next_state});
    result.steps.push_back(make_step(learner, spec, result.trajectory, opt));
    s = tr.next_state;
  }
  result.episodes = learner.episodes();
  result.episode_bound = learner.episode_bound();
  return result;
}

RunResult run(const MdpInstance& instance, const RewardSpec& spec, const AgentConfig& config,
              std::size_t horizon, EpisodeObserver observer) {
  validate_run(instance, spec, horizon);
  auto oracle = make_oracle(config.oracle, spec, config.horizon.value_or(horizon), config.theta1);
  TocUcrl2 agent(instance, spec, std::move(oracle), config.delta, config.q,
                 config.horizon.value_or(horizon), config.aperiodicity);
  if (observer) agent.set_observer(std::move(observer));
  Rng rng(config.seed);
  RunResult result = drive(instance, spec, agent, horizon, rng, config.opt);
  result.oracle_label = to_string(config.oracle);
  if (config.check_bounds) agent.check_bounds();
  return result;
}

RunResult run_anytime_tmd(const MdpInstance& instance, const RewardSpec& spec,
                          const AgentConfig& config, std::shared_ptr<const MirrorMap> map,
                          std::size_t horizon, EpisodeObserver observer) {
  validate_run(instance, spec, horizon);
  if (!map) throw UsageError("run_anytime_tmd: null mirror map");
  const std::string map_name = map->name();
  AnytimeTmd agent(instance, spec, std::move(map), config.delta, config.q, config.aperiodicity);
  if (observer) agent.set_observer(std::move(observer));
  Rng rng(config.seed);
  RunResult result = drive(instance, spec, agent, horizon, rng, config.opt);
  result.oracle_label = "anytime-tmd:" + map_name;
  if (config.check_bounds) agent.check_bounds();
  return result;
}

MdpwkResult run_mdpwk(const MdpInstance& instance, double b, std::size_t horizon,
                      const MdpwkOptions& options) {
  const std::size_t k = instance.outcome_dim();
  const RewardSpec spec = make_knapsack_surrogate(k, b);
  validate_run(instance, spec, horizon);
  std::vector<std::size_t> null_actions(instance.num_states());
  for (std::size_t s = 0; s < instance.num_states(); ++s) {
    const auto a0 = instance.null_action(s);
    if (!a0) throw ConfigError("MDPwK: state " + instance.state_name(s) + " has no null action");
    null_actions[s] = *a0;
  }
  const double q = 1.0 + 2.0 / b;
  std::shared_ptr<const MirrorMap> map = entropy_map_for(spec);
  std::unique_ptr<Learner> learner;
  if (options.anytime) {
    learner = std::make_unique<AnytimeTmd>(instance, spec, map, options.delta, q,
                                           options.aperiodicity);
  } else {
    learner = std::make_unique<TocUcrl2>(instance, spec,
                                         std::make_unique<TmdOracle>(spec, map, horizon),
                                         options.delta, q, horizon, options.aperiodicity);
  }

  MdpwkResult out;
  RunResult& result = out.run;
  result.reward_label = spec.label();
  result.oracle_label = options.anytime ? "anytime-tmd:ent" : "tmd:ent";
  result.trajectory = Trajectory(k);
  result.opt = options.opt;
  out.consumption.assign(k - 1, 0.0);
  out.inventory.assign(k - 1, b * static_cast<double>(horizon));
  Rng rng(options.seed);
  bool stopped = false;
  std::size_t s = instance.start();
  for (std::size_t t = 1; t <= horizon; ++t) {
    if (!stopped) {
      for (double level : out.inventory) stopped = stopped || level < 0.0;
    }
    std::size_t a = 0;
    Transition tr;
    if (!stopped) {
      a = learner->recommend(s);
      tr = step(instance, s, a, rng);
      learner->observe(tr.outcome, tr.next_state);
      ++out.stop_time;
      out.collected_reward += tr.outcome[0];
      for (std::size_t j = 0; j + 1 < k; ++j) {
        out.consumption[j] += tr.outcome[j + 1];
        out.inventory[j] -= tr.outcome[j + 1];
      }
    } else {
      a = null_actions[s];
      tr = step(instance, s, a, rng);
    }
    result.trajectory.push({t, s, a, std::move(tr.outcome), tr.next_state});
    result.steps.push_back(make_step(*learner, spec, result.trajectory, options.opt));
    s = tr.next_state;
  }
  result.episodes = learner->episodes();
  result.episode_bound = learner->episode_bound();
  learner->check_bounds();
  return out;
}

void write_steps_csv(std::ostream& out, const RunResult& result) {
  const std::size_t k = result.trajectory.steps().empty()
                            ? 0
                            : result.trajectory.steps().front().outcome.size();
  out << "t,s,a";
  for (std::size_t j = 1; j <= k; ++j) out << ",v" << j;
  out << ",g,regret,m,psi\n";
  for (std::size_t i = 0; i < result.trajectory.size(); ++i) {
    const TrajectoryStep& st = result.trajectory[i];
    const StepRecord& rec = result.steps[i];
    out << st.t << ',' << st.state << ',' << st.action;
    for (double v : st.outcome) out << ',' << format_real(v);
    out << ',' << format_real(rec.reward) << ',';
    if (result.opt) out << format_real(rec.regret);
    out << ',' << rec.episode << ',' << format_real(rec.psi) << '\n';
  }
}

void write_episodes_csv(std::ostream& out, const RunResult& result) {
  out << "m,tau,trigger,phi,evi_iters\n";
  for (const EpisodeRecord& e : result.episodes) {
    out << e.m << ',' << e.tau << ',' << to_string(e.trigger) << ',' << format_real(e.gain)
        << ',' << e.evi_iters << '\n';
  }
}

}  // namespace tocucrl
