#pragma once

#include <optional>
#include <vector>

#include "tocucrl/mdp.hpp"

namespace tocucrl {

/// Visit counts and sufficient statistics per state-action pair.
///
/// Statistics gathered during the current episode stay pending until
/// close_episode(), so N, the means and the transition counts always
/// describe the data before tau(m).
class CountsTable {
 public:
  /// Pairs whose outcome the instance marks as known keep that mean as a
  /// singleton outcome region.
  explicit CountsTable(const MdpInstance& instance);

  void record(std::size_t pair, ConstVecView outcome, std::size_t next_state);
  /// N_{m+1} = N_m + nu_m; nu reset to 0.
  void close_episode();

  std::size_t num_states() const { return states_; }
  std::size_t num_pairs() const { return n_.size(); }
  std::size_t outcome_dim() const { return k_; }
  const std::vector<std::size_t>& pair_offset() const { return pair_offset_; }

  std::size_t n(std::size_t pair) const { return n_[pair]; }
  std::size_t n_plus(std::size_t pair) const { return std::max<std::size_t>(1, n_[pair]); }
  std::size_t nu(std::size_t pair) const { return nu_[pair]; }
  /// Sum of N over all pairs.
  std::size_t total() const { return total_; }

  ConstVecView outcome_sum(std::size_t pair) const;
  ConstVecView next_counts(std::size_t pair) const;
  const std::optional<Vec>& known_outcome(std::size_t pair) const { return known_[pair]; }

 private:
  std::size_t states_;
  std::size_t k_;
  std::vector<std::size_t> pair_offset_;
  std::vector<std::size_t> n_;
  std::vector<std::size_t> nu_;
  std::size_t total_ = 0;
  Vec outcome_sum_;
  Vec next_counts_;
  Vec pending_outcome_;
  Vec pending_next_;
  std::vector<std::optional<Vec>> known_;
};

/// Per-pair box [max(0, p_hat - rad), min(1, p_hat + rad)] on next states.
struct TransitionRegions {
  std::size_t states = 0;
  /// Pairs of state s are pair_offset[s] .. pair_offset[s+1]-1.
  std::vector<std::size_t> pair_offset;
  std::vector<Vec> p_hat;
  std::vector<Vec> rad;

  std::size_t num_pairs() const { return p_hat.size(); }
};

/// Singleton regions at the true kernel.
TransitionRegions singleton_regions(const MdpInstance& instance);

struct ConfidenceRegions {
  std::size_t tau = 1;
  double delta = 0.0;
  double log_v = 0.0;
  double log_p = 0.0;
  std::vector<Vec> v_hat;
  std::vector<Vec> rad_v;
  TransitionRegions p;
};

/// rad = sqrt(2 mean log / N+) + 3 log / N+, with
/// log_v = log(12 K SA tau^2 / delta) and log_p = log(12 S SA tau^2 / delta),
/// SA being the number of pairs.
ConfidenceRegions compute_regions(const CountsTable& counts, std::size_t tau, double delta);

double confidence_radius(double mean, double log_term, std::size_t n_plus);

/// max over the outcome box of (-theta)^T v, coordinate-wise.
double optimistic_reward(const ConfidenceRegions& regions, ConstVecView theta, std::size_t pair);

/// Exact maximizer of u^T p over box intersected with the simplex: lower
/// bounds first, then the remaining mass in decreasing u (ties to the lower
/// index).
Vec inner_max_transition(ConstVecView u, ConstVecView p_hat, ConstVecView rad);

/// True (v, p) inside the regions for every pair.
bool regions_contain(const ConfidenceRegions& regions, const MdpInstance& instance,
                     double slack = 1e-12);

struct EviOptions {
  double epsilon = 1e-6;
  std::size_t max_iters = 1000000;
  /// Weight w of the aperiodicity transform
  /// u'(s) = max_a [r + (1 - w) sum p u] + w u(s).
  double aperiodicity = 0.5;
};

struct EviResult {
  std::vector<std::size_t> policy;
  double gain = 0.0;
  Vec bias;
  std::size_t iterations = 0;
  double final_span = 0.0;
};

/// Extended value iteration over the transition regions with per-pair
/// optimistic rewards. Stops when span(u_{i+1} - u_i) <= epsilon, returning
/// the greedy policy of that sweep (ties to the lowest action), the gain
/// max(u_{i+1} - u_i), and bias (1 - w) u_i.
///
/// Throws ConvergenceError at the iteration cap.
EviResult evi(const TransitionRegions& regions, ConstVecView rewards, const EviOptions& options);

/// Single-threaded reference with the same arithmetic.
EviResult evi_serial(const TransitionRegions& regions, ConstVecView rewards,
                     const EviOptions& options);

}  // namespace tocucrl
