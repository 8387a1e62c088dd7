#pragma once

#include <memory>
#include <optional>
#include <string>

#include "tocucrl/common.hpp"

namespace tocucrl {

enum class RewardKind {
  kQuadraticBalance,
  kL1Balance,
  kTargetSe,
  kFairness,
  kSmoothedEntropy,
  kKnapsack,
  kLinear,
  kCustom,
};

struct FenchelPoint {
  /// g*(theta) = max_w g(w) + theta^T w over [0,1]^K.
  double value = 0.0;
  Vec argmax;
};

/// A concave g on [0,1]^K. Implementations must be immutable.
class RewardModel {
 public:
  virtual ~RewardModel() = default;

  virtual RewardKind kind() const { return RewardKind::kCustom; }
  virtual std::string label() const = 0;
  virtual std::size_t dim() const = 0;
  virtual Norm norm() const = 0;
  virtual double lipschitz() const = 0;
  /// Present iff g is beta-smooth.
  virtual std::optional<double> beta() const = 0;

  virtual double value(ConstVecView w) const = 0;
  /// Gradient when smooth, otherwise a deterministic supergradient.
  virtual Vec supergradient(ConstVecView w) const = 0;
  /// theta is already known to be in the dual ball. The default is the
  /// numeric solver below and requires beta.
  virtual FenchelPoint fenchel(ConstVecView theta) const;

  /// Per-coordinate sign shared by every supergradient (+1, -1), or nullopt
  /// when signs vary. 0 marks a coordinate that is always zero.
  virtual std::optional<std::vector<int>> supergradient_signs() const { return std::nullopt; }
  /// True when every supergradient has dual norm exactly L.
  virtual bool supergradients_on_sphere() const { return false; }
};

/// Value handle over a shared immutable model.
class RewardSpec {
 public:
  explicit RewardSpec(std::shared_ptr<const RewardModel> model);

  RewardKind kind() const { return model_->kind(); }
  std::string label() const { return model_->label(); }
  std::size_t dim() const { return model_->dim(); }
  Norm norm() const { return model_->norm(); }
  Norm dual_norm() const { return dual_of(model_->norm()); }
  double lipschitz() const { return lipschitz_; }
  std::optional<double> beta() const { return beta_; }
  bool smooth() const { return beta_.has_value(); }
  /// ||1_K|| in g's norm.
  double ones() const { return ones_norm(dim(), norm()); }

  double evaluate(ConstVecView w) const;
  Vec supergradient(ConstVecView w) const;
  /// Throws UsageError when ||theta||_* > L + 1e-9.
  FenchelPoint fenchel(ConstVecView theta) const;

  std::optional<std::vector<int>> supergradient_signs() const {
    return model_->supergradient_signs();
  }
  bool supergradients_on_sphere() const { return model_->supergradients_on_sphere(); }

  const RewardModel& model() const { return *model_; }

 private:
  void check_dim(ConstVecView x, const char* what) const;

  std::shared_ptr<const RewardModel> model_;
  double lipschitz_;
  std::optional<double> beta_;
};

/// 1 - sum (w_k - 1/K)^2 / 2, L2 norm.
RewardSpec make_quadratic_balance(std::size_t k);
/// 1 - sum |w_k - 1/K| / 2, L1 norm, non-smooth.
RewardSpec make_l1_balance(std::size_t k);
/// 1 - (1/K) sum max(0, zeta_k - w_k)^2, L2 norm.
RewardSpec make_target_se(Vec zeta);
/// Sum of the kappa smallest coordinates, Linf norm, non-smooth.
RewardSpec make_fairness(std::size_t k, std::size_t kappa);
/// (1/log S) sum P_s log(1/(P_s + mu)), L1 norm.
RewardSpec make_smoothed_entropy(std::size_t states, double mu);
/// r - (2/b) max_k (c_k - b)^+ over w = (r, c_1..c_{K-1}), Linf norm.
RewardSpec make_knapsack_surrogate(std::size_t k, double b);
/// c^T w, Linf norm (so L = ||c||_1), beta = 0.
RewardSpec make_linear(Vec c);

/// Keywords: quad:K, l1:K, se:zeta, fair:K,kappa, ent:S,mu, knap:K,b,
/// linear:c. zeta and c are inline numbers or a file of numbers.
RewardSpec reward_from_keyword(const std::string& keyword);

/// Projected gradient ascent on w -> g(w) + theta^T w with step 1/beta,
/// for smooth g without a closed form.
FenchelPoint fenchel_numeric(const RewardModel& model, ConstVecView theta, double tol = 1e-12,
                             std::size_t max_iters = 1000000);

}  // namespace tocucrl
