#pragma once

#include <memory>
#include <optional>
#include <string>

#include "tocucrl/rewards.hpp"

namespace tocucrl {

/// Regularizer F over a subset of the dual ball, used by TMD.
///
/// The map may carry extra coordinates beyond the K outcome dimensions
/// (see make_mirror_map_entropy); callers pass and receive vectors of
/// size dim() and use the first K entries as theta.
class MirrorMap {
 public:
  virtual ~MirrorMap() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual double radius() const = 0;
  virtual double value(ConstVecView theta) const = 0;
  /// argmax over dom(F) of -theta^T z - F(theta).
  virtual Vec argmax(ConstVecView z) const = 0;
  virtual Vec minimizer() const = 0;
  virtual bool contains(ConstVecView theta, double slack = 1e-9) const = 0;
  /// L'^2 = max F - min F over dom(F).
  virtual double range_sq() const = 0;
  double l_prime() const { return std::sqrt(range_sq()); }
};

/// F(theta) = theta^T theta / 2 on the L2 ball of radius L.
std::unique_ptr<MirrorMap> make_mirror_map_l2(double radius, std::size_t k);

/// F(theta) = L sum |theta_k| log |theta_k| on
/// {sigma_k theta_k >= 0, ||theta||_1 = L}. The argmax is multiplicative
/// weights: theta_k = sigma_k L softmax(-sigma z / L)_k.
///
/// `orientation` defaults to all +1. `slack` appends one coordinate that
/// carries no loss, which turns the sphere ||theta||_1 = L into the ball
/// ||theta||_1 <= L for the first K coordinates.
std::unique_ptr<MirrorMap> make_mirror_map_entropy(double radius, std::size_t k,
                                                   std::vector<int> orientation = {},
                                                   bool slack = false);

/// Entropy map fitted to g: orientation -sign(dg), slack unless every
/// supergradient lies on the dual sphere. ConfigError if g's supergradient
/// signs are not fixed.
std::unique_ptr<MirrorMap> entropy_map_for(const RewardSpec& spec);

enum class OracleKind { kFrankWolfe, kTgd, kTmdL2, kTmdEntropy };

OracleKind oracle_from_keyword(const std::string& keyword);
std::string to_string(OracleKind kind);

/// Online gradient source. theta() is theta_t; observe() consumes the step
/// t outcome and running average and advances to theta_{t+1}.
class OcoOracle {
 public:
  virtual ~OcoOracle() = default;
  virtual OracleKind kind() const = 0;
  virtual const Vec& theta() const = 0;
  virtual void observe(std::size_t t, ConstVecView outcome, ConstVecView average) = 0;
};

/// theta_1 = -grad g(0), theta_{t+1} = -grad g(V-bar_{1:t}).
class FrankWolfeOracle final : public OcoOracle {
 public:
  explicit FrankWolfeOracle(RewardSpec spec);
  OracleKind kind() const override { return OracleKind::kFrankWolfe; }
  const Vec& theta() const override { return theta_; }
  void observe(std::size_t t, ConstVecView outcome, ConstVecView average) override;

 private:
  RewardSpec spec_;
  Vec theta_;
};

/// theta_{t+1} = Proj_L(theta_t - eta_t (grad g*(theta_t) - V_t)),
/// eta_t = L / (||1_K|| t^{2/3}). L2-norm rewards only.
class TgdOracle final : public OcoOracle {
 public:
  TgdOracle(RewardSpec spec, std::optional<Vec> theta1 = std::nullopt);
  OracleKind kind() const override { return OracleKind::kTgd; }
  const Vec& theta() const override { return theta_; }
  void observe(std::size_t t, ConstVecView outcome, ConstVecView average) override;

  static double step_size(const RewardSpec& spec, std::size_t t);

 private:
  RewardSpec spec_;
  Vec theta_;
};

/// theta_{t+1} = argmax_{dom F} -theta^T [eta_T sum_q (grad g*(theta_q) - V_q)] - F(theta),
/// eta_T = L' / (||1_K|| T^{2/3}). Starts at argmin F.
class TmdOracle final : public OcoOracle {
 public:
  TmdOracle(RewardSpec spec, std::shared_ptr<const MirrorMap> map, std::size_t horizon);
  OracleKind kind() const override { return kind_; }
  const Vec& theta() const override { return theta_; }
  void observe(std::size_t t, ConstVecView outcome, ConstVecView average) override;

  double eta() const { return eta_; }
  const MirrorMap& map() const { return *map_; }

 private:
  RewardSpec spec_;
  std::shared_ptr<const MirrorMap> map_;
  OracleKind kind_;
  double eta_;
  Vec accumulated_;
  Vec theta_;
};

/// Builds the oracle for `kind`. TMD needs the horizon; ConfigError on
/// incompatible combinations (FW on non-smooth g, TGD or tmd:l2 on a
/// non-L2 reward).
std::unique_ptr<OcoOracle> make_oracle(OracleKind kind, const RewardSpec& spec,
                                       std::optional<std::size_t> horizon = std::nullopt,
                                       std::optional<Vec> theta1 = std::nullopt);

/// The map make_oracle would use for a TMD kind.
std::shared_ptr<const MirrorMap> mirror_map_for(OracleKind kind, const RewardSpec& spec);

}  // namespace tocucrl
