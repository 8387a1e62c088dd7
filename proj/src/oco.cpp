#include "tocucrl/oco.hpp"

#include <algorithm>

namespace tocucrl {

namespace {

class L2Map final : public MirrorMap {
 public:
  L2Map(double radius, std::size_t k) : radius_(radius), k_(k) {}

  std::string name() const override { return "l2"; }
  std::size_t dim() const override { return k_; }
  double radius() const override { return radius_; }
  double value(ConstVecView theta) const override { return dot(theta, theta) / 2.0; }
  Vec argmax(ConstVecView z) const override {
    Vec theta(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) theta[i] = -z[i];
    return project_l2_ball(std::move(theta), radius_);
  }
  Vec minimizer() const override { return Vec(k_, 0.0); }
  bool contains(ConstVecView theta, double slack) const override {
    return theta.size() == k_ && norm_of(theta, Norm::kL2) <= radius_ + slack;
  }
  double range_sq() const override { return radius_ * radius_ / 2.0; }

 private:
  double radius_;
  std::size_t k_;
};

class EntropyMap final : public MirrorMap {
 public:
  EntropyMap(double radius, std::vector<int> orientation)
      : radius_(radius), sigma_(std::move(orientation)) {}

  std::string name() const override { return "ent"; }
  std::size_t dim() const override { return sigma_.size(); }
  double radius() const override { return radius_; }
  double value(ConstVecView theta) const override {
    double acc = 0.0;
    for (double x : theta) {
      const double a = std::abs(x);
      if (a > 0.0) acc += a * std::log(a);
    }
    return radius_ * acc;
  }
  Vec argmax(ConstVecView z) const override {
    const std::size_t n = sigma_.size();
    Vec logits(n);
    for (std::size_t i = 0; i < n; ++i) logits[i] = -sigma_[i] * z[i] / radius_;
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double& l : logits) {
      l = std::exp(l - top);
      total += l;
    }
    Vec theta(n);
    for (std::size_t i = 0; i < n; ++i) {
      theta[i] = sigma_[i] * std::max(radius_ * logits[i] / total, 1e-300);
    }
    return theta;
  }
  Vec minimizer() const override {
    Vec theta(sigma_.size());
    const double share = radius_ / static_cast<double>(sigma_.size());
    for (std::size_t i = 0; i < sigma_.size(); ++i) theta[i] = sigma_[i] * share;
    return theta;
  }
  bool contains(ConstVecView theta, double slack) const override {
    if (theta.size() != sigma_.size()) return false;
    double mass = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      if (sigma_[i] * theta[i] < -slack) return false;
      mass += std::abs(theta[i]);
    }
    return std::abs(mass - radius_) <= slack * std::max(1.0, radius_);
  }
  double range_sq() const override {
    return radius_ * radius_ * std::log(static_cast<double>(sigma_.size()));
  }

 private:
  double radius_;
  std::vector<int> sigma_;
};

}  // namespace

std::unique_ptr<MirrorMap> make_mirror_map_l2(double radius, std::size_t k) {
  if (!(radius > 0.0) || k == 0) throw UsageError("l2 mirror map: need radius > 0 and K >= 1");
  return std::make_unique<L2Map>(radius, k);
}

std::unique_ptr<MirrorMap> make_mirror_map_entropy(double radius, std::size_t k,
                                                   std::vector<int> orientation, bool slack) {
  if (!(radius > 0.0) || k == 0) {
    throw UsageError("entropy mirror map: need radius > 0 and K >= 1");
  }
  if (orientation.empty()) orientation.assign(k, 1);
  if (orientation.size() != k) throw UsageError("entropy mirror map: orientation size != K");
  for (int s : orientation) {
    if (s != 1 && s != -1) throw UsageError("entropy mirror map: orientation must be +-1");
  }
  if (slack) orientation.push_back(1);
  return std::make_unique<EntropyMap>(radius, std::move(orientation));
}

std::unique_ptr<MirrorMap> entropy_map_for(const RewardSpec& spec) {
  const auto signs = spec.supergradient_signs();
  if (!signs) {
    throw ConfigError(spec.label() +
                      ": tmd:ent needs a reward whose supergradients have fixed signs");
  }
  std::vector<int> orientation(signs->size());
  for (std::size_t i = 0; i < signs->size(); ++i) orientation[i] = (*signs)[i] > 0 ? -1 : 1;
  return make_mirror_map_entropy(spec.lipschitz(), spec.dim(), std::move(orientation),
                                 !spec.supergradients_on_sphere());
}

OracleKind oracle_from_keyword(const std::string& keyword) {
  if (keyword == "fw") return OracleKind::kFrankWolfe;
  if (keyword == "tgd") return OracleKind::kTgd;
  if (keyword == "tmd:l2") return OracleKind::kTmdL2;
  if (keyword == "tmd:ent") return OracleKind::kTmdEntropy;
  throw UsageError("unknown oracle '" + keyword + "' (expected fw, tgd, tmd:l2, tmd:ent)");
}

std::string to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::kFrankWolfe: return "fw";
    case OracleKind::kTgd: return "tgd";
    case OracleKind::kTmdL2: return "tmd:l2";
    case OracleKind::kTmdEntropy: return "tmd:ent";
  }
  return "?";
}

FrankWolfeOracle::FrankWolfeOracle(RewardSpec spec) : spec_(std::move(spec)) {
  if (!spec_.smooth()) throw ConfigError(spec_.label() + ": FW oracle needs a smooth reward");
  theta_ = spec_.supergradient(Vec(spec_.dim(), 0.0));
  for (double& x : theta_) x = -x;
}

void FrankWolfeOracle::observe(std::size_t, ConstVecView, ConstVecView average) {
  theta_ = spec_.supergradient(average);
  for (double& x : theta_) x = -x;
}

TgdOracle::TgdOracle(RewardSpec spec, std::optional<Vec> theta1) : spec_(std::move(spec)) {
  if (spec_.norm() != Norm::kL2) {
    throw ConfigError(spec_.label() + ": TGD needs an L2-norm reward; use tmd");
  }
  if (theta1) {
    if (theta1->size() != spec_.dim()) throw UsageError("TGD: theta_1 has the wrong dimension");
    theta_ = *theta1;
  } else {
    theta_ = spec_.supergradient(Vec(spec_.dim(), 0.0));
    for (double& x : theta_) x = -x;
  }
  theta_ = project_l2_ball(std::move(theta_), spec_.lipschitz());
}

double TgdOracle::step_size(const RewardSpec& spec, std::size_t t) {
  return spec.lipschitz() / (spec.ones() * std::pow(static_cast<double>(t), 2.0 / 3.0));
}

void TgdOracle::observe(std::size_t t, ConstVecView outcome, ConstVecView) {
  const Vec w = spec_.fenchel(theta_).argmax;
  const double eta = step_size(spec_, t);
  for (std::size_t i = 0; i < theta_.size(); ++i) theta_[i] -= eta * (w[i] - outcome[i]);
  theta_ = project_l2_ball(std::move(theta_), spec_.lipschitz());
}

TmdOracle::TmdOracle(RewardSpec spec, std::shared_ptr<const MirrorMap> map, std::size_t horizon)
    : spec_(std::move(spec)), map_(std::move(map)) {
  if (!map_) throw UsageError("TMD: null mirror map");
  if (horizon == 0) throw UsageError("TMD: horizon must be positive");
  if (map_->dim() < spec_.dim()) throw UsageError("TMD: mirror map smaller than K");
  kind_ = map_->name() == "l2" ? OracleKind::kTmdL2 : OracleKind::kTmdEntropy;
  eta_ = map_->l_prime() / (spec_.ones() * std::pow(static_cast<double>(horizon), 2.0 / 3.0));
  accumulated_.assign(map_->dim(), 0.0);
  theta_ = map_->minimizer();
  theta_.resize(spec_.dim());
}

void TmdOracle::observe(std::size_t, ConstVecView outcome, ConstVecView) {
  const Vec w = spec_.fenchel(theta_).argmax;
  for (std::size_t i = 0; i < spec_.dim(); ++i) accumulated_[i] += w[i] - outcome[i];
  Vec z(accumulated_.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = eta_ * accumulated_[i];
  theta_ = map_->argmax(z);
  theta_.resize(spec_.dim());
}

std::shared_ptr<const MirrorMap> mirror_map_for(OracleKind kind, const RewardSpec& spec) {
  if (kind == OracleKind::kTmdL2) {
    if (spec.norm() != Norm::kL2) {
      throw ConfigError(spec.label() + ": tmd:l2 needs an L2-norm reward; use tmd:ent");
    }
    return make_mirror_map_l2(spec.lipschitz(), spec.dim());
  }
  if (kind == OracleKind::kTmdEntropy) return entropy_map_for(spec);
  throw UsageError("mirror_map_for: not a TMD oracle");
}

std::unique_ptr<OcoOracle> make_oracle(OracleKind kind, const RewardSpec& spec,
                                       std::optional<std::size_t> horizon,
                                       std::optional<Vec> theta1) {
  switch (kind) {
    case OracleKind::kFrankWolfe: return std::make_unique<FrankWolfeOracle>(spec);
    case OracleKind::kTgd: return std::make_unique<TgdOracle>(spec, std::move(theta1));
    case OracleKind::kTmdL2:
    case OracleKind::kTmdEntropy:
      if (!horizon) throw ConfigError("TMD needs a known horizon T");
      return std::make_unique<TmdOracle>(spec, mirror_map_for(kind, spec), *horizon);
  }
  throw UsageError("make_oracle: unknown oracle");
}

}  // namespace tocucrl
