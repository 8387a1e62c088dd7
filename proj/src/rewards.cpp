#include "tocucrl/rewards.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "tocucrl/keywords.hpp"

namespace tocucrl {

namespace {

std::string fmt(double x) {
  std::ostringstream out;
  out << x;
  return out.str();
}

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

class QuadraticBalance final : public RewardModel {
 public:
  explicit QuadraticBalance(std::size_t k) : k_(k), center_(1.0 / static_cast<double>(k)) {}

  RewardKind kind() const override { return RewardKind::kQuadraticBalance; }
  std::string label() const override { return "quad:" + std::to_string(k_); }
  std::size_t dim() const override { return k_; }
  Norm norm() const override { return Norm::kL2; }
  double lipschitz() const override {
    // ||w - 1/K||_2 is largest at a corner of the cube.
    return std::sqrt(static_cast<double>(k_)) * std::max(1.0 - center_, center_);
  }
  std::optional<double> beta() const override { return 1.0; }

  double value(ConstVecView w) const override {
    double acc = 0.0;
    for (double x : w) acc += (x - center_) * (x - center_);
    return 1.0 - acc / 2.0;
  }
  Vec supergradient(ConstVecView w) const override {
    Vec g(k_);
    for (std::size_t i = 0; i < k_; ++i) g[i] = -(w[i] - center_);
    return g;
  }
  FenchelPoint fenchel(ConstVecView theta) const override {
    Vec w(k_);
    for (std::size_t i = 0; i < k_; ++i) w[i] = clip01(center_ + theta[i]);
    return {value(w) + dot(theta, w), w};
  }

 private:
  std::size_t k_;
  double center_;
};

class L1Balance final : public RewardModel {
 public:
  explicit L1Balance(std::size_t k) : k_(k), center_(1.0 / static_cast<double>(k)) {}

  RewardKind kind() const override { return RewardKind::kL1Balance; }
  std::string label() const override { return "l1:" + std::to_string(k_); }
  std::size_t dim() const override { return k_; }
  Norm norm() const override { return Norm::kL1; }
  double lipschitz() const override { return 0.5; }
  std::optional<double> beta() const override { return std::nullopt; }

  double value(ConstVecView w) const override {
    double acc = 0.0;
    for (double x : w) acc += std::abs(x - center_);
    return 1.0 - acc / 2.0;
  }
  Vec supergradient(ConstVecView w) const override {
    Vec g(k_, 0.0);
    for (std::size_t i = 0; i < k_; ++i) {
      if (w[i] > center_) g[i] = -0.5;
      if (w[i] < center_) g[i] = 0.5;
    }
    return g;
  }
  FenchelPoint fenchel(ConstVecView theta) const override {
    // Piecewise linear per coordinate: a maximizer sits at 0, 1/K or 1.
    Vec w(k_);
    const double candidates[] = {0.0, center_, 1.0};
    for (std::size_t i = 0; i < k_; ++i) {
      double best = -kInf;
      for (double c : candidates) {
        const double v = -std::abs(c - center_) / 2.0 + theta[i] * c;
        if (v > best) {
          best = v;
          w[i] = c;
        }
      }
    }
    return {value(w) + dot(theta, w), w};
  }

 private:
  std::size_t k_;
  double center_;
};

class TargetSe final : public RewardModel {
 public:
  explicit TargetSe(Vec zeta) : zeta_(std::move(zeta)) {}

  RewardKind kind() const override { return RewardKind::kTargetSe; }
  std::string label() const override {
    std::string out = "se:";
    for (std::size_t i = 0; i < zeta_.size(); ++i) out += (i ? "," : "") + fmt(zeta_[i]);
    return out;
  }
  std::size_t dim() const override { return zeta_.size(); }
  Norm norm() const override { return Norm::kL2; }
  double lipschitz() const override { return 2.0 / std::sqrt(kdim()); }
  std::optional<double> beta() const override { return 2.0 / kdim(); }

  double value(ConstVecView w) const override {
    double acc = 0.0;
    for (std::size_t i = 0; i < zeta_.size(); ++i) {
      const double gap = std::max(0.0, zeta_[i] - w[i]);
      acc += gap * gap;
    }
    return 1.0 - acc / kdim();
  }
  Vec supergradient(ConstVecView w) const override {
    Vec g(zeta_.size());
    for (std::size_t i = 0; i < zeta_.size(); ++i) {
      g[i] = 2.0 / kdim() * std::max(0.0, zeta_[i] - w[i]);
    }
    return g;
  }
  FenchelPoint fenchel(ConstVecView theta) const override {
    Vec w(zeta_.size());
    for (std::size_t i = 0; i < zeta_.size(); ++i) {
      if (theta[i] > 0.0) {
        w[i] = 1.0;
      } else if (theta[i] == 0.0) {
        w[i] = zeta_[i];
      } else {
        w[i] = std::clamp(zeta_[i] + kdim() * theta[i] / 2.0, 0.0, zeta_[i]);
      }
    }
    return {value(w) + dot(theta, w), w};
  }
  std::optional<std::vector<int>> supergradient_signs() const override {
    std::vector<int> signs(zeta_.size());
    for (std::size_t i = 0; i < zeta_.size(); ++i) signs[i] = zeta_[i] > 0.0 ? 1 : 0;
    return signs;
  }

 private:
  double kdim() const { return static_cast<double>(zeta_.size()); }
  Vec zeta_;
};

class Fairness final : public RewardModel {
 public:
  Fairness(std::size_t k, std::size_t kappa) : k_(k), kappa_(kappa) {}

  RewardKind kind() const override { return RewardKind::kFairness; }
  std::string label() const override {
    return "fair:" + std::to_string(k_) + "," + std::to_string(kappa_);
  }
  std::size_t dim() const override { return k_; }
  Norm norm() const override { return Norm::kLinf; }
  double lipschitz() const override { return static_cast<double>(kappa_); }
  std::optional<double> beta() const override { return std::nullopt; }

  double value(ConstVecView w) const override {
    double acc = 0.0;
    for (std::size_t i : smallest(w)) acc += w[i];
    return acc;
  }
  Vec supergradient(ConstVecView w) const override {
    Vec g(k_, 0.0);
    for (std::size_t i : smallest(w)) g[i] = 1.0;
    return g;
  }
  FenchelPoint fenchel(ConstVecView theta) const override {
    // g is the Lovasz extension of A -> max(0, |A| - K + kappa), so g +
    // theta^T w peaks at a 0/1 vector; for |A| = j the best A is the top j.
    std::vector<std::size_t> order(k_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return theta[a] > theta[b]; });
    double prefix = 0.0;
    double best = -kInf;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j <= k_; ++j) {
      if (j > 0) prefix += theta[order[j - 1]];
      const double base = j + kappa_ > k_ ? static_cast<double>(j + kappa_ - k_) : 0.0;
      if (base + prefix > best) {
        best = base + prefix;
        best_j = j;
      }
    }
    Vec w(k_, 0.0);
    for (std::size_t j = 0; j < best_j; ++j) w[order[j]] = 1.0;
    return {value(w) + dot(theta, w), w};
  }
  std::optional<std::vector<int>> supergradient_signs() const override {
    return std::vector<int>(k_, 1);
  }
  bool supergradients_on_sphere() const override { return true; }

 private:
  std::vector<std::size_t> smallest(ConstVecView w) const {
    std::vector<std::size_t> order(k_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return w[a] < w[b]; });
    order.resize(kappa_);
    return order;
  }

  std::size_t k_;
  std::size_t kappa_;
};

class SmoothedEntropy final : public RewardModel {
 public:
  SmoothedEntropy(std::size_t states, double mu)
      : s_(states), mu_(mu), log_s_(std::log(static_cast<double>(states))) {}

  RewardKind kind() const override { return RewardKind::kSmoothedEntropy; }
  std::string label() const override { return "ent:" + std::to_string(s_) + "," + fmt(mu_); }
  std::size_t dim() const override { return s_; }
  Norm norm() const override { return Norm::kL1; }
  double lipschitz() const override {
    // |dH/dP| is decreasing then increasing on [0,1]; check both ends.
    return std::max(std::log(1.0 / mu_), std::log1p(mu_) + 1.0 / (1.0 + mu_)) / log_s_;
  }
  std::optional<double> beta() const override { return 2.0 / (mu_ * log_s_); }

  double value(ConstVecView w) const override {
    double acc = 0.0;
    for (double p : w) acc += p * std::log(1.0 / (p + mu_));
    return acc / log_s_;
  }
  Vec supergradient(ConstVecView w) const override {
    Vec g(s_);
    for (std::size_t i = 0; i < s_; ++i) g[i] = partial(w[i]);
    return g;
  }
  FenchelPoint fenchel(ConstVecView theta) const override {
    // Separable and strictly concave: root of the decreasing derivative.
    Vec w(s_);
    for (std::size_t i = 0; i < s_; ++i) {
      const double t = theta[i];
      if (partial(0.0) + t <= 0.0) {
        w[i] = 0.0;
      } else if (partial(1.0) + t >= 0.0) {
        w[i] = 1.0;
      } else {
        double lo = 0.0;
        double hi = 1.0;
        for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
          const double mid = 0.5 * (lo + hi);
          (partial(mid) + t > 0.0 ? lo : hi) = mid;
        }
        w[i] = 0.5 * (lo + hi);
      }
    }
    return {value(w) + dot(theta, w), w};
  }

 private:
  double partial(double p) const { return (std::log(1.0 / (p + mu_)) - p / (p + mu_)) / log_s_; }

  std::size_t s_;
  double mu_;
  double log_s_;
};

class KnapsackSurrogate final : public RewardModel {
 public:
  KnapsackSurrogate(std::size_t k, double b) : k_(k), b_(b) {}

  RewardKind kind() const override { return RewardKind::kKnapsack; }
  std::string label() const override { return "knap:" + std::to_string(k_) + "," + fmt(b_); }
  std::size_t dim() const override { return k_; }
  Norm norm() const override { return Norm::kLinf; }
  double lipschitz() const override { return 1.0 + 2.0 / b_; }
  std::optional<double> beta() const override { return std::nullopt; }

  double value(ConstVecView w) const override {
    return w[0] - 2.0 / b_ * worst(w).second;
  }
  Vec supergradient(ConstVecView w) const override {
    Vec g(k_, 0.0);
    g[0] = 1.0;
    const auto [k, excess] = worst(w);
    if (excess > 0.0) g[k] = -2.0 / b_;
    return g;
  }
  FenchelPoint fenchel(ConstVecView theta) const override {
    Vec w(k_, 0.0);
    w[0] = 1.0 + theta[0] > 0.0 ? 1.0 : 0.0;
    // With m = max excess fixed, costs with theta_k > 0 sit at b + m and the
    // rest at 0; the objective is linear in m, so m is 0 or 1 - b.
    double positive = 0.0;
    for (std::size_t i = 1; i < k_; ++i) positive += std::max(0.0, theta[i]);
    const double slope = -2.0 / b_ + positive;
    const double m = slope > 0.0 ? 1.0 - b_ : 0.0;
    for (std::size_t i = 1; i < k_; ++i) w[i] = theta[i] > 0.0 ? b_ + m : 0.0;
    return {value(w) + dot(theta, w), w};
  }
  std::optional<std::vector<int>> supergradient_signs() const override {
    std::vector<int> signs(k_, -1);
    signs[0] = 1;
    return signs;
  }

 private:
  std::pair<std::size_t, double> worst(ConstVecView w) const {
    std::size_t arg = 1;
    double excess = 0.0;
    for (std::size_t i = 1; i < k_; ++i) {
      const double e = std::max(0.0, w[i] - b_);
      if (e > excess) {
        excess = e;
        arg = i;
      }
    }
    return {arg, excess};
  }

  std::size_t k_;
  double b_;
};

class Linear final : public RewardModel {
 public:
  explicit Linear(Vec c) : c_(std::move(c)) {}

  RewardKind kind() const override { return RewardKind::kLinear; }
  std::string label() const override {
    std::string out = "linear:";
    for (std::size_t i = 0; i < c_.size(); ++i) out += (i ? "," : "") + fmt(c_[i]);
    return out;
  }
  std::size_t dim() const override { return c_.size(); }
  Norm norm() const override { return Norm::kLinf; }
  double lipschitz() const override { return norm_of(c_, Norm::kL1); }
  std::optional<double> beta() const override { return 0.0; }

  double value(ConstVecView w) const override { return dot(c_, w); }
  Vec supergradient(ConstVecView) const override { return c_; }
  FenchelPoint fenchel(ConstVecView theta) const override {
    Vec w(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) w[i] = c_[i] + theta[i] > 0.0 ? 1.0 : 0.0;
    return {value(w) + dot(theta, w), w};
  }
  std::optional<std::vector<int>> supergradient_signs() const override {
    std::vector<int> signs(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) signs[i] = (c_[i] > 0.0) - (c_[i] < 0.0);
    return signs;
  }
  bool supergradients_on_sphere() const override { return true; }

 private:
  Vec c_;
};

}  // namespace

FenchelPoint RewardModel::fenchel(ConstVecView theta) const {
  return fenchel_numeric(*this, theta);
}

FenchelPoint fenchel_numeric(const RewardModel& model, ConstVecView theta, double tol,
                             std::size_t max_iters) {
  const auto beta = model.beta();
  if (!beta) throw ConfigError(model.label() + ": numeric Fenchel solver needs a smooth g");
  const double step = 1.0 / std::max(*beta, 1e-12);
  Vec w(model.dim(), 0.5);
  for (std::size_t it = 0; it < max_iters; ++it) {
    const Vec grad = model.supergradient(w);
    double moved = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double next = clip01(w[i] + step * (grad[i] + theta[i]));
      moved = std::max(moved, std::abs(next - w[i]));
      w[i] = next;
    }
    if (moved <= tol) break;
  }
  return {model.value(w) + dot(theta, w), w};
}

RewardSpec::RewardSpec(std::shared_ptr<const RewardModel> model) : model_(std::move(model)) {
  if (!model_) throw UsageError("RewardSpec: null model");
  if (model_->dim() == 0) throw UsageError("RewardSpec: zero dimension");
  lipschitz_ = model_->lipschitz();
  beta_ = model_->beta();
  if (!(lipschitz_ > 0.0)) throw UsageError(model_->label() + ": L must be positive");
}

void RewardSpec::check_dim(ConstVecView x, const char* what) const {
  if (x.size() != dim()) {
    throw UsageError(label() + ": " + what + " has dimension " + std::to_string(x.size()) +
                     ", expected " + std::to_string(dim()));
  }
}

double RewardSpec::evaluate(ConstVecView w) const {
  check_dim(w, "w");
  return model_->value(w);
}

Vec RewardSpec::supergradient(ConstVecView w) const {
  check_dim(w, "w");
  return model_->supergradient(w);
}

FenchelPoint RewardSpec::fenchel(ConstVecView theta) const {
  check_dim(theta, "theta");
  const double n = norm_of(theta, dual_norm());
  if (n > lipschitz_ + 1e-9) {
    throw UsageError(label() + ": theta outside the dual ball (" + fmt(n) + " > " +
                     fmt(lipschitz_) + ")");
  }
  return model_->fenchel(theta);
}

RewardSpec make_quadratic_balance(std::size_t k) {
  if (k < 1) throw UsageError("quad: K must be >= 1");
  return RewardSpec(std::make_shared<QuadraticBalance>(k));
}

RewardSpec make_l1_balance(std::size_t k) {
  if (k < 1) throw UsageError("l1: K must be >= 1");
  return RewardSpec(std::make_shared<L1Balance>(k));
}

RewardSpec make_target_se(Vec zeta) {
  if (zeta.empty()) throw UsageError("se: empty target");
  for (double z : zeta) {
    if (!(z >= 0.0 && z <= 1.0)) throw UsageError("se: targets must lie in [0,1]");
  }
  return RewardSpec(std::make_shared<TargetSe>(std::move(zeta)));
}

RewardSpec make_fairness(std::size_t k, std::size_t kappa) {
  if (k < 1 || kappa < 1 || kappa > k) throw UsageError("fair: need 1 <= kappa <= K");
  return RewardSpec(std::make_shared<Fairness>(k, kappa));
}

RewardSpec make_smoothed_entropy(std::size_t states, double mu) {
  if (states < 2) throw UsageError("ent: S must be >= 2");
  if (!(mu > 0.0 && mu <= 1.0)) throw UsageError("ent: mu must lie in (0,1]");
  return RewardSpec(std::make_shared<SmoothedEntropy>(states, mu));
}

RewardSpec make_knapsack_surrogate(std::size_t k, double b) {
  if (k < 2) throw UsageError("knap: K must be >= 2 (reward plus at least one resource)");
  if (!(b > 0.0 && b < 1.0)) throw UsageError("knap: b must lie in (0,1)");
  return RewardSpec(std::make_shared<KnapsackSurrogate>(k, b));
}

RewardSpec make_linear(Vec c) {
  if (c.empty()) throw UsageError("linear: empty coefficient vector");
  if (!(norm_of(c, Norm::kL1) > 0.0)) throw UsageError("linear: c must be nonzero");
  return RewardSpec(std::make_shared<Linear>(std::move(c)));
}

RewardSpec reward_from_keyword(const std::string& keyword) {
  const auto [head, args] = split_keyword(keyword);
  auto as_size = [&](double x) {
    if (!(x >= 0.0) || x != std::floor(x)) {
      throw UsageError("'" + keyword + "': expected an integer, got " + fmt(x));
    }
    return static_cast<std::size_t>(x);
  };
  auto numbers = [&](std::size_t expected) {
    Vec v = parse_reals_or_file(args);
    if (v.size() != expected) {
      throw UsageError("'" + keyword + "': expected " + std::to_string(expected) + " values");
    }
    return v;
  };
  if (head == "quad") return make_quadratic_balance(as_size(numbers(1)[0]));
  if (head == "l1") return make_l1_balance(as_size(numbers(1)[0]));
  if (head == "se") return make_target_se(parse_reals_or_file(args));
  if (head == "fair") {
    const Vec v = numbers(2);
    return make_fairness(as_size(v[0]), as_size(v[1]));
  }
  if (head == "ent") {
    const Vec v = numbers(2);
    return make_smoothed_entropy(as_size(v[0]), v[1]);
  }
  if (head == "knap") {
    const Vec v = numbers(2);
    return make_knapsack_surrogate(as_size(v[0]), v[1]);
  }
  if (head == "linear") return make_linear(parse_reals_or_file(args));
  throw UsageError("unknown reward keyword '" + keyword + "'");
}

}  // namespace tocucrl
