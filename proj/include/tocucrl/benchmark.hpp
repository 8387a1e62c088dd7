#pragma once

#include "tocucrl/mdp.hpp"
#include "tocucrl/rewards.hpp"

namespace tocucrl {

/// x(s,a) over the instance's flat pair index.
struct OccupancyMeasure {
  Vec x;
  /// Objective of the linear subproblem that produced it (c^T x).
  double value = 0.0;
};

/// w(x) = sum_{s,a} v(s,a) x(s,a).
Vec mean_outcome(const MdpInstance& instance, ConstVecView x);

/// max_s |sum_a x(s,a) - sum_{s',a'} p(s|s',a') x(s',a')|.
double flow_residual(const MdpInstance& instance, ConstVecView x);

/// max c^T x over the occupancy polytope: EVI with singleton regions on the
/// scalar reward c, then the stationary distribution of the greedy
/// policy's best recurrent class. Throws NotCommunicatingError if EVI
/// does not converge.
OccupancyMeasure linear_oracle(const MdpInstance& instance, ConstVecView c);

struct OfflineSolution {
  /// Best g(w(x)) seen.
  double opt = 0.0;
  Vec x;
  Vec w;
  /// Frank-Wolfe gap at the last iterate; opt(P_M) <= g(w_best) + gap
  /// holds for the gap measured at the best iterate (best_gap).
  double gap = kInf;
  double best_gap = kInf;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Frank-Wolfe over the occupancy polytope with step 2/(i+2); linear
/// subproblems use c(s,a) = grad g(w_i)^T v(s,a).
OfflineSolution solve_offline(const MdpInstance& instance, const RewardSpec& spec,
                              double tol = 1e-6, std::size_t max_iters = 100000);

struct DualCertificate {
  Vec theta;
  double phi = 0.0;
  Vec gamma;
};

struct DualCheck {
  bool feasible = false;
  /// g*(theta) + phi; +inf when theta is outside the dual ball.
  double value = kInf;
  /// Largest violation of phi + gamma(s) >= -theta^T v(s,a) + sum p gamma.
  double max_violation = 0.0;
};

DualCheck check_dual(const MdpInstance& instance, const RewardSpec& spec,
                     const DualCertificate& cert, double tol = 1e-8);

/// theta = -grad g(w); (phi, gamma) from EVI on the reward grad g(w)^T v.
DualCertificate dual_certificate(const MdpInstance& instance, const RewardSpec& spec,
                                 ConstVecView w);

struct KnapsackBenchmark {
  /// opt(P_C(b)): max average R subject to average C_k <= b.
  double opt = 0.0;
  /// Multipliers at the best dual value.
  Vec lambda;
  std::size_t iterations = 0;
};

/// Outcomes are (R, C_1..C_{K-1}). Minimizes the Lagrangian dual
/// gain(R - lambda^T C) + b sum lambda over lambda >= 0: golden section
/// for one resource, projected subgradient otherwise. The returned value
/// is an upper bound on opt(P_C(b)), exact up to the solver tolerance.
KnapsackBenchmark solve_knapsack(const MdpInstance& instance, double b,
                                 std::size_t max_iters = 2000);

}  // namespace tocucrl
