#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace oprl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Stochasticity validation tolerance for probability rows.
inline constexpr double kProbTol = 1e-12;
// Residual tolerance for stationary/value linear solves.
inline constexpr double kSolveTol = 1e-10;
// Mixing-time search cap; exceeding it is an error, not a silent large value.
inline constexpr int kMixingCap = 100000;

struct RewardAtom {
  double value = 0.0;
  double prob = 0.0;
};

// Finite MDP with finite-support reward distributions.
//
// Transition probabilities are stored per action: action_kernel(a)(s, s') is
// P(s'|s,a). Rewards are finite supports {(r, P(r|s,a))} per (s,a); given
// (s,a), the reward and the next state are drawn independently.
// gamma = 1 selects the long-run-average formulation.
class Mdp {
 public:
  Mdp(std::vector<Matrix> transition_by_action,
      std::vector<std::vector<RewardAtom>> rewards, double gamma);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  double gamma() const { return gamma_; }
  bool average_reward() const { return gamma_ == 1.0; }

  double transition(int s, int a, int s_next) const {
    return transition_[a](s, s_next);
  }
  const Matrix& action_kernel(int a) const { return transition_[a]; }
  const std::vector<RewardAtom>& reward_dist(int s, int a) const {
    return rewards_[s * n_actions_ + a];
  }
  double mean_reward(int s, int a) const { return mean_reward_(s, a); }
  // r_max: every |r| in every declared support is <= this bound.
  double reward_bound() const { return reward_bound_; }

 private:
  int n_states_ = 0;
  int n_actions_ = 0;
  std::vector<Matrix> transition_;               // [a](s, s')
  std::vector<std::vector<RewardAtom>> rewards_; // [s * n_actions + a]
  double gamma_ = 1.0;
  Matrix mean_reward_;  // (s, a)
  double reward_bound_ = 0.0;
};

// Per-state distribution over actions; probs()(s, a) = pi(a|s).
class Policy {
 public:
  explicit Policy(Matrix probs);

  int n_states() const { return static_cast<int>(probs_.rows()); }
  int n_actions() const { return static_cast<int>(probs_.cols()); }
  double prob(int s, int a) const { return probs_(s, a); }
  const Matrix& probs() const { return probs_; }

  static Policy uniform(int n_states, int n_actions);
  static Policy deterministic(const std::vector<int>& action_of_state, int n_actions);
  // True iff the policy is deterministic; fills action_of_state if given.
  bool deterministic_actions(std::vector<int>* action_of_state = nullptr) const;

 private:
  Matrix probs_;
};

// P^pi(s, s') = sum_a pi(a|s) P(s'|s,a).
Matrix transition_kernel(const Mdp& mdp, const Policy& policy);

// xi^pi(s) = sum_{a,r} pi(a|s) P(r|s,a) r.
Vector expected_reward(const Mdp& mdp, const Policy& policy);

// Stationary distribution of a row-stochastic kernel, by solving the linear
// system (P^T - I | normalization) rather than power iteration. Throws if the
// solve does not certify mu P = mu within kSolveTol or mu has negative mass.
Vector stationary_distribution(const Matrix& kernel);

struct ChainAnalysis {
  Matrix kernel;
  Vector stationary;
  double spectral_gap = 0.0;  // 1 - |second-largest eigenvalue modulus|
  int mixing_time = 0;        // smallest tau with max_s TV(P^tau(s,.), mu) <= 1/4
};

// Requires an irreducible aperiodic chain; reducible or periodic inputs fail
// the mixing-time search (or the gap computation) with a diagnostic error.
ChainAnalysis analyze_chain(const Matrix& kernel);

// gamma < 1: value = V_gamma, average_reward = 0.
// gamma == 1: value = bias normalized so mu^pi . value = 0, average_reward = rbar.
struct ValueOracle {
  double gamma = 0.0;
  Vector value;
  double average_reward = 0.0;
};

ValueOracle exact_values(const Mdp& mdp, const Policy& policy);

// residual(s) = xi^pi(s) - rbar + gamma (P^pi v)(s) - v(s).
// Zero iff (v, rbar) solves the unified Bellman equation; rbar must be 0 when
// gamma < 1.
Vector bellman_residual(const Mdp& mdp, const Policy& policy, const Vector& values,
                        double average_reward);

struct ShiftConstants {
  // max over pi(a|s) > 0 of pi(a|s) / (mu^b(s) b(a|s)); infinity when the
  // target uses an action the behavior never takes.
  double policy_ratio_c = 0.0;
  // max_s mu^pi(s) / mu^b(s).
  double measure_ratio_c = 0.0;
  bool finite = false;
};

ShiftConstants shift_constants(const Mdp& mdp, const Policy& target,
                               const Policy& behavior);

}  // namespace oprl
