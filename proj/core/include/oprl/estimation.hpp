#pragma once

#include "oprl/features.hpp"
#include "oprl/mdp.hpp"
#include "oprl/trajectory.hpp"

#include <vector>

namespace oprl {

// Running visit counts feeding the sample-average estimators. The reward
// supports are read from the MDP declaration (dense count tables, not hashes
// of observed floats); the transition and reward probabilities themselves are
// treated as unknown. Single writer: the run loop.
class EmpiricalModel {
 public:
  explicit EmpiricalModel(const Mdp& mdp);

  // Increments all four count tables consistently; throws if the observed
  // reward is not in the declared support for (s, a).
  void update(const Transition& z);

  long long total() const { return t_; }
  long long visits(int s) const { return count_s_[s]; }
  long long visits(int s, int a) const { return count_sa_[s * n_actions_ + a]; }
  long long visits(int s, int a, int s_next) const {
    return count_sas_[(s * n_actions_ + a) * n_states_ + s_next];
  }
  long long reward_visits(int s, int a, int support_index) const {
    return count_sar_[s * n_actions_ + a][support_index];
  }
  int reward_support_size(int s, int a) const {
    return static_cast<int>(reward_support_[s * n_actions_ + a].size());
  }

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }

  // p_hat(.|s) = sum_a pi(a|s) N(s,a,.)/N(s,a); unvisited (s,a) contribute
  // the uniform distribution over successors.
  Vector estimate_transition(const Policy& target, int s) const;

  // pi-mixed reward distribution over the declared support values at s;
  // unvisited (s,a) contribute uniform mass over that pair's support.
  // Returned as parallel (value, probability) arrays.
  std::pair<std::vector<double>, std::vector<double>> estimate_reward_dist(
      const Policy& target, int s) const;

  // Plug-in (xi_hat(s), phi_hat(s)) under the estimated distributions.
  std::pair<double, Vector> estimate_moments(const Policy& target,
                                             const FeatureMap& features, int s) const;

  // mu_hat(s) = N(s)/t. Requires t >= 1.
  double estimate_invariant(int s) const;

  // max(mu_hat(s), 1/(2 t |S|)): keeps 1/mu_hat finite for states not yet
  // visited. Never binds at the current state of the run loop.
  double clamped_invariant(int s) const;
  double invariant_floor() const;

 private:
  int reward_index(int s, int a, double r) const;

  int n_states_ = 0;
  int n_actions_ = 0;
  long long t_ = 0;
  std::vector<long long> count_s_;                    // N(s)
  std::vector<long long> count_sa_;                   // N(s,a)
  std::vector<long long> count_sas_;                  // N(s,a,s')
  std::vector<std::vector<long long>> count_sar_;     // N(s,a,r), declared support
  std::vector<std::vector<double>> reward_support_;   // values per (s,a)
};

// ~e_t at state s: the worst of the l1 error of the pi-mixed transition
// estimate, the l1 error of the pi-mixed reward estimate, and the inverse
// invariant-measure error |1/mu_hat(s) - 1/mu_b(s)|. Computable only where
// the true model is known; test and diagnostic use.
double estimation_error(const EmpiricalModel& model, const Mdp& mdp,
                        const Policy& target, const Vector& mu_b, int s);

}  // namespace oprl
