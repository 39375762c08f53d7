#pragma once

#include "oprl/engine.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace oprl {

// Deterministic greedy policy against an estimated value function:
// argmax_a [ E r(s,a) + gamma sum_{s'} P(s'|s,a) v_hat(s') ], ties broken
// toward the lowest action index. Requires gamma < 1.
Policy greedy_improve(const Mdp& mdp, const Vector& v_hat);

struct OptimalSolution {
  Policy policy;
  Vector value;
};

// Exact DP baseline: value iteration to a 1e-13 sup-norm step, greedy
// extraction, and a Bellman-optimality residual check at 1e-10.
OptimalSolution optimal_oracle(const Mdp& mdp);

struct PolicyIterConfig {
  int rounds = 1;            // K
  long long t_eval = 1000;   // samples per evaluation
  RuleKind rule = RuleKind::td0;
  RuleMode mode = RuleMode::empirical;
  // Contraction schedule with the per-round constant when it is usable,
  // eta0/sqrt(t) otherwise.
  double eta0 = 1.0;
  double min_contraction = 1e-6;
  // Ball radius factor: radius = margin * (||theta*_k|| + 1).
  double projection_margin = 2.0;
  std::uint64_t seed = 0;
  std::optional<Policy> initial;  // defaults to uniform
};

struct RoundReport {
  int round = 0;
  Policy policy;           // pi_k, the policy evaluated this round
  double eps_hat = 0.0;    // sum_s mu^{pi_k}(s) |V^{pi_k}(s) - V_hat(s)|
  double suboptimality = 0.0;  // sum_s mu*(s) (V*(s) - V^{pi_k}(s))
  ShiftConstants shift;
  double contraction_c = 0.0;
  bool evaluated = false;  // round 0 reports the initial policy only
};

// rounds[0] reports the initial policy; rounds[k] (k = 1..K) reports pi_k,
// the policy evaluated in round k, with pi_1 the initial policy. The round-K
// improvement yields final_policy, whose suboptimality is reported separately.
struct IterationReport {
  std::vector<RoundReport> rounds;
  Policy final_policy;
  double final_suboptimality = 0.0;
};

// Thrown when a round's recorded loss gap exceeds ten times its initial value.
struct EvaluationDivergence : std::runtime_error {
  int round;
  explicit EvaluationDivergence(int round_)
      : std::runtime_error("policy evaluation diverged in round " + std::to_string(round_)),
        round(round_) {}
};

// Greedy improvement against values estimated by Algorithm-style evaluation
// runs on fresh behavior trajectories, one per round. Policies that leave the
// behavior support are reported through the round's shift constants, not
// rejected. Requires gamma < 1 and full behavior action support.
IterationReport approximate_policy_iteration(const Mdp& mdp, const Policy& behavior,
                                             const PolicyIterConfig& config);

// Same improvement loop with the evaluation step supplied by the caller:
// estimate(k, pi_k, v_exact) returns V_hat for round k. Used to study the
// error-propagation recursion with exact or synthetically perturbed values.
IterationReport policy_iteration_with(
    const Mdp& mdp, const Policy& initial, int rounds,
    const std::function<Vector(int, const Policy&, const Vector&)>& estimate);

}  // namespace oprl
