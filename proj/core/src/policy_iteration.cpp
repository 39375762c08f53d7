#include "oprl/policy_iteration.hpp"

#include "oprl/tabular.hpp"
#include "oprl/trajectory.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace oprl {

Policy greedy_improve(const Mdp& mdp, const Vector& v_hat) {
  if (mdp.average_reward())
    throw std::invalid_argument("greedy_improve: requires gamma < 1");
  if (v_hat.size() != mdp.n_states())
    throw std::invalid_argument("greedy_improve: value vector has wrong length");
  std::vector<int> actions(mdp.n_states(), 0);
  for (int s = 0; s < mdp.n_states(); ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < mdp.n_actions(); ++a) {
      double q = mdp.mean_reward(s, a);
      for (int sp = 0; sp < mdp.n_states(); ++sp)
        q += mdp.gamma() * mdp.transition(s, a, sp) * v_hat(sp);
      if (q > best) {  // strict: ties keep the lowest action index
        best = q;
        actions[s] = a;
      }
    }
  }
  return Policy::deterministic(actions, mdp.n_actions());
}

OptimalSolution optimal_oracle(const Mdp& mdp) {
  if (mdp.average_reward())
    throw std::invalid_argument("optimal_oracle: requires gamma < 1");
  const int n = mdp.n_states();
  Vector v = Vector::Zero(n);
  for (int iter = 0; iter < 1000000; ++iter) {
    Vector next(n);
    for (int s = 0; s < n; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < mdp.n_actions(); ++a) {
        double q = mdp.mean_reward(s, a);
        for (int sp = 0; sp < n; ++sp) q += mdp.gamma() * mdp.transition(s, a, sp) * v(sp);
        best = std::max(best, q);
      }
      next(s) = best;
    }
    const double step = (next - v).lpNorm<Eigen::Infinity>();
    v = next;
    if (step <= 1e-13) break;
  }

  OptimalSolution out{greedy_improve(mdp, v), v};

  // Residual of the Bellman optimality equation.
  double residual = 0.0;
  for (int s = 0; s < n; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < mdp.n_actions(); ++a) {
      double q = mdp.mean_reward(s, a);
      for (int sp = 0; sp < n; ++sp) q += mdp.gamma() * mdp.transition(s, a, sp) * v(sp);
      best = std::max(best, q);
    }
    residual = std::max(residual, std::abs(best - v(s)));
  }
  if (residual > 1e-10)
    throw std::runtime_error("optimal_oracle: value iteration residual " +
                             std::to_string(residual));
  return out;
}

namespace {

RoundReport report_for(const Mdp& mdp, const Policy& policy, int round,
                       const OptimalSolution& opt, const Vector& mu_star) {
  const ValueOracle exact = exact_values(mdp, policy);
  return RoundReport{.round = round,
                     .policy = policy,
                     .eps_hat = 0.0,
                     .suboptimality = mu_star.dot(opt.value - exact.value),
                     .shift = {},
                     .contraction_c = 0.0,
                     .evaluated = false};
}

}  // namespace

IterationReport approximate_policy_iteration(const Mdp& mdp, const Policy& behavior,
                                             const PolicyIterConfig& config) {
  if (mdp.average_reward())
    throw std::invalid_argument("approximate_policy_iteration: requires gamma < 1");
  if (config.rounds < 0 || config.t_eval < 1)
    throw std::invalid_argument("approximate_policy_iteration: invalid K or T_eval");

  const OptimalSolution opt = optimal_oracle(mdp);
  const Vector mu_star = stationary_distribution(transition_kernel(mdp, opt.policy));
  const FeatureMap features = tabular_features(mdp.n_states(), mdp.gamma());

  IterationReport out{.rounds = {}, .final_policy = config.initial.value_or(Policy::uniform(
                                        mdp.n_states(), mdp.n_actions()))};
  Policy current = out.final_policy;

  // Round 0 reports the initial policy without evaluating it.
  out.rounds.push_back(report_for(mdp, current, 0, opt, mu_star));

  for (int k = 1; k <= config.rounds; ++k) {
    RoundReport rep = report_for(mdp, current, k, opt, mu_star);
    rep.evaluated = true;
    rep.shift = shift_constants(mdp, current, behavior);

    const LossModel model = build_loss_model(mdp, current, behavior, features);
    rep.contraction_c = contraction_constant(model, config.rule);
    const StepSchedule schedule =
        rep.contraction_c > config.min_contraction
            ? StepSchedule::contraction(rep.contraction_c)
            : StepSchedule::inverse_sqrt(config.eta0);

    const ProjectionSet set = ProjectionSet::ball(
        config.projection_margin * (model.theta_star.norm() + 1.0));

    // Fresh behavior data every round keeps rounds conditionally independent.
    SamplerConfig sampler;
    sampler.mode = SampleMode::markov;
    sampler.horizon = config.t_eval;
    sampler.seed = config.seed;
    sampler.stream = static_cast<std::uint64_t>(k);
    const std::vector<Transition> data = sample_trajectory(mdp, behavior, sampler);

    const UpdateRule rule(config.rule, config.mode, current, behavior, features,
                          mdp.gamma());
    EmpiricalModel estimator(mdp);
    RunOptions options;
    options.oracle = &model;
    if (config.mode == RuleMode::empirical) options.estimator = &estimator;
    const RunResult result =
        oprl::run(rule, data, schedule, set, Vector::Zero(features.dim), options);

    // Divergence: the run ends with a loss gap 10x worse than it started.
    // Early contraction-schedule steps overshoot routinely; only a final gap
    // this bad means the evaluation never recovered.
    const double initial_gap = result.records.front().loss_gap;
    if (initial_gap > 0.0 && result.records.back().loss_gap > 10.0 * initial_gap)
      throw EvaluationDivergence(k);

    const Vector v_hat = features.phi * result.theta_avg;
    const ValueOracle exact = exact_values(mdp, current);
    const Vector mu_pi = stationary_distribution(transition_kernel(mdp, current));
    rep.eps_hat = mu_pi.dot((exact.value - v_hat).cwiseAbs());
    out.rounds.push_back(rep);

    current = greedy_improve(mdp, v_hat);
  }

  out.final_policy = current;
  out.final_suboptimality = report_for(mdp, current, config.rounds + 1, opt, mu_star)
                                .suboptimality;
  return out;
}

IterationReport policy_iteration_with(
    const Mdp& mdp, const Policy& initial, int rounds,
    const std::function<Vector(int, const Policy&, const Vector&)>& estimate) {
  if (mdp.average_reward())
    throw std::invalid_argument("policy_iteration_with: requires gamma < 1");
  const OptimalSolution opt = optimal_oracle(mdp);
  const Vector mu_star = stationary_distribution(transition_kernel(mdp, opt.policy));

  IterationReport out{.rounds = {}, .final_policy = initial};
  Policy current = initial;
  out.rounds.push_back(report_for(mdp, current, 0, opt, mu_star));

  for (int k = 1; k <= rounds; ++k) {
    RoundReport rep = report_for(mdp, current, k, opt, mu_star);
    rep.evaluated = true;
    const ValueOracle exact = exact_values(mdp, current);
    const Vector v_hat = estimate(k, current, exact.value);
    const Vector mu_pi = stationary_distribution(transition_kernel(mdp, current));
    rep.eps_hat = mu_pi.dot((exact.value - v_hat).cwiseAbs());
    out.rounds.push_back(rep);
    current = greedy_improve(mdp, v_hat);
  }

  out.final_policy = current;
  out.final_suboptimality =
      report_for(mdp, current, rounds + 1, opt, mu_star).suboptimality;
  return out;
}

}  // namespace oprl
