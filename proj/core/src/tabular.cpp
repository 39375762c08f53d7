#include "oprl/tabular.hpp"

#include <stdexcept>

namespace oprl {

RunResult run_tabular_sparse(RuleKind kind, RuleMode mode, const Mdp& mdp,
                             const Policy& target, const Policy& behavior,
                             std::span<const Transition> data,
                             const StepSchedule& schedule, const ProjectionSet& set,
                             const Vector& theta0, EmpiricalModel* estimator,
                             bool capture_iterates) {
  const int n = mdp.n_states();
  const bool average = mdp.average_reward();
  const double gamma = mdp.gamma();
  const int dim = average ? n + 1 : n;
  if (theta0.size() != dim)
    throw std::invalid_argument("run_tabular_sparse: theta0 has wrong dimension");
  if (mode == RuleMode::empirical && estimator == nullptr)
    throw std::invalid_argument("run_tabular_sparse: empirical mode requires an estimator");

  const FeatureMap features = tabular_features(n, gamma);

  // Oracle-mode conditional moments; with one-hot features the conditional
  // next feature is the kernel row itself.
  Matrix kernel;
  Vector xi_true;
  Vector mu_b_true;
  if (mode == RuleMode::oracle) {
    kernel = transition_kernel(mdp, target);
    xi_true = expected_reward(mdp, target);
    mu_b_true = stationary_distribution(transition_kernel(mdp, behavior));
  }

  // xi and the pi-mixed successor row at s, per the active mode.
  const auto state_estimates = [&](int s, double* xi, Vector* p_row) {
    if (mode == RuleMode::empirical) {
      auto [xi_hat, phi_hat] = estimator->estimate_moments(target, features, s);
      *xi = xi_hat;
      *p_row = phi_hat.head(n);
    } else {
      *xi = xi_true(s);
      *p_row = kernel.row(s).transpose();
    }
  };

  StepSequence steps(schedule);
  Vector theta = theta0;
  Vector theta_sum = theta0;
  long long count = 1;

  RunResult out;
  if (capture_iterates) out.iterates.push_back(theta);

  double xi = 0.0;
  Vector p_row;

  for (long long t = 1; t <= static_cast<long long>(data.size()); ++t) {
    const Transition& z = data[static_cast<std::size_t>(t - 1)];
    if (estimator) estimator->update(z);
    const double eta = steps.eta(t);
    const double rbar = average ? theta(n) : 0.0;

    switch (kind) {
      case RuleKind::direct_sgd: {
        state_estimates(z.s, &xi, &p_row);
        const double delta = xi - rbar + gamma * p_row.dot(theta.head(n)) - theta(z.s);
        // Dense successor-row write; the current state additionally gains
        // eta delta, so its net factor is (1 - gamma p(s_t|s_t)).
        for (int sp = 0; sp < n; ++sp)
          if (p_row(sp) != 0.0) theta(sp) -= eta * gamma * delta * p_row(sp);
        theta(z.s) += eta * delta;
        if (average) theta(n) += eta * delta;
        break;
      }
      case RuleKind::td_sgd: {
        state_estimates(z.s, &xi, &p_row);
        const double b = behavior.prob(z.s, z.a);
        if (b == 0.0) throw std::invalid_argument("run_tabular_sparse: zero behavior mass");
        const double w =
            (target.prob(z.s, z.a) / b) *
            (xi - rbar + gamma * p_row.dot(theta.head(n)) - theta(z.s));
        theta(z.s) += eta * w;
        theta(z.s_next) -= eta * gamma * w;
        if (average) theta(n) += eta * w;
        break;
      }
      case RuleKind::td0: {
        const double b = behavior.prob(z.s, z.a);
        if (b == 0.0) throw std::invalid_argument("run_tabular_sparse: zero behavior mass");
        const double ratio = target.prob(z.s, z.a) / b;
        const double mu = mode == RuleMode::empirical ? estimator->clamped_invariant(z.s)
                                                      : mu_b_true(z.s);
        const double temporal_diff = z.r - rbar + gamma * theta(z.s_next) - theta(z.s);
        const double g = -(ratio / mu) * temporal_diff;
        theta(z.s) -= eta * g;
        if (average) theta(n) -= eta * g;
        break;
      }
    }

    theta = set.project(theta);
    theta_sum += theta;
    ++count;
    if (capture_iterates) out.iterates.push_back(theta);
  }

  out.theta_last = theta;
  out.theta_avg = theta_sum / static_cast<double>(count);
  return out;
}

}  // namespace oprl
