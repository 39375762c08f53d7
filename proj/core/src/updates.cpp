#include "oprl/updates.hpp"

#include <stdexcept>
#include <string>

namespace oprl {

UpdateRule::UpdateRule(RuleKind kind_, RuleMode mode_, Policy target_, Policy behavior_,
                       FeatureMap features_, double gamma_)
    : kind(kind_),
      mode(mode_),
      target(std::move(target_)),
      behavior(std::move(behavior_)),
      features(std::move(features_)),
      gamma(gamma_) {
  if (target.n_states() != behavior.n_states() ||
      target.n_actions() != behavior.n_actions())
    throw std::invalid_argument("UpdateRule: target/behavior dimension mismatch");
  validate_features(features, gamma);
}

bool UpdateRule::behavior_covers_target() const {
  if (kind == RuleKind::direct_sgd) return true;
  for (int s = 0; s < target.n_states(); ++s)
    for (int a = 0; a < target.n_actions(); ++a)
      if (target.prob(s, a) > 0.0 && behavior.prob(s, a) == 0.0) return false;
  return true;
}

StateMoments oracle_state_moments(const LossModel& model, int s) {
  return {model.moments.xi(s), model.moments.phi_next.row(s).transpose(), model.mu_b(s)};
}

StateMoments empirical_state_moments(const EmpiricalModel& model, const UpdateRule& rule,
                                     int s) {
  auto [xi_hat, phi_hat] = model.estimate_moments(rule.target, rule.features, s);
  return {xi_hat, std::move(phi_hat), model.clamped_invariant(s)};
}

double td_delta(const UpdateRule& rule, const StateMoments& m, const Vector& theta,
                int s) {
  return m.xi - rule.features.zeta.dot(theta) + rule.gamma * m.phi_next.dot(theta) -
         rule.features.phi.row(s).dot(theta);
}

namespace {

double importance_ratio(const UpdateRule& rule, int s, int a) {
  const double b = rule.behavior.prob(s, a);
  if (b == 0.0)
    throw std::invalid_argument("direction: behavior probability is zero at (s=" +
                                std::to_string(s) + ", a=" + std::to_string(a) + ")");
  return rule.target.prob(s, a) / b;
}

}  // namespace

Vector direction(const UpdateRule& rule, const Vector& theta, const Transition& z,
                 const StateMoments& m) {
  const FeatureMap& f = rule.features;
  switch (rule.kind) {
    case RuleKind::direct_sgd: {
      const double delta = td_delta(rule, m, theta, z.s);
      return delta *
             (rule.gamma * m.phi_next - f.phi.row(z.s).transpose() - f.zeta);
    }
    case RuleKind::td_sgd: {
      const double delta = td_delta(rule, m, theta, z.s);
      return importance_ratio(rule, z.s, z.a) * delta *
             (rule.gamma * f.phi.row(z.s_next).transpose() - f.phi.row(z.s).transpose() -
              f.zeta);
    }
    case RuleKind::td0: {
      const double temporal_diff = z.r - f.zeta.dot(theta) +
                                   rule.gamma * f.phi.row(z.s_next).dot(theta) -
                                   f.phi.row(z.s).dot(theta);
      return -(importance_ratio(rule, z.s, z.a) / m.mu_b) * temporal_diff *
             (f.phi.row(z.s).transpose() + f.zeta);
    }
  }
  throw std::logic_error("direction: unknown rule kind");
}

Vector mean_direction(const UpdateRule& rule, const Mdp& mdp, const LossModel& model,
                      const Vector& theta) {
  Vector mean = Vector::Zero(rule.features.dim);
  for (int s = 0; s < mdp.n_states(); ++s) {
    const StateMoments m = oracle_state_moments(model, s);
    for (int a = 0; a < mdp.n_actions(); ++a) {
      const double pb = model.mu_b(s) * rule.behavior.prob(s, a);
      if (pb == 0.0) continue;
      for (const auto& atom : mdp.reward_dist(s, a)) {
        if (atom.prob == 0.0) continue;
        for (int sp = 0; sp < mdp.n_states(); ++sp) {
          const double p = pb * atom.prob * mdp.transition(s, a, sp);
          if (p == 0.0) continue;
          mean += p * direction(rule, theta, {s, a, atom.value, sp}, m);
        }
      }
    }
  }
  return mean;
}

double direction_error(const UpdateRule& rule, const Vector& theta, const Transition& z,
                       const StateMoments& empirical, const StateMoments& oracle) {
  return (direction(rule, theta, z, empirical) - direction(rule, theta, z, oracle)).norm();
}

}  // namespace oprl
