#pragma once

#include "oprl/estimation.hpp"
#include "oprl/features.hpp"
#include "oprl/mdp.hpp"
#include "oprl/trajectory.hpp"

namespace oprl {

enum class RuleMode { oracle, empirical };

// Immutable descriptor of one stochastic update rule. oracle mode evaluates
// with the exact conditional moments and invariant measure; empirical mode
// with sample-average estimates from an EmpiricalModel snapshot.
//
// The importance-weighted rules assume the behavior puts mass on every
// target-supported action; behavior_covers_target() reports the condition
// (runs over behavior data never evaluate the ratio at an uncovered pair, so
// a violation is a surfaced diagnostic, not a crash).
struct UpdateRule {
  RuleKind kind = RuleKind::direct_sgd;
  RuleMode mode = RuleMode::oracle;
  Policy target;
  Policy behavior;
  FeatureMap features;
  double gamma = 1.0;

  UpdateRule(RuleKind kind_, RuleMode mode_, Policy target_, Policy behavior_,
             FeatureMap features_, double gamma_);
  bool behavior_covers_target() const;
};

// Per-state inputs a direction evaluation needs beyond the raw transition:
// conditional mean reward, conditional mean next feature, and the behavior
// invariant mass at s (clamped estimate in empirical mode).
struct StateMoments {
  double xi = 0.0;
  Vector phi_next;
  double mu_b = 0.0;
};

StateMoments oracle_state_moments(const LossModel& model, int s);
StateMoments empirical_state_moments(const EmpiricalModel& model, const UpdateRule& rule,
                                     int s);

// delta(theta, s) = xi(s) + (-zeta + gamma phi_next(s) - phi(s))^T theta,
// shared between direct-SGD and TD-SGD at the same step.
double td_delta(const UpdateRule& rule, const StateMoments& m, const Vector& theta, int s);

// The update direction g (oracle moments) or g_hat (estimated moments) at
// (theta, z). Throws when the behavior puts no mass on a needed action.
Vector direction(const UpdateRule& rule, const Vector& theta, const Transition& z,
                 const StateMoments& m);

// Exact mean field: sum over (s,a,r,s') of mu^b(s) b(a|s) P(s'|s,a) P(r|s,a)
// g(theta, z), by exhaustive summation with oracle moments. Equals grad l for
// the SGD rules and -sum_s delta(theta,s)(phi(s)+zeta) for TD(0).
Vector mean_direction(const UpdateRule& rule, const Mdp& mdp, const LossModel& model,
                      const Vector& theta);

// e_t = ||g_hat - g|| at the same (theta, z).
double direction_error(const UpdateRule& rule, const Vector& theta, const Transition& z,
                       const StateMoments& empirical, const StateMoments& oracle);

}  // namespace oprl
