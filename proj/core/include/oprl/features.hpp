#pragma once

#include "oprl/mdp.hpp"

namespace oprl {

// Linear parameterization of the unified value function:
// V_theta(s) = phi(s)^T theta and rbar_theta = zeta^T theta, with
// zeta orthogonal to every phi(s). zeta = 0 in the discounted case.
struct FeatureMap {
  int dim = 0;
  Matrix phi;   // n_states x dim, row s = phi(s)^T
  Vector zeta;  // dim

  double value(const Vector& theta, int s) const { return phi.row(s).dot(theta); }
  double average_reward(const Vector& theta) const { return zeta.dot(theta); }
};

// One-hot features; gamma = 1 appends the average-reward coordinate.
FeatureMap tabular_features(int n_states, double gamma);

// gamma = 1 map with the last state anchored to zero value.
// Contraction guarantees require mu^pi(s_{n-1}) > 0 (checked by callers).
FeatureMap anchored_features(int n_states);

// gamma = 1 map whose value rows are an orthonormal basis of the complement
// of the all-ones vector; built deterministically with signs fixed so the
// first nonzero entry of each basis column is positive.
FeatureMap orthonormal_features(int n_states);

// Throws unless zeta is orthogonal to every phi(s) within 1e-12 and, for
// gamma < 1, zeta = 0.
void validate_features(const FeatureMap& features, double gamma);

// Oracle conditional reward and post-transition feature:
// xi(s) = E^pi_s[r], phi_next row s = (sum_{s'} P^pi(s,s') phi(s'))^T.
struct OracleMoments {
  Vector xi;
  Matrix phi_next;
};

OracleMoments oracle_moments(const Mdp& mdp, const Policy& target,
                             const FeatureMap& features);

// Everything the quadratic loss l(theta) = E_{mu^b} 1/2 delta(theta, s)^2
// determines: its (theta-independent) Hessian, the TD(0) mean-field matrix D,
// and the minimizer theta*.
struct LossModel {
  double gamma = 0.0;
  FeatureMap features;
  Vector mu_b;
  OracleMoments moments;
  Matrix w;         // n x d, row s = (-zeta + gamma phi_next(s) - phi(s))^T
  Matrix hessian;   // sum_s mu_b(s) w(s) w(s)^T
  Matrix d_matrix;  // sum_s [phi(s) phi(s)^T - gamma phi(s) phi_next(s)^T] + zeta zeta^T
  Vector theta_star;
  double l_star = 0.0;
};

// Requires realizability: the weighted least-squares system for theta* must be
// consistent. Throws a diagnostic naming the residual otherwise. A singular
// but consistent system (e.g. unanchored tabular gamma = 1) yields the
// minimum-norm minimizer.
LossModel build_loss_model(const Mdp& mdp, const Policy& target, const Policy& behavior,
                           const FeatureMap& features);

double delta_value(const LossModel& model, const Vector& theta, int s);
double loss_value(const LossModel& model, const Vector& theta);
std::pair<double, Vector> loss_and_grad(const LossModel& model, const Vector& theta);

enum class RuleKind { direct_sgd, td_sgd, td0 };

// SGD rules contract at the smallest eigenvalue of the Hessian; TD(0) at the
// smallest eigenvalue of sym(D). May be <= 0; reported as-is.
double contraction_constant(const LossModel& model, RuleKind kind);

}  // namespace oprl
