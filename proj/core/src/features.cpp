#include "oprl/features.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>
#include <string>

namespace oprl {

FeatureMap tabular_features(int n_states, double gamma) {
  if (n_states < 1) throw std::invalid_argument("tabular_features: n_states must be >= 1");
  FeatureMap out;
  if (gamma < 1.0) {
    out.dim = n_states;
    out.phi = Matrix::Identity(n_states, n_states);
    out.zeta = Vector::Zero(n_states);
  } else {
    out.dim = n_states + 1;
    out.phi = Matrix::Zero(n_states, n_states + 1);
    out.phi.leftCols(n_states) = Matrix::Identity(n_states, n_states);
    out.zeta = Vector::Zero(n_states + 1);
    out.zeta(n_states) = 1.0;
  }
  return out;
}

FeatureMap anchored_features(int n_states) {
  if (n_states < 1) throw std::invalid_argument("anchored_features: n_states must be >= 1");
  FeatureMap out;
  out.dim = n_states;
  out.phi = Matrix::Zero(n_states, n_states);
  for (int s = 0; s + 1 < n_states; ++s) out.phi(s, s) = 1.0;
  out.zeta = Vector::Zero(n_states);
  out.zeta(n_states - 1) = 1.0;
  return out;
}

FeatureMap orthonormal_features(int n_states) {
  if (n_states < 1)
    throw std::invalid_argument("orthonormal_features: n_states must be >= 1");
  const int n = n_states;

  // Gram-Schmidt over the canonical complement basis {e_i - 1/n} of the
  // all-ones vector, in index order.
  Matrix u(n, n - 1);
  for (int j = 0; j < n - 1; ++j) {
    Vector col = Vector::Constant(n, -1.0 / n);
    col(j) += 1.0;
    for (int k = 0; k < j; ++k) col -= u.col(k).dot(col) * u.col(k);
    const double norm = col.norm();
    if (norm < 1e-14)
      throw std::runtime_error("orthonormal_features: degenerate basis column");
    col /= norm;
    for (int i = 0; i < n; ++i) {
      if (std::abs(col(i)) > 1e-14) {
        if (col(i) < 0.0) col = -col;
        break;
      }
    }
    u.col(j) = col;
  }

  FeatureMap out;
  out.dim = n;
  out.phi = Matrix::Zero(n, n);
  if (n > 1) out.phi.leftCols(n - 1) = u;
  out.zeta = Vector::Zero(n);
  out.zeta(n - 1) = 1.0;
  return out;
}

void validate_features(const FeatureMap& features, double gamma) {
  if (features.phi.cols() != features.dim || features.zeta.size() != features.dim)
    throw std::invalid_argument("validate_features: inconsistent dimensions");
  if (gamma < 1.0 && features.zeta.lpNorm<Eigen::Infinity>() > 0.0)
    throw std::invalid_argument("validate_features: zeta must be zero when gamma < 1");
  const Vector overlap = features.phi * features.zeta;
  if (overlap.lpNorm<Eigen::Infinity>() > 1e-12)
    throw std::invalid_argument(
        "validate_features: zeta not orthogonal to phi(s) (max overlap " +
        std::to_string(overlap.lpNorm<Eigen::Infinity>()) + ")");
}

OracleMoments oracle_moments(const Mdp& mdp, const Policy& target,
                             const FeatureMap& features) {
  if (features.phi.rows() != mdp.n_states())
    throw std::invalid_argument("oracle_moments: feature map has wrong state count");
  OracleMoments out;
  out.xi = expected_reward(mdp, target);
  out.phi_next = transition_kernel(mdp, target) * features.phi;
  return out;
}

LossModel build_loss_model(const Mdp& mdp, const Policy& target, const Policy& behavior,
                           const FeatureMap& features) {
  validate_features(features, mdp.gamma());

  LossModel model;
  model.gamma = mdp.gamma();
  model.features = features;
  model.mu_b = stationary_distribution(transition_kernel(mdp, behavior));
  model.moments = oracle_moments(mdp, target, features);

  model.w = model.gamma * model.moments.phi_next - features.phi;
  model.w.rowwise() -= features.zeta.transpose();

  model.hessian = model.w.transpose() * model.mu_b.asDiagonal() * model.w;
  model.d_matrix = features.phi.transpose() * features.phi -
                   model.gamma * features.phi.transpose() * model.moments.phi_next +
                   features.zeta * features.zeta.transpose();

  // theta* from the weighted least-squares system sqrt(mu) (w theta + xi) = 0;
  // SVD gives the minimum-norm solution when the system is singular.
  const Vector sqrt_mu = model.mu_b.cwiseSqrt();
  const Matrix a = sqrt_mu.asDiagonal() * model.w;
  const Vector b = -(sqrt_mu.asDiagonal() * model.moments.xi);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  model.theta_star = svd.solve(b);

  model.l_star = loss_value(model, model.theta_star);
  const double residual = std::sqrt(2.0 * model.l_star);
  const double scale = 1.0 + model.moments.xi.lpNorm<Eigen::Infinity>();
  if (residual > 1e-8 * scale)
    throw std::runtime_error(
        "build_loss_model: Bellman system not realizable under these features "
        "(weighted residual " +
        std::to_string(residual) + ")");
  return model;
}

double delta_value(const LossModel& model, const Vector& theta, int s) {
  return model.moments.xi(s) + model.w.row(s).dot(theta);
}

double loss_value(const LossModel& model, const Vector& theta) {
  double loss = 0.0;
  for (int s = 0; s < model.w.rows(); ++s) {
    const double delta = delta_value(model, theta, s);
    loss += 0.5 * model.mu_b(s) * delta * delta;
  }
  return loss;
}

std::pair<double, Vector> loss_and_grad(const LossModel& model, const Vector& theta) {
  double loss = 0.0;
  Vector grad = Vector::Zero(theta.size());
  for (int s = 0; s < model.w.rows(); ++s) {
    const double delta = delta_value(model, theta, s);
    loss += 0.5 * model.mu_b(s) * delta * delta;
    grad += model.mu_b(s) * delta * model.w.row(s).transpose();
  }
  return {loss, grad};
}

double contraction_constant(const LossModel& model, RuleKind kind) {
  const Matrix& m = kind == RuleKind::td0 ? model.d_matrix : model.hessian;
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  return eig.eigenvalues().minCoeff();
}

}  // namespace oprl
