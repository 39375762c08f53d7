#include "oprl/mdp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oprl {

namespace {

void check_distribution_row(const Eigen::Ref<const Eigen::RowVectorXd>& row,
                            const std::string& what) {
  for (int i = 0; i < row.size(); ++i) {
    if (row(i) < 0.0)
      throw std::invalid_argument(what + ": negative probability at index " +
                                  std::to_string(i));
  }
  const double sum = row.sum();
  if (std::abs(sum - 1.0) > kProbTol)
    throw std::invalid_argument(what + ": probabilities sum to " + std::to_string(sum) +
                                ", expected 1 within 1e-12");
}

}  // namespace

Mdp::Mdp(std::vector<Matrix> transition_by_action,
         std::vector<std::vector<RewardAtom>> rewards, double gamma)
    : transition_(std::move(transition_by_action)),
      rewards_(std::move(rewards)),
      gamma_(gamma) {
  if (transition_.empty())
    throw std::invalid_argument("Mdp: at least one action required");
  n_actions_ = static_cast<int>(transition_.size());
  n_states_ = static_cast<int>(transition_[0].rows());
  if (n_states_ <= 0) throw std::invalid_argument("Mdp: at least one state required");
  if (!(gamma_ > 0.0 && gamma_ <= 1.0))
    throw std::invalid_argument("Mdp: gamma must lie in (0, 1]");
  if (rewards_.size() != static_cast<std::size_t>(n_states_) * n_actions_)
    throw std::invalid_argument("Mdp: reward table must have one entry per (s,a)");

  for (int a = 0; a < n_actions_; ++a) {
    const Matrix& p = transition_[a];
    if (p.rows() != n_states_ || p.cols() != n_states_)
      throw std::invalid_argument("Mdp: transition matrix for action " +
                                  std::to_string(a) + " has wrong shape");
    for (int s = 0; s < n_states_; ++s)
      check_distribution_row(p.row(s), "Mdp: transition row (s=" + std::to_string(s) +
                                           ", a=" + std::to_string(a) + ")");
  }

  mean_reward_.resize(n_states_, n_actions_);
  reward_bound_ = 0.0;
  for (int s = 0; s < n_states_; ++s) {
    for (int a = 0; a < n_actions_; ++a) {
      const auto& dist = rewards_[s * n_actions_ + a];
      if (dist.empty())
        throw std::invalid_argument("Mdp: empty reward support at (s=" +
                                    std::to_string(s) + ", a=" + std::to_string(a) + ")");
      double mass = 0.0, mean = 0.0;
      for (const auto& atom : dist) {
        if (atom.prob < 0.0)
          throw std::invalid_argument("Mdp: negative reward probability at (s=" +
                                      std::to_string(s) + ", a=" + std::to_string(a) + ")");
        mass += atom.prob;
        mean += atom.prob * atom.value;
        reward_bound_ = std::max(reward_bound_, std::abs(atom.value));
      }
      if (std::abs(mass - 1.0) > kProbTol)
        throw std::invalid_argument("Mdp: reward probabilities at (s=" + std::to_string(s) +
                                    ", a=" + std::to_string(a) + ") sum to " +
                                    std::to_string(mass) + ", expected 1 within 1e-12");
      mean_reward_(s, a) = mean;
    }
  }
}

Policy::Policy(Matrix probs) : probs_(std::move(probs)) {
  if (probs_.rows() <= 0 || probs_.cols() <= 0)
    throw std::invalid_argument("Policy: empty probability table");
  for (int s = 0; s < probs_.rows(); ++s) {
    for (int a = 0; a < probs_.cols(); ++a)
      if (probs_(s, a) < 0.0)
        throw std::invalid_argument("Policy: negative probability at (s=" +
                                    std::to_string(s) + ", a=" + std::to_string(a) + ")");
    const double sum = probs_.row(s).sum();
    if (std::abs(sum - 1.0) > kProbTol)
      throw std::invalid_argument("Policy: row " + std::to_string(s) + " sums to " +
                                  std::to_string(sum) + ", expected 1 within 1e-12");
  }
}

Policy Policy::uniform(int n_states, int n_actions) {
  return Policy(Matrix::Constant(n_states, n_actions, 1.0 / n_actions));
}

Policy Policy::deterministic(const std::vector<int>& action_of_state, int n_actions) {
  Matrix probs = Matrix::Zero(static_cast<int>(action_of_state.size()), n_actions);
  for (int s = 0; s < static_cast<int>(action_of_state.size()); ++s) {
    const int a = action_of_state[s];
    if (a < 0 || a >= n_actions)
      throw std::invalid_argument("Policy::deterministic: action index out of range");
    probs(s, a) = 1.0;
  }
  return Policy(std::move(probs));
}

bool Policy::deterministic_actions(std::vector<int>* action_of_state) const {
  std::vector<int> actions(n_states(), -1);
  for (int s = 0; s < n_states(); ++s) {
    for (int a = 0; a < n_actions(); ++a) {
      if (probs_(s, a) == 1.0) actions[s] = a;
    }
    if (actions[s] < 0) return false;
  }
  if (action_of_state) *action_of_state = actions;
  return true;
}

Matrix transition_kernel(const Mdp& mdp, const Policy& policy) {
  if (policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions())
    throw std::invalid_argument("transition_kernel: policy/MDP dimension mismatch");
  Matrix kernel = Matrix::Zero(mdp.n_states(), mdp.n_states());
  for (int a = 0; a < mdp.n_actions(); ++a)
    kernel += policy.probs().col(a).asDiagonal() * mdp.action_kernel(a);
  return kernel;
}

Vector expected_reward(const Mdp& mdp, const Policy& policy) {
  if (policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions())
    throw std::invalid_argument("expected_reward: policy/MDP dimension mismatch");
  Vector xi = Vector::Zero(mdp.n_states());
  for (int s = 0; s < mdp.n_states(); ++s)
    for (int a = 0; a < mdp.n_actions(); ++a)
      xi(s) += policy.prob(s, a) * mdp.mean_reward(s, a);
  return xi;
}

Vector stationary_distribution(const Matrix& kernel) {
  const int n = static_cast<int>(kernel.rows());
  if (kernel.cols() != n) throw std::invalid_argument("stationary_distribution: non-square kernel");

  // (P^T - I) mu = 0 augmented with 1^T mu = 1, solved by least squares.
  Matrix a(n + 1, n);
  a.topRows(n) = kernel.transpose() - Matrix::Identity(n, n);
  a.row(n).setOnes();
  Vector b = Vector::Zero(n + 1);
  b(n) = 1.0;

  Vector mu = a.colPivHouseholderQr().solve(b);

  const double residual = (kernel.transpose() * mu - mu).lpNorm<Eigen::Infinity>();
  if (residual > kSolveTol)
    throw std::runtime_error("stationary_distribution: residual " + std::to_string(residual) +
                             " exceeds tolerance; chain may be reducible");
  for (int s = 0; s < n; ++s) {
    if (mu(s) < -1e-9)
      throw std::runtime_error("stationary_distribution: negative mass at state " +
                               std::to_string(s));
    mu(s) = std::max(mu(s), 0.0);
  }
  mu /= mu.sum();
  return mu;
}

ChainAnalysis analyze_chain(const Matrix& kernel) {
  const int n = static_cast<int>(kernel.rows());
  for (int s = 0; s < n; ++s) {
    const double sum = kernel.row(s).sum();
    if (std::abs(sum - 1.0) > kProbTol || kernel.row(s).minCoeff() < 0.0)
      throw std::invalid_argument("analyze_chain: kernel row " + std::to_string(s) +
                                  " is not a probability distribution");
  }

  ChainAnalysis out;
  out.kernel = kernel;
  out.stationary = stationary_distribution(kernel);

  // Spectral gap from the second-largest eigenvalue modulus.
  double second = 0.0;
  if (n > 1) {
    Eigen::EigenSolver<Matrix> eig(kernel);
    std::vector<double> moduli(n);
    for (int i = 0; i < n; ++i) moduli[i] = std::abs(eig.eigenvalues()(i));
    std::sort(moduli.begin(), moduli.end(), std::greater<>());
    second = moduli[1];
  }
  if (second >= 1.0 - 1e-12)
    throw std::runtime_error(
        "analyze_chain: no spectral gap (|rho_2| = " + std::to_string(second) +
        "); chain is reducible or periodic");
  out.spectral_gap = 1.0 - second;

  // Smallest tau with max_s TV(P^tau(s,.), mu) <= 1/4, by direct iteration.
  Matrix power = kernel;
  const auto max_tv = [&](const Matrix& m) {
    double worst = 0.0;
    for (int s = 0; s < n; ++s)
      worst = std::max(worst, 0.5 * (m.row(s).transpose() - out.stationary).lpNorm<1>());
    return worst;
  };
  int tau = 1;
  while (max_tv(power) > 0.25) {
    if (++tau > kMixingCap)
      throw std::runtime_error("analyze_chain: mixing time exceeds cap " +
                               std::to_string(kMixingCap) +
                               "; chain is reducible or periodic");
    power = power * kernel;
  }
  out.mixing_time = tau;
  return out;
}

ValueOracle exact_values(const Mdp& mdp, const Policy& policy) {
  const Matrix kernel = transition_kernel(mdp, policy);
  const Vector reward = expected_reward(mdp, policy);
  const int n = mdp.n_states();

  ValueOracle out;
  out.gamma = mdp.gamma();

  if (!mdp.average_reward()) {
    const Matrix system = Matrix::Identity(n, n) - mdp.gamma() * kernel;
    out.value = system.colPivHouseholderQr().solve(reward);
    out.average_reward = 0.0;
    const double residual = (system * out.value - reward).lpNorm<Eigen::Infinity>();
    if (residual > kSolveTol)
      throw std::runtime_error("exact_values: discounted solve residual " +
                               std::to_string(residual));
    return out;
  }

  const Vector mu = stationary_distribution(kernel);
  out.average_reward = mu.dot(reward);

  // Bias: (I - P^pi) v = r^pi - rbar 1, normalized so mu^pi . v = 0.
  Matrix a(n + 1, n);
  a.topRows(n) = Matrix::Identity(n, n) - kernel;
  a.row(n) = mu.transpose();
  Vector b(n + 1);
  b.head(n) = reward.array() - out.average_reward;
  b(n) = 0.0;
  out.value = a.colPivHouseholderQr().solve(b);

  const double residual =
      ((Matrix::Identity(n, n) - kernel) * out.value - b.head(n)).lpNorm<Eigen::Infinity>() +
      std::abs(mu.dot(out.value));
  if (residual > kSolveTol)
    throw std::runtime_error("exact_values: bias solve residual " + std::to_string(residual) +
                             "; chain may be non-ergodic");
  return out;
}

Vector bellman_residual(const Mdp& mdp, const Policy& policy, const Vector& values,
                        double average_reward) {
  if (values.size() != mdp.n_states())
    throw std::invalid_argument("bellman_residual: value vector has wrong length");
  if (!mdp.average_reward() && average_reward != 0.0)
    throw std::invalid_argument("bellman_residual: rbar must be 0 when gamma < 1");
  const Matrix kernel = transition_kernel(mdp, policy);
  const Vector xi = expected_reward(mdp, policy);
  return xi.array() - average_reward + (mdp.gamma() * (kernel * values) - values).array();
}

ShiftConstants shift_constants(const Mdp& mdp, const Policy& target,
                               const Policy& behavior) {
  const Vector mu_b = stationary_distribution(transition_kernel(mdp, behavior));
  const double inf = std::numeric_limits<double>::infinity();

  ShiftConstants out;
  out.policy_ratio_c = 0.0;
  for (int s = 0; s < mdp.n_states(); ++s) {
    for (int a = 0; a < mdp.n_actions(); ++a) {
      const double p = target.prob(s, a);
      if (p <= 0.0) continue;
      const double denom = mu_b(s) * behavior.prob(s, a);
      out.policy_ratio_c = denom > 0.0 ? std::max(out.policy_ratio_c, p / denom) : inf;
    }
  }

  const Vector mu_pi = stationary_distribution(transition_kernel(mdp, target));
  out.measure_ratio_c = 0.0;
  for (int s = 0; s < mdp.n_states(); ++s) {
    if (mu_pi(s) <= 0.0) continue;
    out.measure_ratio_c =
        mu_b(s) > 0.0 ? std::max(out.measure_ratio_c, mu_pi(s) / mu_b(s)) : inf;
  }

  out.finite = std::isfinite(out.policy_ratio_c) && std::isfinite(out.measure_ratio_c);
  return out;
}

}  // namespace oprl
