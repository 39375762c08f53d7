#include "oprl/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace oprl {

EmpiricalModel::EmpiricalModel(const Mdp& mdp)
    : n_states_(mdp.n_states()),
      n_actions_(mdp.n_actions()),
      count_s_(n_states_, 0),
      count_sa_(static_cast<std::size_t>(n_states_) * n_actions_, 0),
      count_sas_(static_cast<std::size_t>(n_states_) * n_actions_ * n_states_, 0),
      count_sar_(static_cast<std::size_t>(n_states_) * n_actions_),
      reward_support_(static_cast<std::size_t>(n_states_) * n_actions_) {
  for (int s = 0; s < n_states_; ++s) {
    for (int a = 0; a < n_actions_; ++a) {
      const auto& dist = mdp.reward_dist(s, a);
      auto& support = reward_support_[s * n_actions_ + a];
      support.reserve(dist.size());
      for (const auto& atom : dist) support.push_back(atom.value);
      count_sar_[s * n_actions_ + a].assign(dist.size(), 0);
    }
  }
}

int EmpiricalModel::reward_index(int s, int a, double r) const {
  const auto& support = reward_support_[s * n_actions_ + a];
  for (std::size_t k = 0; k < support.size(); ++k)
    if (support[k] == r) return static_cast<int>(k);
  for (std::size_t k = 0; k < support.size(); ++k)
    if (std::abs(support[k] - r) <= 1e-12) return static_cast<int>(k);
  throw std::invalid_argument("EmpiricalModel::update: reward " + std::to_string(r) +
                              " not in the declared support of (s=" + std::to_string(s) +
                              ", a=" + std::to_string(a) + ")");
}

void EmpiricalModel::update(const Transition& z) {
  if (z.s < 0 || z.s >= n_states_ || z.s_next < 0 || z.s_next >= n_states_ ||
      z.a < 0 || z.a >= n_actions_)
    throw std::invalid_argument("EmpiricalModel::update: index out of range");
  const int k = reward_index(z.s, z.a, z.r);
  ++count_s_[z.s];
  ++count_sa_[z.s * n_actions_ + z.a];
  ++count_sas_[(z.s * n_actions_ + z.a) * n_states_ + z.s_next];
  ++count_sar_[z.s * n_actions_ + z.a][k];
  ++t_;
}

Vector EmpiricalModel::estimate_transition(const Policy& target, int s) const {
  Vector p_hat = Vector::Zero(n_states_);
  for (int a = 0; a < n_actions_; ++a) {
    const double weight = target.prob(s, a);
    if (weight == 0.0) continue;
    const long long visits_sa = count_sa_[s * n_actions_ + a];
    if (visits_sa == 0) {
      p_hat.array() += weight / n_states_;
      continue;
    }
    for (int sp = 0; sp < n_states_; ++sp) {
      const long long c = count_sas_[(s * n_actions_ + a) * n_states_ + sp];
      if (c > 0) p_hat(sp) += weight * static_cast<double>(c) / visits_sa;
    }
  }
  return p_hat;
}

std::pair<std::vector<double>, std::vector<double>> EmpiricalModel::estimate_reward_dist(
    const Policy& target, int s) const {
  // Accumulate by support value; declared values are exact doubles, so keying
  // a map on them is well defined.
  std::map<double, double> mass;
  for (int a = 0; a < n_actions_; ++a) {
    const double weight = target.prob(s, a);
    if (weight == 0.0) continue;
    const auto& support = reward_support_[s * n_actions_ + a];
    const auto& counts = count_sar_[s * n_actions_ + a];
    const long long visits_sa = count_sa_[s * n_actions_ + a];
    for (std::size_t k = 0; k < support.size(); ++k) {
      const double p = visits_sa == 0
                           ? 1.0 / support.size()
                           : static_cast<double>(counts[k]) / visits_sa;
      mass[support[k]] += weight * p;
    }
  }
  std::pair<std::vector<double>, std::vector<double>> out;
  for (const auto& [value, prob] : mass) {
    out.first.push_back(value);
    out.second.push_back(prob);
  }
  return out;
}

std::pair<double, Vector> EmpiricalModel::estimate_moments(const Policy& target,
                                                           const FeatureMap& features,
                                                           int s) const {
  double xi_hat = 0.0;
  for (int a = 0; a < n_actions_; ++a) {
    const double weight = target.prob(s, a);
    if (weight == 0.0) continue;
    const auto& support = reward_support_[s * n_actions_ + a];
    const auto& counts = count_sar_[s * n_actions_ + a];
    const long long visits_sa = count_sa_[s * n_actions_ + a];
    if (visits_sa == 0) {
      double mean = 0.0;
      for (const double v : support) mean += v;
      xi_hat += weight * mean / support.size();
    } else {
      double mean = 0.0;
      for (std::size_t k = 0; k < support.size(); ++k)
        mean += support[k] * static_cast<double>(counts[k]);
      xi_hat += weight * mean / visits_sa;
    }
  }
  const Vector p_hat = estimate_transition(target, s);
  Vector phi_hat = features.phi.transpose() * p_hat;
  return {xi_hat, std::move(phi_hat)};
}

double EmpiricalModel::estimate_invariant(int s) const {
  if (t_ < 1) throw std::logic_error("EmpiricalModel::estimate_invariant: no observations");
  return static_cast<double>(count_s_[s]) / static_cast<double>(t_);
}

double EmpiricalModel::invariant_floor() const {
  return 1.0 / (2.0 * static_cast<double>(t_) * n_states_);
}

double EmpiricalModel::clamped_invariant(int s) const {
  return std::max(estimate_invariant(s), invariant_floor());
}

double estimation_error(const EmpiricalModel& model, const Mdp& mdp,
                        const Policy& target, const Vector& mu_b, int s) {
  // l1 transition error of the pi-mixed kernel row at s.
  Vector p_true = Vector::Zero(mdp.n_states());
  for (int a = 0; a < mdp.n_actions(); ++a) {
    const double weight = target.prob(s, a);
    if (weight == 0.0) continue;
    for (int sp = 0; sp < mdp.n_states(); ++sp)
      p_true(sp) += weight * mdp.transition(s, a, sp);
  }
  const double transition_err =
      (model.estimate_transition(target, s) - p_true).lpNorm<1>();

  // l1 reward-distribution error over the union of declared support values.
  std::map<double, double> true_mass;
  for (int a = 0; a < mdp.n_actions(); ++a) {
    const double weight = target.prob(s, a);
    if (weight == 0.0) continue;
    for (const auto& atom : mdp.reward_dist(s, a)) true_mass[atom.value] += weight * atom.prob;
  }
  const auto [values, probs] = model.estimate_reward_dist(target, s);
  double reward_err = 0.0;
  {
    std::map<double, double> diff = true_mass;
    for (std::size_t k = 0; k < values.size(); ++k) diff[values[k]] -= probs[k];
    for (const auto& [value, mass] : diff) {
      (void)value;
      reward_err += std::abs(mass);
    }
  }

  const double inv_err =
      std::abs(1.0 / model.estimate_invariant(s) - 1.0 / mu_b(s));

  return std::max({transition_err, reward_err, inv_err});
}

}  // namespace oprl
