#include "oprl/generators.hpp"

#include "oprl/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace oprl {

namespace {

Vector dirichlet_row(Rng& rng, int n) {
  Vector row(n);
  for (int i = 0; i < n; ++i) row(i) = -std::log(1.0 - rng.uniform01());
  row /= row.sum();
  return row;
}

std::vector<std::vector<RewardAtom>> random_rewards(Rng& rng, int n_states, int n_actions,
                                                    int support) {
  if (support < 1) throw std::invalid_argument("random_rewards: support must be >= 1");
  std::vector<std::vector<RewardAtom>> rewards(
      static_cast<std::size_t>(n_states) * n_actions);
  for (auto& dist : rewards) {
    const Vector probs = dirichlet_row(rng, support);
    dist.resize(support);
    for (int k = 0; k < support; ++k)
      dist[k] = {rng.uniform(-1.0, 1.0), probs(k)};
    // Rounding residue onto the heaviest atom keeps the mass exactly 1.
    double mass = 0.0;
    std::size_t heaviest = 0;
    for (std::size_t k = 0; k < dist.size(); ++k) {
      mass += dist[k].prob;
      if (dist[k].prob > dist[heaviest].prob) heaviest = k;
    }
    dist[heaviest].prob += 1.0 - mass;
  }
  return rewards;
}

// Random involution: a symmetric permutation built from disjoint transpositions.
Matrix random_involution(Rng& rng, int n) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(i + 1)]);
  Matrix p = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; i += 2) {
    p(order[i], order[i + 1]) = 1.0;
    p(order[i + 1], order[i]) = 1.0;
  }
  if (n % 2 == 1) p(order[n - 1], order[n - 1]) = 1.0;
  return p;
}

}  // namespace

Mdp random_mdp(int n_states, int n_actions, std::uint64_t seed, double gamma,
               int reward_support) {
  Rng rng(seed, 0x6d6470u);  // "mdp" stream tag
  std::vector<Matrix> transition(n_actions, Matrix(n_states, n_states));
  for (int a = 0; a < n_actions; ++a)
    for (int s = 0; s < n_states; ++s) {
      Vector row = 0.9 * dirichlet_row(rng, n_states);
      row.array() += 0.1 / n_states;
      row /= row.sum();
      transition[a].row(s) = row.transpose();
    }
  auto rewards = random_rewards(rng, n_states, n_actions, reward_support);
  return Mdp(std::move(transition), std::move(rewards), gamma);
}

Mdp random_symmetric_mdp(int n_states, int n_actions, std::uint64_t seed, double gamma,
                         int reward_support) {
  Rng rng(seed, 0x73796du);  // "sym" stream tag
  std::vector<Matrix> transition(n_actions);
  const Matrix uniform = Matrix::Constant(n_states, n_states, 1.0 / n_states);
  for (int a = 0; a < n_actions; ++a) {
    const double w_self = rng.uniform(0.2, 0.45);
    const double w_unif = rng.uniform(0.2, 0.45);
    const double w_inv1 = rng.uniform(0.0, 1.0 - w_self - w_unif);
    const double w_inv2 = 1.0 - w_self - w_unif - w_inv1;
    transition[a] = w_self * Matrix::Identity(n_states, n_states) + w_unif * uniform +
                    w_inv1 * random_involution(rng, n_states) +
                    w_inv2 * random_involution(rng, n_states);
  }
  auto rewards = random_rewards(rng, n_states, n_actions, reward_support);
  return Mdp(std::move(transition), std::move(rewards), gamma);
}

Mdp two_state_chain(double gamma) {
  Matrix kernel(2, 2);
  kernel << 0.9, 0.1, 0.1, 0.9;
  std::vector<std::vector<RewardAtom>> rewards{{{1.0, 1.0}}, {{0.0, 1.0}}};
  return Mdp({kernel}, std::move(rewards), gamma);
}

Mdp stay_or_swap(double gamma) {
  Matrix stay = Matrix::Identity(2, 2);
  Matrix swap(2, 2);
  swap << 0.0, 1.0, 1.0, 0.0;
  std::vector<std::vector<RewardAtom>> rewards{
      {{1.0, 1.0}}, {{1.0, 1.0}}, {{0.0, 1.0}}, {{0.0, 1.0}}};
  return Mdp({stay, swap}, std::move(rewards), gamma);
}

Policy random_policy(int n_states, int n_actions, std::uint64_t seed) {
  Rng rng(seed, 0x706f6cu);  // "pol" stream tag
  Matrix probs(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    Vector row = 0.9 * dirichlet_row(rng, n_actions);
    row.array() += 0.1 / n_actions;
    row /= row.sum();
    probs.row(s) = row.transpose();
  }
  return Policy(std::move(probs));
}

Policy random_state_independent_policy(int n_states, int n_actions, std::uint64_t seed) {
  Rng rng(seed, 0x736970u);  // "sip" stream tag
  Vector row = 0.8 * dirichlet_row(rng, n_actions);
  row.array() += 0.2 / n_actions;
  row /= row.sum();
  Matrix probs(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) probs.row(s) = row.transpose();
  return Policy(std::move(probs));
}

}  // namespace oprl
