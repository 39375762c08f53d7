#include "oprl/trajectory.hpp"

#include <span>
#include <stdexcept>

namespace oprl {

std::vector<Transition> sample_trajectory(const Mdp& mdp, const Policy& behavior,
                                          const SamplerConfig& config) {
  if (behavior.n_states() != mdp.n_states() || behavior.n_actions() != mdp.n_actions())
    throw std::invalid_argument("sample_trajectory: policy/MDP dimension mismatch");
  if (config.horizon < 1)
    throw std::invalid_argument("sample_trajectory: horizon must be >= 1");
  if (config.initial_state &&
      (*config.initial_state < 0 || *config.initial_state >= mdp.n_states()))
    throw std::invalid_argument("sample_trajectory: initial state out of range");

  const int n = mdp.n_states();
  Rng rng(config.seed, config.stream);

  Vector stationary;
  if (config.mode == SampleMode::iid ||
      (!config.initial_state && config.initial_draw == InitialState::stationary)) {
    // iid mode draws each state from mu^b; requires an ergodic behavior chain.
    const ChainAnalysis analysis = analyze_chain(transition_kernel(mdp, behavior));
    stationary = analysis.stationary;
  }

  const auto draw_state = [&](bool first) -> int {
    if (config.mode == SampleMode::iid)
      return rng.categorical({stationary.data(), static_cast<std::size_t>(n)});
    if (first) {
      if (config.initial_state) return *config.initial_state;
      if (config.initial_draw == InitialState::stationary)
        return rng.categorical({stationary.data(), static_cast<std::size_t>(n)});
      return rng.uniform_int(n);
    }
    return -1;  // markov continuation handled by the caller
  };

  std::vector<Transition> out;
  out.reserve(static_cast<std::size_t>(config.horizon));

  std::vector<double> action_probs(mdp.n_actions());
  std::vector<double> next_probs(n);

  int state = draw_state(true);
  for (long long t = 0; t < config.horizon; ++t) {
    if (config.mode == SampleMode::iid && t > 0) state = draw_state(false);

    for (int a = 0; a < mdp.n_actions(); ++a) action_probs[a] = behavior.prob(state, a);
    const int action = rng.categorical(action_probs);

    const auto& reward_dist = mdp.reward_dist(state, action);
    std::vector<double> reward_probs(reward_dist.size());
    for (std::size_t k = 0; k < reward_dist.size(); ++k) reward_probs[k] = reward_dist[k].prob;
    const double reward = reward_dist[rng.categorical(reward_probs)].value;

    for (int sp = 0; sp < n; ++sp) next_probs[sp] = mdp.transition(state, action, sp);
    const int next = rng.categorical(next_probs);

    out.push_back({state, action, reward, next});
    if (config.mode == SampleMode::markov) state = next;
  }
  return out;
}

}  // namespace oprl
