#pragma once

#include "oprl/mdp.hpp"

#include <cstdint>

namespace oprl {

// Dense random MDP: Dirichlet-like transition rows mixed with 10% uniform
// mass (every row strictly positive, hence ergodic under any policy), and
// finite reward supports with values in [-1, 1].
Mdp random_mdp(int n_states, int n_actions, std::uint64_t seed, double gamma,
               int reward_support = 2);

// Random MDP whose every action kernel is symmetric doubly stochastic (a
// convex combination of I, the uniform kernel, and random involutions).
// Any state-independent policy then induces a reversible uniform-stationary
// chain, the regime in which the operator-norm steps behind the spectra
// bounds are exact.
Mdp random_symmetric_mdp(int n_states, int n_actions, std::uint64_t seed, double gamma,
                         int reward_support = 2);

// Single-action two-state chain [[0.9, 0.1], [0.1, 0.9]] with deterministic
// rewards (1, 0); the standing small test MDP.
Mdp two_state_chain(double gamma);

// Two states, two deterministic actions (stay / swap), state rewards (1, 0).
Mdp stay_or_swap(double gamma);

// Random policy with Dirichlet-like rows, full action support.
Policy random_policy(int n_states, int n_actions, std::uint64_t seed);

// Random policy with the same action distribution in every state.
Policy random_state_independent_policy(int n_states, int n_actions, std::uint64_t seed);

}  // namespace oprl
