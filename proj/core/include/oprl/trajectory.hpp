#pragma once

#include "oprl/mdp.hpp"
#include "oprl/rng.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace oprl {

struct Transition {
  int s = 0;
  int a = 0;
  double r = 0.0;
  int s_next = 0;
};

enum class SampleMode { markov, iid };

// How the first state (markov mode) is chosen when no index is given.
enum class InitialState { uniform, stationary };

struct SamplerConfig {
  SampleMode mode = SampleMode::markov;
  long long horizon = 1;
  // Fixed start state; when absent, initial_draw decides.
  std::optional<int> initial_state;
  InitialState initial_draw = InitialState::uniform;
  std::uint64_t seed = 0;
  // Run index; sweeps derive one stream per (seed, run).
  std::uint64_t stream = 0;
};

// Offline dataset z_t = (s_t, a_t, r_t, s'_t) under the behavior policy.
// markov mode chains s_{t+1} = s'_t; iid mode draws every s_t from the
// behavior stationary distribution (requires an ergodic chain).
// Deterministic given (seed, stream).
std::vector<Transition> sample_trajectory(const Mdp& mdp, const Policy& behavior,
                                          const SamplerConfig& config);

}  // namespace oprl
