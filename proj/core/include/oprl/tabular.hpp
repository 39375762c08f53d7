#pragma once

#include "oprl/engine.hpp"

namespace oprl {

// Tabular specializations of the three update rules, maintaining the value
// table and average-reward scalar directly with sparse per-step writes:
// TD-SGD touches V(s_t), V(s_{t+1}) (and rbar), TD(0) touches V(s_t) (and
// rbar), direct-SGD writes the full successor row. Produces the same iterate
// sequence as the generic engine with tabular features.
//
// theta layout matches tabular_features(n, gamma): V in the first n
// coordinates, rbar last when gamma = 1.
RunResult run_tabular_sparse(RuleKind kind, RuleMode mode, const Mdp& mdp,
                             const Policy& target, const Policy& behavior,
                             std::span<const Transition> data,
                             const StepSchedule& schedule, const ProjectionSet& set,
                             const Vector& theta0, EmpiricalModel* estimator,
                             bool capture_iterates = true);

}  // namespace oprl
