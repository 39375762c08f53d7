#pragma once

#include <string>
#include <vector>

namespace oprl {

struct CheckResult {
  std::string name;
  bool pass = false;
  // Informational entries report context (or known-unattainable bounds
  // rechecked in corrected form) and do not gate the suite's exit status.
  bool informational = false;
  std::string detail;
};

// Exact-oracle sanity.
CheckResult check_stationary_distribution();
CheckResult check_mixing_time_certificate();
CheckResult check_blackwell_limit();
CheckResult check_bellman_roundtrip();

// Loss geometry.
CheckResult check_minimizer_bellman_roundtrip();
CheckResult check_tabular_spectra_floors();
CheckResult check_anchored_spectra_floors();
CheckResult check_orthonormal_spectra_floors();
CheckResult check_gradient_finite_difference();
CheckResult check_hessian_constant();

// Update rules.
CheckResult check_td_sgd_gradient_identity();
CheckResult check_mean_field_contraction();
CheckResult check_boundedness_constants();
CheckResult check_lipschitz_constants();
CheckResult check_sparse_equivalence();

// Engine.
CheckResult check_step_size_bracket();
CheckResult check_step_telescoping();

// Value-error bounds. The discounted bound in its stated form is disproved
// by a constant-shift direction (see the detail string); the variance form
// is the provable statement and is reported alongside.
CheckResult check_value_error_bound_average_reward();
CheckResult check_value_error_bound_discounted_stated();
CheckResult check_value_error_bound_discounted_variance();

// Every check above plus the documentation notes, in report order.
std::vector<CheckResult> run_verification_suite();

}  // namespace oprl
