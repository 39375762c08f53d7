#pragma once

#include "oprl/engine.hpp"
#include "oprl/policy_iteration.hpp"

#include <optional>
#include <string>
#include <vector>

namespace oprl {

// Least-squares fit of log(metric) against log(t) over a window; the
// empirical check of the convergence-rate exponents.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
  double t_lo = 0.0;
  double t_hi = 0.0;
};

// Requires at least 5 in-window points and strictly positive metric values.
RateFit fit_rate(const std::vector<long long>& ts, const std::vector<double>& values,
                 double t_lo, double t_hi);

enum class RecordMetric { loss_gap, dist_sq, e_t };

RateFit fit_rate(const std::vector<RunRecord>& records, RecordMetric metric, double t_lo,
                 double t_hi);

// Arithmetic mean of the metrics across seeds at every shared record time.
// All runs must share the same record grid.
std::vector<RunRecord> mean_records(const std::vector<std::vector<RunRecord>>& per_seed);

struct MdpSpec {
  std::string kind = "dense";  // dense | symmetric | two-state | stay-swap
  int n_states = 5;
  int n_actions = 3;
  std::uint64_t seed = 0;
  double gamma = 0.9;
  int reward_support = 2;
};

Mdp make_mdp(const MdpSpec& spec);

struct PolicySpec {
  std::string kind = "uniform";  // uniform | random | state-independent | file
  std::string path;
  std::uint64_t seed = 0;
};

Policy make_policy(const PolicySpec& spec, const Mdp& mdp);

struct ExperimentConfig {
  std::optional<std::string> mdp_path;
  std::optional<MdpSpec> mdp_spec;
  PolicySpec target;
  PolicySpec behavior;
  std::string feature_kind = "tabular";  // tabular | anchored | orthonormal
  RuleKind rule = RuleKind::td_sgd;
  RuleMode mode = RuleMode::empirical;
  StepSchedule::Kind schedule_kind = StepSchedule::Kind::inverse_sqrt;
  double eta0 = 1.0;
  double c = 0.0;     // 0: take c from contraction_constant
  double eta1 = 0.0;  // 0: 2/c
  std::string projection_shape = "ball";  // ball | box
  double radius = 0.0;                    // 0: 2 (||theta*|| + 1)
  double half_width = 0.0;                // box half-width (uniform), 0: auto
  long long horizon = 1000;
  SampleMode sample_mode = SampleMode::markov;
  std::vector<std::uint64_t> seeds{0};
  bool dump_data = false;
  // learn
  int rounds = 5;
  long long t_eval = 10000;
};

ExperimentConfig load_experiment_config(const std::string& path);

struct ResolvedExperiment {
  Mdp mdp;
  Policy target;
  Policy behavior;
  FeatureMap features;
  LossModel model;
  StepSchedule schedule;
  ProjectionSet projection;
};

// Validates the config against module preconditions and builds every
// component a run needs. Throws std::invalid_argument / std::runtime_error
// with a named violation on bad input.
ResolvedExperiment resolve_experiment(const ExperimentConfig& config);

struct EvaluateOutcome {
  std::vector<std::vector<RunRecord>> per_seed;
  std::vector<RunRecord> mean;
  std::vector<std::string> files;
};

// One evaluation run per seed; writes seed_<seed>.csv per seed plus mean.csv,
// and datasets when requested. Deterministic given the config.
EvaluateOutcome cmd_evaluate(const ExperimentConfig& config, const std::string& out_dir);

struct LearnOutcome {
  std::vector<IterationReport> per_seed;
  std::vector<std::string> files;
};

// Approximate policy iteration per seed; writes learn_seed_<seed>.csv
// (k,eps_hat,suboptimality,shift_c) and the final policy JSON per seed.
LearnOutcome cmd_learn(const ExperimentConfig& config, const std::string& out_dir);

}  // namespace oprl
