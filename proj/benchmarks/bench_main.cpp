#include <benchmark/benchmark.h>

#include "oprl/engine.hpp"
#include "oprl/generators.hpp"
#include "oprl/tabular.hpp"
#include "oprl/trajectory.hpp"

using namespace oprl;

namespace {

struct Fixture {
  Mdp mdp = random_mdp(10, 4, 1, 0.9);
  Policy target = random_policy(10, 4, 1);
  Policy behavior = Policy::uniform(10, 4);
  FeatureMap features = tabular_features(10, 0.9);
  LossModel model = build_loss_model(mdp, target, behavior, features);
  ProjectionSet projection = ProjectionSet::ball(2.0 * (model.theta_star.norm() + 1.0));
  std::vector<Transition> data = [this] {
    SamplerConfig config;
    config.horizon = 10000;
    config.seed = 1;
    return sample_trajectory(mdp, behavior, config);
  }();
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_TransitionKernel(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(transition_kernel(f.mdp, f.target));
}
BENCHMARK(BM_TransitionKernel);

void BM_AnalyzeChain(benchmark::State& state) {
  const Matrix kernel = transition_kernel(fixture().mdp, fixture().behavior);
  for (auto _ : state) benchmark::DoNotOptimize(analyze_chain(kernel));
}
BENCHMARK(BM_AnalyzeChain);

void BM_ExactValues(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(exact_values(f.mdp, f.target));
}
BENCHMARK(BM_ExactValues);

void BM_BuildLossModel(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(build_loss_model(f.mdp, f.target, f.behavior, f.features));
}
BENCHMARK(BM_BuildLossModel);

void BM_DirectionOracle(benchmark::State& state) {
  const Fixture& f = fixture();
  const UpdateRule rule(static_cast<RuleKind>(state.range(0)), RuleMode::oracle,
                        f.target, f.behavior, f.features, 0.9);
  const Vector theta = Vector::Constant(f.features.dim, 0.5);
  const StateMoments moments = oracle_state_moments(f.model, f.data[0].s);
  for (auto _ : state)
    benchmark::DoNotOptimize(direction(rule, theta, f.data[0], moments));
}
BENCHMARK(BM_DirectionOracle)->Arg(0)->Arg(1)->Arg(2);

void BM_EngineTd0Empirical(benchmark::State& state) {
  const Fixture& f = fixture();
  const UpdateRule rule(RuleKind::td0, RuleMode::empirical, f.target, f.behavior,
                        f.features, 0.9);
  for (auto _ : state) {
    EmpiricalModel estimator(f.mdp);
    RunOptions options;
    options.oracle = &f.model;
    options.estimator = &estimator;
    benchmark::DoNotOptimize(run(rule, f.data,
                                 StepSchedule::contraction(0.05), f.projection,
                                 Vector::Zero(f.features.dim), options));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(f.data.size()));
}
BENCHMARK(BM_EngineTd0Empirical);

void BM_SparseTd0Empirical(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    EmpiricalModel estimator(f.mdp);
    benchmark::DoNotOptimize(
        run_tabular_sparse(RuleKind::td0, RuleMode::empirical, f.mdp, f.target,
                           f.behavior, f.data, StepSchedule::contraction(0.05),
                           f.projection, Vector::Zero(f.features.dim), &estimator,
                           /*capture_iterates=*/false));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(f.data.size()));
}
BENCHMARK(BM_SparseTd0Empirical);

void BM_SampleTrajectory(benchmark::State& state) {
  const Fixture& f = fixture();
  SamplerConfig config;
  config.horizon = 10000;
  config.seed = 2;
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_trajectory(f.mdp, f.behavior, config));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_SampleTrajectory);

}  // namespace

BENCHMARK_MAIN();
