#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oprl/engine.hpp"
#include "oprl/experiment.hpp"
#include "oprl/generators.hpp"
#include "oprl/tabular.hpp"
#include "oprl/updates.hpp"
#include "oprl/verify.hpp"

#include <cmath>

using namespace oprl;

namespace {

Mdp one_state_mdp(double gamma) {
  Matrix kernel(1, 1);
  kernel << 1.0;
  return Mdp({kernel}, {{{1.0, 1.0}}}, gamma);
}

}  // namespace

TEST_CASE("closed-form directions on the one-state MDP") {
  const Mdp mdp = one_state_mdp(0.5);
  const Policy policy = Policy::uniform(1, 1);
  const FeatureMap features = tabular_features(1, 0.5);
  const LossModel model = build_loss_model(mdp, policy, policy, features);
  const StateMoments moments = oracle_state_moments(model, 0);
  const Transition z{0, 0, 1.0, 0};
  const Vector theta = Vector::Zero(1);

  SUBCASE("direct-SGD: delta = 1, direction -0.5") {
    const UpdateRule rule(RuleKind::direct_sgd, RuleMode::oracle, policy, policy,
                          features, 0.5);
    CHECK(direction(rule, theta, z, moments)(0) == doctest::Approx(-0.5));
  }
  SUBCASE("TD(0): -(1/mu)(pi/b)(r)(phi + zeta) = -1") {
    const UpdateRule rule(RuleKind::td0, RuleMode::oracle, policy, policy, features, 0.5);
    CHECK(direction(rule, theta, z, moments)(0) == doctest::Approx(-1.0));
  }
}

TEST_CASE("behavior support diagnostics and errors") {
  const Mdp mdp = stay_or_swap(0.9);
  Matrix probs(2, 2);
  probs << 1.0, 0.0, 1.0, 0.0;  // behavior never swaps
  const Policy behavior(probs);
  const Policy target = Policy::uniform(2, 2);
  const FeatureMap features = tabular_features(2, 0.9);
  const UpdateRule rule(RuleKind::td_sgd, RuleMode::oracle, target, behavior, features,
                        0.9);
  // Coverage failure is surfaced as a diagnostic...
  CHECK_FALSE(rule.behavior_covers_target());
  CHECK(UpdateRule(RuleKind::direct_sgd, RuleMode::oracle, target, behavior, features,
                   0.9)
            .behavior_covers_target());
  // ...and the importance ratio errors only if an uncovered action is
  // actually evaluated (impossible along data drawn from the behavior).
  const LossModel model = build_loss_model(mdp, target, Policy::uniform(2, 2), features);
  const StateMoments moments = oracle_state_moments(model, 0);
  CHECK_THROWS_AS(direction(rule, Vector::Zero(2), {0, 1, 1.0, 1}, moments),
                  std::invalid_argument);
  CHECK_NOTHROW(direction(rule, Vector::Zero(2), {0, 0, 1.0, 0}, moments));
}

TEST_CASE("TD-SGD mean direction is the gradient") {
  SUBCASE("stay-or-swap at a fixed theta") {
    const Mdp mdp = stay_or_swap(0.5);
    const Policy policy = Policy::uniform(2, 2);
    const FeatureMap features = tabular_features(2, 0.5);
    const LossModel model = build_loss_model(mdp, policy, policy, features);
    const UpdateRule rule(RuleKind::td_sgd, RuleMode::oracle, policy, policy, features,
                          0.5);
    Vector theta(2);
    theta << 1.0, -1.0;
    const Vector mean = mean_direction(rule, mdp, model, theta);
    const Vector grad = loss_and_grad(model, theta).second;
    CHECK((mean - grad).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
  SUBCASE("random MDP sweep") { CHECK(check_td_sgd_gradient_identity().pass); }
}

TEST_CASE("TD(0) mean direction") {
  const Mdp mdp = two_state_chain(0.5);
  const Policy policy = Policy::uniform(2, 1);
  const FeatureMap features = tabular_features(2, 0.5);
  const LossModel model = build_loss_model(mdp, policy, policy, features);
  const UpdateRule rule(RuleKind::td0, RuleMode::oracle, policy, policy, features, 0.5);

  SUBCASE("vanishes at theta*") {
    CHECK(mean_direction(rule, mdp, model, model.theta_star).norm() <= 1e-12);
  }
  SUBCASE("matches the negated unweighted delta sum") {
    Rng rng(21, 2);
    for (int trial = 0; trial < 20; ++trial) {
      Vector theta(2);
      theta << 6.0 * (rng.uniform01() - 0.5), 6.0 * (rng.uniform01() - 0.5);
      Vector expected = Vector::Zero(2);
      for (int s = 0; s < 2; ++s)
        expected -= delta_value(model, theta, s) *
                    (features.phi.row(s).transpose() + features.zeta);
      CHECK((mean_direction(rule, mdp, model, theta) - expected)
                .lpNorm<Eigen::Infinity>() <= 1e-12);
    }
  }
  SUBCASE("contraction toward theta* at the certified rate") {
    const double c = contraction_constant(model, RuleKind::td0);
    Rng rng(22, 3);
    for (int trial = 0; trial < 100; ++trial) {
      Vector theta(2);
      theta << 8.0 * (rng.uniform01() - 0.5), 8.0 * (rng.uniform01() - 0.5);
      const Vector u = theta - model.theta_star;
      CHECK(u.dot(mean_direction(rule, mdp, model, theta)) >=
            c * u.squaredNorm() - 1e-10);
    }
  }
}

TEST_CASE("mean-field contraction sweep") { CHECK(check_mean_field_contraction().pass); }

TEST_CASE("direction error") {
  const Mdp mdp = two_state_chain(1.0);
  const Policy policy = Policy::uniform(2, 1);
  const FeatureMap features = tabular_features(2, 1.0);
  const LossModel model = build_loss_model(mdp, policy, policy, features);

  SUBCASE("exact counts give zero error") {
    EmpiricalModel counts(mdp);
    for (int s = 0; s < 2; ++s) {
      const double r = s == 0 ? 1.0 : 0.0;
      for (int k = 0; k < 9; ++k) counts.update({s, 0, r, s});
      counts.update({s, 0, r, 1 - s});
    }
    const UpdateRule rule(RuleKind::direct_sgd, RuleMode::empirical, policy, policy,
                          features, 1.0);
    Vector theta(3);
    theta << 1.0, -0.5, 0.25;
    const Transition z{0, 0, 1.0, 1};
    CHECK(direction_error(rule, theta, z, empirical_state_moments(counts, rule, 0),
                          oracle_state_moments(model, 0)) <= 1e-12);
  }

  SUBCASE("single observation obeys the closed-form error constant") {
    // Direct-SGD after one observation: e_t <= C0^2 (4 + 6 C1) e~_t with
    // C0 = 1 (one-hot features, |r| <= 1) and C1 the projection radius.
    const double c1 = 5.0;
    Rng rng(23, 4);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const Mdp random = random_mdp(4, 3, seed, 0.9);
      const Policy target = random_policy(4, 3, seed);
      const Policy behavior = Policy::uniform(4, 3);
      const FeatureMap f = tabular_features(4, 0.9);
      const LossModel m = build_loss_model(random, target, behavior, f);
      const Vector mu_b = m.mu_b;

      SamplerConfig config;
      config.horizon = 1;
      config.seed = seed;
      const auto data = sample_trajectory(random, behavior, config);
      EmpiricalModel counts(random);
      counts.update(data[0]);

      Vector theta(4);
      for (int i = 0; i < 4; ++i) theta(i) = c1 * (2.0 * rng.uniform01() - 1.0) / 2.0;
      const UpdateRule rule(RuleKind::direct_sgd, RuleMode::empirical, target, behavior,
                            f, 0.9);
      const double e_t =
          direction_error(rule, theta, data[0],
                          empirical_state_moments(counts, rule, data[0].s),
                          oracle_state_moments(m, data[0].s));
      const double e_tilde =
          estimation_error(counts, random, target, mu_b, data[0].s);
      CHECK(e_t <= (4.0 + 6.0 * c1) * e_tilde + 1e-12);
    }
  }

  SUBCASE("squared error decays at the CLT rate over seeds") {
    std::vector<long long> grid;
    for (long long t = 1000; t <= 100000; t = std::max(t + 1, (long long)(t * 1.3)))
      grid.push_back(t);
    std::vector<double> mean_sq(grid.size(), 0.0);
    const int n_seeds = 20;
    const UpdateRule rule(RuleKind::direct_sgd, RuleMode::empirical, policy, policy,
                          features, 1.0);
    Vector theta(3);
    theta << 2.0, -2.0, 0.5;
    for (int seed = 1; seed <= n_seeds; ++seed) {
      SamplerConfig config;
      config.horizon = 100000;
      config.seed = static_cast<std::uint64_t>(seed);
      const auto data = sample_trajectory(mdp, policy, config);
      EmpiricalModel counts(mdp);
      std::size_t next = 0;
      for (long long t = 1; t <= config.horizon; ++t) {
        const Transition& z = data[static_cast<std::size_t>(t - 1)];
        counts.update(z);
        if (next < grid.size() && t == grid[next]) {
          const double e_t =
              direction_error(rule, theta, z, empirical_state_moments(counts, rule, z.s),
                              oracle_state_moments(model, z.s));
          mean_sq[next] += e_t * e_t / n_seeds;
          ++next;
        }
      }
    }
    CHECK(fit_rate(grid, mean_sq, 1e3, 1e5).slope <= -0.8);
  }
}

TEST_CASE("boundedness and Lipschitz constants") {
  CHECK(check_boundedness_constants().pass);
  CHECK(check_lipschitz_constants().pass);
}

TEST_CASE("tabular sparse updates match the generic engine") {
  CHECK(check_sparse_equivalence().pass);
}

TEST_CASE("sparse update locality") {
  // TD(0) writes only the current state (plus the average-reward coordinate);
  // TD-SGD writes only s_t and s_{t+1} (plus the average-reward coordinate).
  const Mdp mdp = random_mdp(5, 2, 41, 1.0);
  const Policy policy = random_policy(5, 2, 41);
  const std::vector<Transition> data = [&] {
    SamplerConfig config;
    config.horizon = 50;
    config.seed = 6;
    return sample_trajectory(mdp, policy, config);
  }();
  const StepSchedule schedule = StepSchedule::inverse_sqrt(0.1);
  const ProjectionSet set = ProjectionSet::box_uniform(6, 100.0);

  for (const RuleKind kind : {RuleKind::td0, RuleKind::td_sgd}) {
    EmpiricalModel counts(mdp);
    const RunResult result =
        run_tabular_sparse(kind, RuleMode::empirical, mdp, policy, policy, data,
                           schedule, set, Vector::Zero(6), &counts);
    for (std::size_t t = 0; t + 1 < result.iterates.size(); ++t) {
      const Vector diff = result.iterates[t + 1] - result.iterates[t];
      for (int s = 0; s < 5; ++s) {
        const bool may_touch =
            s == data[t].s || (kind == RuleKind::td_sgd && s == data[t].s_next);
        if (!may_touch) CHECK(diff(s) == 0.0);
      }
    }
  }
}
