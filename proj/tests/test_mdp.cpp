#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oprl/generators.hpp"
#include "oprl/mdp.hpp"
#include "oprl/rng.hpp"
#include "oprl/verify.hpp"

#include <cmath>

using namespace oprl;

namespace {

Mdp one_state_mdp(double gamma, double reward = 1.0) {
  Matrix kernel(1, 1);
  kernel << 1.0;
  return Mdp({kernel}, {{{reward, 1.0}}}, gamma);
}

}  // namespace

TEST_CASE("transition kernel basics") {
  SUBCASE("single state") {
    const Mdp mdp = one_state_mdp(0.5);
    const Matrix kernel = transition_kernel(mdp, Policy::uniform(1, 1));
    CHECK(kernel(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("stay-or-swap under the uniform policy mixes in one step") {
    const Matrix kernel = transition_kernel(stay_or_swap(0.9), Policy::uniform(2, 2));
    CHECK(kernel(0, 0) == doctest::Approx(0.5));
    CHECK(kernel(0, 1) == doctest::Approx(0.5));
    CHECK(kernel(1, 0) == doctest::Approx(0.5));
  }
  SUBCASE("single-action MDP returns its own kernel") {
    const Mdp mdp = two_state_chain(0.9);
    const Matrix kernel = transition_kernel(mdp, Policy::uniform(2, 1));
    CHECK(kernel(0, 0) == doctest::Approx(0.9));
    CHECK(kernel(1, 0) == doctest::Approx(0.1));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(transition_kernel(two_state_chain(0.9), Policy::uniform(3, 1)),
                    std::invalid_argument);
  }
}

TEST_CASE("mdp validation") {
  Matrix bad(2, 2);
  bad << 0.9, 0.2, 0.1, 0.9;  // first row sums to 1.1
  CHECK_THROWS_WITH_AS(Mdp({bad}, {{{1.0, 1.0}}, {{0.0, 1.0}}}, 0.9),
                       doctest::Contains("probabilities sum to"), std::invalid_argument);

  Matrix negative(1, 1);
  negative << 1.0;
  CHECK_THROWS_AS(Mdp({negative}, {{{1.0, 0.5}, {0.0, 0.6}}}, 0.9),
                  std::invalid_argument);
  CHECK_THROWS_AS(Mdp({negative}, {{{1.0, 1.0}}}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Mdp({negative}, {{{1.0, 1.0}}}, 1.5), std::invalid_argument);
}

TEST_CASE("policy validation and helpers") {
  CHECK_THROWS_AS(Policy(Matrix::Constant(2, 2, 0.4)), std::invalid_argument);
  const Policy det = Policy::deterministic({1, 0}, 2);
  CHECK(det.prob(0, 1) == 1.0);
  std::vector<int> actions;
  CHECK(det.deterministic_actions(&actions));
  CHECK(actions == std::vector<int>{1, 0});
  CHECK_FALSE(Policy::uniform(2, 2).deterministic_actions());
}

TEST_CASE("chain analysis") {
  SUBCASE("uniform kernel mixes instantly") {
    const ChainAnalysis a = analyze_chain(Matrix::Constant(2, 2, 0.5));
    CHECK(a.stationary(0) == doctest::Approx(0.5));
    CHECK(a.spectral_gap == doctest::Approx(1.0));
    CHECK(a.mixing_time == 1);
  }
  SUBCASE("two-state test chain: gap from the second eigenvalue, tau = 4") {
    // TV(P^t(s,.), mu) = 0.5 * 0.8^t; the first t at or below 1/4 is 4.
    const ChainAnalysis a =
        analyze_chain(transition_kernel(two_state_chain(1.0), Policy::uniform(2, 1)));
    CHECK(a.stationary(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(a.spectral_gap == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(a.mixing_time == 4);
  }
  SUBCASE("certificate sweep: tau passes where tau - 1 fails") {
    CHECK(check_mixing_time_certificate().pass);
  }
  SUBCASE("periodic chain is rejected") {
    Matrix swap(2, 2);
    swap << 0.0, 1.0, 1.0, 0.0;
    CHECK_THROWS_AS(analyze_chain(swap), std::runtime_error);
  }
  SUBCASE("reducible chain is rejected") {
    Matrix split = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(analyze_chain(split), std::runtime_error);
  }
}

TEST_CASE("stationary distribution invariant on random kernels") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Mdp mdp = random_mdp(5, 3, seed, 0.9);
    const Policy policy = random_policy(5, 3, seed + 31);
    const Matrix kernel = transition_kernel(mdp, policy);
    const Vector mu = stationary_distribution(kernel);
    CHECK((kernel.transpose() * mu - mu).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK(mu.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("exact values") {
  SUBCASE("single state geometric series") {
    const ValueOracle v = exact_values(one_state_mdp(0.5), Policy::uniform(1, 1));
    CHECK(v.value(0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(v.average_reward == 0.0);
  }
  SUBCASE("single state average reward") {
    const ValueOracle v = exact_values(one_state_mdp(1.0), Policy::uniform(1, 1));
    CHECK(v.average_reward == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.value(0) == doctest::Approx(0.0));
  }
  SUBCASE("two-state chain bias with mu-weighted normalization") {
    const ValueOracle v = exact_values(two_state_chain(1.0), Policy::uniform(2, 1));
    CHECK(v.average_reward == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(v.value(0) == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(v.value(1) == doctest::Approx(-2.5).epsilon(1e-10));
  }
}

TEST_CASE("blackwell limit at gamma near one") {
  const Policy policy = Policy::uniform(2, 1);
  const ValueOracle discounted = exact_values(two_state_chain(0.999), policy);
  const ValueOracle average = exact_values(two_state_chain(1.0), policy);
  for (int s = 0; s < 2; ++s)
    CHECK(std::abs(discounted.value(s) - average.average_reward / (1.0 - 0.999) -
                   average.value(s)) <= 0.05);
}

TEST_CASE("bellman residual") {
  SUBCASE("direct evaluation at V = 0") {
    const Vector residual =
        bellman_residual(one_state_mdp(0.5), Policy::uniform(1, 1), Vector::Zero(1), 0.0);
    CHECK(residual(0) == doctest::Approx(1.0));
  }
  SUBCASE("rbar must be zero in the discounted case") {
    CHECK_THROWS_AS(bellman_residual(one_state_mdp(0.5), Policy::uniform(1, 1),
                                     Vector::Zero(1), 0.3),
                    std::invalid_argument);
  }
  SUBCASE("two-state average-reward solution has zero residual") {
    Vector values(2);
    values << 2.5, -2.5;
    const Vector residual =
        bellman_residual(two_state_chain(1.0), Policy::uniform(2, 1), values, 0.5);
    CHECK(residual.lpNorm<Eigen::Infinity>() <= 1e-12);
  }
  SUBCASE("exact values solve the unified equation on random MDPs") {
    const double gammas[] = {0.5, 0.9, 1.0};
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const Mdp mdp = random_mdp(5, 3, seed, gammas[seed % 3]);
      const Policy policy = random_policy(5, 3, seed + 7);
      const ValueOracle exact = exact_values(mdp, policy);
      const Vector residual =
          bellman_residual(mdp, policy, exact.value, exact.average_reward);
      CHECK(residual.lpNorm<Eigen::Infinity>() <= 1e-10);
    }
  }
}

TEST_CASE("variance contraction cross-check for the spectral gap") {
  // Definition-2 style check: on reversible chains the eigenvalue gap
  // certifies var(Pf) <= (1-lambda)^2 var(f).
  Rng rng(5, 11);
  std::vector<Matrix> kernels;
  kernels.push_back(transition_kernel(two_state_chain(1.0), Policy::uniform(2, 1)));
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    kernels.push_back(transition_kernel(random_symmetric_mdp(5, 3, seed, 1.0),
                                        random_state_independent_policy(5, 3, seed)));
  for (const Matrix& kernel : kernels) {
    const ChainAnalysis a = analyze_chain(kernel);
    const int n = static_cast<int>(kernel.rows());
    for (int trial = 0; trial < 100; ++trial) {
      Vector f(n);
      for (int i = 0; i < n; ++i) f(i) = rng.normal();
      const auto var = [&](const Vector& g) {
        const double mean = a.stationary.dot(g);
        return a.stationary.dot((g.array() - mean).square().matrix());
      };
      const double contracted = var(kernel * f);
      const double budget = (1.0 - a.spectral_gap) * (1.0 - a.spectral_gap) * var(f);
      CHECK(contracted <= budget + 1e-10);
    }
  }
}

TEST_CASE("shift constants") {
  SUBCASE("on-policy symmetric chain") {
    const Mdp mdp = two_state_chain(0.9);
    const Policy policy = Policy::uniform(2, 1);
    const ShiftConstants c = shift_constants(mdp, policy, policy);
    CHECK(c.finite);
    CHECK(c.measure_ratio_c == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(c.policy_ratio_c == doctest::Approx(2.0).epsilon(1e-10));
  }
  SUBCASE("unsupported action flags infinity") {
    const Mdp mdp = stay_or_swap(0.9);
    const Policy target = Policy::deterministic({0, 1}, 2);
    Matrix probs(2, 2);
    probs << 0.0, 1.0, 0.0, 1.0;  // behavior never stays
    const ShiftConstants c = shift_constants(mdp, target, Policy(probs));
    CHECK_FALSE(c.finite);
    CHECK(std::isinf(c.policy_ratio_c));
  }
  SUBCASE("measure ratio from two stationary distributions") {
    // Action kernels chosen so the target chain has stationary (0.6, 0.4)
    // and the behavior chain (0.5, 0.5): the ratio is 1.2.
    Matrix skewed(2, 2), uniform(2, 2);
    skewed << 0.8, 0.2, 0.3, 0.7;
    uniform << 0.5, 0.5, 0.5, 0.5;
    std::vector<std::vector<RewardAtom>> rewards{
        {{1.0, 1.0}}, {{1.0, 1.0}}, {{0.0, 1.0}}, {{0.0, 1.0}}};
    const Mdp mdp({skewed, uniform}, std::move(rewards), 0.9);
    const ShiftConstants c = shift_constants(mdp, Policy::deterministic({0, 0}, 2),
                                             Policy::deterministic({1, 1}, 2));
    CHECK(c.measure_ratio_c == doctest::Approx(1.2).epsilon(1e-10));
  }
}
