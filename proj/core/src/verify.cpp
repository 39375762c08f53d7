#include "oprl/verify.hpp"

#include "oprl/engine.hpp"
#include "oprl/generators.hpp"
#include "oprl/rng.hpp"
#include "oprl/tabular.hpp"
#include "oprl/trajectory.hpp"
#include "oprl/updates.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace oprl {

namespace {

constexpr double kSlack = 1e-10;

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(6);
  out << x;
  return out.str();
}

Vector random_theta_in_ball(Rng& rng, int dim, double radius) {
  Vector theta(dim);
  for (int i = 0; i < dim; ++i) theta(i) = rng.normal();
  const double norm = theta.norm();
  if (norm == 0.0) return Vector::Zero(dim);
  const double scale =
      radius * std::pow(rng.uniform01(), 1.0 / dim) / norm;
  return theta * scale;
}

double min_eig_sym(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()));
  return eig.eigenvalues().minCoeff();
}

CheckResult pass_fail(const std::string& name, bool pass, const std::string& detail) {
  return {name, pass, false, detail};
}

}  // namespace

CheckResult check_stationary_distribution() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Mdp mdp = random_mdp(5, 3, seed, 0.9);
    const Policy policy = random_policy(5, 3, seed + 1000);
    const Matrix kernel = transition_kernel(mdp, policy);
    const Vector mu = stationary_distribution(kernel);
    worst = std::max(worst, (kernel.transpose() * mu - mu).lpNorm<Eigen::Infinity>());
  }
  return pass_fail("stationary-distribution", worst <= 1e-10,
                   "50 random ergodic kernels, max ||mu P - mu||_inf = " + fmt(worst));
}

CheckResult check_mixing_time_certificate() {
  bool ok = true;
  std::string detail;
  std::vector<Matrix> kernels;
  kernels.push_back(transition_kernel(two_state_chain(0.9), Policy::uniform(2, 1)));
  kernels.push_back(transition_kernel(stay_or_swap(0.9), Policy::uniform(2, 2)));
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
    kernels.push_back(
        transition_kernel(random_mdp(5, 3, seed, 0.9), random_policy(5, 3, seed)));

  for (const Matrix& kernel : kernels) {
    const ChainAnalysis analysis = analyze_chain(kernel);
    const int n = static_cast<int>(kernel.rows());
    const auto max_tv = [&](const Matrix& power) {
      double worst = 0.0;
      for (int s = 0; s < n; ++s)
        worst = std::max(worst,
                         0.5 * (power.row(s).transpose() - analysis.stationary).lpNorm<1>());
      return worst;
    };
    Matrix power = Matrix::Identity(n, n);
    for (int t = 1; t < analysis.mixing_time; ++t) power = power * kernel;
    const double tv_before = max_tv(power);       // P^{tau-1}
    const double tv_at = max_tv(power * kernel);  // P^{tau}
    if (!(tv_at <= 0.25 && tv_before > 0.25)) {
      ok = false;
      detail = "tau=" + std::to_string(analysis.mixing_time) + " tv(tau)=" + fmt(tv_at) +
               " tv(tau-1)=" + fmt(tv_before);
      break;
    }
  }
  return pass_fail("mixing-time-certificate", ok,
                   ok ? "tau passes and tau-1 fails the 1/4 TV bound on 12 chains" : detail);
}

CheckResult check_blackwell_limit() {
  const Policy policy = Policy::uniform(2, 1);
  const ValueOracle discounted = exact_values(two_state_chain(0.999), policy);
  const ValueOracle average = exact_values(two_state_chain(1.0), policy);
  double worst = 0.0;
  for (int s = 0; s < 2; ++s)
    worst = std::max(worst, std::abs(discounted.value(s) -
                                     average.average_reward / (1.0 - 0.999) -
                                     average.value(s)));
  return pass_fail("blackwell-limit", worst <= 0.05,
                   "max_s |V_0.999 - rbar/(1-gamma) - Vbar| = " + fmt(worst));
}

CheckResult check_bellman_roundtrip() {
  const double gammas[] = {0.5, 0.9, 1.0};
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Mdp mdp = random_mdp(5, 3, seed, gammas[seed % 3]);
    const Policy policy = random_policy(5, 3, seed + 2000);
    const ValueOracle exact = exact_values(mdp, policy);
    const Vector residual =
        bellman_residual(mdp, policy, exact.value, exact.average_reward);
    worst = std::max(worst, residual.lpNorm<Eigen::Infinity>());
  }
  return pass_fail("bellman-residual-roundtrip", worst <= 1e-10,
                   "50 random MDPs (gamma 0.5/0.9/1), max residual = " + fmt(worst));
}

CheckResult check_minimizer_bellman_roundtrip() {
  double worst_residual = 0.0;
  double worst_loss = 0.0;
  const double gammas[] = {0.5, 0.9, 1.0};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const double gamma = gammas[seed % 3];
    const Mdp mdp = random_mdp(5, 3, seed, gamma);
    const Policy target = random_policy(5, 3, seed);
    const Policy behavior = random_policy(5, 3, seed + 500);
    const FeatureMap features = tabular_features(5, gamma);
    const LossModel model = build_loss_model(mdp, target, behavior, features);

    // theta* -> Bellman solution.
    const Vector values = features.phi * model.theta_star;
    const double rbar = features.zeta.dot(model.theta_star);
    worst_residual = std::max(
        worst_residual,
        bellman_residual(mdp, target, values, rbar).lpNorm<Eigen::Infinity>());

    // Bellman solution -> zero loss.
    const ValueOracle exact = exact_values(mdp, target);
    Vector theta(features.dim);
    theta.head(5) = exact.value;
    if (gamma == 1.0) theta(5) = exact.average_reward;
    worst_loss = std::max(worst_loss, loss_value(model, theta));
  }
  // The gamma = 1 maps are realizable too: each minimizer solves the unified
  // equation up to a value shift absorbed by the bias normalization.
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Mdp mdp = random_mdp(5, 3, seed, 1.0);
    const Policy target = random_policy(5, 3, seed);
    const Policy behavior = random_policy(5, 3, seed + 500);
    for (const FeatureMap& features : {anchored_features(5), orthonormal_features(5)}) {
      const LossModel model = build_loss_model(mdp, target, behavior, features);
      const Vector values = features.phi * model.theta_star;
      const double rbar = features.zeta.dot(model.theta_star);
      worst_residual = std::max(
          worst_residual,
          bellman_residual(mdp, target, values, rbar).lpNorm<Eigen::Infinity>());
    }
  }
  return pass_fail("minimizer-bellman-roundtrip",
                   worst_residual <= 1e-9 && worst_loss <= 1e-18,
                   "max Bellman residual at theta* = " + fmt(worst_residual) +
                       ", max loss at exact values = " + fmt(worst_loss));
}

CheckResult check_tabular_spectra_floors() {
  double worst_slack = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (const double gamma : {0.5, 0.9}) {
      const Mdp mdp = random_symmetric_mdp(5, 3, seed, gamma);
      const Policy target = random_state_independent_policy(5, 3, seed);
      const Policy behavior = random_state_independent_policy(5, 3, seed + 100);
      const LossModel model =
          build_loss_model(mdp, target, behavior, tabular_features(5, gamma));
      const double mu_min = model.mu_b.minCoeff();
      const double h_bound = mu_min * (1.0 - gamma) * (1.0 - gamma);
      const double d_bound = 1.0 - gamma;
      worst_slack = std::min(worst_slack, min_eig_sym(model.hessian) - h_bound);
      worst_slack = std::min(worst_slack, min_eig_sym(model.d_matrix) - d_bound);
    }
  }
  return pass_fail("tabular-spectra-floors", worst_slack >= -kSlack,
                   "tabular gamma<1 bounds, worst slack = " + fmt(worst_slack));
}

CheckResult check_anchored_spectra_floors() {
  double worst_slack = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Mdp mdp = random_symmetric_mdp(5, 3, seed, 1.0);
    const Policy target = random_state_independent_policy(5, 3, seed);
    const Policy behavior = random_state_independent_policy(5, 3, seed + 100);
    const LossModel model =
        build_loss_model(mdp, target, behavior, anchored_features(5));

    Matrix clipped = transition_kernel(mdp, target);
    clipped.col(4).setZero();
    const double p = clipped.jacobiSvd().singularValues()(0);
    const double mu_min = model.mu_b.minCoeff();
    worst_slack =
        std::min(worst_slack, min_eig_sym(model.hessian) - mu_min * (1.0 - p) * (1.0 - p));
    worst_slack = std::min(worst_slack, min_eig_sym(model.d_matrix) - (1.0 - p));
  }
  return pass_fail("anchored-spectra-floors", worst_slack >= -kSlack,
                   "anchored gamma=1 bounds with p = ||P~||, worst slack = " +
                       fmt(worst_slack));
}

CheckResult check_orthonormal_spectra_floors() {
  double worst_slack = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Mdp mdp = random_symmetric_mdp(5, 3, seed, 1.0);
    const Policy target = random_state_independent_policy(5, 3, seed);
    const Policy behavior = random_state_independent_policy(5, 3, seed + 100);
    const LossModel model =
        build_loss_model(mdp, target, behavior, orthonormal_features(5));
    const double lambda = analyze_chain(transition_kernel(mdp, target)).spectral_gap;
    const double mu_min = model.mu_b.minCoeff();
    worst_slack =
        std::min(worst_slack, min_eig_sym(model.hessian) - mu_min * lambda * lambda);
    worst_slack = std::min(worst_slack, min_eig_sym(model.d_matrix) - lambda);
  }
  return pass_fail("orthonormal-spectra-floors", worst_slack >= -kSlack,
                   "orthonormal gamma=1 bounds with the spectral gap, worst slack = " +
                       fmt(worst_slack));
}

CheckResult check_gradient_finite_difference() {
  Rng rng(7, 42);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double gamma = seed % 2 ? 0.5 : 0.9;
    const Mdp mdp = random_mdp(5, 3, seed, gamma);
    const LossModel model = build_loss_model(mdp, random_policy(5, 3, seed),
                                             random_policy(5, 3, seed + 500),
                                             tabular_features(5, gamma));
    const Vector theta = random_theta_in_ball(rng, 5, 5.0);
    const Vector grad = loss_and_grad(model, theta).second;
    for (int i = 0; i < 5; ++i) {
      const double h = 1e-5;
      Vector up = theta, down = theta;
      up(i) += h;
      down(i) -= h;
      const double fd = (loss_value(model, up) - loss_value(model, down)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - grad(i)));
    }
  }
  return pass_fail("gradient-finite-difference", worst <= 1e-6,
                   "central differences vs grad l, max deviation = " + fmt(worst));
}

CheckResult check_hessian_constant() {
  Rng rng(11, 43);
  double worst = 0.0;
  const Mdp mdp = random_mdp(5, 3, 3, 0.9);
  const LossModel model = build_loss_model(mdp, random_policy(5, 3, 3),
                                           random_policy(5, 3, 503),
                                           tabular_features(5, 0.9));
  for (int trial = 0; trial < 5; ++trial) {
    const Vector theta = random_theta_in_ball(rng, 5, 5.0);
    for (int i = 0; i < 5; ++i) {
      const double h = 1e-5;
      Vector up = theta, down = theta;
      up(i) += h;
      down(i) -= h;
      const Vector row =
          (loss_and_grad(model, up).second - loss_and_grad(model, down).second) /
          (2.0 * h);
      worst = std::max(worst,
                       (row - model.hessian.col(i)).lpNorm<Eigen::Infinity>());
    }
  }
  return pass_fail("hessian-constant", worst <= 1e-6,
                   "finite-difference Hessian at 5 random theta, max deviation = " +
                       fmt(worst));
}

CheckResult check_td_sgd_gradient_identity() {
  Rng rng(13, 44);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const double gamma = seed % 2 ? 0.5 : 0.9;
    const Mdp mdp = random_mdp(5, 3, seed, gamma);
    const Policy target = random_policy(5, 3, seed);
    const Policy behavior = random_policy(5, 3, seed + 500);
    const FeatureMap features = tabular_features(5, gamma);
    const LossModel model = build_loss_model(mdp, target, behavior, features);
    const UpdateRule rule(RuleKind::td_sgd, RuleMode::oracle, target, behavior, features,
                          gamma);
    for (int trial = 0; trial < 10; ++trial) {
      const Vector theta = random_theta_in_ball(rng, features.dim, 5.0);
      const Vector mean = mean_direction(rule, mdp, model, theta);
      const Vector grad = loss_and_grad(model, theta).second;
      worst = std::max(worst, (mean - grad).norm());
    }
  }
  return pass_fail("td-sgd-gradient-identity", worst <= 1e-12,
                   "TD-SGD exhaustive mean vs grad l on 20 MDPs x 10 theta, max gap = " +
                       fmt(worst));
}

CheckResult check_mean_field_contraction() {
  Rng rng(17, 45);
  double worst_slack = std::numeric_limits<double>::infinity();
  const RuleKind kinds[] = {RuleKind::direct_sgd, RuleKind::td_sgd, RuleKind::td0};

  const auto contraction_case = [&](const Mdp& mdp, const Policy& target,
                                    const Policy& behavior, const FeatureMap& features) {
    const LossModel model = build_loss_model(mdp, target, behavior, features);
    for (const RuleKind kind : kinds) {
      const UpdateRule rule(kind, RuleMode::oracle, target, behavior, features,
                            mdp.gamma());
      const double c = contraction_constant(model, kind);
      for (int trial = 0; trial < 100; ++trial) {
        const Vector theta =
            model.theta_star + random_theta_in_ball(rng, features.dim, 4.0);
        const Vector u = theta - model.theta_star;
        const double lhs = u.dot(mean_direction(rule, mdp, model, theta));
        const double slack = lhs - c * u.squaredNorm();
        worst_slack = std::min(worst_slack, slack / std::max(1.0, u.squaredNorm()));
      }
    }
  };

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const double gamma = seed % 2 ? 0.5 : 0.9;
    contraction_case(random_mdp(5, 3, seed, gamma), random_policy(5, 3, seed),
                     random_policy(5, 3, seed + 500), tabular_features(5, gamma));
  }
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    contraction_case(random_symmetric_mdp(5, 3, seed, 1.0),
                     random_state_independent_policy(5, 3, seed),
                     random_state_independent_policy(5, 3, seed + 100),
                     orthonormal_features(5));
  }
  return pass_fail("mean-field-contraction", worst_slack >= -1e-9,
                   "<u, mean g> >= c||u||^2 per rule, worst normalized slack = " +
                       fmt(worst_slack));
}

CheckResult check_boundedness_constants() {
  Rng rng(19, 46);
  const double c1 = 5.0;
  bool ok = true;
  std::string detail = "sup-norm bounds on 10^4 random (theta, z) per setup";
  for (const double gamma : {0.9, 1.0}) {
    const Mdp mdp = random_mdp(4, 3, 21, gamma);
    const Policy target = random_policy(4, 3, 21);
    const Policy behavior = random_policy(4, 3, 521);
    const FeatureMap features = tabular_features(4, gamma);
    const LossModel model = build_loss_model(mdp, target, behavior, features);
    const double ratio_c = shift_constants(mdp, target, behavior).policy_ratio_c;

    const double direct_bound = (1.0 + 2.0 * c1) * 3.0;
    const double td_sgd_bound = (1.0 + 2.0 * c1) * 3.0 * ratio_c;
    const double td0_bound = ratio_c * (1.0 + 3.0 * c1) * 2.0;

    for (int trial = 0; trial < 10000 && ok; ++trial) {
      const Vector theta = random_theta_in_ball(rng, features.dim, c1);
      const int s = rng.uniform_int(4);
      const int a = rng.uniform_int(3);
      const auto& support = mdp.reward_dist(s, a);
      const Transition z{s, a,
                         support[rng.uniform_int(static_cast<int>(support.size()))].value,
                         rng.uniform_int(4)};
      const StateMoments moments = oracle_state_moments(model, z.s);
      const double g_direct =
          direction(UpdateRule(RuleKind::direct_sgd, RuleMode::oracle, target, behavior,
                               features, gamma),
                    theta, z, moments)
              .lpNorm<Eigen::Infinity>();
      const double g_td =
          direction(UpdateRule(RuleKind::td_sgd, RuleMode::oracle, target, behavior,
                               features, gamma),
                    theta, z, moments)
              .lpNorm<Eigen::Infinity>();
      const double g_td0 =
          direction(UpdateRule(RuleKind::td0, RuleMode::oracle, target, behavior,
                               features, gamma),
                    theta, z, moments)
              .lpNorm<Eigen::Infinity>();
      if (g_direct > direct_bound || g_td > td_sgd_bound || g_td0 > td0_bound) {
        ok = false;
        detail = "bound exceeded: direct " + fmt(g_direct) + "/" + fmt(direct_bound) +
                 ", td-sgd " + fmt(g_td) + "/" + fmt(td_sgd_bound) + ", td0 " +
                 fmt(g_td0) + "/" + fmt(td0_bound);
      }
    }
  }
  return pass_fail("boundedness-constants", ok, detail);
}

CheckResult check_lipschitz_constants() {
  Rng rng(23, 47);
  const double c1 = 5.0;
  bool ok = true;
  std::string detail = "Lipschitz constants on random theta pairs per rule";
  for (const double gamma : {0.9, 1.0}) {
    const Mdp mdp = random_mdp(4, 3, 22, gamma);
    const Policy target = random_policy(4, 3, 22);
    const Policy behavior = random_policy(4, 3, 522);
    const FeatureMap features = tabular_features(4, gamma);
    const LossModel model = build_loss_model(mdp, target, behavior, features);
    const double ratio_c = shift_constants(mdp, target, behavior).policy_ratio_c;

    const double bounds[] = {9.0, 9.0 * ratio_c, 6.0 * ratio_c};
    const RuleKind kinds[] = {RuleKind::direct_sgd, RuleKind::td_sgd, RuleKind::td0};

    for (int trial = 0; trial < 2000 && ok; ++trial) {
      const Vector theta1 = random_theta_in_ball(rng, features.dim, c1);
      const Vector theta2 = random_theta_in_ball(rng, features.dim, c1);
      const int s = rng.uniform_int(4);
      const int a = rng.uniform_int(3);
      const auto& support = mdp.reward_dist(s, a);
      const Transition z{s, a,
                         support[rng.uniform_int(static_cast<int>(support.size()))].value,
                         rng.uniform_int(4)};
      const StateMoments moments = oracle_state_moments(model, z.s);
      for (int k = 0; k < 3 && ok; ++k) {
        const UpdateRule rule(kinds[k], RuleMode::oracle, target, behavior, features,
                              gamma);
        const double lhs = (direction(rule, theta1, z, moments) -
                            direction(rule, theta2, z, moments))
                               .norm();
        if (lhs > bounds[k] * (theta1 - theta2).norm() + 1e-12) {
          ok = false;
          detail = "rule " + std::to_string(k) + ": " + fmt(lhs) + " > " +
                   fmt(bounds[k] * (theta1 - theta2).norm());
        }
      }
    }
  }
  return pass_fail("lipschitz-constants", ok, detail);
}

CheckResult check_sparse_equivalence() {
  double worst = 0.0;
  for (const double gamma : {0.9, 1.0}) {
    const Mdp mdp = random_mdp(5, 3, 31, gamma);
    const Policy target = random_policy(5, 3, 31);
    const Policy behavior = random_policy(5, 3, 531);
    const FeatureMap features = tabular_features(5, gamma);
    const LossModel model = build_loss_model(mdp, target, behavior, features);

    SamplerConfig sampler;
    sampler.horizon = 10000;
    sampler.seed = 97;
    const std::vector<Transition> data = sample_trajectory(mdp, behavior, sampler);
    const StepSchedule schedule = StepSchedule::inverse_sqrt(0.5);
    const ProjectionSet set = ProjectionSet::box_uniform(features.dim, 50.0);
    const Vector theta0 = Vector::Zero(features.dim);

    for (const RuleKind kind : {RuleKind::direct_sgd, RuleKind::td_sgd, RuleKind::td0}) {
      const UpdateRule rule(kind, RuleMode::empirical, target, behavior, features, gamma);
      EmpiricalModel est_generic(mdp);
      RunOptions options;
      options.oracle = &model;
      options.estimator = &est_generic;
      options.capture_iterates = true;
      const RunResult generic = run(rule, data, schedule, set, theta0, options);

      EmpiricalModel est_sparse(mdp);
      const RunResult sparse =
          run_tabular_sparse(kind, RuleMode::empirical, mdp, target, behavior, data,
                             schedule, set, theta0, &est_sparse);

      for (std::size_t i = 0; i < generic.iterates.size(); ++i)
        worst = std::max(worst, (generic.iterates[i] - sparse.iterates[i])
                                    .lpNorm<Eigen::Infinity>());
    }
  }
  return pass_fail("tabular-sparse-equivalence", worst <= 1e-12,
                   "generic engine vs sparse updates over T=10^4, 3 rules, "
                   "gamma {0.9, 1}: max gap = " +
                       fmt(worst));
}

CheckResult check_step_size_bracket() {
  for (const double c : {0.1, 1.0, 10.0}) {
    StepSequence steps(StepSchedule::contraction(c));
    for (long long t = 1; t <= 1000000; ++t) {
      const double eta = steps.eta(t);
      const double ct = c * static_cast<double>(t);
      if (!(eta >= 1.0 / ct && eta <= 2.0 / ct))
        return pass_fail("step-size-bracket", false,
                         "c=" + fmt(c) + " t=" + std::to_string(t) + " eta=" + fmt(eta));
    }
  }
  return pass_fail("step-size-bracket", true,
                   "1/(ct) <= eta_t <= 2/(ct) for c in {0.1, 1, 10}, t <= 10^6");
}

CheckResult check_step_telescoping() {
  double worst = 0.0;
  for (const double c : {0.5, 1.0}) {
    StepSequence steps(StepSchedule::contraction(c));
    const std::pair<long long, long long> windows[] = {
        {1, 10}, {5, 50}, {10, 1000}, {100, 5000}};
    for (const auto& [t, big_t] : windows) {
      double sum = 0.0;
      for (long long k = t; k < big_t; ++k) sum += steps.eta(k);
      const double lhs = std::exp(-0.5 * c * sum) * steps.eta(t);
      worst = std::max(worst, std::abs(lhs - steps.eta(big_t)));
    }
  }
  return pass_fail("step-telescoping", worst <= 1e-9,
                   "exp(-c eta_{t:T}/2) eta_t = eta_T, max gap = " + fmt(worst));
}

namespace {

struct ValueErrorSample {
  double lhs_stated = 0.0;
  double lhs_variance = 0.0;
  double rhs = 0.0;
};

// One (theta) draw of the value-error inequality on a prepared model.
ValueErrorSample value_error_sample(const Mdp& mdp, const Policy& target,
                               const LossModel& model, const ChainAnalysis& target_chain,
                               double measure_c, const Vector& theta) {
  const ValueOracle exact = exact_values(mdp, target);
  const Vector mu_pi = target_chain.stationary;
  const double lambda = target_chain.spectral_gap;
  const double gamma = mdp.gamma();

  const Vector v_theta = model.features.phi * theta;
  Vector f = v_theta - exact.value;
  const double chi = model.features.zeta.dot(theta) - exact.average_reward;
  const double f_mean = mu_pi.dot(f);

  ValueErrorSample sample;
  const double gap = loss_value(model, theta) - model.l_star;
  if (gamma < 1.0) {
    sample.lhs_stated = mu_pi.dot(f.cwiseProduct(f));
    const Vector centered = f.array() - f_mean;
    sample.lhs_variance = mu_pi.dot(centered.cwiseProduct(centered));
    const double denom = 1.0 - gamma * (1.0 - lambda);
    sample.rhs = 2.0 * measure_c / (denom * denom) * gap;
  } else {
    const Vector centered = f.array() - f_mean;
    sample.lhs_stated = mu_pi.dot(centered.cwiseProduct(centered)) + chi * chi;
    sample.lhs_variance = sample.lhs_stated;
    sample.rhs = 2.0 * measure_c / (lambda * lambda) * gap;
  }
  return sample;
}

struct ValueErrorOutcome {
  int stated_violations = 0;
  int variance_violations = 0;
  int samples = 0;
  std::string worst_case;
};

ValueErrorOutcome run_value_error_bound(double gamma) {
  Rng rng(29, 48);
  ValueErrorOutcome outcome;
  double worst_excess = 0.0;

  for (std::uint64_t instance = 0; instance <= 10; ++instance) {
    const Mdp mdp = instance == 0 ? two_state_chain(gamma)
                                  : random_symmetric_mdp(5, 3, instance, gamma);
    const int n = mdp.n_states();
    const Policy target = instance == 0
                              ? Policy::uniform(n, 1)
                              : random_state_independent_policy(n, 3, instance);
    const Policy behavior = instance == 0
                                ? Policy::uniform(n, 1)
                                : random_state_independent_policy(n, 3, instance + 100);
    const FeatureMap features =
        gamma < 1.0 ? tabular_features(n, gamma) : orthonormal_features(n);
    const LossModel model = build_loss_model(mdp, target, behavior, features);
    const ChainAnalysis target_chain = analyze_chain(transition_kernel(mdp, target));
    const double measure_c = shift_constants(mdp, target, behavior).measure_ratio_c;
    const double radius = 2.0 * (model.theta_star.norm() + 1.0);

    const int draws = instance == 0 ? 100 : 90;  // ~1000 per gamma in total
    for (int draw = 0; draw < draws; ++draw) {
      const Vector theta = random_theta_in_ball(rng, features.dim, radius);
      const ValueErrorSample sample =
          value_error_sample(mdp, target, model, target_chain, measure_c, theta);
      ++outcome.samples;
      const double tol = 1e-9 * (1.0 + std::abs(sample.rhs));
      if (sample.lhs_stated > sample.rhs + tol) {
        ++outcome.stated_violations;
        if (sample.lhs_stated - sample.rhs > worst_excess) {
          worst_excess = sample.lhs_stated - sample.rhs;
          outcome.worst_case = "lhs " + fmt(sample.lhs_stated) + " vs rhs " +
                               fmt(sample.rhs) + " (instance " +
                               std::to_string(instance) + ")";
        }
      }
      if (sample.lhs_variance > sample.rhs + tol) ++outcome.variance_violations;
    }
  }
  return outcome;
}

}  // namespace

CheckResult check_value_error_bound_average_reward() {
  const ValueErrorOutcome outcome = run_value_error_bound(1.0);
  return pass_fail("value-error-bound-average-reward", outcome.stated_violations == 0,
                   std::to_string(outcome.samples) + " draws, " +
                       std::to_string(outcome.stated_violations) + " violations");
}

CheckResult check_value_error_bound_discounted_stated() {
  int violations = 0, samples = 0;
  std::string worst;
  for (const double gamma : {0.5, 0.9}) {
    const ValueErrorOutcome outcome = run_value_error_bound(gamma);
    violations += outcome.stated_violations;
    samples += outcome.samples;
    if (worst.empty()) worst = outcome.worst_case;
  }
  return pass_fail(
      "value-error-bound-discounted-stated", violations == 0,
      std::to_string(samples) + " draws, " + std::to_string(violations) +
          " violations" + (violations > 0 ? "; e.g. " + worst : "") +
          (violations > 0
               ? ". A state-independent value error f = c 1 has zero variance, so the "
                 "(1-gamma(1-lambda))^-2 factor cannot dominate its mean-square term; "
                 "the variance form below is the provable statement."
               : ""));
}

CheckResult check_value_error_bound_discounted_variance() {
  int violations = 0, samples = 0;
  for (const double gamma : {0.5, 0.9}) {
    const ValueErrorOutcome outcome = run_value_error_bound(gamma);
    violations += outcome.variance_violations;
    samples += outcome.samples;
  }
  CheckResult result = pass_fail(
      "value-error-bound-discounted-variance", violations == 0,
      std::to_string(samples) + " draws of the mu^pi-centered form, " +
          std::to_string(violations) + " violations");
  result.informational = true;
  return result;
}

std::vector<CheckResult> run_verification_suite() {
  std::vector<CheckResult> results;
  results.push_back(check_stationary_distribution());
  results.push_back(check_mixing_time_certificate());
  results.push_back(check_blackwell_limit());
  results.push_back(check_bellman_roundtrip());
  results.push_back(check_minimizer_bellman_roundtrip());
  results.push_back(check_tabular_spectra_floors());
  results.push_back(check_anchored_spectra_floors());
  results.push_back(check_orthonormal_spectra_floors());
  results.push_back(check_gradient_finite_difference());
  results.push_back(check_hessian_constant());
  results.push_back(check_td_sgd_gradient_identity());
  results.push_back(check_mean_field_contraction());
  results.push_back(check_boundedness_constants());
  results.push_back(check_lipschitz_constants());
  results.push_back(check_sparse_equivalence());
  results.push_back(check_step_size_bracket());
  results.push_back(check_step_telescoping());
  results.push_back(check_value_error_bound_average_reward());
  results.push_back(check_value_error_bound_discounted_stated());
  results.push_back(check_value_error_bound_discounted_variance());
  results.push_back(
      {"note-complexity-constants", true, true,
       "The policy-iteration complexity constants are not reproducible at desk "
       "scale; only the fast-vs-slow rate-exponent gap is evidenced (see the "
       "acceptance suite's rate criteria)."});
  results.push_back(
      {"note-value-error-bound", true, true,
       "value-error-bound-discounted-stated is expected to fail: the stated constant drops "
       "the mean component of the value error. The centered (variance) form and "
       "the gamma=1 form are the checks that hold."});
  return results;
}

}  // namespace oprl
