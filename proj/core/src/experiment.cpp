#include "oprl/experiment.hpp"

#include "oprl/generators.hpp"
#include "oprl/io.hpp"
#include "oprl/trajectory.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oprl {

using nlohmann::json;

RateFit fit_rate(const std::vector<long long>& ts, const std::vector<double>& values,
                 double t_lo, double t_hi) {
  if (ts.size() != values.size())
    throw std::invalid_argument("fit_rate: mismatched series lengths");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double t = static_cast<double>(ts[i]);
    if (t < t_lo || t > t_hi || t < 1.0) continue;
    if (!(values[i] > 0.0))
      throw std::invalid_argument("fit_rate: metric must be strictly positive on the window");
    xs.push_back(std::log(t));
    ys.push_back(std::log(values[i]));
  }
  if (xs.size() < 5)
    throw std::invalid_argument("fit_rate: need at least 5 points in the window, have " +
                                std::to_string(xs.size()));
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  RateFit fit;
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.points = static_cast<int>(xs.size());
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  return fit;
}

RateFit fit_rate(const std::vector<RunRecord>& records, RecordMetric metric, double t_lo,
                 double t_hi) {
  std::vector<long long> ts;
  std::vector<double> values;
  for (const RunRecord& rec : records) {
    if (rec.t < 1) continue;
    switch (metric) {
      case RecordMetric::loss_gap:
        if (!rec.has_oracle) continue;
        ts.push_back(rec.t);
        values.push_back(rec.loss_gap);
        break;
      case RecordMetric::dist_sq:
        if (!rec.has_oracle) continue;
        ts.push_back(rec.t);
        values.push_back(rec.dist_sq);
        break;
      case RecordMetric::e_t:
        if (!rec.has_error) continue;
        ts.push_back(rec.t);
        values.push_back(rec.e_t);
        break;
    }
  }
  return fit_rate(ts, values, t_lo, t_hi);
}

std::vector<RunRecord> mean_records(const std::vector<std::vector<RunRecord>>& per_seed) {
  if (per_seed.empty()) throw std::invalid_argument("mean_records: no runs");
  const std::size_t rows = per_seed.front().size();
  for (const auto& records : per_seed)
    if (records.size() != rows)
      throw std::invalid_argument("mean_records: runs have different record grids");

  std::vector<RunRecord> mean = per_seed.front();
  const double count = static_cast<double>(per_seed.size());
  for (std::size_t i = 0; i < rows; ++i) {
    double loss = 0, dist = 0, err = 0;
    for (const auto& records : per_seed) {
      if (records[i].t != mean[i].t)
        throw std::invalid_argument("mean_records: runs have different record grids");
      loss += records[i].loss_gap;
      dist += records[i].dist_sq;
      err += records[i].e_t;
    }
    mean[i].loss_gap = loss / count;
    mean[i].dist_sq = dist / count;
    mean[i].e_t = err / count;
  }
  return mean;
}

Mdp make_mdp(const MdpSpec& spec) {
  if (spec.kind == "dense")
    return random_mdp(spec.n_states, spec.n_actions, spec.seed, spec.gamma,
                      spec.reward_support);
  if (spec.kind == "symmetric")
    return random_symmetric_mdp(spec.n_states, spec.n_actions, spec.seed, spec.gamma,
                                spec.reward_support);
  if (spec.kind == "two-state") return two_state_chain(spec.gamma);
  if (spec.kind == "stay-swap") return stay_or_swap(spec.gamma);
  throw std::invalid_argument("make_mdp: unknown generator kind '" + spec.kind + "'");
}

Policy make_policy(const PolicySpec& spec, const Mdp& mdp) {
  if (spec.kind == "uniform") return Policy::uniform(mdp.n_states(), mdp.n_actions());
  if (spec.kind == "random") return random_policy(mdp.n_states(), mdp.n_actions(), spec.seed);
  if (spec.kind == "state-independent")
    return random_state_independent_policy(mdp.n_states(), mdp.n_actions(), spec.seed);
  if (spec.kind == "file") return load_policy(spec.path);
  throw std::invalid_argument("make_policy: unknown policy kind '" + spec.kind + "'");
}

namespace {

RuleKind parse_rule(const std::string& name) {
  if (name == "direct-sgd") return RuleKind::direct_sgd;
  if (name == "td-sgd") return RuleKind::td_sgd;
  if (name == "td0") return RuleKind::td0;
  throw std::invalid_argument("unknown rule '" + name + "'");
}

PolicySpec parse_policy_spec(const json& j) {
  PolicySpec spec;
  if (j.is_string()) {
    const std::string text = j.get<std::string>();
    if (text == "uniform")
      spec.kind = "uniform";
    else {
      spec.kind = "file";
      spec.path = text;
    }
    return spec;
  }
  spec.kind = j.at("kind").get<std::string>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("path")) spec.path = j.at("path").get<std::string>();
  return spec;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }

  ExperimentConfig config;
  const auto& mdp = j.at("mdp");
  if (mdp.is_string()) {
    config.mdp_path = mdp.get<std::string>();
  } else {
    MdpSpec spec;
    spec.kind = mdp.value("kind", spec.kind);
    spec.n_states = mdp.value("n_states", spec.n_states);
    spec.n_actions = mdp.value("n_actions", spec.n_actions);
    spec.seed = mdp.value("seed", spec.seed);
    spec.gamma = mdp.value("gamma", spec.gamma);
    spec.reward_support = mdp.value("reward_support", spec.reward_support);
    config.mdp_spec = spec;
  }
  if (j.contains("target")) config.target = parse_policy_spec(j.at("target"));
  if (j.contains("behavior")) config.behavior = parse_policy_spec(j.at("behavior"));
  config.feature_kind = j.value("features", config.feature_kind);
  if (j.contains("rule")) config.rule = parse_rule(j.at("rule").get<std::string>());
  if (j.contains("mode")) {
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "oracle")
      config.mode = RuleMode::oracle;
    else if (mode == "empirical")
      config.mode = RuleMode::empirical;
    else
      throw std::invalid_argument("unknown mode '" + mode + "'");
  }
  if (j.contains("schedule")) {
    const auto& sched = j.at("schedule");
    const std::string kind = sched.at("kind").get<std::string>();
    if (kind == "inverse-sqrt") {
      config.schedule_kind = StepSchedule::Kind::inverse_sqrt;
      config.eta0 = sched.value("eta0", 1.0);
    } else if (kind == "contraction") {
      config.schedule_kind = StepSchedule::Kind::contraction;
      config.c = sched.value("c", 0.0);
      config.eta1 = sched.value("eta1", 0.0);
    } else {
      throw std::invalid_argument("unknown schedule kind '" + kind + "'");
    }
  }
  if (j.contains("projection")) {
    const auto& proj = j.at("projection");
    config.projection_shape = proj.value("shape", config.projection_shape);
    config.radius = proj.value("radius", 0.0);
    config.half_width = proj.value("half_width", 0.0);
  }
  config.horizon = j.value("horizon", config.horizon);
  if (j.contains("sample_mode")) {
    const std::string mode = j.at("sample_mode").get<std::string>();
    if (mode == "markov")
      config.sample_mode = SampleMode::markov;
    else if (mode == "iid")
      config.sample_mode = SampleMode::iid;
    else
      throw std::invalid_argument("unknown sample mode '" + mode + "'");
  }
  if (j.contains("seeds")) config.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  config.dump_data = j.value("dump_data", false);
  config.rounds = j.value("rounds", config.rounds);
  config.t_eval = j.value("t_eval", config.t_eval);
  return config;
}

ResolvedExperiment resolve_experiment(const ExperimentConfig& config) {
  if (config.seeds.empty()) throw std::invalid_argument("config: seed list is empty");
  if (config.horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");

  Mdp mdp = config.mdp_path ? load_mdp(*config.mdp_path)
                            : make_mdp(config.mdp_spec.value_or(MdpSpec{}));
  Policy target = make_policy(config.target, mdp);
  Policy behavior = make_policy(config.behavior, mdp);

  FeatureMap features;
  if (config.feature_kind == "tabular")
    features = tabular_features(mdp.n_states(), mdp.gamma());
  else if (config.feature_kind == "anchored")
    features = anchored_features(mdp.n_states());
  else if (config.feature_kind == "orthonormal")
    features = orthonormal_features(mdp.n_states());
  else
    throw std::invalid_argument("config: unknown feature kind '" + config.feature_kind + "'");
  if (config.feature_kind != "tabular" && !mdp.average_reward())
    throw std::invalid_argument("config: " + config.feature_kind +
                                " features are gamma = 1 parameterizations");

  LossModel model = build_loss_model(mdp, target, behavior, features);

  StepSchedule schedule = StepSchedule::inverse_sqrt(config.eta0);
  if (config.schedule_kind == StepSchedule::Kind::contraction) {
    double c = config.c;
    if (c <= 0.0) {
      c = contraction_constant(model, config.rule);
      if (c <= 0.0)
        throw std::invalid_argument(
            "config: contraction schedule requested but the rule's contraction "
            "constant is " +
            std::to_string(c));
    }
    schedule = StepSchedule::contraction(c, config.eta1);
  }

  ProjectionSet projection = ProjectionSet::ball(1.0);
  if (config.projection_shape == "ball") {
    const double radius =
        config.radius > 0.0 ? config.radius : 2.0 * (model.theta_star.norm() + 1.0);
    projection = ProjectionSet::ball(radius);
  } else if (config.projection_shape == "box") {
    const double hw = config.half_width > 0.0
                          ? config.half_width
                          : 2.0 * (model.theta_star.lpNorm<Eigen::Infinity>() + 1.0);
    projection = ProjectionSet::box_uniform(features.dim, hw);
  } else {
    throw std::invalid_argument("config: unknown projection shape '" +
                                config.projection_shape + "'");
  }
  if (!projection.contains(model.theta_star, 1e-9))
    throw std::invalid_argument("config: theta* lies outside the projection set");

  return {std::move(mdp),      std::move(target),   std::move(behavior),
          std::move(features), std::move(model),    schedule,
          std::move(projection)};
}

EvaluateOutcome cmd_evaluate(const ExperimentConfig& config, const std::string& out_dir) {
  const ResolvedExperiment exp = resolve_experiment(config);
  std::filesystem::create_directories(out_dir);

  EvaluateOutcome outcome;
  const UpdateRule rule(config.rule, config.mode, exp.target, exp.behavior, exp.features,
                        exp.mdp.gamma());

  // Seeds run concurrently: every run owns its sampler, estimator, and output
  // file; the averaging pass happens after the join below.
  const auto one_seed = [&](std::uint64_t seed) {
    SamplerConfig sampler;
    sampler.mode = config.sample_mode;
    sampler.horizon = config.horizon;
    sampler.seed = seed;
    const std::vector<Transition> data = sample_trajectory(exp.mdp, exp.behavior, sampler);

    EmpiricalModel estimator(exp.mdp);
    RunOptions options;
    options.oracle = &exp.model;
    if (config.mode == RuleMode::empirical) options.estimator = &estimator;

    const RunResult result = run(rule, data, exp.schedule, exp.projection,
                                 Vector::Zero(exp.features.dim), options);

    const std::string base = out_dir + "/seed_" + std::to_string(seed);
    save_records_csv(result.records, base + ".csv");
    if (config.dump_data) save_dataset(data, seed, base + ".data");
    return result.records;
  };

  std::vector<std::future<std::vector<RunRecord>>> futures;
  futures.reserve(config.seeds.size());
  for (const std::uint64_t seed : config.seeds)
    futures.push_back(std::async(std::launch::async, one_seed, seed));
  for (std::size_t i = 0; i < config.seeds.size(); ++i) {
    outcome.per_seed.push_back(futures[i].get());
    const std::string base = out_dir + "/seed_" + std::to_string(config.seeds[i]);
    outcome.files.push_back(base + ".csv");
    if (config.dump_data) outcome.files.push_back(base + ".data");
  }

  outcome.mean = mean_records(outcome.per_seed);
  save_records_csv(outcome.mean, out_dir + "/mean.csv");
  outcome.files.push_back(out_dir + "/mean.csv");
  return outcome;
}

LearnOutcome cmd_learn(const ExperimentConfig& config, const std::string& out_dir) {
  if (config.rounds < 0) throw std::invalid_argument("config: rounds must be >= 0");
  if (config.t_eval < 1) throw std::invalid_argument("config: t_eval must be >= 1");

  Mdp mdp = config.mdp_path ? load_mdp(*config.mdp_path)
                            : make_mdp(config.mdp_spec.value_or(MdpSpec{}));
  if (mdp.average_reward())
    throw std::invalid_argument("config: learn requires gamma < 1");
  const Policy behavior = make_policy(config.behavior, mdp);
  std::filesystem::create_directories(out_dir);

  LearnOutcome outcome;
  for (const std::uint64_t seed : config.seeds) {
    PolicyIterConfig pi;
    pi.rounds = config.rounds;
    pi.t_eval = config.t_eval;
    pi.rule = config.rule;
    pi.mode = config.mode;
    pi.eta0 = config.eta0;
    pi.seed = seed;
    const IterationReport report = approximate_policy_iteration(mdp, behavior, pi);

    const auto num = [](double x) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      return std::string(buf);
    };
    const std::string base = out_dir + "/learn_seed_" + std::to_string(seed);
    std::ostringstream csv;
    csv << "k,eps_hat,suboptimality,shift_c\n";
    for (const RoundReport& round : report.rounds) {
      csv << round.round << ",";
      if (round.evaluated) csv << num(round.eps_hat);
      csv << "," << num(round.suboptimality) << ",";
      if (round.evaluated) {
        if (round.shift.finite)
          csv << num(round.shift.policy_ratio_c);
        else
          csv << "inf";
      }
      csv << "\n";
    }
    std::ofstream file(base + ".csv");
    if (!file) throw std::runtime_error("cannot write " + base + ".csv");
    file << csv.str();
    file.close();
    save_policy(report.final_policy, base + "_policy.json");
    outcome.files.push_back(base + ".csv");
    outcome.files.push_back(base + "_policy.json");
    outcome.per_seed.push_back(std::move(report));
  }
  return outcome;
}

}  // namespace oprl
