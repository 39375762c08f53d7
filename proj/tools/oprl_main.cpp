// Experiment driver: MDP generation, offline policy evaluation and policy
// learning runs, rate-slope fitting, and the invariant verification suite.
//
// Exit codes: 0 success, 1 check failure, 2 invalid input.

#include "oprl/experiment.hpp"
#include "oprl/generators.hpp"
#include "oprl/io.hpp"
#include "oprl/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitInvalidInput = 2;

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma - pos);
    seeds.push_back(std::stoull(item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (seeds.empty()) throw std::invalid_argument("--seeds: empty list");
  return seeds;
}

int cmd_mdp_gen(const oprl::MdpSpec& spec, const std::string& out_path, bool quiet) {
  const oprl::Mdp mdp = oprl::make_mdp(spec);
  oprl::save_mdp(mdp, out_path);
  if (!quiet)
    std::cout << "wrote " << out_path << " (" << mdp.n_states() << " states, "
              << mdp.n_actions() << " actions, gamma " << mdp.gamma() << ")\n";
  return kExitOk;
}

int cmd_rate_fit(const std::string& in_path, const std::string& metric_name,
                 double t_lo, double t_hi) {
  oprl::RecordMetric metric;
  if (metric_name == "loss_gap")
    metric = oprl::RecordMetric::loss_gap;
  else if (metric_name == "dist_sq")
    metric = oprl::RecordMetric::dist_sq;
  else if (metric_name == "e_t")
    metric = oprl::RecordMetric::e_t;
  else
    throw std::invalid_argument("--metric must be loss_gap, dist_sq, or e_t");

  const auto records = oprl::load_records_csv(in_path);
  const oprl::RateFit fit = oprl::fit_rate(records, metric, t_lo, t_hi);
  std::printf("metric=%s window=[%g,%g] points=%d slope=%.6f intercept=%.6f\n",
              metric_name.c_str(), fit.t_lo, fit.t_hi, fit.points, fit.slope,
              fit.intercept);
  return kExitOk;
}

int cmd_verify(bool quiet) {
  const std::vector<oprl::CheckResult> results = oprl::run_verification_suite();
  bool all_pass = true;
  for (const auto& result : results) {
    if (result.informational) {
      if (!quiet) std::cout << "NOTE " << result.name << ": " << result.detail << "\n";
      continue;
    }
    all_pass = all_pass && result.pass;
    std::cout << (result.pass ? "PASS " : "FAIL ") << result.name;
    if (!quiet) std::cout << ": " << result.detail;
    std::cout << "\n";
  }
  return all_pass ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline policy evaluation and policy iteration on finite MDPs"};
  app.require_subcommand(1);
  app.fallthrough();  // allow --quiet after the subcommand

  bool quiet = false;
  app.add_flag("--quiet", quiet, "Suppress non-essential output");

  // mdp-gen
  auto* gen = app.add_subcommand("mdp-gen", "Generate an MDP JSON file");
  oprl::MdpSpec spec;
  std::string gen_out = "mdp.json";
  gen->add_option("--kind", spec.kind, "dense | symmetric | two-state | stay-swap");
  gen->add_option("--states", spec.n_states, "Number of states");
  gen->add_option("--actions", spec.n_actions, "Number of actions");
  gen->add_option("--seed", spec.seed, "Generator seed");
  gen->add_option("--gamma", spec.gamma, "Discount factor in (0, 1]");
  gen->add_option("--reward-support", spec.reward_support, "Reward support size");
  gen->add_option("--out", gen_out, "Output path");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Run policy evaluation per seed");
  std::string eval_config;
  std::string eval_out = "out";
  std::string eval_seeds;
  evaluate->add_option("--config", eval_config, "Experiment config JSON")->required();
  evaluate->add_option("--out", eval_out, "Output directory");
  evaluate->add_option("--seeds", eval_seeds, "Comma-separated seed list override");

  // learn
  auto* learn = app.add_subcommand("learn", "Run approximate policy iteration per seed");
  std::string learn_config;
  std::string learn_out = "out";
  std::string learn_seeds;
  learn->add_option("--config", learn_config, "Experiment config JSON")->required();
  learn->add_option("--out", learn_out, "Output directory");
  learn->add_option("--seeds", learn_seeds, "Comma-separated seed list override");

  // rate-fit
  auto* rate = app.add_subcommand("rate-fit", "Fit log-log slope of a record CSV");
  std::string rate_in;
  std::string rate_metric = "loss_gap";
  std::string rate_window = "1000:100000";
  rate->add_option("--in", rate_in, "Record CSV (typically mean.csv)")->required();
  rate->add_option("--metric", rate_metric, "loss_gap | dist_sq | e_t");
  rate->add_option("--window", rate_window, "t window as lo:hi");

  // verify
  auto* verify = app.add_subcommand("verify", "Run the invariant verification suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  try {
    if (gen->parsed()) return cmd_mdp_gen(spec, gen_out, quiet);

    if (evaluate->parsed()) {
      oprl::ExperimentConfig config = oprl::load_experiment_config(eval_config);
      if (!eval_seeds.empty()) config.seeds = parse_seed_list(eval_seeds);
      const auto outcome = oprl::cmd_evaluate(config, eval_out);
      if (!quiet)
        for (const auto& file : outcome.files) std::cout << "wrote " << file << "\n";
      return kExitOk;
    }

    if (learn->parsed()) {
      oprl::ExperimentConfig config = oprl::load_experiment_config(learn_config);
      if (!learn_seeds.empty()) config.seeds = parse_seed_list(learn_seeds);
      const auto outcome = oprl::cmd_learn(config, learn_out);
      if (!quiet)
        for (const auto& file : outcome.files) std::cout << "wrote " << file << "\n";
      return kExitOk;
    }

    if (rate->parsed()) {
      const std::size_t colon = rate_window.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("--window must be lo:hi");
      return cmd_rate_fit(rate_in, rate_metric, std::stod(rate_window.substr(0, colon)),
                          std::stod(rate_window.substr(colon + 1)));
    }

    if (verify->parsed()) return cmd_verify(quiet);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }

  return kExitInvalidInput;
}
