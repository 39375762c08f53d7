#include "oprl/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oprl {

using nlohmann::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

Mdp load_mdp(const std::string& path) {
  const json j = read_json(path);
  const int n_states = j.at("n_states").get<int>();
  const int n_actions = j.at("n_actions").get<int>();
  const double gamma = j.at("gamma").get<double>();

  const auto& trans = j.at("transition");
  if (static_cast<int>(trans.size()) != n_states)
    throw std::runtime_error(path + ": transition must have n_states outer entries");
  std::vector<Matrix> by_action(n_actions, Matrix(n_states, n_states));
  for (int s = 0; s < n_states; ++s) {
    if (static_cast<int>(trans[s].size()) != n_actions)
      throw std::runtime_error(path + ": transition[s] must have n_actions entries");
    for (int a = 0; a < n_actions; ++a) {
      if (static_cast<int>(trans[s][a].size()) != n_states)
        throw std::runtime_error(path + ": transition[s][a] must have n_states entries");
      for (int sp = 0; sp < n_states; ++sp)
        by_action[a](s, sp) = trans[s][a][sp].get<double>();
    }
  }

  const auto& rew = j.at("rewards");
  if (static_cast<int>(rew.size()) != n_states)
    throw std::runtime_error(path + ": rewards must have n_states outer entries");
  std::vector<std::vector<RewardAtom>> rewards(
      static_cast<std::size_t>(n_states) * n_actions);
  for (int s = 0; s < n_states; ++s) {
    if (static_cast<int>(rew[s].size()) != n_actions)
      throw std::runtime_error(path + ": rewards[s] must have n_actions entries");
    for (int a = 0; a < n_actions; ++a) {
      for (const auto& atom : rew[s][a])
        rewards[s * n_actions + a].push_back(
            {atom.at("r").get<double>(), atom.at("p").get<double>()});
    }
  }

  return Mdp(std::move(by_action), std::move(rewards), gamma);
}

void save_mdp(const Mdp& mdp, const std::string& path) {
  json trans = json::array();
  json rew = json::array();
  for (int s = 0; s < mdp.n_states(); ++s) {
    json trans_s = json::array();
    json rew_s = json::array();
    for (int a = 0; a < mdp.n_actions(); ++a) {
      json row = json::array();
      for (int sp = 0; sp < mdp.n_states(); ++sp) row.push_back(mdp.transition(s, a, sp));
      trans_s.push_back(std::move(row));
      json atoms = json::array();
      for (const auto& atom : mdp.reward_dist(s, a))
        atoms.push_back({{"r", atom.value}, {"p", atom.prob}});
      rew_s.push_back(std::move(atoms));
    }
    trans.push_back(std::move(trans_s));
    rew.push_back(std::move(rew_s));
  }
  const json j{{"n_states", mdp.n_states()},
               {"n_actions", mdp.n_actions()},
               {"gamma", mdp.gamma()},
               {"transition", std::move(trans)},
               {"rewards", std::move(rew)}};
  write_text(path, j.dump(2) + "\n");
}

Policy load_policy(const std::string& path) {
  const json j = read_json(path);
  const auto& rows = j.at("probs");
  if (rows.empty()) throw std::runtime_error(path + ": empty policy");
  const int n_states = static_cast<int>(rows.size());
  const int n_actions = static_cast<int>(rows[0].size());
  Matrix probs(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    if (static_cast<int>(rows[s].size()) != n_actions)
      throw std::runtime_error(path + ": ragged policy rows");
    for (int a = 0; a < n_actions; ++a) probs(s, a) = rows[s][a].get<double>();
  }
  return Policy(std::move(probs));
}

void save_policy(const Policy& policy, const std::string& path) {
  json rows = json::array();
  for (int s = 0; s < policy.n_states(); ++s) {
    json row = json::array();
    for (int a = 0; a < policy.n_actions(); ++a) row.push_back(policy.prob(s, a));
    rows.push_back(std::move(row));
  }
  write_text(path, json{{"probs", std::move(rows)}}.dump(2) + "\n");
}

FeatureMap load_features(const std::string& path) {
  const json j = read_json(path);
  FeatureMap f;
  f.dim = j.at("dim").get<int>();
  const auto& rows = j.at("phi");
  f.phi.resize(static_cast<int>(rows.size()), f.dim);
  for (int s = 0; s < f.phi.rows(); ++s)
    for (int k = 0; k < f.dim; ++k) f.phi(s, k) = rows[s][k].get<double>();
  const auto& z = j.at("zeta");
  if (static_cast<int>(z.size()) != f.dim)
    throw std::runtime_error(path + ": zeta length must equal dim");
  f.zeta.resize(f.dim);
  for (int k = 0; k < f.dim; ++k) f.zeta(k) = z[k].get<double>();
  return f;
}

void save_features(const FeatureMap& features, const std::string& path) {
  json rows = json::array();
  for (int s = 0; s < features.phi.rows(); ++s) {
    json row = json::array();
    for (int k = 0; k < features.dim; ++k) row.push_back(features.phi(s, k));
    rows.push_back(std::move(row));
  }
  json zeta = json::array();
  for (int k = 0; k < features.dim; ++k) zeta.push_back(features.zeta(k));
  write_text(path, json{{"dim", features.dim},
                        {"phi", std::move(rows)},
                        {"zeta", std::move(zeta)}}
                       .dump(2) +
                       "\n");
}

void save_dataset(const std::vector<Transition>& data, std::uint64_t seed,
                  const std::string& path) {
  std::ostringstream out;
  out << "#offline-v1,T=" << data.size() << ",seed=" << seed << "\n";
  for (const Transition& z : data)
    out << z.s << "," << z.a << "," << format_double(z.r) << "," << z.s_next << "\n";
  write_text(path, out.str());
}

std::vector<Transition> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("#offline-v1", 0) != 0)
    throw std::runtime_error(path + ": missing #offline-v1 header");
  std::vector<Transition> data;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Transition z;
    char c1, c2, c3;
    std::istringstream row(line);
    if (!(row >> z.s >> c1 >> z.a >> c2 >> z.r >> c3 >> z.s_next) || c1 != ',' ||
        c2 != ',' || c3 != ',')
      throw std::runtime_error(path + ": malformed transition line: " + line);
    data.push_back(z);
  }
  return data;
}

void save_records_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::ostringstream out;
  out << "t,eta,loss_gap,dist_sq,e_t\n";
  for (const RunRecord& rec : records) {
    out << rec.t << "," << format_double(rec.eta) << ",";
    if (rec.has_oracle)
      out << format_double(rec.loss_gap) << "," << format_double(rec.dist_sq);
    else
      out << ",";
    out << ",";
    if (rec.has_error) out << format_double(rec.e_t);
    out << "\n";
  }
  write_text(path, out.str());
}

void save_empirical_counts(const EmpiricalModel& model, const std::string& path) {
  json count_s = json::array();
  json count_sa = json::array();
  json count_sas = json::array();
  json count_sar = json::array();
  for (int s = 0; s < model.n_states(); ++s) {
    count_s.push_back(model.visits(s));
    json sa_row = json::array(), sas_row = json::array(), sar_row = json::array();
    for (int a = 0; a < model.n_actions(); ++a) {
      sa_row.push_back(model.visits(s, a));
      json successors = json::array();
      for (int sp = 0; sp < model.n_states(); ++sp)
        successors.push_back(model.visits(s, a, sp));
      sas_row.push_back(std::move(successors));
      json rewards = json::array();
      for (int k = 0; k < model.reward_support_size(s, a); ++k)
        rewards.push_back(model.reward_visits(s, a, k));
      sar_row.push_back(std::move(rewards));
    }
    count_sa.push_back(std::move(sa_row));
    count_sas.push_back(std::move(sas_row));
    count_sar.push_back(std::move(sar_row));
  }
  const json j{{"t", model.total()},
               {"count_s", std::move(count_s)},
               {"count_sa", std::move(count_sa)},
               {"count_sas", std::move(count_sas)},
               {"count_sar", std::move(count_sar)}};
  write_text(path, j.dump(2) + "\n");
}

std::vector<RunRecord> load_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "t,eta,loss_gap,dist_sq,e_t")
    throw std::runtime_error(path + ": missing records header");
  std::vector<RunRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    RunRecord rec;
    std::getline(row, field, ',');
    rec.t = std::stoll(field);
    std::getline(row, field, ',');
    rec.eta = std::stod(field);
    std::getline(row, field, ',');
    if (!field.empty()) {
      rec.loss_gap = std::stod(field);
      rec.has_oracle = true;
    }
    std::getline(row, field, ',');
    if (!field.empty()) rec.dist_sq = std::stod(field);
    if (std::getline(row, field, ',') && !field.empty()) {
      rec.e_t = std::stod(field);
      rec.has_error = true;
    }
    records.push_back(rec);
  }
  return records;
}

}  // namespace oprl
