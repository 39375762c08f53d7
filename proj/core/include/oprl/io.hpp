#pragma once

#include "oprl/engine.hpp"
#include "oprl/features.hpp"
#include "oprl/mdp.hpp"
#include "oprl/trajectory.hpp"

#include <string>
#include <vector>

namespace oprl {

// MDP JSON: {"n_states", "n_actions", "gamma", "transition": [s][a][s'],
// "rewards": [s][a][{"r", "p"}]}. All probabilities validated on load.
Mdp load_mdp(const std::string& path);
void save_mdp(const Mdp& mdp, const std::string& path);

// Policy JSON: {"probs": [[...]]}.
Policy load_policy(const std::string& path);
void save_policy(const Policy& policy, const std::string& path);

// Feature map JSON: {"dim", "phi": [[...]], "zeta": [...]}.
FeatureMap load_features(const std::string& path);
void save_features(const FeatureMap& features, const std::string& path);

// Dataset: header line "#offline-v1,T=<n>,seed=<n>", then one transition per
// line as "s,a,r,s_next".
void save_dataset(const std::vector<Transition>& data, std::uint64_t seed,
                  const std::string& path);
std::vector<Transition> load_dataset(const std::string& path);

// Run records: CSV "t,eta,loss_gap,dist_sq,e_t"; missing oracle values are
// emitted as empty fields.
void save_records_csv(const std::vector<RunRecord>& records, const std::string& path);
std::vector<RunRecord> load_records_csv(const std::string& path);

// Diagnostic dump of the empirical count tables, nested like the MDP JSON:
// {"t", "count_s": [s], "count_sa": [s][a], "count_sas": [s][a][s'],
//  "count_sar": [s][a][support index]}.
void save_empirical_counts(const EmpiricalModel& model, const std::string& path);

}  // namespace oprl
