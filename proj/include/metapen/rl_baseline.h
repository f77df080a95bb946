// Copyright 2026 The Metapen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Flat-state tabular Q-learning baseline.
//
// The flat state is the attacker's location plus one "reached" flag per
// attacker knowledge set of every node. An action is a pure attacker plan
// for the current node's micro game; the defender's fixed plan, chance and
// the lateral-move kernel fold into the transition. The flags never change
// the dynamics, so the optimal value matches the meta engine's red-scheme
// value while the state space grows exponentially with the node count.

#ifndef METAPEN_RL_BASELINE_H_
#define METAPEN_RL_BASELINE_H_

#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "metapen/scenario.h"

namespace metapen {

struct FlatBranch {
  double prob = 0.0;
  int next_location = 0;
  double reward = 0.0;
  std::uint64_t flags_set = 0;  // flags raised along the way
};

struct FlatAction {
  std::string label;  // the pure plan, rendered
  std::vector<FlatBranch> branches;
};

struct FlatMdpOptions {
  // Upper bound on the enumerated state count; 0 disables the check.
  double state_cap = 1e7;
};

struct FlatMdp {
  std::vector<std::string> locations;  // network node order
  std::vector<bool> terminal;
  std::vector<std::vector<FlatAction>> actions;  // per location
  // Flag names "<node>:<knowledge set>", grouped by node.
  std::vector<std::string> flags;
  double gamma = 0.9;
  int initial_location = 0;
  double state_count = 0.0;  // |V| * 2^flags

  std::uint64_t Encode(int location, std::uint64_t flags_mask) const {
    return flags_mask * locations.size() + static_cast<std::uint64_t>(location);
  }
  int LocationOf(std::uint64_t state) const {
    return static_cast<int>(state % locations.size());
  }
  std::uint64_t FlagsOf(std::uint64_t state) const {
    return state / locations.size();
  }
  std::uint64_t initial_state() const { return Encode(initial_location, 0); }
};

// Requires a fixed defense for every node that has defender decisions.
// Throws CapacityError (carrying the count) past options.state_cap.
FlatMdp Flatten(const Scenario& scenario, const FlatMdpOptions& options = {});

// Optimal values of every enumerated state by value iteration. Only for
// small MDPs; throws CapacityError above `max_states`.
std::vector<double> FlatValueIteration(const FlatMdp& mdp,
                                       double tolerance = 1e-12,
                                       double max_states = 1e6);

struct QTable {
  struct Entry {
    std::vector<double> q;
    std::vector<int> visits;
  };
  std::unordered_map<std::uint64_t, Entry> entries;
  double initial_value = 0.0;

  double Value(std::uint64_t state, int action) const;
  // max_a Q(state, a); initial_value for unseen states.
  double MaxValue(const FlatMdp& mdp, std::uint64_t state) const;
  // Lowest-index maximizer.
  int Greedy(const FlatMdp& mdp, std::uint64_t state) const;
};

struct QLearnOptions {
  double alpha = 0.1;
  double epsilon = 0.1;  // decays linearly to zero over `episodes`
  int episodes = 50'000;
  int step_cap = 500;
  std::uint64_t seed = 1;
  // Early stop once the greedy policy's exact foothold value is within
  // target_tolerance of target. Checked every check_every episodes while the
  // Q estimate sits in that band; failed checks back off geometrically.
  bool has_target = false;
  double target = 0.0;
  double target_tolerance = 0.0;
  int check_every = 100;
  double evaluation_state_cap = 4e6;
  // Wall-clock budget in milliseconds; infinite by default.
  double budget_ms = std::numeric_limits<double>::infinity();
};

struct QLearnResult {
  QTable table;
  std::vector<double> episode_returns;  // discounted return per episode
  int episodes_run = 0;
  bool reached_target = false;
  bool budget_exhausted = false;
  double initial_value = 0.0;  // max_a Q(s0) at exit
  double greedy_value = 0.0;   // exact value of the greedy policy at s0; NaN
                               // if its reachable set exceeded the cap
};

// Exact foothold value of the table's greedy policy (lowest-index argmax)
// by iterative evaluation over the states that policy can reach. States the
// table has never seen are valued at min reward / (1 - gamma). Returns NaN
// when more than `state_cap` states are reachable.
double GreedyPolicyValue(const FlatMdp& mdp, const QTable& table,
                         double state_cap = 4e6);

QLearnResult QLearn(const FlatMdp& mdp, const QLearnOptions& options = {});

struct BenchmarkOptions {
  double rl_budget_ms = 60'000;
  double relative_tolerance = 0.05;
  std::uint64_t seed = 1;
  // Q-learning runs per count with seeds seed, seed+1, ...; rl_ms is their
  // median and rl_converged requires every run to reach the target.
  int rl_runs = 5;
  // Each meta run is repeated until this much time has elapsed; the median
  // is reported.
  double meta_min_total_ms = 100;
};

struct BenchmarkRow {
  int n_users = 0;
  double meta_ms = 0.0;
  double rl_ms = 0.0;
  double rl_states = 0.0;
  bool rl_converged = false;
  double meta_value = 0.0;
  double rl_value = 0.0;
  int rl_episodes = 0;
};

// Red-scheme meta engine against Q-learning on ScalingScenario(n) for each
// n. Both sides run single-threaded.
std::vector<BenchmarkRow> BenchmarkScaling(const std::vector<int>& user_counts,
                                           const BenchmarkOptions& options = {});

// Columns: n_users, meta_ms, rl_ms, rl_states, rl_converged.
std::string BenchmarkCsv(const std::vector<BenchmarkRow>& rows);

}  // namespace metapen

#endif  // METAPEN_RL_BASELINE_H_
