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

#ifndef METAPEN_PLANS_H_
#define METAPEN_PLANS_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "metapen/game_tree.h"

namespace metapen {

// Distribution over pure plans of one player.
struct MixedPlan {
  Player player = Player::kAttacker;
  std::vector<std::pair<PurePlan, double>> support;
};

// Operational search plan: one action distribution per knowledge set. This
// is the canonical plan representation used by the solvers.
struct BehavioralPlan {
  Player player = Player::kAttacker;
  std::map<std::string, std::vector<double>> dists;

  bool operator==(const BehavioralPlan&) const = default;
};

// Attacker and defender plans; chance is fixed by the tree.
struct PlanProfile {
  BehavioralPlan attacker{Player::kAttacker, {}};
  BehavioralPlan defender{Player::kDefender, {}};

  bool operator==(const PlanProfile&) const = default;
};

// Tactic outcome probability, keyed by outcome label.
using OutcomeDistribution = std::map<std::string, double>;

struct Payoff {
  double attacker = 0.0;
  double defender = 0.0;
};

// Per-outcome utilities of both strategic players.
using OutcomeUtilities = std::map<std::string, Payoff>;

// Throws InputError if the plan does not cover exactly the player's knowledge
// sets with normalized distributions.
void CheckBehavioralPlan(const GameTree& tree, const BehavioralPlan& plan);
void CheckMixedPlan(const GameTree& tree, const MixedPlan& plan);

BehavioralPlan UniformPlan(const GameTree& tree, Player player);
BehavioralPlan PureToBehavioral(const GameTree& tree, const PurePlan& plan);

// Kuhn conversions. Both refuse players without perfect recall.
MixedPlan BehavioralToMixed(const GameTree& tree, const BehavioralPlan& plan,
                            std::size_t cap = kDefaultPlanCap);
BehavioralPlan MixedToBehavioral(const GameTree& tree, const MixedPlan& plan);

// Probability of reaching each vertex, indexed like tree.vertex().
std::vector<double> ReachProbabilities(const GameTree& tree,
                                       const PlanProfile& profile);

// tau(z): total reach probability of leaves labeled z, over every outcome in
// tree.outcomes() (unreached outcomes map to 0).
OutcomeDistribution ComputeOutcomeDistribution(const GameTree& tree,
                                               const PlanProfile& profile);

// Outcome distribution when one player follows a mixed plan and the other a
// behavioral one.
OutcomeDistribution ComputeOutcomeDistribution(const GameTree& tree,
                                               const MixedPlan& mixed,
                                               const BehavioralPlan& opponent);

Payoff ExpectedUtility(const GameTree& tree, const PlanProfile& profile,
                       const OutcomeUtilities& utilities);
Payoff ExpectedUtility(const OutcomeDistribution& tau,
                       const OutcomeUtilities& utilities);

// Largest absolute difference between two plans over shared knowledge sets;
// plans over different sets compare as 1.
double PlanDistance(const BehavioralPlan& a, const BehavioralPlan& b);

namespace internal {

// Plan as per-knowledge-set vectors indexed by GameTree knowledge-set index.
// Sets of the other player stay empty.
using IndexedPlan = std::vector<std::vector<double>>;

IndexedPlan IndexPlan(const GameTree& tree, const BehavioralPlan& plan);
IndexedPlan IndexPurePlan(const GameTree& tree, const PurePlan& plan);

// Fast forward pass: expected value of per-leaf values under the given
// attacker and defender plans (chance from the tree). `leaf_values` is
// indexed by vertex.
double Evaluate(const GameTree& tree, const IndexedPlan& attacker,
                const IndexedPlan& defender,
                const std::vector<double>& leaf_values);

}  // namespace internal

}  // namespace metapen

#endif  // METAPEN_PLANS_H_
