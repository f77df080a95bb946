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

#include "metapen/plans.h"

#include <algorithm>
#include <cmath>
#include <set>

namespace metapen {
namespace {

void CheckDistribution(const std::vector<double>& dist, std::size_t size,
                       const std::string& where) {
  if (dist.size() != size) {
    throw InputError(where + ": expected " + std::to_string(size) +
                     " probabilities, got " + std::to_string(dist.size()));
  }
  double sum = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw InputError(where + ": negative or non-finite probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance) {
    throw InputError(where + ": probabilities sum to " + std::to_string(sum));
  }
}

void RequirePerfectRecall(const GameTree& tree, Player player) {
  if (!CheckPerfectRecall(tree, player)) {
    throw InputError("player " + std::string(PlayerName(player)) +
                     " lacks perfect recall in the tree at node '" +
                     tree.node_id() + "'");
  }
}

void CheckPurePlan(const GameTree& tree, const PurePlan& plan) {
  const auto sets = tree.knowledge_sets_of(plan.player);
  if (plan.choices.size() != sets.size()) {
    throw InputError("pure plan does not cover every knowledge set");
  }
  for (int k : sets) {
    const auto& info = tree.knowledge_set(k);
    auto it = plan.choices.find(info.id);
    if (it == plan.choices.end() || it->second < 0 ||
        it->second >= static_cast<int>(info.actions.size())) {
      throw InputError("pure plan has no valid choice at knowledge set '" +
                       info.id + "'");
    }
  }
}

}  // namespace

void CheckBehavioralPlan(const GameTree& tree, const BehavioralPlan& plan) {
  if (plan.player == Player::kChance) {
    throw InputError("behavioral plan for chance");
  }
  const auto sets = tree.knowledge_sets_of(plan.player);
  if (plan.dists.size() != sets.size()) {
    throw InputError("behavioral plan for " +
                     std::string(PlayerName(plan.player)) + " covers " +
                     std::to_string(plan.dists.size()) + " knowledge sets, tree has " +
                     std::to_string(sets.size()));
  }
  for (int k : sets) {
    const auto& info = tree.knowledge_set(k);
    auto it = plan.dists.find(info.id);
    if (it == plan.dists.end()) {
      throw InputError("behavioral plan misses knowledge set '" + info.id +
                       "'");
    }
    CheckDistribution(it->second, info.actions.size(),
                      "knowledge set '" + info.id + "'");
  }
}

void CheckMixedPlan(const GameTree& tree, const MixedPlan& plan) {
  double sum = 0.0;
  std::set<PurePlan> seen;
  for (const auto& [pure, w] : plan.support) {
    if (pure.player != plan.player) {
      throw InputError("mixed plan support of the wrong player");
    }
    CheckPurePlan(tree, pure);
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InputError("mixed plan weight is negative or non-finite");
    }
    if (!seen.insert(pure).second) {
      throw InputError("mixed plan repeats a pure plan");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance) {
    throw InputError("mixed plan weights sum to " + std::to_string(sum));
  }
}

BehavioralPlan UniformPlan(const GameTree& tree, Player player) {
  BehavioralPlan plan{player, {}};
  for (int k : tree.knowledge_sets_of(player)) {
    const auto& info = tree.knowledge_set(k);
    const double n = static_cast<double>(info.actions.size());
    plan.dists.emplace(info.id, std::vector<double>(info.actions.size(), 1.0 / n));
  }
  return plan;
}

BehavioralPlan PureToBehavioral(const GameTree& tree, const PurePlan& plan) {
  CheckPurePlan(tree, plan);
  BehavioralPlan out{plan.player, {}};
  for (int k : tree.knowledge_sets_of(plan.player)) {
    const auto& info = tree.knowledge_set(k);
    std::vector<double> dist(info.actions.size(), 0.0);
    dist[plan.choices.at(info.id)] = 1.0;
    out.dists.emplace(info.id, std::move(dist));
  }
  return out;
}

MixedPlan BehavioralToMixed(const GameTree& tree, const BehavioralPlan& plan,
                            std::size_t cap) {
  CheckBehavioralPlan(tree, plan);
  RequirePerfectRecall(tree, plan.player);
  if (CountPurePlans(tree, plan.player) > cap) {
    throw CapacityError(
        "mixed form needs " +
            std::to_string(CountPurePlans(tree, plan.player)) +
            " pure plans; use the operational (behavioral) form instead",
        CountPurePlans(tree, plan.player));
  }
  MixedPlan mixed{plan.player, {}};
  for (PurePlan& pure : EnumeratePurePlans(tree, plan.player, cap)) {
    double w = 1.0;
    for (const auto& [ks, action] : pure.choices) {
      w *= plan.dists.at(ks)[action];
    }
    if (w > 0.0) mixed.support.emplace_back(std::move(pure), w);
  }
  return mixed;
}

BehavioralPlan MixedToBehavioral(const GameTree& tree, const MixedPlan& plan) {
  CheckMixedPlan(tree, plan);
  RequirePerfectRecall(tree, plan.player);
  BehavioralPlan out{plan.player, {}};
  for (int k : tree.knowledge_sets_of(plan.player)) {
    const auto& info = tree.knowledge_set(k);
    // Perfect recall: every member shares this own-history.
    const auto history = OwnHistory(tree, info.members.front(), plan.player);
    std::vector<double> mass(info.actions.size(), 0.0);
    double total = 0.0;
    for (const auto& [pure, w] : plan.support) {
      const bool reaches = std::all_of(
          history.begin(), history.end(), [&](const std::pair<int, int>& step) {
            return pure.choices.at(tree.knowledge_set(step.first).id) ==
                   step.second;
          });
      if (!reaches) continue;
      mass[pure.choices.at(info.id)] += w;
      total += w;
    }
    if (total > 0.0) {
      for (double& m : mass) m /= total;
    } else {
      // Unreachable under every support plan: any choice is equivalent.
      std::fill(mass.begin(), mass.end(),
                1.0 / static_cast<double>(mass.size()));
    }
    out.dists.emplace(info.id, std::move(mass));
  }
  return out;
}

namespace internal {

IndexedPlan IndexPlan(const GameTree& tree, const BehavioralPlan& plan) {
  CheckBehavioralPlan(tree, plan);
  IndexedPlan indexed(tree.num_knowledge_sets());
  for (int k : tree.knowledge_sets_of(plan.player)) {
    indexed[k] = plan.dists.at(tree.knowledge_set(k).id);
  }
  return indexed;
}

IndexedPlan IndexPurePlan(const GameTree& tree, const PurePlan& plan) {
  IndexedPlan indexed(tree.num_knowledge_sets());
  for (int k : tree.knowledge_sets_of(plan.player)) {
    const auto& info = tree.knowledge_set(k);
    indexed[k].assign(info.actions.size(), 0.0);
    indexed[k][plan.choices.at(info.id)] = 1.0;
  }
  return indexed;
}

namespace {

double ActionProbability(const GameTree& tree, const IndexedPlan& attacker,
                         const IndexedPlan& defender, int v, int a) {
  const Vertex& vx = tree.vertex(v);
  switch (vx.owner) {
    case Player::kChance:
      return vx.chance_dist[a];
    case Player::kAttacker:
      return attacker[tree.knowledge_set_of(v)][a];
    case Player::kDefender:
      return defender[tree.knowledge_set_of(v)][a];
  }
  return 0.0;
}

}  // namespace

double Evaluate(const GameTree& tree, const IndexedPlan& attacker,
                const IndexedPlan& defender,
                const std::vector<double>& leaf_values) {
  double total = 0.0;
  std::vector<std::pair<int, double>> stack{{tree.root(), 1.0}};
  while (!stack.empty()) {
    const auto [v, p] = stack.back();
    stack.pop_back();
    if (tree.is_leaf(v)) {
      total += p * leaf_values[v];
      continue;
    }
    const auto kids = tree.children(v);
    for (int a = 0; a < static_cast<int>(kids.size()); ++a) {
      const double q = ActionProbability(tree, attacker, defender, v, a);
      if (q > 0.0) stack.emplace_back(kids[a], p * q);
    }
  }
  return total;
}

}  // namespace internal

std::vector<double> ReachProbabilities(const GameTree& tree,
                                       const PlanProfile& profile) {
  if (profile.attacker.player != Player::kAttacker ||
      profile.defender.player != Player::kDefender) {
    throw InputError("plan profile players are swapped");
  }
  const auto attacker = internal::IndexPlan(tree, profile.attacker);
  const auto defender = internal::IndexPlan(tree, profile.defender);
  std::vector<double> reach(tree.num_vertices(), 0.0);
  reach[tree.root()] = 1.0;
  std::vector<int> stack{tree.root()};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    const auto kids = tree.children(v);
    for (int a = 0; a < static_cast<int>(kids.size()); ++a) {
      reach[kids[a]] =
          reach[v] *
          internal::ActionProbability(tree, attacker, defender, v, a);
      stack.push_back(kids[a]);
    }
  }
  return reach;
}

OutcomeDistribution ComputeOutcomeDistribution(const GameTree& tree,
                                               const PlanProfile& profile) {
  const std::vector<double> reach = ReachProbabilities(tree, profile);
  OutcomeDistribution tau;
  for (const std::string& z : tree.outcomes()) tau.emplace(z, 0.0);
  for (int leaf : tree.leaves()) {
    tau[tree.outcomes()[tree.outcome_of_leaf(leaf)]] += reach[leaf];
  }
  return tau;
}

OutcomeDistribution ComputeOutcomeDistribution(const GameTree& tree,
                                               const MixedPlan& mixed,
                                               const BehavioralPlan& opponent) {
  CheckMixedPlan(tree, mixed);
  if (opponent.player == mixed.player) {
    throw InputError("mixed plan and opponent belong to the same player");
  }
  OutcomeDistribution tau;
  for (const std::string& z : tree.outcomes()) tau.emplace(z, 0.0);
  for (const auto& [pure, w] : mixed.support) {
    PlanProfile profile;
    if (mixed.player == Player::kAttacker) {
      profile.attacker = PureToBehavioral(tree, pure);
      profile.defender = opponent;
    } else {
      profile.attacker = opponent;
      profile.defender = PureToBehavioral(tree, pure);
    }
    for (const auto& [z, p] : ComputeOutcomeDistribution(tree, profile)) {
      tau[z] += w * p;
    }
  }
  return tau;
}

Payoff ExpectedUtility(const OutcomeDistribution& tau,
                       const OutcomeUtilities& utilities) {
  Payoff total;
  for (const auto& [z, p] : tau) {
    auto it = utilities.find(z);
    if (it == utilities.end()) {
      throw InputError("no utility for outcome '" + z + "'");
    }
    total.attacker += p * it->second.attacker;
    total.defender += p * it->second.defender;
  }
  return total;
}

Payoff ExpectedUtility(const GameTree& tree, const PlanProfile& profile,
                       const OutcomeUtilities& utilities) {
  return ExpectedUtility(ComputeOutcomeDistribution(tree, profile), utilities);
}

double PlanDistance(const BehavioralPlan& a, const BehavioralPlan& b) {
  if (a.player != b.player || a.dists.size() != b.dists.size()) return 1.0;
  double distance = 0.0;
  for (const auto& [ks, dist] : a.dists) {
    auto it = b.dists.find(ks);
    if (it == b.dists.end() || it->second.size() != dist.size()) return 1.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      distance = std::max(distance, std::abs(dist[i] - it->second[i]));
    }
  }
  return distance;
}

}  // namespace metapen
