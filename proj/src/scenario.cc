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

#include "metapen/scenario.h"

#include <algorithm>
#include <cmath>
#include <set>

namespace metapen {

void ValidateScenario(const Scenario& scenario) {
  ValidateNetwork(scenario.network);
  ValidateParams(scenario.params);
  if (!(scenario.v_max > 0.0) || !std::isfinite(scenario.v_max)) {
    throw InputError("v_max must be a finite positive number");
  }
  const Network& net = scenario.network;
  for (const auto& [node, tree] : scenario.trees) {
    if (net.index_of(node) < 0) {
      throw InputError("tree for unknown node '" + node + "'");
    }
    if (net.node(node).terminal) {
      throw InputError("terminal node '" + node + "' must not have a tree");
    }
    if (tree.node_id() != node) {
      throw InputError("tree filed under node '" + node + "' belongs to '" +
                       tree.node_id() + "'");
    }
  }
  for (const auto& n : net.nodes) {
    if (n.terminal) continue;
    auto it = scenario.trees.find(n.id);
    if (it == scenario.trees.end()) {
      throw InputError("missing tree for node '" + n.id + "'");
    }
    const GameTree& tree = it->second;
    const std::vector<std::string> succ = net.successors(n.id);
    const std::set<std::string> targets(succ.begin(), succ.end());
    for (const std::string& z : tree.outcomes()) {
      if (!targets.count(z)) {
        throw InputError("tree outcome '" + z + "' at node '" + n.id +
                         "' has no matching edge (" + n.id + ", " + z + ")");
      }
    }
    for (const std::string& u : succ) {
      if (!std::binary_search(tree.outcomes().begin(), tree.outcomes().end(), u)) {
        throw InputError("edge (" + n.id + ", " + u +
                         ") is not an outcome of the tree at node '" + n.id + "'");
      }
    }
    for (Player p : {Player::kAttacker, Player::kDefender}) {
      if (!CheckPerfectRecall(tree, p)) {
        throw InputError("tree at node '" + n.id + "': player " +
                         std::string(PlayerName(p)) + " lacks perfect recall");
      }
    }
  }
  for (const auto& [node, plan] : scenario.fixed_defense) {
    auto it = scenario.trees.find(node);
    if (it == scenario.trees.end()) {
      throw InputError("fixed defense for node '" + node + "' which has no tree");
    }
    if (plan.player != Player::kDefender) {
      throw InputError("fixed defense for node '" + node +
                       "' is not a defender plan");
    }
    try {
      CheckBehavioralPlan(it->second, plan);
    } catch (const InputError& e) {
      throw InputError("fixed defense for node '" + node + "': " + e.what());
    }
  }
}

BehavioralPlan FixedDefense(const Scenario& scenario, const std::string& node) {
  auto it = scenario.fixed_defense.find(node);
  if (it != scenario.fixed_defense.end()) return it->second;
  auto tree = scenario.trees.find(node);
  if (tree != scenario.trees.end() &&
      tree->second.knowledge_sets_of(Player::kDefender).empty()) {
    return BehavioralPlan{Player::kDefender, {}};
  }
  throw InputError("missing fixed defense for node '" + node + "'");
}

}  // namespace metapen
