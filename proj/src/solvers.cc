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

#include "metapen/solvers.h"

#include <algorithm>
#include <cmath>

namespace metapen {

std::string_view SchemeName(Scheme scheme) {
  switch (scheme) {
    case Scheme::kRed:
      return "red";
    case Scheme::kPurple:
      return "purple";
    case Scheme::kNash:
      return "nash";
  }
  return "unknown";
}

Scheme ParseScheme(std::string_view name) {
  if (name == "red") return Scheme::kRed;
  if (name == "purple") return Scheme::kPurple;
  if (name == "nash") return Scheme::kNash;
  throw InputError("unknown scheme '" + std::string(name) + "'");
}

namespace {

// Relative slack used when comparing candidate values for ties.
constexpr double kTieSlack = 1e-12;

std::vector<double> LeafValues(const GameTree& tree,
                               const OutcomeUtilities& utilities,
                               Player player) {
  std::vector<double> values(tree.num_vertices(), 0.0);
  for (int leaf : tree.leaves()) {
    const std::string& z = tree.outcomes()[tree.outcome_of_leaf(leaf)];
    auto it = utilities.find(z);
    if (it == utilities.end()) {
      throw InputError("no utility for outcome '" + z + "' at node '" +
                       tree.node_id() + "'");
    }
    values[leaf] = player == Player::kAttacker ? it->second.attacker
                                               : it->second.defender;
  }
  return values;
}

void RequireRecall(const GameTree& tree, Player player) {
  if (!CheckPerfectRecall(tree, player)) {
    throw InputError("player " + std::string(PlayerName(player)) +
                     " lacks perfect recall at node '" + tree.node_id() +
                     "'; refusing to solve");
  }
}

MixedPlan ToMixed(Player player, const std::vector<PurePlan>& plans,
                  const std::vector<double>& weights) {
  MixedPlan mixed{player, {}};
  double total = 0.0;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (weights[i] > 1e-15) total += weights[i];
  }
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (weights[i] > 1e-15) mixed.support.emplace_back(plans[i], weights[i] / total);
  }
  return mixed;
}

bool Improves(double candidate, double best) {
  return candidate > best + kTieSlack * std::max(1.0, std::abs(best));
}

}  // namespace

void RequireZeroSum(const GameTree& tree, const OutcomeUtilities& utilities) {
  for (const std::string& z : tree.outcomes()) {
    auto it = utilities.find(z);
    if (it == utilities.end()) {
      throw InputError("no utility for outcome '" + z + "' at node '" +
                       tree.node_id() + "'");
    }
    const double sum = it->second.attacker + it->second.defender;
    if (std::abs(sum) >
        1e-9 * std::max(1.0, std::abs(it->second.attacker))) {
      throw InputError("utilities at node '" + tree.node_id() +
                       "' are not zero-sum at outcome '" + z + "'");
    }
  }
}

PayoffMatrix BuildPayoffMatrix(const GameTree& tree,
                               const OutcomeUtilities& utilities,
                               std::size_t plan_cap) {
  PayoffMatrix matrix;
  matrix.rows = EnumeratePurePlans(tree, Player::kAttacker, plan_cap);
  matrix.cols = EnumeratePurePlans(tree, Player::kDefender, plan_cap);
  const std::vector<double> leaf_values =
      LeafValues(tree, utilities, Player::kAttacker);
  std::vector<internal::IndexedPlan> attacker;
  for (const PurePlan& p : matrix.rows) {
    attacker.push_back(internal::IndexPurePlan(tree, p));
  }
  std::vector<internal::IndexedPlan> defender;
  for (const PurePlan& p : matrix.cols) {
    defender.push_back(internal::IndexPurePlan(tree, p));
  }
  matrix.entries.resize(static_cast<Eigen::Index>(matrix.rows.size()),
                        static_cast<Eigen::Index>(matrix.cols.size()));
  for (std::size_t i = 0; i < attacker.size(); ++i) {
    for (std::size_t j = 0; j < defender.size(); ++j) {
      matrix.entries(static_cast<Eigen::Index>(i),
                     static_cast<Eigen::Index>(j)) =
          internal::Evaluate(tree, attacker[i], defender[j], leaf_values);
    }
  }
  return matrix;
}

SolveResult BestResponse(const GameTree& tree, const BehavioralPlan& defender,
                         const OutcomeUtilities& utilities,
                         const SolverOptions& options) {
  RequireRecall(tree, Player::kAttacker);
  if (defender.player != Player::kDefender) {
    throw InputError("best response needs a defender plan");
  }
  const internal::IndexedPlan fixed = internal::IndexPlan(tree, defender);
  const std::vector<double> leaf_values =
      LeafValues(tree, utilities, Player::kAttacker);
  const std::vector<PurePlan> plans =
      EnumeratePurePlans(tree, Player::kAttacker, options.plan_cap);

  std::size_t best = 0;
  double best_value = 0.0;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const double value = internal::Evaluate(
        tree, internal::IndexPurePlan(tree, plans[i]), fixed, leaf_values);
    if (i == 0 || Improves(value, best_value)) {
      best = i;
      best_value = value;
    }
  }
  SolveResult result;
  result.attacker_plan = PureToBehavioral(tree, plans[best]);
  result.defender_plan = defender;
  result.attacker_value = best_value;
  result.scheme = Scheme::kRed;
  result.diagnostics.iterations = static_cast<int>(plans.size());
  return result;
}

SolveResult PurpleTeaming(const GameTree& tree,
                          const OutcomeUtilities& utilities,
                          const SolverOptions& options) {
  RequireZeroSum(tree, utilities);
  RequireRecall(tree, Player::kAttacker);
  RequireRecall(tree, Player::kDefender);
  const PayoffMatrix matrix = BuildPayoffMatrix(tree, utilities, options.plan_cap);
  const ZeroSumSolution game = SolveZeroSum(matrix.entries, options);

  // In a zero-sum game the leader's optimal commitment is its maximin mix.
  const BehavioralPlan defender = MixedToBehavioral(
      tree, ToMixed(Player::kDefender, matrix.cols, game.col_mix));
  SolveResult result = BestResponse(tree, defender, utilities, options);
  result.scheme = Scheme::kPurple;
  result.diagnostics.iterations = game.iterations;
  result.diagnostics.duality_gap = game.duality_gap;
  return result;
}

SolveResult NashEquilibrium(const GameTree& tree,
                            const OutcomeUtilities& utilities,
                            const SolverOptions& options) {
  RequireZeroSum(tree, utilities);
  RequireRecall(tree, Player::kAttacker);
  RequireRecall(tree, Player::kDefender);
  const PayoffMatrix matrix = BuildPayoffMatrix(tree, utilities, options.plan_cap);
  const ZeroSumSolution game = SolveZeroSum(matrix.entries, options);

  SolveResult result;
  result.scheme = Scheme::kNash;
  result.attacker_plan = MixedToBehavioral(
      tree, ToMixed(Player::kAttacker, matrix.rows, game.row_mix));
  result.defender_plan = MixedToBehavioral(
      tree, ToMixed(Player::kDefender, matrix.cols, game.col_mix));
  result.diagnostics.iterations = game.iterations;
  result.diagnostics.duality_gap = game.duality_gap;

  const std::vector<double> leaf_values =
      LeafValues(tree, utilities, Player::kAttacker);
  const auto attacker = internal::IndexPlan(tree, result.attacker_plan);
  const auto defender = internal::IndexPlan(tree, result.defender_plan);
  result.attacker_value =
      internal::Evaluate(tree, attacker, defender, leaf_values);

  // Post-hoc equilibrium certificate over all pure deviations.
  double gain = 0.0;
  for (const PurePlan& p : matrix.rows) {
    gain = std::max(gain, internal::Evaluate(tree, internal::IndexPurePlan(tree, p),
                                             defender, leaf_values) -
                              result.attacker_value);
  }
  for (const PurePlan& p : matrix.cols) {
    gain = std::max(gain, result.attacker_value -
                              internal::Evaluate(tree, attacker,
                                                 internal::IndexPurePlan(tree, p),
                                                 leaf_values));
  }
  result.diagnostics.max_deviation_gain = gain;
  const double allowed = std::max(1e-6, options.tolerance) *
                         std::max(1.0, std::abs(result.attacker_value));
  if (gain > allowed) {
    throw SolverError("equilibrium check failed at node '" + tree.node_id() +
                      "': a deviation gains " + std::to_string(gain));
  }
  return result;
}

SolveResult BackwardInduction(const GameTree& tree,
                              const OutcomeUtilities& utilities) {
  for (int k = 0; k < tree.num_knowledge_sets(); ++k) {
    if (tree.knowledge_set(k).members.size() != 1) {
      throw InputError("backward induction needs perfect information; "
                       "knowledge set '" +
                       tree.knowledge_set(k).id + "' has " +
                       std::to_string(tree.knowledge_set(k).members.size()) +
                       " members");
    }
  }
  const std::vector<double> attacker_leaf =
      LeafValues(tree, utilities, Player::kAttacker);
  const std::vector<double> defender_leaf =
      LeafValues(tree, utilities, Player::kDefender);

  // Preorder, then sweep it backwards so children precede parents.
  std::vector<int> order;
  std::vector<int> stack{tree.root()};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    order.push_back(v);
    for (int c : tree.children(v)) stack.push_back(c);
  }
  std::vector<Payoff> value(tree.num_vertices());
  std::vector<int> choice(tree.num_vertices(), -1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int v = *it;
    if (tree.is_leaf(v)) {
      value[v] = {attacker_leaf[v], defender_leaf[v]};
      continue;
    }
    const auto kids = tree.children(v);
    const Vertex& vx = tree.vertex(v);
    if (vx.owner == Player::kChance) {
      Payoff sum;
      for (std::size_t a = 0; a < kids.size(); ++a) {
        sum.attacker += vx.chance_dist[a] * value[kids[a]].attacker;
        sum.defender += vx.chance_dist[a] * value[kids[a]].defender;
      }
      value[v] = sum;
      continue;
    }
    auto own = [&](int c) {
      return vx.owner == Player::kAttacker ? value[c].attacker
                                           : value[c].defender;
    };
    int best = 0;
    for (int a = 1; a < static_cast<int>(kids.size()); ++a) {
      if (Improves(own(kids[a]), own(kids[best]))) best = a;
    }
    choice[v] = best;
    value[v] = value[kids[best]];
  }

  SolveResult result;
  result.scheme = Scheme::kNash;
  for (Player player : {Player::kAttacker, Player::kDefender}) {
    BehavioralPlan& plan = player == Player::kAttacker ? result.attacker_plan
                                                       : result.defender_plan;
    for (int k : tree.knowledge_sets_of(player)) {
      const auto& info = tree.knowledge_set(k);
      std::vector<double> dist(info.actions.size(), 0.0);
      dist[choice[info.members.front()]] = 1.0;
      plan.dists.emplace(info.id, std::move(dist));
    }
  }
  result.attacker_value = value[tree.root()].attacker;
  return result;
}

}  // namespace metapen
