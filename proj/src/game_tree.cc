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

#include "metapen/game_tree.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

namespace metapen {

std::string_view PlayerName(Player player) {
  switch (player) {
    case Player::kAttacker:
      return "attacker";
    case Player::kDefender:
      return "defender";
    case Player::kChance:
      return "chance";
  }
  return "unknown";
}

Player ParsePlayer(std::string_view name) {
  if (name == "attacker") return Player::kAttacker;
  if (name == "defender") return Player::kDefender;
  if (name == "chance") return Player::kChance;
  throw InputError("unknown player '" + std::string(name) + "'");
}

std::string ValidationReport::ToString() const {
  std::string out;
  for (const std::string& v : violations) {
    if (!out.empty()) out += "; ";
    out += v;
  }
  return out;
}

namespace {

std::string FormatNumber(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

}  // namespace

ValidationReport ValidateTree(const TreeData& data) {
  ValidationReport report;
  auto fail = [&report](std::string msg) {
    report.violations.push_back(std::move(msg));
  };

  std::unordered_map<std::string, int> index;
  for (int i = 0; i < static_cast<int>(data.vertices.size()); ++i) {
    if (!index.emplace(data.vertices[i].id, i).second) {
      fail("duplicate vertex id '" + data.vertices[i].id + "'");
    }
  }
  if (!index.contains(data.root)) {
    fail("root '" + data.root + "' is not a vertex");
  }

  std::set<std::string> declared_outcomes(data.outcomes.begin(),
                                          data.outcomes.end());
  if (declared_outcomes.size() != data.outcomes.size()) {
    fail("duplicate outcome labels");
  }

  std::vector<int> parent_count(data.vertices.size(), 0);
  for (const Vertex& v : data.vertices) {
    const bool leaf = v.actions.empty();
    if (leaf && !v.outcome) fail("leaf '" + v.id + "' has no outcome");
    if (!leaf && v.outcome) {
      fail("decision vertex '" + v.id + "' carries an outcome");
    }
    if (leaf && v.outcome && !declared_outcomes.empty() &&
        !declared_outcomes.contains(*v.outcome)) {
      fail("leaf '" + v.id + "' outcome '" + *v.outcome +
           "' is not in the outcome set");
    }
    std::set<std::string> unique_actions(v.actions.begin(), v.actions.end());
    if (unique_actions.size() != v.actions.size()) {
      fail("vertex '" + v.id + "' repeats an action");
    }
    std::set<std::string> child_keys;
    for (const auto& [action, child] : v.children) child_keys.insert(action);
    if (child_keys != unique_actions) {
      fail("children of '" + v.id + "' do not match its actions");
    }
    for (const auto& [action, child] : v.children) {
      auto it = index.find(child);
      if (it == index.end()) {
        fail("vertex '" + v.id + "' action '" + action +
             "' points to unknown vertex '" + child + "'");
      } else {
        ++parent_count[it->second];
      }
    }
    if (!leaf && v.owner == Player::kChance) {
      if (v.chance_dist.size() != v.actions.size()) {
        fail("chance vertex '" + v.id + "' distribution has " +
             std::to_string(v.chance_dist.size()) + " entries for " +
             std::to_string(v.actions.size()) + " actions");
      } else {
        double sum = 0.0;
        bool negative = false;
        for (double p : v.chance_dist) {
          if (!(p >= 0.0) || !std::isfinite(p)) negative = true;
          sum += p;
        }
        if (negative) {
          fail("chance vertex '" + v.id + "' has a negative probability");
        }
        if (std::abs(sum - 1.0) > kProbabilityTolerance) {
          fail("chance vertex '" + v.id + "': chance distribution sums to " +
               FormatNumber(sum));
        }
      }
    } else if (!v.chance_dist.empty()) {
      fail("non-chance vertex '" + v.id + "' has a chance distribution");
    }
  }

  // Rooted tree: the root has no parent, everything else exactly one, and
  // everything is reachable.
  for (int i = 0; i < static_cast<int>(data.vertices.size()); ++i) {
    const std::string& id = data.vertices[i].id;
    if (id == data.root) {
      if (parent_count[i] != 0) fail("root '" + id + "' has a parent");
    } else if (parent_count[i] != 1) {
      fail("vertex '" + id + "' has " + std::to_string(parent_count[i]) +
           " parents");
    }
  }
  std::vector<bool> seen(data.vertices.size(), false);
  if (auto root_it = index.find(data.root); root_it != index.end()) {
    std::vector<int> stack{root_it->second};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      if (seen[v]) continue;  // cycle or shared child, reported above
      seen[v] = true;
      for (const auto& [action, child] : data.vertices[v].children) {
        if (auto it = index.find(child); it != index.end()) {
          stack.push_back(it->second);
        }
      }
    }
    for (int i = 0; i < static_cast<int>(data.vertices.size()); ++i) {
      if (!seen[i]) {
        fail("vertex '" + data.vertices[i].id + "' unreachable from root");
      }
    }
  }

  // Knowledge sets.
  std::vector<int> membership(data.vertices.size(), 0);
  std::set<std::string> ks_ids;
  for (const KnowledgeSet& ks : data.knowledge_sets) {
    if (!ks_ids.insert(ks.id).second) {
      fail("duplicate knowledge set id '" + ks.id + "'");
    }
    if (ks.player == Player::kChance) {
      fail("knowledge set '" + ks.id + "' belongs to chance");
    }
    if (ks.members.empty()) fail("knowledge set '" + ks.id + "' is empty");
    const std::vector<std::string>* actions = nullptr;
    for (const std::string& m : ks.members) {
      auto it = index.find(m);
      if (it == index.end()) {
        fail("knowledge set '" + ks.id + "' member '" + m + "' unknown");
        continue;
      }
      ++membership[it->second];
      const Vertex& v = data.vertices[it->second];
      if (v.actions.empty()) {
        fail("knowledge set '" + ks.id + "' contains leaf '" + m + "'");
      } else if (v.owner != ks.player) {
        fail("knowledge set '" + ks.id + "' member '" + m +
             "' is owned by " + std::string(PlayerName(v.owner)));
      }
      if (actions == nullptr) {
        actions = &v.actions;
      } else if (*actions != v.actions) {
        fail("action mismatch in knowledge set '" + ks.id + "'");
      }
    }
  }
  for (int i = 0; i < static_cast<int>(data.vertices.size()); ++i) {
    const Vertex& v = data.vertices[i];
    const bool strategic = !v.actions.empty() && v.owner != Player::kChance;
    if (strategic && membership[i] != 1) {
      fail("decision vertex '" + v.id + "' is in " +
           std::to_string(membership[i]) + " knowledge sets");
    }
  }

  // No member of a knowledge set may be an ancestor of another member. Only
  // meaningful on a proper tree.
  if (report.ok()) {
    std::vector<int> parent(data.vertices.size(), -1);
    for (int i = 0; i < static_cast<int>(data.vertices.size()); ++i) {
      for (const auto& [action, child] : data.vertices[i].children) {
        parent[index.at(child)] = i;
      }
    }
    for (const KnowledgeSet& ks : data.knowledge_sets) {
      std::set<int> members;
      for (const std::string& m : ks.members) members.insert(index.at(m));
      for (int m : members) {
        for (int a = parent[m]; a != -1; a = parent[a]) {
          if (members.contains(a)) {
            fail("knowledge set '" + ks.id + "' member '" +
                 data.vertices[a].id + "' is an ancestor of '" +
                 data.vertices[m].id + "'");
          }
        }
      }
    }
  }
  return report;
}

struct GameTree::Impl {
  TreeData data;
  std::unordered_map<std::string, int> index;
  std::vector<std::vector<int>> children;
  std::vector<int> parent;
  std::vector<std::string> outcomes;
  std::vector<int> leaf_outcome;
  std::vector<int> leaves;
  std::vector<InfoSet> infosets;
  std::vector<int> infoset_of;
  std::unordered_map<std::string, int> infoset_index;
  std::vector<int> attacker_sets;
  std::vector<int> defender_sets;
  std::string shape_key;
};

GameTree::GameTree(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

GameTree GameTree::Build(TreeData data) {
  ValidationReport report = ValidateTree(data);
  if (!report.ok()) {
    throw InputError("invalid game tree" +
                     (data.node_id.empty() ? "" : " at node '" + data.node_id +
                                                      "'") +
                     ": " + report.ToString());
  }
  auto impl = std::make_shared<Impl>();
  const int n = static_cast<int>(data.vertices.size());
  for (int i = 0; i < n; ++i) impl->index.emplace(data.vertices[i].id, i);
  impl->children.resize(n);
  impl->parent.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    const Vertex& v = data.vertices[i];
    for (const std::string& action : v.actions) {
      const int c = impl->index.at(v.children.at(action));
      impl->children[i].push_back(c);
      impl->parent[c] = i;
    }
  }

  std::set<std::string> outcome_set(data.outcomes.begin(), data.outcomes.end());
  if (outcome_set.empty()) {
    for (const Vertex& v : data.vertices) {
      if (v.outcome) outcome_set.insert(*v.outcome);
    }
  }
  impl->outcomes.assign(outcome_set.begin(), outcome_set.end());
  impl->leaf_outcome.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    const Vertex& v = data.vertices[i];
    if (!v.outcome) continue;
    impl->leaves.push_back(i);
    impl->leaf_outcome[i] = static_cast<int>(
        std::lower_bound(impl->outcomes.begin(), impl->outcomes.end(),
                         *v.outcome) -
        impl->outcomes.begin());
  }

  // Knowledge sets sorted by id so plan enumeration order is canonical.
  std::vector<const KnowledgeSet*> sorted;
  for (const KnowledgeSet& ks : data.knowledge_sets) sorted.push_back(&ks);
  std::sort(sorted.begin(), sorted.end(),
            [](const KnowledgeSet* a, const KnowledgeSet* b) {
              return a->id < b->id;
            });
  impl->infoset_of.assign(n, -1);
  for (const KnowledgeSet* ks : sorted) {
    InfoSet info{ks->id, ks->player, {}, {}};
    for (const std::string& m : ks->members) {
      info.members.push_back(impl->index.at(m));
    }
    std::sort(info.members.begin(), info.members.end());
    info.actions = data.vertices[info.members.front()].actions;
    const int k = static_cast<int>(impl->infosets.size());
    for (int m : info.members) impl->infoset_of[m] = k;
    impl->infoset_index.emplace(info.id, k);
    (ks->player == Player::kAttacker ? impl->attacker_sets
                                     : impl->defender_sets)
        .push_back(k);
    impl->infosets.push_back(std::move(info));
  }

  // Preorder serialization of the shape.
  std::string& key = impl->shape_key;
  std::vector<int> stack{impl->index.at(data.root)};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    const Vertex& vx = data.vertices[v];
    if (vx.actions.empty()) {
      key += "L;";
      continue;
    }
    key += std::string(PlayerName(vx.owner)) + "(";
    if (impl->infoset_of[v] >= 0) key += impl->infosets[impl->infoset_of[v]].id;
    key += ")[";
    for (std::size_t a = 0; a < vx.actions.size(); ++a) {
      key += vx.actions[a];
      if (!vx.chance_dist.empty()) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "=%.17g", vx.chance_dist[a]);
        key += buf;
      }
      key += ",";
    }
    key += "];";
    for (auto it = impl->children[v].rbegin(); it != impl->children[v].rend();
         ++it) {
      stack.push_back(*it);
    }
  }

  impl->data = std::move(data);
  return GameTree(std::move(impl));
}

const TreeData& GameTree::data() const { return impl_->data; }
const std::string& GameTree::node_id() const { return impl_->data.node_id; }
int GameTree::num_vertices() const {
  return static_cast<int>(impl_->data.vertices.size());
}
int GameTree::root() const { return impl_->index.at(impl_->data.root); }
const Vertex& GameTree::vertex(int v) const { return impl_->data.vertices[v]; }
std::span<const int> GameTree::children(int v) const {
  return impl_->children[v];
}
int GameTree::parent(int v) const { return impl_->parent[v]; }
int GameTree::index_of(std::string_view vertex_id) const {
  auto it = impl_->index.find(std::string(vertex_id));
  return it == impl_->index.end() ? -1 : it->second;
}
const std::vector<std::string>& GameTree::outcomes() const {
  return impl_->outcomes;
}
int GameTree::outcome_of_leaf(int v) const { return impl_->leaf_outcome[v]; }
std::span<const int> GameTree::leaves() const { return impl_->leaves; }
int GameTree::num_knowledge_sets() const {
  return static_cast<int>(impl_->infosets.size());
}
const GameTree::InfoSet& GameTree::knowledge_set(int k) const {
  return impl_->infosets[k];
}
int GameTree::knowledge_set_of(int v) const { return impl_->infoset_of[v]; }
int GameTree::knowledge_set_index(std::string_view id) const {
  auto it = impl_->infoset_index.find(std::string(id));
  return it == impl_->infoset_index.end() ? -1 : it->second;
}
std::span<const int> GameTree::knowledge_sets_of(Player player) const {
  switch (player) {
    case Player::kAttacker:
      return impl_->attacker_sets;
    case Player::kDefender:
      return impl_->defender_sets;
    case Player::kChance:
      break;
  }
  return {};
}
const std::string& GameTree::shape_key() const { return impl_->shape_key; }

bool GameTree::operator==(const GameTree& other) const {
  if (impl_ == other.impl_) return true;
  // Structural equality ignores declaration order of vertices and sets.
  auto normalized = [](const TreeData& d) {
    TreeData n = d;
    std::sort(n.vertices.begin(), n.vertices.end(),
              [](const Vertex& a, const Vertex& b) { return a.id < b.id; });
    for (KnowledgeSet& ks : n.knowledge_sets) {
      std::sort(ks.members.begin(), ks.members.end());
    }
    std::sort(n.knowledge_sets.begin(), n.knowledge_sets.end(),
              [](const KnowledgeSet& a, const KnowledgeSet& b) {
                return a.id < b.id;
              });
    n.outcomes.clear();
    return n;
  };
  return outcomes() == other.outcomes() &&
         normalized(data()) == normalized(other.data());
}

std::vector<std::pair<int, int>> OwnHistory(const GameTree& tree, int v,
                                            Player player) {
  std::vector<std::pair<int, int>> history;
  for (int child = v, p = tree.parent(v); p != -1; child = p, p = tree.parent(p)) {
    if (tree.owner(p) != player || tree.knowledge_set_of(p) < 0) continue;
    const auto kids = tree.children(p);
    const int action = static_cast<int>(
        std::find(kids.begin(), kids.end(), child) - kids.begin());
    history.emplace_back(tree.knowledge_set_of(p), action);
  }
  std::reverse(history.begin(), history.end());
  return history;
}

bool CheckPerfectRecall(const GameTree& tree, Player player) {
  if (player == Player::kChance) {
    throw InputError("perfect recall is undefined for chance");
  }
  for (int k : tree.knowledge_sets_of(player)) {
    const auto& members = tree.knowledge_set(k).members;
    const auto reference = OwnHistory(tree, members.front(), player);
    for (std::size_t i = 1; i < members.size(); ++i) {
      if (OwnHistory(tree, members[i], player) != reference) return false;
    }
  }
  return true;
}

std::size_t CountPurePlans(const GameTree& tree, Player player) {
  std::size_t count = 1;
  for (int k : tree.knowledge_sets_of(player)) {
    const std::size_t n = tree.knowledge_set(k).actions.size();
    if (count > std::numeric_limits<std::size_t>::max() / n) {
      return std::numeric_limits<std::size_t>::max();
    }
    count *= n;
  }
  return count;
}

std::vector<PurePlan> EnumeratePurePlans(const GameTree& tree, Player player,
                                         std::size_t cap) {
  if (player == Player::kChance) {
    throw InputError("chance has no pure plans");
  }
  const std::size_t count = CountPurePlans(tree, player);
  if (count > cap) {
    throw CapacityError("player " + std::string(PlayerName(player)) + " has " +
                            std::to_string(count) +
                            " pure plans, above the cap of " +
                            std::to_string(cap),
                        count);
  }
  const auto sets = tree.knowledge_sets_of(player);
  std::vector<int> digits(sets.size(), 0);
  std::vector<PurePlan> plans;
  plans.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    PurePlan plan{player, {}};
    for (std::size_t i = 0; i < sets.size(); ++i) {
      plan.choices.emplace(tree.knowledge_set(sets[i]).id, digits[i]);
    }
    plans.push_back(std::move(plan));
    // Odometer increment, last knowledge set fastest.
    for (int i = static_cast<int>(sets.size()) - 1; i >= 0; --i) {
      if (++digits[i] <
          static_cast<int>(tree.knowledge_set(sets[i]).actions.size())) {
        break;
      }
      digits[i] = 0;
    }
  }
  return plans;
}

}  // namespace metapen
