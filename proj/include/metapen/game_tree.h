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

#ifndef METAPEN_GAME_TREE_H_
#define METAPEN_GAME_TREE_H_

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "metapen/common.h"

namespace metapen {

// One history of a micro tactic game. A vertex is a leaf iff it has no
// actions, in which case it carries an outcome label (a network node id).
struct Vertex {
  std::string id;
  Player owner = Player::kChance;  // ignored for leaves
  std::vector<std::string> actions;
  std::map<std::string, std::string> children;  // action -> child vertex id
  std::vector<double> chance_dist;              // iff owner == kChance
  std::optional<std::string> outcome;           // iff leaf

  bool operator==(const Vertex&) const = default;
};

// Decision vertices of one strategic player that the player cannot tell
// apart. Members must expose identical action lists.
struct KnowledgeSet {
  std::string id;
  Player player = Player::kAttacker;
  std::vector<std::string> members;

  bool operator==(const KnowledgeSet&) const = default;
};

// Raw, possibly invalid description of a micro tactic game. This is what the
// scenario format maps onto; GameTree::Build turns it into a checked tree.
struct TreeData {
  std::string node_id;
  std::string root;
  std::vector<Vertex> vertices;
  std::vector<KnowledgeSet> knowledge_sets;
  // Outcome label set Z^v. Empty means "the set of leaf labels".
  std::vector<std::string> outcomes;

  bool operator==(const TreeData&) const = default;
};

struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  std::string ToString() const;
};

// Lists every violated structural invariant; never throws.
ValidationReport ValidateTree(const TreeData& data);

// Validated, immutable micro tactic game with integer indexing. Copies share
// the same underlying storage.
class GameTree {
 public:
  struct InfoSet {
    std::string id;
    Player player;
    std::vector<int> members;          // vertex indices
    std::vector<std::string> actions;  // shared action labels
  };

  // Throws InputError carrying the full validation report.
  static GameTree Build(TreeData data);

  const TreeData& data() const;
  const std::string& node_id() const;

  int num_vertices() const;
  int root() const;
  const Vertex& vertex(int v) const;
  bool is_leaf(int v) const { return vertex(v).actions.empty(); }
  Player owner(int v) const { return vertex(v).owner; }
  // Children in action order.
  std::span<const int> children(int v) const;
  int parent(int v) const;  // -1 for the root
  int index_of(std::string_view vertex_id) const;  // -1 if unknown

  // Outcome set Z^v, sorted. Leaves map into it.
  const std::vector<std::string>& outcomes() const;
  int outcome_of_leaf(int v) const;  // index into outcomes()
  std::span<const int> leaves() const;

  int num_knowledge_sets() const;
  const InfoSet& knowledge_set(int k) const;
  // Knowledge set index of a strategic decision vertex, -1 otherwise.
  int knowledge_set_of(int v) const;
  int knowledge_set_index(std::string_view id) const;  // -1 if unknown
  // Indices of the player's knowledge sets, sorted by id.
  std::span<const int> knowledge_sets_of(Player player) const;

  // Canonical text of the tree shape with outcome labels left out; equal
  // strings mean the trees are identical up to leaf relabeling.
  const std::string& shape_key() const;

  bool operator==(const GameTree& other) const;

 private:
  struct Impl;
  explicit GameTree(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

// Sequence of (knowledge-set index, action index) pairs taken by `player` on
// the path from the root down to vertex v, root first.
std::vector<std::pair<int, int>> OwnHistory(const GameTree& tree, int v,
                                            Player player);

// True iff every knowledge set of `player` has members whose root paths carry
// the same sequence of (own knowledge set, action) pairs. Rejects Chance.
bool CheckPerfectRecall(const GameTree& tree, Player player);

// Assignment of an action index to every knowledge set of one player.
struct PurePlan {
  Player player = Player::kAttacker;
  std::map<std::string, int> choices;  // knowledge-set id -> action index

  bool operator==(const PurePlan&) const = default;
  auto operator<=>(const PurePlan&) const = default;
};

// Number of pure plans, saturating at SIZE_MAX.
std::size_t CountPurePlans(const GameTree& tree, Player player);

// All pure plans in lexicographic order over (knowledge-set id, action
// index). Throws CapacityError when the count exceeds `cap`.
std::vector<PurePlan> EnumeratePurePlans(const GameTree& tree, Player player,
                                         std::size_t cap = kDefaultPlanCap);

}  // namespace metapen

#endif  // METAPEN_GAME_TREE_H_
