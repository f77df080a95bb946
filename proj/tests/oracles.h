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

// Test helpers and reference implementations. The oracles work directly on
// TreeData and plain matrices so that they share no code path with the
// library routines they check.

#ifndef METAPEN_TESTS_ORACLES_H_
#define METAPEN_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "metapen/game_tree.h"
#include "metapen/plans.h"

namespace metapen::testing {

// Fluent TreeData builder. Decision() puts the vertex in a singleton
// knowledge set named after it unless `set` names a shared one.
class TreeBuilder {
 public:
  explicit TreeBuilder(std::string node = "n") { data_.node_id = std::move(node); }

  TreeBuilder& Decision(const std::string& id, Player owner,
                        std::vector<std::pair<std::string, std::string>> moves,
                        const std::string& set = "") {
    Vertex v;
    v.id = id;
    v.owner = owner;
    for (auto& [action, child] : moves) {
      v.actions.push_back(action);
      v.children.emplace(action, child);
    }
    Add(std::move(v));
    const std::string ks = set.empty() ? id : set;
    auto it = std::find_if(data_.knowledge_sets.begin(),
                           data_.knowledge_sets.end(),
                           [&](const KnowledgeSet& k) { return k.id == ks; });
    if (it == data_.knowledge_sets.end()) {
      data_.knowledge_sets.push_back({ks, owner, {id}});
    } else {
      it->members.push_back(id);
    }
    return *this;
  }

  TreeBuilder& Chance(const std::string& id,
                      std::vector<std::pair<std::string, std::string>> moves,
                      std::vector<double> dist) {
    Vertex v;
    v.id = id;
    v.owner = Player::kChance;
    for (auto& [action, child] : moves) {
      v.actions.push_back(action);
      v.children.emplace(action, child);
    }
    v.chance_dist = std::move(dist);
    Add(std::move(v));
    return *this;
  }

  TreeBuilder& Leaf(const std::string& id, const std::string& outcome) {
    Vertex v;
    v.id = id;
    v.outcome = outcome;
    Add(std::move(v));
    return *this;
  }

  TreeData data(std::vector<std::string> outcomes = {}) const {
    TreeData d = data_;
    d.outcomes = std::move(outcomes);
    return d;
  }
  GameTree Build(std::vector<std::string> outcomes = {}) const {
    return GameTree::Build(data(std::move(outcomes)));
  }

 private:
  void Add(Vertex v) {
    if (data_.vertices.empty()) data_.root = v.id;
    data_.vertices.push_back(std::move(v));
  }
  TreeData data_;
};

struct RandomTreeOptions {
  int max_depth = 4;
  int max_actions = 3;
  int num_outcomes = 3;
  bool perfect_information = false;
  bool allow_chance = true;
  std::size_t max_vertices = 40;
};

// Random tree with perfect recall for both players. Vertices at one depth
// owned by the same player with the same own history and action count may
// share a knowledge set.
inline TreeData RandomTree(std::mt19937_64& rng,
                           const RandomTreeOptions& options = {}) {
  using History = std::vector<std::pair<std::string, int>>;
  struct Pending {
    std::string id;
    History attacker;
    History defender;
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  TreeData data;
  data.node_id = "rand";
  data.root = "v0";
  for (int z = 0; z < options.num_outcomes; ++z) {
    data.outcomes.push_back("z" + std::to_string(z));
  }
  int next_id = 1;
  int next_set = 0;
  std::vector<Pending> level{{"v0", {}, {}}};
  for (int depth = 0; !level.empty(); ++depth) {
    struct Drafted {
      Pending p;
      Player owner;
      int actions;
    };
    std::vector<Drafted> decisions;
    for (Pending& p : level) {
      const bool stop = depth >= options.max_depth ||
                        data.vertices.size() + level.size() >= options.max_vertices ||
                        (depth > 0 && unit(rng) < 0.2 + 0.15 * depth);
      if (stop) {
        Vertex leaf;
        leaf.id = p.id;
        leaf.outcome = data.outcomes[pick(0, options.num_outcomes - 1)];
        data.vertices.push_back(std::move(leaf));
        continue;
      }
      const double r = unit(rng);
      Player owner = r < 0.45   ? Player::kAttacker
                     : r < 0.85 ? Player::kDefender
                                : Player::kChance;
      if (owner == Player::kChance && !options.allow_chance) {
        owner = Player::kAttacker;
      }
      decisions.push_back({std::move(p), owner, pick(2, options.max_actions)});
    }

    // Group strategic vertices into knowledge sets.
    std::map<std::string, std::string> set_of;
    if (options.perfect_information) {
      for (const Drafted& d : decisions) {
        if (d.owner == Player::kChance) continue;
        const std::string ks = "k" + std::to_string(next_set++);
        set_of[d.p.id] = ks;
        data.knowledge_sets.push_back({ks, d.owner, {d.p.id}});
      }
    } else {
      std::map<std::string, std::vector<const Drafted*>> groups;
      for (const Drafted& d : decisions) {
        if (d.owner == Player::kChance) continue;
        const History& h =
            d.owner == Player::kAttacker ? d.p.attacker : d.p.defender;
        std::string key = std::string(PlayerName(d.owner)) + "#" +
                          std::to_string(d.actions) + "#";
        for (const auto& [s, a] : h) key += s + ":" + std::to_string(a) + ";";
        groups[key].push_back(&d);
      }
      for (auto& [key, members] : groups) {
        std::shuffle(members.begin(), members.end(), rng);
        std::size_t i = 0;
        while (i < members.size()) {
          const std::size_t size =
              std::min<std::size_t>(members.size() - i, pick(1, 3));
          const std::string ks = "k" + std::to_string(next_set++);
          KnowledgeSet set{ks, members[i]->owner, {}};
          for (std::size_t j = i; j < i + size; ++j) {
            set.members.push_back(members[j]->p.id);
            set_of[members[j]->p.id] = ks;
          }
          data.knowledge_sets.push_back(std::move(set));
          i += size;
        }
      }
    }

    std::vector<Pending> next;
    for (const Drafted& d : decisions) {
      Vertex v;
      v.id = d.p.id;
      v.owner = d.owner;
      double total = 0.0;
      for (int a = 0; a < d.actions; ++a) {
        const std::string action = "a" + std::to_string(a);
        const std::string child = "v" + std::to_string(next_id++);
        v.actions.push_back(action);
        v.children.emplace(action, child);
        Pending c{child, d.p.attacker, d.p.defender};
        if (d.owner == Player::kAttacker) c.attacker.emplace_back(set_of[d.p.id], a);
        if (d.owner == Player::kDefender) c.defender.emplace_back(set_of[d.p.id], a);
        next.push_back(std::move(c));
        if (d.owner == Player::kChance) {
          v.chance_dist.push_back(0.05 + unit(rng));
          total += v.chance_dist.back();
        }
      }
      for (double& p : v.chance_dist) p /= total;
      data.vertices.push_back(std::move(v));
    }
    level = std::move(next);
  }
  return data;
}

// RandomTree, redrawn until both players have at most `plan_cap` pure
// plans, so that mixed plans and payoff matrices stay enumerable.
inline TreeData RandomTreeWithinCap(std::mt19937_64& rng, std::size_t plan_cap,
                                    const RandomTreeOptions& options = {}) {
  for (;;) {
    TreeData data = RandomTree(rng, options);
    const GameTree tree = GameTree::Build(data);
    if (CountPurePlans(tree, Player::kAttacker) <= plan_cap &&
        CountPurePlans(tree, Player::kDefender) <= plan_cap) {
      return data;
    }
  }
}

// Random behavioral plan; with probability `pure_prob` a set gets a point
// mass.
inline BehavioralPlan RandomPlan(const GameTree& tree, Player player,
                                 std::mt19937_64& rng, double pure_prob = 0.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  BehavioralPlan plan{player, {}};
  for (int k : tree.knowledge_sets_of(player)) {
    const auto& set = tree.knowledge_set(k);
    std::vector<double> dist(set.actions.size(), 0.0);
    if (unit(rng) < pure_prob) {
      dist[std::uniform_int_distribution<std::size_t>(0, dist.size() - 1)(rng)] = 1.0;
    } else {
      double total = 0.0;
      for (double& p : dist) total += (p = unit(rng) + 1e-3);
      for (double& p : dist) p /= total;
    }
    plan.dists[set.id] = std::move(dist);
  }
  return plan;
}

inline OutcomeUtilities RandomZeroSumUtilities(const std::vector<std::string>& outcomes,
                                               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  OutcomeUtilities out;
  for (const auto& z : outcomes) {
    const double a = u(rng);
    out[z] = {a, -a};
  }
  return out;
}

// Knowledge-set id of every strategic vertex, straight from the data.
inline std::map<std::string, std::string> SetOfVertex(const TreeData& data) {
  std::map<std::string, std::string> out;
  for (const auto& ks : data.knowledge_sets) {
    for (const auto& m : ks.members) out[m] = ks.id;
  }
  return out;
}

// Walks every root-to-leaf path depth-first and multiplies the move
// probabilities along it. Returns the probability of each leaf and the
// per-outcome totals.
struct PathEnumeration {
  std::map<std::string, double> leaf;     // by vertex id
  std::map<std::string, double> vertex;   // every vertex, by id
  std::map<std::string, double> outcome;  // by outcome label
};

inline PathEnumeration EnumeratePaths(const TreeData& data,
                                      const PlanProfile& profile) {
  std::map<std::string, const Vertex*> by_id;
  for (const auto& v : data.vertices) by_id[v.id] = &v;
  const auto set_of = SetOfVertex(data);
  PathEnumeration out;
  for (const auto& v : data.vertices) {
    if (v.outcome) out.outcome[*v.outcome] = 0.0;
  }
  for (const auto& z : data.outcomes) out.outcome[z] = 0.0;
  std::function<void(const std::string&, double)> walk =
      [&](const std::string& id, double prob) {
        const Vertex& v = *by_id.at(id);
        out.vertex[id] = prob;
        if (v.actions.empty()) {
          out.leaf[id] = prob;
          out.outcome[*v.outcome] += prob;
          return;
        }
        for (std::size_t a = 0; a < v.actions.size(); ++a) {
          double p;
          if (v.owner == Player::kChance) {
            p = v.chance_dist[a];
          } else {
            const BehavioralPlan& plan = v.owner == Player::kAttacker
                                             ? profile.attacker
                                             : profile.defender;
            p = plan.dists.at(set_of.at(id))[a];
          }
          walk(v.children.at(v.actions[a]), prob * p);
        }
      };
  walk(data.root, 1.0);
  return out;
}

// Every pure plan of `player`, as set id -> action index, by recursion over
// the player's knowledge sets.
inline std::vector<std::map<std::string, int>> AllPurePlans(const TreeData& data,
                                                            Player player) {
  std::map<std::string, const Vertex*> by_id;
  for (const auto& v : data.vertices) by_id[v.id] = &v;
  std::vector<std::pair<std::string, int>> sets;
  for (const auto& ks : data.knowledge_sets) {
    if (ks.player == player) {
      sets.emplace_back(ks.id, static_cast<int>(by_id.at(ks.members[0])->actions.size()));
    }
  }
  std::vector<std::map<std::string, int>> out;
  std::map<std::string, int> current;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == sets.size()) {
      out.push_back(current);
      return;
    }
    for (int a = 0; a < sets[i].second; ++a) {
      current[sets[i].first] = a;
      rec(i + 1);
    }
  };
  rec(0);
  return out;
}

// Plan count by recursion over the tree: a subtree rooted at one of the
// player's sets contributes (choices at that set) times what lies below;
// sets seen earlier on other branches are not counted twice.
inline std::size_t RecursivePlanCount(const TreeData& data, Player player) {
  std::map<std::string, const Vertex*> by_id;
  for (const auto& v : data.vertices) by_id[v.id] = &v;
  const auto set_of = SetOfVertex(data);
  std::map<std::string, std::size_t> counted;
  std::function<void(const std::string&)> walk = [&](const std::string& id) {
    const Vertex& v = *by_id.at(id);
    if (v.actions.empty()) return;
    if (v.owner == player) counted.emplace(set_of.at(id), v.actions.size());
    for (const auto& a : v.actions) walk(v.children.at(a));
  };
  walk(data.root);
  std::size_t total = 1;
  for (const auto& [s, n] : counted) total *= n;
  return total;
}

inline BehavioralPlan PointMass(const TreeData& data, Player player,
                                const std::map<std::string, int>& choices) {
  std::map<std::string, std::size_t> width;
  for (const auto& v : data.vertices) {
    for (const auto& ks : data.knowledge_sets) {
      if (ks.members[0] == v.id) width[ks.id] = v.actions.size();
    }
  }
  BehavioralPlan plan{player, {}};
  for (const auto& [set, a] : choices) {
    std::vector<double> d(width.at(set), 0.0);
    d[a] = 1.0;
    plan.dists[set] = std::move(d);
  }
  return plan;
}

inline double ExpectedAttacker(const std::map<std::string, double>& tau,
                               const OutcomeUtilities& u) {
  double total = 0.0;
  for (const auto& [z, p] : tau) total += p * u.at(z).attacker;
  return total;
}

// max over attacker pure plans of min over defender pure plans, by full
// enumeration. Equals the game value on perfect-information trees.
inline double PureMaxMin(const TreeData& data, const OutcomeUtilities& u) {
  const auto att = AllPurePlans(data, Player::kAttacker);
  const auto def = AllPurePlans(data, Player::kDefender);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& a : att) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& d : def) {
      PlanProfile profile{PointMass(data, Player::kAttacker, a),
                          PointMass(data, Player::kDefender, d)};
      worst = std::min(worst, ExpectedAttacker(EnumeratePaths(data, profile).outcome, u));
    }
    best = std::max(best, worst);
  }
  return best;
}

// Zero-sum value by support enumeration over equal-size supports. Random
// matrices with continuous entries are nondegenerate with probability one,
// so an equilibrium with square supports exists.
struct SupportSolution {
  bool found = false;
  double value = 0.0;
  std::vector<double> row;
  std::vector<double> col;
};

inline SupportSolution SupportEnumeration(const Eigen::MatrixXd& a,
                                          double tol = 1e-9) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  SupportSolution out;
  auto subsets = [](int size, int k) {
    std::vector<std::vector<int>> all;
    for (int mask = 0; mask < (1 << size); ++mask) {
      if (__builtin_popcount(mask) != k) continue;
      std::vector<int> s;
      for (int i = 0; i < size; ++i) if (mask >> i & 1) s.push_back(i);
      all.push_back(std::move(s));
    }
    return all;
  };
  for (int k = 1; k <= std::min(m, n); ++k) {
    for (const auto& rows : subsets(m, k)) {
      for (const auto& cols : subsets(n, k)) {
        // Row mix x on `rows` making every column in `cols` pay v.
        Eigen::MatrixXd sx = Eigen::MatrixXd::Zero(k + 1, k + 1);
        Eigen::VectorXd bx = Eigen::VectorXd::Zero(k + 1);
        Eigen::MatrixXd sy = Eigen::MatrixXd::Zero(k + 1, k + 1);
        for (int i = 0; i < k; ++i) {
          for (int j = 0; j < k; ++j) {
            sx(j, i) = a(rows[i], cols[j]);
            sy(i, j) = a(rows[i], cols[j]);
          }
          sx(i, k) = -1.0;
          sx(k, i) = 1.0;
          sy(i, k) = -1.0;
          sy(k, i) = 1.0;
        }
        bx(k) = 1.0;
        Eigen::FullPivLU<Eigen::MatrixXd> lux(sx), luy(sy);
        if (lux.rank() < k + 1 || luy.rank() < k + 1) continue;
        const Eigen::VectorXd x = lux.solve(bx);
        const Eigen::VectorXd y = luy.solve(bx);
        if ((x.head(k).array() < -tol).any() || (y.head(k).array() < -tol).any()) {
          continue;
        }
        std::vector<double> row(m, 0.0), col(n, 0.0);
        for (int i = 0; i < k; ++i) {
          row[rows[i]] = x(i);
          col[cols[i]] = y(i);
        }
        const Eigen::Map<Eigen::VectorXd> rx(row.data(), m);
        const Eigen::Map<Eigen::VectorXd> cy(col.data(), n);
        const double v = x(k);
        const Eigen::VectorXd against_cols = a.transpose() * rx;
        const Eigen::VectorXd against_rows = a * cy;
        if (against_cols.minCoeff() < v - 1e-7 || against_rows.maxCoeff() > v + 1e-7) {
          continue;
        }
        out = {true, v, row, col};
        return out;
      }
    }
  }
  return out;
}

}  // namespace metapen::testing

#endif  // METAPEN_TESTS_ORACLES_H_
