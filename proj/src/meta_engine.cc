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

#include "metapen/meta_engine.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <set>
#include <thread>
#include <unordered_map>

#include "metapen/logging.h"

namespace metapen {
namespace {

// Leaves in preorder, matching the order GameTree::shape_key walks them.
std::vector<int> PreorderLeaves(const GameTree& tree) {
  std::vector<int> leaves;
  std::vector<int> stack{tree.root()};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (tree.is_leaf(v)) {
      leaves.push_back(v);
      continue;
    }
    const auto kids = tree.children(v);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return leaves;
}

// Utilities are rounded to 1e-9 so that symmetric nodes whose values differ
// only by solver rounding share one solve.
void AppendRounded(std::string& key, double x) {
  char buf[24];
  auto end = std::to_chars(buf, buf + sizeof(buf), std::llround(x * 1e9)).ptr;
  key.append(buf, end);
  key += ',';
}

std::string MemoKey(const GameTree& tree, const OutcomeUtilities& utilities,
                    const BehavioralPlan* defense) {
  std::string key = tree.shape_key();
  key += "|";
  for (int leaf : PreorderLeaves(tree)) {
    const std::string& z = tree.outcomes()[tree.outcome_of_leaf(leaf)];
    auto it = utilities.find(z);
    if (it == utilities.end()) {
      throw InputError("no utility for outcome '" + z + "'");
    }
    AppendRounded(key, it->second.attacker);
    AppendRounded(key, it->second.defender);
  }
  if (defense != nullptr) {
    key += "|";
    char buf[32];
    for (const auto& [id, dist] : defense->dists) {
      key += id + ":";
      for (double p : dist) {
        key.append(buf, std::to_chars(buf, buf + sizeof(buf), p).ptr);
        key += ',';
      }
    }
  }
  return key;
}

std::exception_ptr Tagged(const std::string& node) {
  const std::string prefix = "node '" + node + "': ";
  try {
    throw;
  } catch (const CapacityError& e) {
    return std::make_exception_ptr(CapacityError(prefix + e.what(), e.count()));
  } catch (const InputError& e) {
    return std::make_exception_ptr(InputError(prefix + e.what()));
  } catch (const SolverError& e) {
    return std::make_exception_ptr(SolverError(prefix + e.what()));
  } catch (const std::exception& e) {
    return std::make_exception_ptr(Error(prefix + e.what()));
  }
}

int ResolveThreads(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

std::map<std::string, SolveResult> SolveMicroStage(
    const Scenario& scenario, Scheme scheme, const NodeUtilities& utilities,
    const MicroStageOptions& options, MicroStageStats* stats) {
  struct Job {
    std::string node;
    const GameTree* tree;
    const OutcomeUtilities* utilities;
    BehavioralPlan defense;
  };
  std::vector<Job> jobs;
  std::vector<std::pair<std::string, std::size_t>> assignment;
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& n : scenario.network.nodes) {
    if (n.terminal) continue;
    try {
      const GameTree& tree = scenario.trees.at(n.id);
      auto u = utilities.find(n.id);
      if (u == utilities.end()) throw InputError("no utilities supplied");
      BehavioralPlan defense{Player::kDefender, {}};
      if (scheme == Scheme::kRed) defense = FixedDefense(scenario, n.id);
      const std::string key = MemoKey(
          tree, u->second, scheme == Scheme::kRed ? &defense : nullptr);
      auto [it, inserted] = seen.emplace(key, jobs.size());
      if (inserted) jobs.push_back({n.id, &tree, &u->second, std::move(defense)});
      assignment.emplace_back(n.id, it->second);
    } catch (...) {
      std::rethrow_exception(Tagged(n.id));
    }
  }

  std::vector<std::optional<SolveResult>> solved(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  auto run = [&](std::size_t i) {
    const Job& job = jobs[i];
    try {
      switch (scheme) {
        case Scheme::kRed:
          solved[i] = BestResponse(*job.tree, job.defense, *job.utilities,
                                   options.solver);
          break;
        case Scheme::kPurple:
          solved[i] = PurpleTeaming(*job.tree, *job.utilities, options.solver);
          break;
        case Scheme::kNash:
          solved[i] = NashEquilibrium(*job.tree, *job.utilities, options.solver);
          break;
      }
    } catch (...) {
      errors[i] = Tagged(job.node);
    }
  };
  const int threads =
      std::min<int>(ResolveThreads(options.threads), static_cast<int>(jobs.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) run(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  // Report the first failure in node order, independent of scheduling.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  if (stats != nullptr) {
    stats->solver_invocations += static_cast<int>(jobs.size());
    stats->reused += static_cast<int>(assignment.size() - jobs.size());
  }
  std::map<std::string, SolveResult> results;
  for (const auto& [node, i] : assignment) results.emplace(node, *solved[i]);
  return results;
}

double TotalVariation(const std::map<std::string, double>& a,
                      const std::map<std::string, double>& b) {
  double sum = 0.0;
  for (const auto& [k, p] : a) {
    auto it = b.find(k);
    sum += std::abs(p - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [k, q] : b) {
    if (!a.count(k)) sum += std::abs(q);
  }
  return 0.5 * sum;
}

namespace {

double StrategyDistance(const GlobalStrategy& a, const GlobalStrategy& b) {
  double worst = 0.0;
  for (const auto& [node, row] : a.rows) {
    worst = std::max(worst, TotalVariation(row, b.rows.at(node)));
  }
  return worst;
}

bool SameNodes(const Playbook& a, const Playbook& b) {
  if (a.values.size() != b.values.size() ||
      a.strategy.rows.size() != b.strategy.rows.size()) {
    return false;
  }
  for (const auto& [node, v] : a.values) {
    if (!b.values.count(node) || !b.strategy.rows.count(node)) return false;
  }
  return true;
}

NodeUtilities UtilitiesFromValues(const Scenario& scenario,
                                  const ValueFunction& values) {
  ValueFunction full;
  for (const auto& n : scenario.network.nodes) {
    auto it = values.find(n.id);
    full[n.id] = it == values.end() ? 0.0 : it->second;
  }
  std::vector<std::string> live;
  for (const auto& n : scenario.network.nodes) {
    if (!n.terminal) live.push_back(n.id);
  }
  return AllMtgUtilities(scenario.network, scenario.params, full, live);
}

NodeUtilities ZeroUtilities(const Scenario& scenario) {
  NodeUtilities out;
  for (const auto& [node, tree] : scenario.trees) {
    for (const std::string& z : tree.outcomes()) out[node][z] = {0.0, 0.0};
  }
  return out;
}

}  // namespace

double ConvergenceMetric(const Playbook& prev, const Playbook& next) {
  if (!SameNodes(prev, next)) {
    throw InputError("convergence metric needs playbooks over the same nodes");
  }
  double worst = 0.0;
  for (const auto& [node, v] : prev.values) {
    worst = std::max(worst, std::abs(v - next.values.at(node)));
  }
  return std::max(worst, StrategyDistance(prev.strategy, next.strategy));
}

double RiskScore(const ValueFunction& values, const std::string& node,
                 double v_max) {
  if (!(v_max > 0.0)) throw InputError("v_max must be positive");
  auto it = values.find(node);
  if (it == values.end()) {
    throw InputError("no value for node '" + node + "'");
  }
  return std::min(1.0, std::max(0.0, it->second) / v_max);
}

Playbook RunMeta(const Scenario& scenario, Scheme scheme,
                 const MetaOptions& options) {
  ValidateScenario(scenario);
  if (!(options.epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (options.max_iters < 1) throw InputError("max_iters must be at least 1");

  NodeUtilities utilities;
  std::optional<Playbook> prev;
  if (options.warm_start != nullptr) {
    utilities = UtilitiesFromValues(scenario, options.warm_start->values);
  } else if (options.initial_utilities) {
    utilities = *options.initial_utilities;
  } else {
    utilities = ZeroUtilities(scenario);
  }

  Playbook book;
  book.scheme = scheme;
  std::vector<GlobalStrategy> history;
  bool guard_fired = false;
  MicroStageStats stats;
  for (int it = 1; it <= options.max_iters; ++it) {
    const auto results =
        SolveMicroStage(scenario, scheme, utilities, options.micro, &stats);
    book.profiles.clear();
    std::map<std::string, NodeProfile> node_profiles;
    for (const auto& [node, r] : results) {
      PlanProfile profile{r.attacker_plan, r.defender_plan};
      book.profiles.emplace(node, profile);
      node_profiles.emplace(node, NodeProfile{scenario.trees.at(node), profile});
    }
    book.strategy = StrategyFromProfiles(scenario.network, node_profiles);
    book.values =
        PolicyEvaluation(scenario.network, scenario.params, book.strategy);
    book.iterations = it;

    double metric = std::numeric_limits<double>::infinity();
    if (it == 1 && options.warm_start != nullptr &&
        SameNodes(*options.warm_start, book)) {
      metric = ConvergenceMetric(*options.warm_start, book);
    } else if (prev) {
      metric = ConvergenceMetric(*prev, book);
    }
    book.trace.push_back({it, book.values, metric});
    MEGA_LOG(2, "iteration %d metric %.3e", it, metric);
    if (metric < options.epsilon) {
      book.converged = true;
      break;
    }

    // A strategy seen two or more iterations ago means the loop is cycling.
    bool revisit = false;
    for (std::size_t h = 0; h + 1 < history.size(); ++h) {
      if (StrategyDistance(history[h], book.strategy) <= 1e-9) revisit = true;
    }
    history.push_back(book.strategy);
    ValueFunction next_values = book.values;
    if (revisit) {
      if (guard_fired) {
        MEGA_LOG(1, "strategy cycle persists after averaging; giving up");
        book.cycled = true;
        break;
      }
      guard_fired = true;
      MEGA_LOG(1, "strategy cycle detected at iteration %d; averaging", it);
      GlobalStrategy mixed = book.strategy;
      const GlobalStrategy& last = history[history.size() - 2];
      for (auto& [node, row] : mixed.rows) {
        for (auto& [to, p] : row) p = 0.5 * (p + last.prob(node, to));
      }
      next_values = PolicyEvaluation(scenario.network, scenario.params, mixed);
    }
    prev = book;
    prev->trace.clear();
    utilities = UtilitiesFromValues(scenario, next_values);
  }

  book.solver_invocations = stats.solver_invocations;
  for (const auto& n : scenario.network.nodes) {
    book.risk[n.id] = RiskScore(book.values, n.id, scenario.v_max);
  }
  return book;
}

namespace {

// Rewrites a tree leaf into a uniform chance move over `targets`.
void SplitLeaf(TreeData& data, std::size_t index,
               const std::vector<std::string>& targets) {
  Vertex& leaf = data.vertices[index];
  const std::string base = leaf.id;
  leaf.outcome.reset();
  leaf.owner = Player::kChance;
  leaf.actions.clear();
  leaf.children.clear();
  leaf.chance_dist.assign(targets.size(), 1.0 / targets.size());
  std::vector<Vertex> added;
  for (const std::string& t : targets) {
    Vertex child;
    child.id = base + "/" + t;
    child.outcome = t;
    leaf.actions.push_back("to_" + t);
    leaf.children.emplace("to_" + t, child.id);
    added.push_back(std::move(child));
  }
  for (auto& v : added) data.vertices.push_back(std::move(v));
}

void AddOutcome(TreeData& data, const std::string& z) {
  if (std::find(data.outcomes.begin(), data.outcomes.end(), z) ==
      data.outcomes.end()) {
    data.outcomes.push_back(z);
  }
}

Scenario AddNodes(const Scenario& scenario, const std::string& tmpl,
                  int count) {
  const Network& net = scenario.network;
  if (net.index_of(tmpl) < 0) {
    throw InputError("template node '" + tmpl + "' is not in the network");
  }
  if (net.node(tmpl).terminal) {
    throw InputError("template node '" + tmpl + "' is terminal");
  }
  if (count < 1) throw InputError("AddNodes needs a positive count");

  std::vector<std::string> clones;
  for (int i = 1; i <= count; ++i) {
    const std::string id = tmpl + "_" + std::to_string(i);
    if (net.index_of(id) >= 0) {
      throw InputError("node '" + id + "' already exists");
    }
    clones.push_back(id);
  }
  std::vector<std::string> group{tmpl};
  group.insert(group.end(), clones.begin(), clones.end());

  Scenario out = scenario;
  Network& next = out.network;
  const Network::Node base = net.node(tmpl);
  std::vector<Network::Node> inserted;
  for (const std::string& id : clones) inserted.push_back({id, base.importance, false});
  next.nodes.insert(next.nodes.begin() + net.index_of(tmpl) + 1,
                    inserted.begin(), inserted.end());

  for (const auto& [from, to] : net.edges) {
    for (const std::string& id : clones) {
      if (from == tmpl) next.edges.emplace_back(id, to == tmpl ? id : to);
      if (to == tmpl && from != tmpl) next.edges.emplace_back(from, id);
    }
  }

  // Clone the template tree with its self-leaves pointing at the clone.
  const TreeData& source = scenario.trees.at(tmpl).data();
  for (const std::string& id : clones) {
    TreeData data = source;
    data.node_id = id;
    for (Vertex& v : data.vertices) {
      if (v.outcome && *v.outcome == tmpl) v.outcome = id;
    }
    for (std::string& z : data.outcomes) {
      if (z == tmpl) z = id;
    }
    out.trees.insert_or_assign(id, GameTree::Build(std::move(data)));
    auto fd = scenario.fixed_defense.find(tmpl);
    if (fd != scenario.fixed_defense.end()) out.fixed_defense[id] = fd->second;
  }

  // Other nodes that led to the template now pick a peer uniformly.
  for (const auto& [node, tree] : scenario.trees) {
    if (node == tmpl) continue;
    TreeData data = tree.data();
    bool touched = false;
    std::vector<std::string> targets;
    for (const std::string& g : group) {
      if (g != node) targets.push_back(g);
    }
    const std::size_t original = data.vertices.size();
    for (std::size_t i = 0; i < original; ++i) {
      if (data.vertices[i].outcome && *data.vertices[i].outcome == tmpl) {
        SplitLeaf(data, i, targets);
        touched = true;
      }
    }
    if (!touched && !net.has_edge(node, tmpl)) continue;
    for (const std::string& t : targets) AddOutcome(data, t);
    out.trees.insert_or_assign(node, GameTree::Build(std::move(data)));
  }
  return out;
}

Scenario RemoveEdge(const Scenario& scenario, const Edge& edge) {
  const auto& [from, to] = edge;
  if (!scenario.network.has_edge(from, to)) {
    throw InputError("edge (" + from + ", " + to + ") is not in the network");
  }
  if (from == to) throw InputError("self-loops cannot be removed");
  Scenario out = scenario;
  auto& edges = out.network.edges;
  edges.erase(std::remove(edges.begin(), edges.end(), edge), edges.end());
  auto it = scenario.trees.find(from);
  if (it != scenario.trees.end()) {
    TreeData data = it->second.data();
    for (Vertex& v : data.vertices) {
      if (v.outcome && *v.outcome == to) v.outcome = from;
    }
    data.outcomes.erase(
        std::remove(data.outcomes.begin(), data.outcomes.end(), to),
        data.outcomes.end());
    AddOutcome(data, from);
    out.trees.insert_or_assign(from, GameTree::Build(std::move(data)));
  }
  return out;
}

}  // namespace

Scenario ApplyChange(const Scenario& scenario, const ScenarioChange& change) {
  Scenario out;
  switch (change.kind) {
    case ScenarioChange::Kind::kReplaceTree: {
      const int i = scenario.network.index_of(change.node);
      if (i < 0) {
        throw InputError("change references unknown node '" + change.node + "'");
      }
      if (!change.tree) throw InputError("ReplaceTree change carries no tree");
      if (change.tree->node_id() != change.node) {
        throw InputError("replacement tree belongs to '" +
                         change.tree->node_id() + "', not '" + change.node + "'");
      }
      out = scenario;
      out.trees.insert_or_assign(change.node, *change.tree);
      break;
    }
    case ScenarioChange::Kind::kAddNodes:
      out = AddNodes(scenario, change.node, change.count);
      break;
    case ScenarioChange::Kind::kRemoveEdge:
      out = RemoveEdge(scenario, change.edge);
      break;
  }
  ValidateScenario(out);
  return out;
}

PlaybookDiff DiffPlaybooks(const Scenario& before_scenario,
                           const Playbook& before,
                           const Scenario& after_scenario,
                           const Playbook& after, double epsilon) {
  PlaybookDiff diff;
  for (const auto& n : after_scenario.network.nodes) {
    if (before_scenario.network.index_of(n.id) < 0) diff.added_nodes.push_back(n.id);
  }
  for (const auto& n : before_scenario.network.nodes) {
    if (after_scenario.network.index_of(n.id) < 0) diff.removed_nodes.push_back(n.id);
  }
  for (const auto& n : after_scenario.network.nodes) {
    auto b = before.profiles.find(n.id);
    auto a = after.profiles.find(n.id);
    if (b == before.profiles.end() || a == after.profiles.end()) continue;
    const GameTree& tb = before_scenario.trees.at(n.id);
    const GameTree& ta = after_scenario.trees.at(n.id);
    bool changed = !(tb == ta) ||
                   PlanDistance(b->second.attacker, a->second.attacker) > epsilon ||
                   PlanDistance(b->second.defender, a->second.defender) > epsilon;
    if (!changed) {
      const auto tau_b = ComputeOutcomeDistribution(tb, b->second);
      const auto tau_a = ComputeOutcomeDistribution(ta, a->second);
      changed = TotalVariation(tau_b, tau_a) > epsilon;
    }
    if (changed) diff.changed_profiles.push_back(n.id);
  }

  std::set<std::string> nodes;
  for (const auto& [node, row] : before.strategy.rows) nodes.insert(node);
  for (const auto& [node, row] : after.strategy.rows) nodes.insert(node);
  for (const std::string& from : nodes) {
    std::set<std::string> targets;
    auto rb = before.strategy.rows.find(from);
    auto ra = after.strategy.rows.find(from);
    if (rb != before.strategy.rows.end()) {
      for (const auto& [to, p] : rb->second) targets.insert(to);
    }
    if (ra != after.strategy.rows.end()) {
      for (const auto& [to, p] : ra->second) targets.insert(to);
    }
    for (const std::string& to : targets) {
      const double delta = after.strategy.prob(from, to) - before.strategy.prob(from, to);
      if (std::abs(delta) > epsilon) diff.strategy_delta[from][to] = delta;
    }
  }
  return diff;
}

AdaptResult Adapt(const Scenario& scenario, const Playbook& playbook,
                  const ScenarioChange& change, Scheme scheme,
                  const MetaOptions& options) {
  if (!playbook.converged) {
    throw InputError("adapt needs a converged playbook to start from");
  }
  Scenario next = ApplyChange(scenario, change);
  if (next == scenario && scheme == playbook.scheme) {
    Playbook same = playbook;
    same.iterations = 0;
    same.trace.clear();
    same.solver_invocations = 0;
    return {std::move(next), std::move(same), PlaybookDiff{}};
  }
  MetaOptions warm = options;
  warm.warm_start = &playbook;
  Playbook after = RunMeta(next, scheme, warm);
  PlaybookDiff diff = DiffPlaybooks(scenario, playbook, next, after, options.epsilon);
  return {std::move(next), std::move(after), std::move(diff)};
}

}  // namespace metapen
