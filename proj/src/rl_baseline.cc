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

#include "metapen/rl_baseline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <tuple>

#include "metapen/logging.h"
#include "metapen/meta_engine.h"
#include "metapen/scenario_io.h"

namespace metapen {
namespace {

using Clock = std::chrono::steady_clock;

double ElapsedMs(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Leaf distribution of one pure attacker plan against the fixed defense,
// with the attacker flags raised on the way to each leaf.
void Walk(const GameTree& tree, int v, double prob, std::uint64_t mask,
          const internal::IndexedPlan& attacker,
          const internal::IndexedPlan& defender,
          const std::vector<int>& flag_of_set,
          std::vector<std::tuple<double, std::string, std::uint64_t>>& out) {
  if (prob == 0.0) return;
  if (tree.is_leaf(v)) {
    out.emplace_back(prob, tree.outcomes()[tree.outcome_of_leaf(v)], mask);
    return;
  }
  const auto kids = tree.children(v);
  const Vertex& vx = tree.vertex(v);
  const int k = tree.knowledge_set_of(v);
  const std::vector<double>* dist = &vx.chance_dist;
  if (vx.owner == Player::kAttacker) {
    dist = &attacker[k];
    mask |= std::uint64_t{1} << flag_of_set[k];
  } else if (vx.owner == Player::kDefender) {
    dist = &defender[k];
  }
  for (std::size_t a = 0; a < kids.size(); ++a) {
    Walk(tree, kids[a], prob * (*dist)[a], mask, attacker, defender, flag_of_set,
         out);
  }
}

std::string PlanLabel(const GameTree& tree, const PurePlan& plan) {
  std::string label;
  for (const auto& [ks, a] : plan.choices) {
    if (!label.empty()) label += ";";
    label += ks + "=" + tree.knowledge_set(tree.knowledge_set_index(ks)).actions[a];
  }
  return label.empty() ? "(no choice)" : label;
}

}  // namespace

FlatMdp Flatten(const Scenario& scenario, const FlatMdpOptions& options) {
  ValidateScenario(scenario);
  const Network& net = scenario.network;
  FlatMdp mdp;
  mdp.gamma = scenario.params.gamma;
  mdp.initial_location = net.index_of(net.initial);
  std::map<std::string, std::vector<int>> flag_of_set;
  for (const auto& n : net.nodes) {
    mdp.locations.push_back(n.id);
    mdp.terminal.push_back(n.terminal);
    if (n.terminal) continue;
    const GameTree& tree = scenario.trees.at(n.id);
    auto& index = flag_of_set[n.id];
    index.assign(tree.num_knowledge_sets(), -1);
    for (int k : tree.knowledge_sets_of(Player::kAttacker)) {
      index[k] = static_cast<int>(mdp.flags.size());
      mdp.flags.push_back(n.id + ":" + tree.knowledge_set(k).id);
    }
  }
  const std::size_t nflags = mdp.flags.size();
  mdp.state_count = static_cast<double>(net.nodes.size()) *
                    std::ldexp(1.0, static_cast<int>(nflags));
  if (nflags + 6 > 63 ||
      (options.state_cap > 0 && mdp.state_count > options.state_cap)) {
    throw CapacityError("flattened state space has " +
                            std::to_string(mdp.state_count) + " states (cap " +
                            std::to_string(options.state_cap) + ")",
                        static_cast<std::size_t>(std::min(
                            mdp.state_count, static_cast<double>(SIZE_MAX))));
  }

  const MspParams& p = scenario.params;
  mdp.actions.resize(net.nodes.size());
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    const auto& n = net.nodes[i];
    if (n.terminal) continue;
    const GameTree& tree = scenario.trees.at(n.id);
    const auto defender =
        internal::IndexPlan(tree, FixedDefense(scenario, n.id));
    for (const PurePlan& plan : EnumeratePurePlans(tree, Player::kAttacker)) {
      std::vector<std::tuple<double, std::string, std::uint64_t>> leaves;
      Walk(tree, tree.root(), 1.0, 0, internal::IndexPurePlan(tree, plan),
           defender, flag_of_set.at(n.id), leaves);
      // Merge identical branches so sampling stays cheap.
      std::map<std::tuple<int, double, std::uint64_t>, double> merged;
      for (const auto& [prob, z, mask] : leaves) {
        if (z == n.id) {
          merged[{static_cast<int>(i), p.m_a, mask}] += prob;
          continue;
        }
        const int u = net.index_of(z);
        if (p.c_a > 0.0) merged[{u, net.nodes[u].importance, mask}] += prob * p.c_a;
        if (p.c_a < 1.0) {
          merged[{static_cast<int>(i), p.m_a, mask}] += prob * (1.0 - p.c_a);
        }
      }
      FlatAction action;
      action.label = PlanLabel(tree, plan);
      for (const auto& [key, prob] : merged) {
        const auto& [next, reward, mask] = key;
        action.branches.push_back({prob, next, reward, mask});
      }
      mdp.actions[i].push_back(std::move(action));
    }
  }
  return mdp;
}

std::vector<double> FlatValueIteration(const FlatMdp& mdp, double tolerance,
                                       double max_states) {
  if (mdp.state_count > max_states) {
    throw CapacityError("value iteration over " + std::to_string(mdp.state_count) +
                            " states exceeds the limit",
                        static_cast<std::size_t>(mdp.state_count));
  }
  const auto count = static_cast<std::uint64_t>(mdp.state_count);
  std::vector<double> values(count, 0.0);
  const double bound = tolerance * (1.0 - std::min(mdp.gamma, 1.0 - 1e-12));
  for (int sweep = 0; sweep < 1'000'000; ++sweep) {
    double change = 0.0;
    for (std::uint64_t s = 0; s < count; ++s) {
      const int loc = mdp.LocationOf(s);
      if (mdp.terminal[loc]) continue;
      const std::uint64_t flags = mdp.FlagsOf(s);
      double best = -std::numeric_limits<double>::infinity();
      for (const FlatAction& a : mdp.actions[loc]) {
        double q = 0.0;
        for (const FlatBranch& b : a.branches) {
          const double next =
              mdp.terminal[b.next_location]
                  ? 0.0
                  : values[mdp.Encode(b.next_location, flags | b.flags_set)];
          q += b.prob * (b.reward + mdp.gamma * next);
        }
        best = std::max(best, q);
      }
      change = std::max(change, std::abs(best - values[s]));
      values[s] = best;
    }
    if (change <= bound) return values;
  }
  throw SolverError("flat value iteration did not converge");
}

double QTable::Value(std::uint64_t state, int action) const {
  auto it = entries.find(state);
  return it == entries.end() ? initial_value : it->second.q[action];
}

double QTable::MaxValue(const FlatMdp& mdp, std::uint64_t state) const {
  if (mdp.terminal[mdp.LocationOf(state)]) return 0.0;
  auto it = entries.find(state);
  if (it == entries.end()) return initial_value;
  return *std::max_element(it->second.q.begin(), it->second.q.end());
}

int QTable::Greedy(const FlatMdp& mdp, std::uint64_t state) const {
  (void)mdp;
  auto it = entries.find(state);
  if (it == entries.end()) return 0;
  const auto& q = it->second.q;
  return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

double GreedyPolicyValue(const FlatMdp& mdp, const QTable& table,
                         double state_cap) {
  // States the table has never seen carry no learned decision; they are
  // valued at the worst discounted reward, so only learned play counts.
  double worst_reward = 0.0;
  for (const auto& per_location : mdp.actions) {
    for (const FlatAction& a : per_location) {
      for (const FlatBranch& b : a.branches) {
        worst_reward = std::min(worst_reward, b.reward);
      }
    }
  }
  const double floor_value = worst_reward / (1.0 - std::min(mdp.gamma, 1.0 - 1e-6));

  std::unordered_map<std::uint64_t, int> index;
  std::vector<std::uint64_t> states{mdp.initial_state()};
  index.emplace(states[0], 0);
  // -1: terminal; -2: unseen; otherwise the greedy action.
  std::vector<int> action_of;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::uint64_t s = states[i];
    const int loc = mdp.LocationOf(s);
    if (mdp.terminal[loc]) {
      action_of.push_back(-1);
      continue;
    }
    if (!table.entries.count(s)) {
      action_of.push_back(-2);
      continue;
    }
    const int a = table.Greedy(mdp, s);
    action_of.push_back(a);
    for (const FlatBranch& b : mdp.actions[loc][a].branches) {
      const std::uint64_t next =
          mdp.Encode(b.next_location, mdp.FlagsOf(s) | b.flags_set);
      if (index.emplace(next, static_cast<int>(states.size())).second) {
        states.push_back(next);
        if (static_cast<double>(states.size()) > state_cap) {
          return std::numeric_limits<double>::quiet_NaN();
        }
      }
    }
  }
  std::vector<std::vector<std::pair<int, const FlatBranch*>>> succ(states.size());
  std::vector<double> v(states.size(), 0.0);
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (action_of[i] == -2) v[i] = floor_value;
    if (action_of[i] < 0) continue;
    const int loc = mdp.LocationOf(states[i]);
    for (const FlatBranch& b : mdp.actions[loc][action_of[i]].branches) {
      const std::uint64_t next =
          mdp.Encode(b.next_location, mdp.FlagsOf(states[i]) | b.flags_set);
      succ[i].emplace_back(index.at(next), &b);
    }
  }
  // Gauss-Seidel sweeps over the learned states.
  const double bound = 1e-9 * (1.0 - std::min(mdp.gamma, 1.0 - 1e-6));
  for (int sweep = 0; sweep < 1'000'000; ++sweep) {
    double change = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (action_of[i] < 0) continue;
      double x = 0.0;
      for (const auto& [j, b] : succ[i]) {
        x += b->prob * (b->reward + mdp.gamma * v[j]);
      }
      change = std::max(change, std::abs(x - v[i]));
      v[i] = x;
    }
    if (change <= bound) break;
  }
  return v[0];
}

QLearnResult QLearn(const FlatMdp& mdp, const QLearnOptions& options) {
  QLearnResult result;
  QTable& table = result.table;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto start = Clock::now();
  const std::uint64_t s0 = mdp.initial_state();
  int next_evaluation = 0;
  int backoff = options.check_every;

  auto entry = [&](std::uint64_t s) -> QTable::Entry& {
    auto [it, inserted] = table.entries.try_emplace(s);
    if (inserted) {
      const std::size_t n = mdp.actions[mdp.LocationOf(s)].size();
      it->second.q.assign(n, table.initial_value);
      it->second.visits.assign(n, 0);
    }
    return it->second;
  };

  for (int episode = 0; episode < options.episodes; ++episode) {
    const double epsilon =
        options.epsilon * (1.0 - static_cast<double>(episode) / options.episodes);
    std::uint64_t s = s0;
    double ret = 0.0;
    double discount = 1.0;
    for (int step = 0; step < options.step_cap; ++step) {
      const int loc = mdp.LocationOf(s);
      if (mdp.terminal[loc]) break;
      QTable::Entry& e = entry(s);
      const int n = static_cast<int>(e.q.size());
      int a;
      if (unit(rng) < epsilon) {
        a = std::min(n - 1, static_cast<int>(unit(rng) * n));
      } else {
        // Uniform choice among the maximizers.
        const double best = *std::max_element(e.q.begin(), e.q.end());
        int ties = 0;
        a = 0;
        for (int i = 0; i < n; ++i) {
          if (e.q[i] == best && unit(rng) * ++ties < 1.0) a = i;
        }
      }
      const FlatAction& action = mdp.actions[loc][a];
      double u = unit(rng);
      const FlatBranch* branch = &action.branches.back();
      for (const FlatBranch& b : action.branches) {
        if (u < b.prob) {
          branch = &b;
          break;
        }
        u -= b.prob;
      }
      const std::uint64_t next =
          mdp.Encode(branch->next_location, mdp.FlagsOf(s) | branch->flags_set);
      const double target = branch->reward + mdp.gamma * table.MaxValue(mdp, next);
      e.q[a] += options.alpha * (target - e.q[a]);
      e.visits[a] += 1;
      ret += discount * branch->reward;
      discount *= mdp.gamma;
      s = next;
    }
    result.episode_returns.push_back(ret);
    result.episodes_run = episode + 1;
    if ((episode + 1) % options.check_every == 0) {
      if (options.has_target && episode + 1 >= next_evaluation &&
          std::abs(table.MaxValue(mdp, s0) - options.target) <=
              options.target_tolerance) {
        const double v = GreedyPolicyValue(mdp, table, options.evaluation_state_cap);
        if (std::abs(v - options.target) <= options.target_tolerance) {
          result.reached_target = true;
          break;
        }
        next_evaluation = episode + 1 + backoff;
        backoff = std::min(2 * backoff, 1 << 20);
      }
      if (ElapsedMs(start) > options.budget_ms) {
        result.budget_exhausted = true;
        break;
      }
    }
  }
  result.initial_value = table.MaxValue(mdp, s0);
  result.greedy_value = GreedyPolicyValue(mdp, table, options.evaluation_state_cap);
  return result;
}

std::vector<BenchmarkRow> BenchmarkScaling(const std::vector<int>& user_counts,
                                           const BenchmarkOptions& options) {
  std::vector<BenchmarkRow> rows;
  for (int n : user_counts) {
    const Scenario scenario = ScalingScenario(n);
    BenchmarkRow row;
    row.n_users = n;

    MetaOptions meta;
    meta.micro.threads = 1;
    std::vector<double> samples;
    Playbook book;
    const auto begin = Clock::now();
    do {
      const auto t = Clock::now();
      book = RunMeta(scenario, Scheme::kRed, meta);
      samples.push_back(ElapsedMs(t));
    } while (samples.size() < 3 || ElapsedMs(begin) < options.meta_min_total_ms);
    std::sort(samples.begin(), samples.end());
    row.meta_ms = samples[samples.size() / 2];
    row.meta_value = book.values.at(scenario.network.initial);

    const FlatMdp mdp = Flatten(scenario, FlatMdpOptions{0});
    row.rl_states = mdp.state_count;
    QLearnOptions q;
    q.episodes = std::numeric_limits<int>::max();
    q.has_target = true;
    q.target = row.meta_value;
    q.target_tolerance =
        options.relative_tolerance * std::max(1.0, std::abs(row.meta_value));
    q.budget_ms = options.rl_budget_ms;
    std::vector<std::pair<double, int>> runs;
    row.rl_converged = true;
    for (int r = 0; r < std::max(1, options.rl_runs); ++r) {
      q.seed = options.seed + static_cast<std::uint64_t>(r);
      const auto t = Clock::now();
      const QLearnResult learned = QLearn(mdp, q);
      runs.emplace_back(ElapsedMs(t), learned.episodes_run);
      row.rl_converged = row.rl_converged && learned.reached_target;
      if (r == 0) row.rl_value = learned.greedy_value;
    }
    std::sort(runs.begin(), runs.end());
    row.rl_ms = runs[runs.size() / 2].first;
    row.rl_episodes = runs[runs.size() / 2].second;
    MEGA_LOG(1, "bench n=%d meta %.3f ms, rl %.1f ms over %d episodes (%s)", n,
             row.meta_ms, row.rl_ms, row.rl_episodes,
             row.rl_converged ? "converged" : "budget exhausted");
    rows.push_back(row);
  }
  return rows;
}

std::string BenchmarkCsv(const std::vector<BenchmarkRow>& rows) {
  std::string out = "n_users,meta_ms,rl_ms,rl_states,rl_converged\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%s,%.0f,%s\n", r.n_users,
                  FormatNumber(r.meta_ms).c_str(), FormatNumber(r.rl_ms).c_str(),
                  r.rl_states, r.rl_converged ? "true" : "false");
    out += buf;
  }
  return out;
}

}  // namespace metapen
