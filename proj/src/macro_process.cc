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

#include "metapen/macro_process.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include <Eigen/Dense>

namespace metapen {
namespace {

// Node positions and sorted successor lists, built once per call so that
// per-node lookups stay constant time on large networks.
struct NetworkIndex {
  std::unordered_map<std::string_view, int> position;
  std::vector<std::vector<std::string_view>> successors;  // into the network

  explicit NetworkIndex(const Network& network)
      : successors(network.nodes.size()) {
    for (std::size_t i = 0; i < network.nodes.size(); ++i) {
      position.emplace(network.nodes[i].id, static_cast<int>(i));
    }
    for (const auto& [from, to] : network.edges) {
      auto it = position.find(from);
      if (it != position.end()) successors[it->second].push_back(to);
    }
    for (auto& s : successors) std::sort(s.begin(), s.end());
  }

  int of(std::string_view id) const {
    auto it = position.find(id);
    return it == position.end() ? -1 : it->second;
  }
  bool has_edge(int from, std::string_view to) const {
    return from >= 0 &&
           std::binary_search(successors[from].begin(), successors[from].end(),
                              to);
  }
};

}  // namespace

int Network::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

const Network::Node& Network::node(std::string_view id) const {
  const int i = index_of(id);
  if (i < 0) throw InputError("unknown network node '" + std::string(id) + "'");
  return nodes[i];
}

bool Network::has_edge(std::string_view from, std::string_view to) const {
  return std::any_of(edges.begin(), edges.end(), [&](const auto& e) {
    return e.first == from && e.second == to;
  });
}

std::vector<std::string> Network::successors(std::string_view id) const {
  std::set<std::string> out;
  for (const auto& [from, to] : edges) {
    if (from == id) out.insert(to);
  }
  return {out.begin(), out.end()};
}

void ValidateNetwork(const Network& network) {
  if (network.nodes.empty()) throw InputError("network has no nodes");
  std::set<std::string> ids;
  for (const auto& n : network.nodes) {
    if (n.id.empty()) throw InputError("network node with empty id");
    if (!ids.insert(n.id).second) {
      throw InputError("duplicate network node '" + n.id + "'");
    }
    if (!std::isfinite(n.importance) || n.importance < 0) {
      throw InputError("node '" + n.id + "' needs a finite nonnegative importance");
    }
  }
  std::set<Edge> seen;
  for (const auto& e : network.edges) {
    for (const std::string& end : {e.first, e.second}) {
      if (!ids.count(end)) {
        throw InputError("edge (" + e.first + ", " + e.second +
                         ") references unknown node '" + end + "'");
      }
    }
    if (!seen.insert(e).second) {
      throw InputError("duplicate edge (" + e.first + ", " + e.second + ")");
    }
  }
  for (const auto& n : network.nodes) {
    if (!seen.count({n.id, n.id})) {
      throw InputError("node '" + n.id + "' lacks its self-loop");
    }
    if (n.terminal && network.successors(n.id).size() != 1) {
      throw InputError("terminal node '" + n.id + "' has outgoing edges");
    }
  }
  if (!ids.count(network.initial)) {
    throw InputError("initial node '" + network.initial + "' is not in the network");
  }
}

void ValidateParams(const MspParams& params) {
  if (!(params.c_a >= 0.0 && params.c_a <= 1.0)) {
    throw InputError("c_a must lie in [0, 1]");
  }
  if (!(params.m_a < 0.0) || !std::isfinite(params.m_a)) {
    throw InputError("m_a must be a finite negative number");
  }
  if (!(params.gamma > 0.0 && params.gamma <= 1.0)) {
    throw InputError("gamma must lie in (0, 1]");
  }
}

double GlobalStrategy::prob(std::string_view from, std::string_view to) const {
  auto row = rows.find(std::string(from));
  if (row == rows.end()) return 0.0;
  auto it = row->second.find(std::string(to));
  return it == row->second.end() ? 0.0 : it->second;
}

void CheckStrategy(const Network& network, const GlobalStrategy& strategy) {
  const NetworkIndex index(network);
  for (std::size_t i = 0; i < network.nodes.size(); ++i) {
    const auto& n = network.nodes[i];
    auto row = strategy.rows.find(n.id);
    if (row == strategy.rows.end()) {
      throw InputError("strategy has no row for node '" + n.id + "'");
    }
    double total = 0.0;
    for (const auto& [to, p] : row->second) {
      if (!index.has_edge(static_cast<int>(i), to)) {
        throw InputError("strategy moves along missing edge (" + n.id + ", " +
                         to + ")");
      }
      if (!(p >= 0.0)) {
        throw InputError("negative strategy probability at node '" + n.id + "'");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      throw InputError("strategy row for node '" + n.id + "' sums to " +
                       std::to_string(total));
    }
  }
  if (strategy.rows.size() != network.nodes.size()) {
    throw InputError("strategy has rows for unknown nodes");
  }
}

namespace {

void RequireEdge(const Network& network, std::string_view s, const Edge& action) {
  if (action.first != s || !network.has_edge(action.first, action.second)) {
    throw InputError("(" + action.first + ", " + action.second +
                     ") is not an outgoing edge of '" + std::string(s) + "'");
  }
}

// Expected one-step reward plus discounted continuation of moving s -> u.
double Backup(const Network& network, const NetworkIndex& index,
              const MspParams& params, const ValueFunction& values,
              const std::string& s, std::string_view u) {
  const double stay = params.m_a + params.gamma * values.at(s);
  if (u == s) return stay;
  const int j = index.of(u);
  if (j < 0) throw InputError("unknown network node '" + std::string(u) + "'");
  return params.c_a * (network.nodes[j].importance +
                       params.gamma * values.at(network.nodes[j].id)) +
         (1.0 - params.c_a) * stay;
}

}  // namespace

double TransitionProb(const Network& network, std::string_view s,
                      const Edge& action, std::string_view s_next,
                      const MspParams& params) {
  RequireEdge(network, s, action);
  const auto& [v, u] = action;
  if (u == v) return s_next == v ? 1.0 : 0.0;
  if (s_next == u) return params.c_a;
  if (s_next == v) return 1.0 - params.c_a;
  return 0.0;
}

double MovementReward(const Network& network, std::string_view s,
                      const Edge& action, std::string_view s_next,
                      const MspParams& params) {
  if (TransitionProb(network, s, action, s_next, params) <= 0.0) {
    throw InputError("'" + std::string(s_next) + "' is unreachable from '" +
                     std::string(s) + "' along (" + action.first + ", " +
                     action.second + ")");
  }
  if (s_next == action.first) return params.m_a;
  return network.node(action.second).importance;
}

double BellmanResidual(const Network& network, const MspParams& params,
                       const GlobalStrategy& strategy,
                       const ValueFunction& values) {
  const NetworkIndex index(network);
  double worst = 0.0;
  for (const auto& n : network.nodes) {
    double target = 0.0;
    if (!n.terminal) {
      for (const auto& [u, p] : strategy.rows.at(n.id)) {
        if (p != 0.0) target += p * Backup(network, index, params, values, n.id, u);
      }
    }
    worst = std::max(worst, std::abs(values.at(n.id) - target));
  }
  return worst;
}

namespace {

ValueFunction Iterate(const Network& network, const MspParams& params,
                      const GlobalStrategy& strategy,
                      const EvaluationOptions& options) {
  const NetworkIndex index(network);
  ValueFunction values;
  for (const auto& n : network.nodes) values[n.id] = 0.0;
  // Gauss-Seidel sweeps; each sweep is a gamma-contraction for gamma < 1.
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    for (const auto& n : network.nodes) {
      if (n.terminal) continue;
      // Solve the node's own self-dependence exactly within the sweep.
      double constant = 0.0;
      double self = 0.0;
      for (const auto& [u, p] : strategy.rows.at(n.id)) {
        if (p == 0.0) continue;
        const double stay_weight = u == n.id ? 1.0 : 1.0 - params.c_a;
        self += p * stay_weight * params.gamma;
        constant += p * stay_weight * params.m_a;
        if (u != n.id) {
          constant += p * params.c_a *
                      (network.nodes[index.of(u)].importance +
                       params.gamma * values[u]);
        }
      }
      if (self >= 1.0) {
        throw SolverError("policy evaluation diverges at node '" + n.id +
                          "' (undiscounted recurrent stay)");
      }
      values[n.id] = constant / (1.0 - self);
    }
    if (BellmanResidual(network, params, strategy, values) <=
        options.residual_tolerance) {
      return values;
    }
  }
  throw SolverError("iterative policy evaluation did not reach residual " +
                    std::to_string(options.residual_tolerance));
}

}  // namespace

ValueFunction PolicyEvaluation(const Network& network, const MspParams& params,
                               const GlobalStrategy& strategy,
                               const EvaluationOptions& options) {
  CheckStrategy(network, strategy);
  if (options.method == EvaluationMethod::kIterative) {
    return Iterate(network, params, strategy, options);
  }
  const NetworkIndex index(network);
  const int n = static_cast<int>(network.nodes.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const auto& node = network.nodes[i];
    if (node.terminal) continue;
    for (const auto& [u, p] : strategy.rows.at(node.id)) {
      if (p == 0.0) continue;
      const int j = index.of(u);
      if (j == i) {
        a(i, i) -= p * params.gamma;
        b(i) += p * params.m_a;
        continue;
      }
      a(i, j) -= p * params.c_a * params.gamma;
      a(i, i) -= p * (1.0 - params.c_a) * params.gamma;
      b(i) += p * (params.c_a * network.nodes[j].importance +
                   (1.0 - params.c_a) * params.m_a);
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (lu.rank() < n) {
    throw SolverError(
        "policy evaluation system is singular; gamma = 1 with a recurrent "
        "non-terminal class");
  }
  const Eigen::VectorXd x = lu.solve(b);
  ValueFunction values;
  for (int i = 0; i < n; ++i) values[network.nodes[i].id] = x(i);
  if (BellmanResidual(network, params, strategy, values) >
      options.residual_tolerance) {
    return Iterate(network, params, strategy, options);
  }
  return values;
}

GlobalStrategy StrategyFromOutcomes(
    const Network& network,
    const std::map<std::string, OutcomeDistribution>& outcomes) {
  const NetworkIndex index(network);
  GlobalStrategy strategy;
  for (std::size_t i = 0; i < network.nodes.size(); ++i) {
    const auto& n = network.nodes[i];
    auto& row = strategy.rows[n.id];
    if (n.terminal) {
      row[n.id] = 1.0;
      continue;
    }
    auto it = outcomes.find(n.id);
    if (it == outcomes.end()) {
      throw InputError("no micro profile for node '" + n.id + "'");
    }
    for (std::string_view u : index.successors[i]) row[std::string(u)] = 0.0;
    for (const auto& [z, p] : it->second) {
      if (!index.has_edge(static_cast<int>(i), z)) {
        throw InputError("outcome '" + z + "' at node '" + n.id +
                         "' has no matching edge");
      }
      row[z] += p;
    }
  }
  return strategy;
}

GlobalStrategy StrategyFromProfiles(
    const Network& network, const std::map<std::string, NodeProfile>& profiles) {
  std::map<std::string, OutcomeDistribution> outcomes;
  for (const auto& [node, p] : profiles) {
    outcomes.emplace(node, ComputeOutcomeDistribution(p.tree, p.profile));
  }
  return StrategyFromOutcomes(network, outcomes);
}

OutcomeUtilities MtgUtilities(const Network& network, const MspParams& params,
                              const ValueFunction& values, std::string_view v) {
  return AllMtgUtilities(network, params, values, {std::string(v)}).begin()
      ->second;
}

std::map<std::string, OutcomeUtilities> AllMtgUtilities(
    const Network& network, const MspParams& params,
    const ValueFunction& values, const std::vector<std::string>& nodes) {
  const NetworkIndex index(network);
  std::map<std::string, OutcomeUtilities> out;
  for (const std::string& self : nodes) {
    const int i = index.of(self);
    if (i < 0) throw InputError("unknown network node '" + self + "'");
    OutcomeUtilities& utilities = out[self];
    for (std::string_view u : index.successors[i]) {
      const double ua = Backup(network, index, params, values, self, u);
      utilities[std::string(u)] = {ua, -ua};
    }
  }
  return out;
}

}  // namespace metapen
