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

#ifndef METAPEN_MACRO_PROCESS_H_
#define METAPEN_MACRO_PROCESS_H_

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "metapen/game_tree.h"
#include "metapen/plans.h"

namespace metapen {

// Directed network the attacker moves through. Nodes keep their declaration
// order, which fixes the row and column order of every report.
struct Network {
  struct Node {
    std::string id;
    double importance = 0.0;  // reward for entering the node
    bool terminal = false;    // absorbing, value pinned to zero

    bool operator==(const Node&) const = default;
  };

  std::vector<Node> nodes;
  std::vector<std::pair<std::string, std::string>> edges;
  std::string initial;

  int index_of(std::string_view id) const;  // -1 if unknown
  const Node& node(std::string_view id) const;
  bool has_edge(std::string_view from, std::string_view to) const;
  // Targets of the node's outgoing edges, sorted, self included.
  std::vector<std::string> successors(std::string_view id) const;

  bool operator==(const Network&) const = default;
};

// Throws InputError on a malformed network (unknown endpoints, duplicate ids,
// missing self-loops, terminal nodes with lateral edges, ...).
void ValidateNetwork(const Network& network);

struct MspParams {
  double c_a = 0.8;     // capability: success probability of a lateral move
  double m_a = -15.0;   // penalty for staying, or for a failed move
  double gamma = 0.9;

  bool operator==(const MspParams&) const = default;
};

void ValidateParams(const MspParams& params);

using Edge = std::pair<std::string, std::string>;

// pi^g: node -> (successor -> probability).
struct GlobalStrategy {
  std::map<std::string, std::map<std::string, double>> rows;

  double prob(std::string_view from, std::string_view to) const;
  bool operator==(const GlobalStrategy&) const = default;
};

void CheckStrategy(const Network& network, const GlobalStrategy& strategy);

using ValueFunction = std::map<std::string, double>;

double TransitionProb(const Network& network, std::string_view s,
                      const Edge& action, std::string_view s_next,
                      const MspParams& params);

double MovementReward(const Network& network, std::string_view s,
                      const Edge& action, std::string_view s_next,
                      const MspParams& params);

enum class EvaluationMethod { kDirect, kIterative };

struct EvaluationOptions {
  EvaluationMethod method = EvaluationMethod::kDirect;
  double residual_tolerance = 1e-9;
  int max_sweeps = 10'000'000;
};

// V^pi with V(terminal) = 0. The direct path falls back to iteration when
// the factorization leaves a residual above tolerance; a singular system is
// a SolverError.
ValueFunction PolicyEvaluation(const Network& network, const MspParams& params,
                               const GlobalStrategy& strategy,
                               const EvaluationOptions& options = {});

// Largest absolute Bellman residual of `values` under the strategy.
double BellmanResidual(const Network& network, const MspParams& params,
                       const GlobalStrategy& strategy,
                       const ValueFunction& values);

// pi^g(v -> z) = tau^v(z). Terminal nodes self-loop with probability 1.
GlobalStrategy StrategyFromOutcomes(
    const Network& network,
    const std::map<std::string, OutcomeDistribution>& outcomes);

struct NodeProfile {
  GameTree tree;
  PlanProfile profile;
};

GlobalStrategy StrategyFromProfiles(
    const Network& network, const std::map<std::string, NodeProfile>& profiles);

// Zero-sum utilities of the node's micro game given the current values.
OutcomeUtilities MtgUtilities(const Network& network, const MspParams& params,
                              const ValueFunction& values, std::string_view v);

// MtgUtilities for each listed node, sharing one adjacency pass.
std::map<std::string, OutcomeUtilities> AllMtgUtilities(
    const Network& network, const MspParams& params,
    const ValueFunction& values, const std::vector<std::string>& nodes);

}  // namespace metapen

#endif  // METAPEN_MACRO_PROCESS_H_
