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

#ifndef METAPEN_META_ENGINE_H_
#define METAPEN_META_ENGINE_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metapen/macro_process.h"
#include "metapen/plans.h"
#include "metapen/scenario.h"
#include "metapen/solvers.h"

namespace metapen {

using NodeUtilities = std::map<std::string, OutcomeUtilities>;

struct MicroStageStats {
  int solver_invocations = 0;
  int reused = 0;
};

struct MicroStageOptions {
  SolverOptions solver;
  int threads = 0;  // 0: one per hardware thread
};

// Solves every non-terminal node's micro game under `scheme`. Identical
// (tree shape, utilities, fixed defense) triples are solved once. Errors are
// rethrown with the node id prefixed.
std::map<std::string, SolveResult> SolveMicroStage(
    const Scenario& scenario, Scheme scheme, const NodeUtilities& utilities,
    const MicroStageOptions& options = {}, MicroStageStats* stats = nullptr);

struct IterationRecord {
  int iteration = 0;
  ValueFunction values;
  double metric = 0.0;
};

struct Playbook {
  Scheme scheme = Scheme::kRed;
  std::map<std::string, PlanProfile> profiles;
  GlobalStrategy strategy;
  ValueFunction values;
  std::map<std::string, double> risk;
  int iterations = 0;
  bool converged = false;
  // Set when the cycle guard fired twice; the trace then ends in the cycle.
  bool cycled = false;
  std::vector<IterationRecord> trace;
  int solver_invocations = 0;
};

struct MetaOptions {
  double epsilon = 1e-6;
  int max_iters = 200;
  MicroStageOptions micro;
  // Starting utilities; all zeros when absent.
  std::optional<NodeUtilities> initial_utilities;
  // Warm start: utilities come from these values and the first metric is
  // measured against this playbook. Overrides initial_utilities.
  const Playbook* warm_start = nullptr;
};

Playbook RunMeta(const Scenario& scenario, Scheme scheme,
                 const MetaOptions& options = {});

// max(sup-norm value change, largest per-node total variation between
// strategy rows). Throws InputError if the node sets differ.
double ConvergenceMetric(const Playbook& prev, const Playbook& next);

double TotalVariation(const std::map<std::string, double>& a,
                      const std::map<std::string, double>& b);

// max(0, V(node)) / v_max, clamped to 1.
double RiskScore(const ValueFunction& values, const std::string& node,
                 double v_max);

struct ScenarioChange {
  enum class Kind { kReplaceTree, kAddNodes, kRemoveEdge };

  Kind kind = Kind::kReplaceTree;
  std::string node;                // replaced node, or AddNodes template
  std::optional<GameTree> tree;    // kReplaceTree
  int count = 0;                   // kAddNodes
  Edge edge;                       // kRemoveEdge
  std::string description;
};

// Applies the change and re-validates the result.
//
// kAddNodes clones the template `count` times as "<template>_<i>" with the
// same tree, importance, edges and fixed defense. Every leaf elsewhere that
// led to the template becomes a uniform chance move over the template and
// its clones.
//
// kRemoveEdge drops a lateral edge; leaves that used it now stay put.
Scenario ApplyChange(const Scenario& scenario, const ScenarioChange& change);

struct PlaybookDiff {
  std::vector<std::string> changed_profiles;
  std::vector<std::string> added_nodes;
  std::vector<std::string> removed_nodes;
  // Strategy entries (from -> to -> new - old) moving by more than epsilon.
  std::map<std::string, std::map<std::string, double>> strategy_delta;

  bool strategy_changed() const { return !strategy_delta.empty(); }
  bool empty() const {
    return changed_profiles.empty() && added_nodes.empty() &&
           removed_nodes.empty() && strategy_delta.empty();
  }
};

// A node's profile counts as changed when its tree changed, either player's
// plan moved by more than epsilon, or its outcome distribution did.
PlaybookDiff DiffPlaybooks(const Scenario& before_scenario,
                           const Playbook& before,
                           const Scenario& after_scenario,
                           const Playbook& after, double epsilon = 1e-6);

struct AdaptResult {
  Scenario scenario;
  Playbook playbook;
  PlaybookDiff diff;
};

// Applies the change and warm-starts the meta loop from `playbook`. A change
// that leaves the scenario structurally identical returns `playbook` as is.
AdaptResult Adapt(const Scenario& scenario, const Playbook& playbook,
                  const ScenarioChange& change, Scheme scheme,
                  const MetaOptions& options = {});

}  // namespace metapen

#endif  // METAPEN_META_ENGINE_H_
