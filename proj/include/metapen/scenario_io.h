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

#ifndef METAPEN_SCENARIO_IO_H_
#define METAPEN_SCENARIO_IO_H_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "metapen/meta_engine.h"
#include "metapen/scenario.h"

namespace metapen {

inline constexpr int kFormatVersion = 1;

// Parses and fully validates a scenario document. Errors carry the JSON
// pointer of the offending value, or line and column for syntax errors.
Scenario ParseScenario(std::string_view document);

// Canonical JSON: sorted keys, two-space indent, trailing newline.
std::string SerializeScenario(const Scenario& scenario);

// Micro game in the scenario tree schema. When the document has no
// "outcomes" list, `default_outcomes` is used.
GameTree ParseTree(std::string_view document, const std::string& node_id,
                   const std::vector<std::string>& default_outcomes = {});
std::string SerializeTree(const GameTree& tree);

// Change documents:
//   {"kind": "replace_tree", "node": n, "tree": {...}}
//   {"kind": "add_nodes", "template": n, "count": k}
//   {"kind": "remove_edge", "edge": [from, to]}
// plus optional "description". Tree outcomes default to the node's edges
// in `base`.
ScenarioChange ParseChange(std::string_view document, const Scenario& base);
std::string SerializeChange(const ScenarioChange& change);

// The six-node enterprise network: web server foothold, application server,
// two user devices, critical asset and the absorbing "operation down" node.
Scenario BuiltinCaseStudy();

// Hardened application server: querying the database no longer yields
// anything that reaches the critical asset.
ScenarioChange AppHardeningChange();

// The case study with `n_users` user devices (n_users >= 2), the extra ones
// cloned from user2.
Scenario ScalingScenario(int n_users);

// Two nodes: "a" (the foothold) and the absorbing "b" worth `reward`. The
// attacker at "a" first probes, then chooses to exploit (move to "b") or
// retreat. No defender.
Scenario TwoNodeChain(double c_a, double m_a = -15.0, double gamma = 0.9,
                      double reward = 10.0);

enum class ReportFormat { kTabular, kStructured };

ReportFormat ParseReportFormat(std::string_view name);

// Numbers at 6 significant digits; probabilities rounded to 1e-6 first.
std::string FormatNumber(double x);
std::string FormatProbability(double p);

// Named report documents. Tabular: value_trace.csv (one row per iteration),
// strategy.csv (rows and columns in node order) and risk.csv. Structured:
// playbook.json with plans, values, risk and the trace.
std::vector<std::pair<std::string, std::string>> ExportReport(
    const Playbook& playbook, const Scenario& scenario, ReportFormat format);

std::string StrategyMatrixCsv(const GlobalStrategy& strategy,
                              const Network& network);
std::string DiffJson(const PlaybookDiff& diff);

}  // namespace metapen

#endif  // METAPEN_SCENARIO_IO_H_
