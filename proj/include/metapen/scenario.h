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

#ifndef METAPEN_SCENARIO_H_
#define METAPEN_SCENARIO_H_

#include <map>
#include <string>

#include "metapen/game_tree.h"
#include "metapen/macro_process.h"
#include "metapen/plans.h"

namespace metapen {

// A network, one micro tactic game per non-terminal node, and the macro
// parameters: everything a meta-game run needs.
struct Scenario {
  std::string name;
  std::string description;
  Network network;
  MspParams params;
  std::map<std::string, GameTree> trees;
  // Fixed defender plans for the red scheme. Nodes whose tree has no
  // defender knowledge sets need no entry.
  std::map<std::string, BehavioralPlan> fixed_defense;
  double v_max = 100.0;

  bool operator==(const Scenario&) const = default;
};

// Cross-checks trees against the network. Throws InputError naming the first
// offending node.
void ValidateScenario(const Scenario& scenario);

// The fixed defender plan for `node`, or the empty plan when the node's tree
// has no defender decisions. Throws InputError if a needed plan is missing.
BehavioralPlan FixedDefense(const Scenario& scenario, const std::string& node);

}  // namespace metapen

#endif  // METAPEN_SCENARIO_H_
