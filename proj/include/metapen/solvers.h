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

#ifndef METAPEN_SOLVERS_H_
#define METAPEN_SOLVERS_H_

#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "metapen/game_tree.h"
#include "metapen/plans.h"

namespace metapen {

enum class Scheme { kRed, kPurple, kNash };

std::string_view SchemeName(Scheme scheme);
Scheme ParseScheme(std::string_view name);

enum class ZeroSumMethod { kSimplex, kFictitiousPlay };

struct SolverOptions {
  ZeroSumMethod method = ZeroSumMethod::kSimplex;
  double tolerance = 1e-6;
  // Fictitious-play rounds; simplex pivots are capped separately.
  int max_iterations = 200'000;
  std::size_t plan_cap = kDefaultPlanCap;
};

struct SolveDiagnostics {
  int iterations = 0;
  double duality_gap = 0.0;
  // Largest gain any player gets from a unilateral pure deviation.
  double max_deviation_gain = 0.0;
};

struct SolveResult {
  BehavioralPlan attacker_plan{Player::kAttacker, {}};
  BehavioralPlan defender_plan{Player::kDefender, {}};
  double attacker_value = 0.0;
  Scheme scheme = Scheme::kRed;
  SolveDiagnostics diagnostics;
};

// Attacker expected utility of every (attacker pure plan, defender pure plan)
// pair, chance folded in.
struct PayoffMatrix {
  std::vector<PurePlan> rows;
  std::vector<PurePlan> cols;
  Eigen::MatrixXd entries;
};

PayoffMatrix BuildPayoffMatrix(const GameTree& tree,
                               const OutcomeUtilities& utilities,
                               std::size_t plan_cap = kDefaultPlanCap);

// Maximin mixes of a zero-sum matrix game where the row player maximizes.
struct ZeroSumSolution {
  std::vector<double> row_mix;
  std::vector<double> col_mix;
  double value = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
};

ZeroSumSolution SolveZeroSum(const Eigen::MatrixXd& matrix,
                             const SolverOptions& options = {});

// Red teaming: pure attacker best response to a fixed defender plan. Ties go
// to the lexicographically first plan.
SolveResult BestResponse(const GameTree& tree, const BehavioralPlan& defender,
                         const OutcomeUtilities& utilities,
                         const SolverOptions& options = {});

// Purple teaming: the defender commits to its maximin plan and the attacker
// best-responds. Zero-sum utilities only.
SolveResult PurpleTeaming(const GameTree& tree,
                          const OutcomeUtilities& utilities,
                          const SolverOptions& options = {});

// Equilibrium profile of the zero-sum micro game.
SolveResult NashEquilibrium(const GameTree& tree,
                            const OutcomeUtilities& utilities,
                            const SolverOptions& options = {});

// Pure subgame-perfect equilibrium of a perfect-information tree.
SolveResult BackwardInduction(const GameTree& tree,
                              const OutcomeUtilities& utilities);

// Throws InputError unless u_d(z) = -u_a(z) for every outcome.
void RequireZeroSum(const GameTree& tree, const OutcomeUtilities& utilities);

}  // namespace metapen

#endif  // METAPEN_SOLVERS_H_
