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

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "metapen/meta_engine.h"
#include "metapen/scenario_io.h"
#include "oracles.h"

namespace metapen {
namespace {

NodeUtilities Zeros(const Scenario& s) {
  NodeUtilities out;
  for (const auto& [node, tree] : s.trees) {
    for (const auto& z : tree.outcomes()) out[node][z] = {0.0, 0.0};
  }
  return out;
}

Scenario LoneNode() {
  Scenario s;
  s.name = "lone";
  s.network.nodes = {{"A", 0.0, false}};
  s.network.edges = {{"A", "A"}};
  s.network.initial = "A";
  s.params = {0.8, -15.0, 0.9};
  s.trees.emplace("A", testing::TreeBuilder("A").Leaf("stay", "A").Build());
  return s;
}

TEST_CASE("micro stage memoizes identical games") {
  MicroStageStats small, large;
  const Scenario s2 = ScalingScenario(2);
  const Scenario s16 = ScalingScenario(16);
  SolveMicroStage(s2, Scheme::kRed, Zeros(s2), {}, &small);
  const auto results = SolveMicroStage(s16, Scheme::kRed, Zeros(s16), {}, &large);
  CHECK(large.solver_invocations == small.solver_invocations);
  CHECK(large.reused == small.reused + 14);
  for (int i = 1; i <= 14; ++i) {
    const std::string clone = "user2_" + std::to_string(i);
    CHECK(results.at(clone).attacker_plan == results.at("user2").attacker_plan);
  }
}

TEST_CASE("micro stage names the node missing a fixed defense") {
  Scenario s = BuiltinCaseStudy();
  s.fixed_defense.erase("app");
  CHECK_THROWS_WITH_AS(SolveMicroStage(s, Scheme::kRed, Zeros(s)),
                       doctest::Contains("node 'app'"), InputError);
}

TEST_CASE("micro stage results do not depend on the thread count") {
  const Scenario s = ScalingScenario(6);
  MetaOptions one, many;
  one.micro.threads = 1;
  many.micro.threads = 4;
  for (Scheme scheme : {Scheme::kRed, Scheme::kPurple, Scheme::kNash}) {
    const Playbook a = RunMeta(s, scheme, one);
    const Playbook b = RunMeta(s, scheme, many);
    CHECK(a.values == b.values);
    CHECK(a.strategy == b.strategy);
    CHECK(a.profiles == b.profiles);
  }
}

TEST_CASE("lone self-looping node converges to the stay value") {
  for (Scheme scheme : {Scheme::kRed, Scheme::kPurple, Scheme::kNash}) {
    const Playbook book = RunMeta(LoneNode(), scheme);
    CHECK(book.converged);
    CHECK(book.values.at("A") == doctest::Approx(-150.0).epsilon(1e-12));
    CHECK(book.risk.at("A") == 0.0);
  }
}

TEST_CASE("case study values and risks") {
  Scenario s = BuiltinCaseStudy();
  SUBCASE("red at low capability yields no positive value") {
    s.params.c_a = 0.2;
    const Playbook book = RunMeta(s, Scheme::kRed);
    REQUIRE(book.converged);
    for (const auto& [node, v] : book.values) CHECK(v <= 0.0);
  }
  SUBCASE("purple keeps every value non-positive") {
    for (double c : {0.2, 0.5, 0.8}) {
      s.params.c_a = c;
      const Playbook book = RunMeta(s, Scheme::kPurple);
      REQUIRE(book.converged);
      for (const auto& [node, v] : book.values) CHECK(v <= 0.0);
      CHECK(book.risk.at("web") == 0.0);
    }
  }
  SUBCASE("purple profiles replay to the final strategy") {
    const Playbook book = RunMeta(s, Scheme::kPurple);
    std::map<std::string, NodeProfile> profiles;
    for (const auto& [node, p] : book.profiles) {
      profiles.emplace(node, NodeProfile{s.trees.at(node), p});
    }
    CHECK(StrategyFromProfiles(s.network, profiles) == book.strategy);
  }
  SUBCASE("the trace ends below epsilon") {
    const Playbook book = RunMeta(s, Scheme::kNash);
    REQUIRE(book.converged);
    CHECK(static_cast<int>(book.trace.size()) == book.iterations);
    CHECK(std::isinf(book.trace.front().metric));
    CHECK(book.trace.back().metric < 1e-6);
  }
}

TEST_CASE("convergence metric") {
  Playbook a;
  a.values = {{"x", 1.0}, {"y", 2.0}};
  a.strategy.rows = {{"x", {{"x", 0.7}, {"y", 0.3}}}, {"y", {{"y", 1.0}}}};
  CHECK(ConvergenceMetric(a, a) == 0.0);
  Playbook b = a;
  b.values["x"] = 1.5;
  CHECK(ConvergenceMetric(a, b) == doctest::Approx(0.5));
  Playbook c = a;
  c.strategy.rows["x"] = {{"x", 1.0}, {"y", 0.0}};
  CHECK(ConvergenceMetric(a, c) == doctest::Approx(0.3));
  Playbook d = a;
  d.values.erase("y");
  CHECK_THROWS_AS(ConvergenceMetric(a, d), InputError);
}

TEST_CASE("risk score") {
  const ValueFunction v{{"a", 50.0}, {"b", -3.0}, {"c", 250.0}};
  CHECK(RiskScore(v, "a", 100.0) == 0.5);
  CHECK(RiskScore(v, "b", 100.0) == 0.0);
  CHECK(RiskScore(v, "c", 100.0) == 1.0);
  CHECK_THROWS_AS(RiskScore(v, "a", 0.0), InputError);
  CHECK_THROWS_AS(RiskScore(v, "zz", 100.0), InputError);
}

TEST_CASE("adapt") {
  const Scenario s = BuiltinCaseStudy();
  const Playbook before = RunMeta(s, Scheme::kRed);
  REQUIRE(before.converged);

  SUBCASE("hardened app server is no longer a waypoint") {
    const AdaptResult r = Adapt(s, before, AppHardeningChange(), Scheme::kRed);
    REQUIRE(r.playbook.converged);
    for (const auto& n : r.scenario.network.nodes) {
      if (n.id != "app") CHECK(r.playbook.strategy.prob(n.id, "app") == 0.0);
    }
    CHECK(r.playbook.strategy.prob("app", "asset") == 0.0);
    CHECK(r.diff.strategy_changed());
    CHECK(std::find(r.diff.changed_profiles.begin(), r.diff.changed_profiles.end(),
                    "app") != r.diff.changed_profiles.end());
  }
  SUBCASE("replacing a tree with itself is a no-op") {
    ScenarioChange change;
    change.kind = ScenarioChange::Kind::kReplaceTree;
    change.node = "user1";
    change.tree = s.trees.at("user1");
    const AdaptResult r = Adapt(s, before, change, Scheme::kRed);
    CHECK(r.diff.empty());
    CHECK(r.playbook.iterations == 0);
    CHECK(r.playbook.values == before.values);
  }
  SUBCASE("adding user devices keeps their profiles identical") {
    ScenarioChange change;
    change.kind = ScenarioChange::Kind::kAddNodes;
    change.node = "user2";
    change.count = 3;
    const AdaptResult r = Adapt(s, before, change, Scheme::kRed);
    REQUIRE(r.playbook.converged);
    CHECK(r.diff.added_nodes ==
          std::vector<std::string>{"user2_1", "user2_2", "user2_3"});
    for (int i = 1; i <= 3; ++i) {
      CHECK(r.playbook.profiles.at("user2_" + std::to_string(i)) ==
            r.playbook.profiles.at("user2"));
    }
    // The peer group splits the incoming lateral move evenly.
    CHECK(r.playbook.strategy.prob("user1", "user2") ==
          doctest::Approx(r.playbook.strategy.prob("user1", "user2_1")));
  }
  SUBCASE("removing an edge") {
    ScenarioChange change;
    change.kind = ScenarioChange::Kind::kRemoveEdge;
    change.edge = {"web", "app"};
    const Scenario after = ApplyChange(s, change);
    CHECK_FALSE(after.network.has_edge("web", "app"));
    const AdaptResult r = Adapt(s, before, change, Scheme::kRed);
    CHECK(r.playbook.strategy.prob("web", "app") == 0.0);
    change.edge = {"web", "web"};
    CHECK_THROWS_AS(ApplyChange(s, change), InputError);
  }
  SUBCASE("unknown nodes are rejected") {
    ScenarioChange change;
    change.kind = ScenarioChange::Kind::kAddNodes;
    change.node = "ghost";
    change.count = 1;
    CHECK_THROWS_AS(ApplyChange(s, change), InputError);
  }
}

}  // namespace
}  // namespace metapen
