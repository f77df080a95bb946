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

#include <random>
#include <set>

#include "doctest.h"
#include "metapen/game_tree.h"
#include "metapen/scenario_io.h"
#include "oracles.h"

namespace metapen {
namespace {

using testing::TreeBuilder;
constexpr Player kA = Player::kAttacker;
constexpr Player kD = Player::kDefender;

bool HasViolation(const ValidationReport& r, const std::string& needle) {
  for (const auto& v : r.violations) {
    if (v.find(needle) != std::string::npos) return true;
  }
  return false;
}

TEST_CASE("single leaf root is a valid tree") {
  const GameTree tree = TreeBuilder().Leaf("root", "self").Build();
  CHECK(tree.num_vertices() == 1);
  CHECK(tree.is_leaf(tree.root()));
  CHECK(tree.outcomes() == std::vector<std::string>{"self"});
  CHECK(CountPurePlans(tree, kA) == 1);
}

TEST_CASE("chance distribution must sum to one") {
  const TreeData data = TreeBuilder()
                            .Chance("c", {{"x", "l1"}, {"y", "l2"}}, {0.6, 0.5})
                            .Leaf("l1", "z")
                            .Leaf("l2", "z")
                            .data();
  const auto report = ValidateTree(data);
  CHECK_FALSE(report.ok());
  CHECK(HasViolation(report, "chance distribution sums to 1.1"));
  CHECK_THROWS_AS(GameTree::Build(data), InputError);
}

TEST_CASE("knowledge set members must share actions") {
  const TreeData data = TreeBuilder()
                            .Chance("c", {{"x", "p"}, {"y", "q"}}, {0.5, 0.5})
                            .Decision("p", kA, {{"L", "l1"}, {"R", "l2"}}, "k")
                            .Decision("q", kA, {{"L", "l3"}}, "k")
                            .Leaf("l1", "z")
                            .Leaf("l2", "z")
                            .Leaf("l3", "z")
                            .data();
  CHECK(HasViolation(ValidateTree(data), "action mismatch in knowledge set"));
}

TEST_CASE("structural violations are reported") {
  SUBCASE("leaf without outcome") {
    TreeData d = TreeBuilder().Leaf("r", "z").data();
    d.vertices[0].outcome.reset();
    CHECK(HasViolation(ValidateTree(d), "has no outcome"));
  }
  SUBCASE("unknown child") {
    TreeData d = TreeBuilder().Decision("r", kA, {{"a", "ghost"}}).data();
    CHECK(HasViolation(ValidateTree(d), "unknown vertex 'ghost'"));
  }
  SUBCASE("vertex missing from every knowledge set") {
    TreeData d = TreeBuilder().Decision("r", kA, {{"a", "l"}}).Leaf("l", "z").data();
    d.knowledge_sets.clear();
    CHECK(HasViolation(ValidateTree(d), "is in 0 knowledge sets"));
  }
  SUBCASE("leaf outcome outside the declared set") {
    TreeData d = TreeBuilder().Leaf("r", "z").data({"y"});
    CHECK(HasViolation(ValidateTree(d), "not in the outcome set"));
  }
  SUBCASE("shared child") {
    TreeData d = TreeBuilder()
                     .Decision("r", kA, {{"a", "l"}, {"b", "l"}})
                     .Leaf("l", "z")
                     .data();
    CHECK(HasViolation(ValidateTree(d), "has 2 parents"));
  }
}

TEST_CASE("perfect recall") {
  SUBCASE("perfect information is trivially recalled") {
    const GameTree tree = TreeBuilder()
                              .Decision("r", kA, {{"L", "d"}, {"R", "l3"}})
                              .Decision("d", kD, {{"x", "l1"}, {"y", "l2"}})
                              .Leaf("l1", "z1")
                              .Leaf("l2", "z2")
                              .Leaf("l3", "z1")
                              .Build();
    CHECK(CheckPerfectRecall(tree, kA));
    CHECK(CheckPerfectRecall(tree, kD));
  }
  SUBCASE("forgetting an own earlier move breaks recall") {
    const GameTree tree = TreeBuilder()
                              .Decision("r", kA, {{"L", "p"}, {"R", "q"}})
                              .Decision("p", kA, {{"x", "l1"}, {"y", "l2"}}, "k")
                              .Decision("q", kA, {{"x", "l3"}, {"y", "l4"}}, "k")
                              .Leaf("l1", "z")
                              .Leaf("l2", "z")
                              .Leaf("l3", "z")
                              .Leaf("l4", "z")
                              .Build();
    CHECK_FALSE(CheckPerfectRecall(tree, kA));
    CHECK(CheckPerfectRecall(tree, kD));
  }
  SUBCASE("hiding the opponent's move keeps recall") {
    const GameTree tree = TreeBuilder()
                              .Decision("r", kD, {{"L", "p"}, {"R", "q"}})
                              .Decision("p", kA, {{"x", "l1"}, {"y", "l2"}}, "k")
                              .Decision("q", kA, {{"x", "l3"}, {"y", "l4"}}, "k")
                              .Leaf("l1", "z")
                              .Leaf("l2", "z")
                              .Leaf("l3", "z")
                              .Leaf("l4", "z")
                              .Build();
    CHECK(CheckPerfectRecall(tree, kA));
  }
  SUBCASE("case-study trees") {
    const Scenario s = BuiltinCaseStudy();
    for (const auto& [node, tree] : s.trees) {
      CAPTURE(node);
      CHECK(CheckPerfectRecall(tree, kA));
      CHECK(CheckPerfectRecall(tree, kD));
    }
  }
  SUBCASE("random generated trees") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
      const GameTree tree = GameTree::Build(testing::RandomTree(rng));
      CHECK(CheckPerfectRecall(tree, kA));
      CHECK(CheckPerfectRecall(tree, kD));
    }
  }
}

TEST_CASE("pure plan counts") {
  SUBCASE("product of action counts") {
    const GameTree tree = TreeBuilder()
                              .Decision("r", kA, {{"a", "s"}, {"b", "l3"}})
                              .Decision("s", kA, {{"x", "l1"}, {"y", "l2"}, {"w", "l4"}})
                              .Leaf("l1", "z")
                              .Leaf("l2", "z")
                              .Leaf("l3", "z")
                              .Leaf("l4", "z")
                              .Build();
    CHECK(CountPurePlans(tree, kA) == 6);
    const auto plans = EnumeratePurePlans(tree, kA);
    CHECK(plans.size() == 6);
    CHECK(std::set<PurePlan>(plans.begin(), plans.end()).size() == 6);
  }
  SUBCASE("no decision vertices gives the empty plan") {
    const GameTree tree = TreeBuilder()
                              .Chance("c", {{"x", "l1"}, {"y", "l2"}}, {0.5, 0.5})
                              .Leaf("l1", "z")
                              .Leaf("l2", "z")
                              .Build();
    CHECK(CountPurePlans(tree, kA) == 1);
    const auto plans = EnumeratePurePlans(tree, kA);
    REQUIRE(plans.size() == 1);
    CHECK(plans[0].choices.empty());
  }
  SUBCASE("case study matches the recursive count") {
    const Scenario s = BuiltinCaseStudy();
    for (const auto& [node, tree] : s.trees) {
      CAPTURE(node);
      CHECK(CountPurePlans(tree, kA) ==
            testing::RecursivePlanCount(tree.data(), kA));
      CHECK(CountPurePlans(tree, kD) ==
            testing::RecursivePlanCount(tree.data(), kD));
    }
  }
  SUBCASE("random trees match the recursive count") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
      const TreeData data = testing::RandomTree(rng);
      const GameTree tree = GameTree::Build(data);
      for (Player p : {kA, kD}) {
        CHECK(CountPurePlans(tree, p) == testing::RecursivePlanCount(data, p));
      }
    }
  }
  SUBCASE("cap raises a capacity error with the count") {
    TreeBuilder b;
    std::vector<std::pair<std::string, std::string>> moves;
    b.Chance("c", {{"0", "d0"}, {"1", "d1"}, {"2", "d2"}}, {0.2, 0.3, 0.5});
    for (int i = 0; i < 3; ++i) {
      const std::string d = "d" + std::to_string(i);
      b.Decision(d, kA, {{"x", d + "x"}, {"y", d + "y"}});
      b.Leaf(d + "x", "z").Leaf(d + "y", "z");
    }
    const GameTree tree = b.Build();
    try {
      EnumeratePurePlans(tree, kA, 4);
      FAIL("expected CapacityError");
    } catch (const CapacityError& e) {
      CHECK(e.count() == 8);
    }
  }
}

TEST_CASE("shape key ignores outcome labels") {
  auto make = [](const std::string& z1, const std::string& z2) {
    return TreeBuilder()
        .Decision("r", kA, {{"L", "l1"}, {"R", "l2"}})
        .Leaf("l1", z1)
        .Leaf("l2", z2)
        .Build();
  };
  CHECK(make("a", "b").shape_key() == make("c", "d").shape_key());
  CHECK_FALSE(make("a", "b") == make("c", "d"));
  CHECK(make("a", "b") == make("a", "b"));
}

}  // namespace
}  // namespace metapen
