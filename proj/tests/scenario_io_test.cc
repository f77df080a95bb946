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

#include <functional>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "metapen/scenario_io.h"

namespace metapen {
namespace {

using nlohmann::json;

std::string Mutate(const std::function<void(json&)>& edit) {
  json doc = json::parse(SerializeScenario(BuiltinCaseStudy()));
  edit(doc);
  return doc.dump();
}

std::vector<std::vector<std::string>> ReadCsv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream cl(line);
    std::string cell;
    while (std::getline(cl, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

const std::string& Doc(const std::vector<std::pair<std::string, std::string>>& docs,
                       const std::string& name) {
  for (const auto& [n, text] : docs) {
    if (n == name) return text;
  }
  FAIL("no report named " << name);
  static const std::string empty;
  return empty;
}

TEST_CASE("bundled case study") {
  const Scenario s = BuiltinCaseStudy();
  REQUIRE(s.network.nodes.size() == 6);
  std::vector<std::string> ids;
  for (const auto& n : s.network.nodes) ids.push_back(n.id);
  CHECK(ids == std::vector<std::string>{"web", "app", "user1", "user2", "asset", "opdown"});
  CHECK(s.network.node("asset").importance == 30.0);
  CHECK(s.network.node("opdown").importance == 100.0);
  CHECK(s.network.node("opdown").terminal);
  CHECK(s.network.initial == "web");
  CHECK(s.params.c_a == 0.8);
  CHECK(s.params.m_a == -15.0);
  CHECK(s.params.gamma == 0.9);
  CHECK(FixedDefense(s, "web").dists.at("d_access") == std::vector<double>{0.7, 0.3});
}

TEST_CASE("round trips") {
  const Scenario s = BuiltinCaseStudy();
  const std::string text = SerializeScenario(s);
  CHECK(ParseScenario(text) == s);
  CHECK(SerializeScenario(ParseScenario(text)) == text);

  const Scenario changed = ApplyChange(s, AppHardeningChange());
  CHECK(ParseScenario(SerializeScenario(changed)) == changed);

  const ScenarioChange change = AppHardeningChange();
  const ScenarioChange back = ParseChange(SerializeChange(change), s);
  CHECK(back.kind == change.kind);
  CHECK(back.node == change.node);
  CHECK(*back.tree == *change.tree);
  CHECK(SerializeChange(back) == SerializeChange(change));
}

TEST_CASE("parse errors carry locations") {
  CHECK_THROWS_WITH_AS(
      ParseScenario(Mutate([](json& d) { d["trees"].erase("user1"); })),
      doctest::Contains("missing tree for node 'user1'"), InputError);
  CHECK_THROWS_WITH_AS(
      ParseScenario(Mutate([](json& d) {
        d["trees"]["user1"]["vertices"] = json::object(
            {{"only", {{"outcome", "asset"}}}});
        d["trees"]["user1"]["root"] = "only";
        d["trees"]["user1"]["knowledge_sets"] = json::array();
        d["trees"]["user1"].erase("outcomes");
      })),
      doctest::Contains("asset"), InputError);
  CHECK_THROWS_WITH_AS(
      ParseScenario(Mutate([](json& d) { d["params"]["gamma"] = "high"; })),
      doctest::Contains("/params/gamma"), InputError);
  CHECK_THROWS_WITH_AS(
      ParseScenario(Mutate([](json& d) { d["format_version"] = 99; })),
      doctest::Contains("/format_version"), InputError);
  CHECK_THROWS_WITH_AS(ParseScenario("{\n  \"name\": \n"),
                       doctest::Contains("line"), InputError);
  CHECK_THROWS_WITH_AS(
      ParseScenario(Mutate([](json& d) { d["surprise"] = 1; })),
      doctest::Contains("unknown key"), InputError);
}

TEST_CASE("change documents") {
  const Scenario s = BuiltinCaseStudy();
  const auto add = ParseChange(R"({"kind": "add_nodes", "template": "user2", "count": 2})", s);
  CHECK(add.kind == ScenarioChange::Kind::kAddNodes);
  CHECK(add.count == 2);
  const auto cut = ParseChange(R"({"kind": "remove_edge", "edge": ["web", "app"]})", s);
  CHECK(cut.edge == Edge{"web", "app"});
  CHECK_THROWS_AS(ParseChange(R"({"kind": "remove_edge", "edge": ["web", "opdown"]})", s),
                  InputError);
  CHECK_THROWS_AS(ParseChange(R"({"kind": "add_nodes", "template": "ghost", "count": 1})", s),
                  InputError);
  CHECK_THROWS_AS(ParseChange(R"({"kind": "explode"})", s), InputError);
}

TEST_CASE("reports") {
  const Scenario s = BuiltinCaseStudy();
  const Playbook book = RunMeta(s, Scheme::kRed);
  const auto tabular = ExportReport(book, s, ReportFormat::kTabular);

  const auto strategy = ReadCsv(Doc(tabular, "strategy.csv"));
  REQUIRE(strategy.size() == 7);
  for (std::size_t r = 1; r < strategy.size(); ++r) {
    double total = 0.0;
    for (std::size_t c = 1; c < strategy[r].size(); ++c) total += std::stod(strategy[r][c]);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
  const auto trace = ReadCsv(Doc(tabular, "value_trace.csv"));
  CHECK(static_cast<int>(trace.size()) - 1 == book.iterations);
  const auto risk = ReadCsv(Doc(tabular, "risk.csv"));
  CHECK(risk.size() == 7);

  const auto structured = ExportReport(book, s, ReportFormat::kStructured);
  const json j = json::parse(Doc(structured, "playbook.json"));
  CHECK(j["scheme"] == "red");
  CHECK(j["converged"] == true);
  CHECK(j["trace"].size() == static_cast<std::size_t>(book.iterations));
  CHECK(j["trace"][0]["metric"].is_null());

  // Post-change matrix: nothing moves into the app server from elsewhere.
  const AdaptResult r = Adapt(s, book, AppHardeningChange(), Scheme::kRed);
  const auto after = ReadCsv(StrategyMatrixCsv(r.playbook.strategy, r.scenario.network));
  std::size_t app_col = 0;
  for (std::size_t c = 0; c < after[0].size(); ++c) if (after[0][c] == "app") app_col = c;
  REQUIRE(app_col > 0);
  for (std::size_t row = 1; row < after.size(); ++row) {
    if (after[row][0] != "app") CHECK(std::stod(after[row][app_col]) == 0.0);
  }
}

TEST_CASE("number formatting") {
  CHECK(FormatNumber(1.0) == "1");
  CHECK(FormatNumber(-0.0) == "0");
  CHECK(FormatNumber(123456789.0) == "1.23457e+08");
  CHECK(FormatProbability(0.3000000004) == "0.3");
  CHECK(FormatProbability(1e-8) == "0");
  CHECK_THROWS_AS(ParseReportFormat("xml"), InputError);
  CHECK(ParseReportFormat("csv") == ReportFormat::kTabular);
  CHECK(ParseReportFormat("json") == ReportFormat::kStructured);
}

}  // namespace
}  // namespace metapen
