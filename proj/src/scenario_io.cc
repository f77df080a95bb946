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

#include "metapen/scenario_io.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <set>

#include "json.hpp"

namespace metapen {
namespace {

using json = nlohmann::json;

[[noreturn]] void Fail(const std::string& path, const std::string& what) {
  throw InputError("at " + (path.empty() ? std::string("/") : path) + ": " + what);
}

json ParseJson(std::string_view document) {
  try {
    return json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw InputError(std::string("syntax error: ") + e.what());
  }
}

void CheckKeys(const json& obj, const std::string& path,
               std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      Fail(path + "/" + key, "unknown key");
    }
  }
}

const json& Object(const json& j, const std::string& path) {
  if (!j.is_object()) Fail(path, "expected an object");
  return j;
}

const json& Array(const json& j, const std::string& path) {
  if (!j.is_array()) Fail(path, "expected an array");
  return j;
}

const json& Field(const json& obj, std::string_view key,
                  const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) Fail(path, "missing key '" + std::string(key) + "'");
  return *it;
}

std::string String(const json& j, const std::string& path) {
  if (!j.is_string()) Fail(path, "expected a string");
  return j.get<std::string>();
}

double Number(const json& j, const std::string& path) {
  if (!j.is_number()) Fail(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) Fail(path, "expected a finite number");
  return x;
}

bool Bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) Fail(path, "expected true or false");
  return j.get<bool>();
}

std::vector<std::string> Strings(const json& j, const std::string& path) {
  Array(j, path);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(String(j[i], path + "/" + std::to_string(i)));
  }
  return out;
}

std::vector<double> Numbers(const json& j, const std::string& path) {
  Array(j, path);
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(Number(j[i], path + "/" + std::to_string(i)));
  }
  return out;
}

// JSON pointer escaping for keys that contain '/' or '~'.
std::string Escape(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

GameTree TreeFromJson(const json& j, const std::string& path,
                      const std::string& node_id,
                      const std::vector<std::string>& default_outcomes) {
  Object(j, path);
  CheckKeys(j, path, {"root", "vertices", "knowledge_sets", "outcomes"});
  TreeData data;
  data.node_id = node_id;
  data.root = String(Field(j, "root", path), path + "/root");
  const std::string vpath = path + "/vertices";
  const json& vertices = Object(Field(j, "vertices", path), vpath);
  for (const auto& [id, vj] : vertices.items()) {
    const std::string p = vpath + "/" + Escape(id);
    Object(vj, p);
    CheckKeys(vj, p, {"owner", "actions", "children", "chance_dist", "outcome"});
    Vertex v;
    v.id = id;
    if (vj.contains("outcome")) {
      v.outcome = String(vj["outcome"], p + "/outcome");
    }
    if (vj.contains("owner")) {
      try {
        v.owner = ParsePlayer(String(vj["owner"], p + "/owner"));
      } catch (const InputError& e) {
        Fail(p + "/owner", e.what());
      }
    } else if (!v.outcome) {
      Fail(p, "decision vertex without an owner");
    }
    if (vj.contains("actions")) v.actions = Strings(vj["actions"], p + "/actions");
    if (vj.contains("children")) {
      const json& children = Object(vj["children"], p + "/children");
      for (const auto& [action, child] : children.items()) {
        v.children.emplace(action,
                           String(child, p + "/children/" + Escape(action)));
      }
    }
    if (vj.contains("chance_dist")) {
      v.chance_dist = Numbers(vj["chance_dist"], p + "/chance_dist");
    }
    data.vertices.push_back(std::move(v));
  }
  if (j.contains("knowledge_sets")) {
    const std::string kpath = path + "/knowledge_sets";
    const json& sets = Array(j["knowledge_sets"], kpath);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const std::string p = kpath + "/" + std::to_string(i);
      Object(sets[i], p);
      CheckKeys(sets[i], p, {"id", "player", "members"});
      KnowledgeSet ks;
      ks.id = String(Field(sets[i], "id", p), p + "/id");
      try {
        ks.player = ParsePlayer(String(Field(sets[i], "player", p), p + "/player"));
      } catch (const InputError& e) {
        Fail(p + "/player", e.what());
      }
      ks.members = Strings(Field(sets[i], "members", p), p + "/members");
      data.knowledge_sets.push_back(std::move(ks));
    }
  }
  data.outcomes = j.contains("outcomes")
                      ? Strings(j["outcomes"], path + "/outcomes")
                      : default_outcomes;
  try {
    return GameTree::Build(std::move(data));
  } catch (const InputError& e) {
    Fail(path, e.what());
  }
}

json TreeToJson(const GameTree& tree) {
  const TreeData& data = tree.data();
  json j;
  j["root"] = data.root;
  json vertices = json::object();
  for (const Vertex& v : data.vertices) {
    json vj = json::object();
    if (v.actions.empty()) {
      vj["outcome"] = *v.outcome;
    } else {
      vj["owner"] = PlayerName(v.owner);
      vj["actions"] = v.actions;
      vj["children"] = v.children;
      if (v.owner == Player::kChance) vj["chance_dist"] = v.chance_dist;
    }
    vertices[v.id] = std::move(vj);
  }
  j["vertices"] = std::move(vertices);
  std::vector<KnowledgeSet> sets = data.knowledge_sets;
  std::sort(sets.begin(), sets.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  json ks = json::array();
  for (KnowledgeSet& s : sets) {
    std::sort(s.members.begin(), s.members.end());
    ks.push_back({{"id", s.id}, {"player", PlayerName(s.player)}, {"members", s.members}});
  }
  j["knowledge_sets"] = std::move(ks);
  j["outcomes"] = tree.outcomes();
  return j;
}

Network NetworkFromJson(const json& j, const std::string& path) {
  Object(j, path);
  CheckKeys(j, path, {"nodes", "edges", "initial"});
  Network net;
  const json& nodes = Array(Field(j, "nodes", path), path + "/nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string p = path + "/nodes/" + std::to_string(i);
    Object(nodes[i], p);
    CheckKeys(nodes[i], p, {"id", "importance", "terminal"});
    Network::Node n;
    n.id = String(Field(nodes[i], "id", p), p + "/id");
    n.importance = Number(Field(nodes[i], "importance", p), p + "/importance");
    if (nodes[i].contains("terminal")) {
      n.terminal = Bool(nodes[i]["terminal"], p + "/terminal");
    }
    net.nodes.push_back(std::move(n));
  }
  const json& edges = Array(Field(j, "edges", path), path + "/edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string p = path + "/edges/" + std::to_string(i);
    const auto pair = Strings(edges[i], p);
    if (pair.size() != 2) Fail(p, "an edge is a [from, to] pair");
    net.edges.emplace_back(pair[0], pair[1]);
  }
  net.initial = String(Field(j, "initial", path), path + "/initial");
  try {
    ValidateNetwork(net);
  } catch (const InputError& e) {
    Fail(path, e.what());
  }
  return net;
}

BehavioralPlan PlanFromJson(const json& j, const std::string& path,
                            Player player) {
  Object(j, path);
  BehavioralPlan plan{player, {}};
  for (const auto& [ks, dist] : j.items()) {
    plan.dists.emplace(ks, Numbers(dist, path + "/" + Escape(ks)));
  }
  return plan;
}

json PlanToJson(const BehavioralPlan& plan) {
  json j = json::object();
  for (const auto& [ks, dist] : plan.dists) j[ks] = dist;
  return j;
}

}  // namespace

GameTree ParseTree(std::string_view document, const std::string& node_id,
                   const std::vector<std::string>& default_outcomes) {
  return TreeFromJson(ParseJson(document), "", node_id, default_outcomes);
}

std::string SerializeTree(const GameTree& tree) {
  return TreeToJson(tree).dump(2) + "\n";
}

Scenario ParseScenario(std::string_view document) {
  const json j = ParseJson(document);
  Object(j, "");
  CheckKeys(j, "", {"format_version", "name", "description", "network", "params",
                    "v_max", "trees", "fixed_defense"});
  const json& version = Field(j, "format_version", "");
  if (!version.is_number_integer() || version.get<int>() != kFormatVersion) {
    Fail("/format_version", "unsupported format version (expected " +
                                std::to_string(kFormatVersion) + ")");
  }
  Scenario s;
  if (j.contains("name")) s.name = String(j["name"], "/name");
  if (j.contains("description")) s.description = String(j["description"], "/description");
  s.network = NetworkFromJson(Field(j, "network", ""), "/network");

  const json& params = Object(Field(j, "params", ""), "/params");
  CheckKeys(params, "/params", {"c_a", "m_a", "gamma"});
  s.params.c_a = Number(Field(params, "c_a", "/params"), "/params/c_a");
  s.params.m_a = Number(Field(params, "m_a", "/params"), "/params/m_a");
  s.params.gamma = Number(Field(params, "gamma", "/params"), "/params/gamma");
  try {
    ValidateParams(s.params);
  } catch (const InputError& e) {
    Fail("/params", e.what());
  }
  s.v_max = Number(Field(j, "v_max", ""), "/v_max");

  const json& trees = Object(Field(j, "trees", ""), "/trees");
  for (const auto& [node, tj] : trees.items()) {
    const std::string p = "/trees/" + Escape(node);
    if (s.network.index_of(node) < 0) Fail(p, "tree for unknown node '" + node + "'");
    s.trees.emplace(node, TreeFromJson(tj, p, node, s.network.successors(node)));
  }
  for (const auto& n : s.network.nodes) {
    if (!n.terminal && !s.trees.count(n.id)) {
      Fail("/trees", "missing tree for node '" + n.id + "'");
    }
  }
  if (j.contains("fixed_defense")) {
    const json& fd = Object(j["fixed_defense"], "/fixed_defense");
    for (const auto& [node, pj] : fd.items()) {
      s.fixed_defense.emplace(
          node, PlanFromJson(pj, "/fixed_defense/" + Escape(node), Player::kDefender));
    }
  }
  ValidateScenario(s);
  return s;
}

std::string SerializeScenario(const Scenario& s) {
  json j;
  j["format_version"] = kFormatVersion;
  j["name"] = s.name;
  if (!s.description.empty()) j["description"] = s.description;
  json nodes = json::array();
  for (const auto& n : s.network.nodes) {
    nodes.push_back({{"id", n.id}, {"importance", n.importance}, {"terminal", n.terminal}});
  }
  json ej = json::array();
  for (const auto& [a, b] : s.network.edges) ej.push_back({a, b});
  j["network"] = {{"nodes", nodes}, {"edges", ej}, {"initial", s.network.initial}};
  j["params"] = {{"c_a", s.params.c_a}, {"m_a", s.params.m_a}, {"gamma", s.params.gamma}};
  j["v_max"] = s.v_max;
  json trees = json::object();
  for (const auto& [node, tree] : s.trees) trees[node] = TreeToJson(tree);
  j["trees"] = std::move(trees);
  if (!s.fixed_defense.empty()) {
    json fd = json::object();
    for (const auto& [node, plan] : s.fixed_defense) fd[node] = PlanToJson(plan);
    j["fixed_defense"] = std::move(fd);
  }
  return j.dump(2) + "\n";
}

ScenarioChange ParseChange(std::string_view document, const Scenario& base) {
  const json j = ParseJson(document);
  Object(j, "");
  ScenarioChange change;
  const std::string kind = String(Field(j, "kind", ""), "/kind");
  if (j.contains("description")) {
    change.description = String(j["description"], "/description");
  }
  if (kind == "replace_tree") {
    CheckKeys(j, "", {"kind", "description", "node", "tree"});
    change.kind = ScenarioChange::Kind::kReplaceTree;
    change.node = String(Field(j, "node", ""), "/node");
    if (base.network.index_of(change.node) < 0) {
      Fail("/node", "unknown node '" + change.node + "'");
    }
    change.tree = TreeFromJson(Field(j, "tree", ""), "/tree", change.node,
                               base.network.successors(change.node));
  } else if (kind == "add_nodes") {
    CheckKeys(j, "", {"kind", "description", "template", "count"});
    change.kind = ScenarioChange::Kind::kAddNodes;
    change.node = String(Field(j, "template", ""), "/template");
    if (base.network.index_of(change.node) < 0) {
      Fail("/template", "unknown node '" + change.node + "'");
    }
    const json& count = Field(j, "count", "");
    if (!count.is_number_integer() || count.get<int>() < 1) {
      Fail("/count", "expected a positive integer");
    }
    change.count = count.get<int>();
  } else if (kind == "remove_edge") {
    CheckKeys(j, "", {"kind", "description", "edge"});
    change.kind = ScenarioChange::Kind::kRemoveEdge;
    const auto pair = Strings(Field(j, "edge", ""), "/edge");
    if (pair.size() != 2) Fail("/edge", "an edge is a [from, to] pair");
    change.edge = {pair[0], pair[1]};
    if (!base.network.has_edge(pair[0], pair[1])) {
      Fail("/edge", "edge (" + pair[0] + ", " + pair[1] + ") is not in the network");
    }
  } else {
    Fail("/kind", "unknown change kind '" + kind + "'");
  }
  return change;
}

std::string SerializeChange(const ScenarioChange& change) {
  json j;
  if (!change.description.empty()) j["description"] = change.description;
  switch (change.kind) {
    case ScenarioChange::Kind::kReplaceTree:
      j["kind"] = "replace_tree";
      j["node"] = change.node;
      j["tree"] = TreeToJson(*change.tree);
      break;
    case ScenarioChange::Kind::kAddNodes:
      j["kind"] = "add_nodes";
      j["template"] = change.node;
      j["count"] = change.count;
      break;
    case ScenarioChange::Kind::kRemoveEdge:
      j["kind"] = "remove_edge";
      j["edge"] = {change.edge.first, change.edge.second};
      break;
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Bundled case study.

namespace {

// Small builder so the trees below read top-down.
class TreeBuilder {
 public:
  explicit TreeBuilder(std::string node) { data_.node_id = std::move(node); }

  TreeBuilder& Decision(const std::string& id, Player owner,
                        std::vector<std::pair<std::string, std::string>> moves) {
    Vertex v;
    v.id = id;
    v.owner = owner;
    for (auto& [action, child] : moves) {
      v.actions.push_back(action);
      v.children.emplace(action, child);
    }
    if (data_.vertices.empty()) data_.root = id;
    data_.vertices.push_back(std::move(v));
    data_.knowledge_sets.push_back({id, owner, {id}});
    return *this;
  }

  TreeBuilder& Chance(const std::string& id,
                      std::vector<std::pair<std::string, std::string>> moves,
                      std::vector<double> dist) {
    Vertex v;
    v.id = id;
    v.owner = Player::kChance;
    for (auto& [action, child] : moves) {
      v.actions.push_back(action);
      v.children.emplace(action, child);
    }
    v.chance_dist = std::move(dist);
    data_.vertices.push_back(std::move(v));
    return *this;
  }

  TreeBuilder& Leaf(const std::string& id, const std::string& outcome) {
    Vertex v;
    v.id = id;
    v.outcome = outcome;
    data_.vertices.push_back(std::move(v));
    return *this;
  }

  GameTree Build(std::vector<std::string> outcomes) {
    data_.outcomes = std::move(outcomes);
    return GameTree::Build(data_);
  }

 private:
  TreeData data_;
};

constexpr Player kA = Player::kAttacker;
constexpr Player kD = Player::kDefender;

GameTree AppTree(bool hardened) {
  // Hardened: the records the attacker finds no longer open the asset.
  const std::string found = hardened ? "app" : "asset";
  return TreeBuilder("app")
      .Decision("a_access", kA, {{"query_database", "d_auth"}, {"abort", "aborted"}})
      .Decision("d_auth", kD,
                {{"strict_authorization", "blocked"},
                 {"standard_authorization", "records"}})
      .Chance("records", {{"found", "keys_found"}, {"missing", "keys_missing"}},
              {0.9, 0.1})
      .Leaf("keys_found", found)
      .Leaf("keys_missing", "app")
      .Leaf("blocked", "app")
      .Leaf("aborted", "app")
      .Build({"app", "asset"});
}

}  // namespace

Scenario BuiltinCaseStudy() {
  Scenario s;
  s.name = "case-study";
  s.description =
      "Enterprise network: web server foothold, application server, two user "
      "devices, critical asset and an absorbing operation-down node.";
  s.network.nodes = {{"web", 0.0, false},   {"app", 20.0, false},
                     {"user1", 5.0, false}, {"user2", 5.0, false},
                     {"asset", 30.0, false}, {"opdown", 100.0, true}};
  s.network.edges = {{"web", "web"},     {"web", "app"},     {"web", "user1"},
                     {"app", "app"},     {"app", "asset"},   {"user1", "user1"},
                     {"user1", "user2"}, {"user2", "user2"}, {"user2", "user1"},
                     {"user2", "asset"}, {"asset", "asset"}, {"asset", "opdown"},
                     {"opdown", "opdown"}};
  s.network.initial = "web";
  s.params = {0.8, -15.0, 0.9};
  s.v_max = 100.0;

  // Reconnaissance, a privilege-escalation request the defender grants or
  // denies, then credential outcomes.
  s.trees.emplace(
      "web",
      TreeBuilder("web")
          .Decision("a_recon", kA,
                    {{"discover_services", "a_escalate"}, {"abort", "recon_aborted"}})
          .Decision("a_escalate", kA,
                    {{"request_privilege_escalation", "d_access"},
                     {"harvest_user_credentials", "user_creds"}})
          .Decision("d_access", kD, {{"grant", "a_granted"}, {"deny", "denied"}})
          .Decision("a_granted", kA,
                    {{"dump_admin_credentials", "admin_creds"}, {"log_off", "logged_off"}})
          .Leaf("recon_aborted", "web")
          .Leaf("user_creds", "user1")
          .Leaf("denied", "user1")
          .Leaf("admin_creds", "app")
          .Leaf("logged_off", "web")
          .Build({"app", "user1", "web"}));
  s.trees.emplace("app", AppTree(false));
  s.trees.emplace(
      "user1",
      TreeBuilder("user1")
          .Decision("a_dump", kA, {{"credential_dumping", "dump"}, {"idle", "idle"}})
          .Chance("dump", {{"found", "peer_creds"}, {"none", "nothing"}}, {0.5, 0.5})
          .Leaf("peer_creds", "user2")
          .Leaf("nothing", "user1")
          .Leaf("idle", "user1")
          .Build({"user1", "user2"}));
  s.trees.emplace(
      "user2",
      TreeBuilder("user2")
          .Decision("a_dump", kA, {{"credential_dumping", "dump"}, {"idle", "idle"}})
          .Chance("dump", {{"lateral", "peer_creds"}, {"asset_key", "asset_creds"}},
                  {0.3, 0.7})
          .Leaf("peer_creds", "user1")
          .Leaf("asset_creds", "asset")
          .Leaf("idle", "user2")
          .Build({"asset", "user1", "user2"}));
  s.trees.emplace(
      "asset",
      TreeBuilder("asset")
          .Decision("a_cmd", kA, {{"issue_command", "d_exec"}, {"abort", "aborted"}})
          .Decision("d_exec", kD, {{"execute", "executed"}, {"block", "blocked"}})
          .Leaf("executed", "opdown")
          .Leaf("blocked", "asset")
          .Leaf("aborted", "asset")
          .Build({"asset", "opdown"}));

  s.fixed_defense["web"] = {kD, {{"d_access", {0.7, 0.3}}}};
  s.fixed_defense["app"] = {kD, {{"d_auth", {0.3, 0.7}}}};
  s.fixed_defense["asset"] = {kD, {{"d_exec", {0.6, 0.4}}}};
  ValidateScenario(s);
  return s;
}

ScenarioChange AppHardeningChange() {
  ScenarioChange change;
  change.kind = ScenarioChange::Kind::kReplaceTree;
  change.node = "app";
  change.tree = AppTree(true);
  change.description =
      "Application server hardened: no outcome leads to the critical asset.";
  return change;
}

Scenario ScalingScenario(int n_users) {
  if (n_users < 2) throw InputError("the scaling scenario needs at least 2 users");
  Scenario base = BuiltinCaseStudy();
  if (n_users == 2) return base;
  ScenarioChange change;
  change.kind = ScenarioChange::Kind::kAddNodes;
  change.node = "user2";
  change.count = n_users - 2;
  Scenario out = ApplyChange(base, change);
  out.name = "case-study-" + std::to_string(n_users) + "-users";
  return out;
}

Scenario TwoNodeChain(double c_a, double m_a, double gamma, double reward) {
  Scenario s;
  s.name = "two-node-chain";
  s.network.nodes = {{"a", 0.0, false}, {"b", reward, true}};
  s.network.edges = {{"a", "a"}, {"a", "b"}, {"b", "b"}};
  s.network.initial = "a";
  s.params = {c_a, m_a, gamma};
  s.v_max = std::max(reward, 1.0);
  s.trees.emplace(
      "a", TreeBuilder("a")
               .Decision("a_probe", kA, {{"scan", "a_move"}, {"idle", "idle"}})
               .Decision("a_move", kA, {{"exploit", "moved"}, {"retreat", "retreated"}})
               .Leaf("idle", "a")
               .Leaf("moved", "b")
               .Leaf("retreated", "a")
               .Build({"a", "b"}));
  ValidateScenario(s);
  return s;
}

// ---------------------------------------------------------------------------
// Reports.

ReportFormat ParseReportFormat(std::string_view name) {
  if (name == "tabular" || name == "csv") return ReportFormat::kTabular;
  if (name == "structured" || name == "json") return ReportFormat::kStructured;
  throw InputError("unknown report format '" + std::string(name) + "'");
}

std::string FormatNumber(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x + 0.0);
  if (std::string_view(buf) == "-0") return "0";
  return buf;
}

std::string FormatProbability(double p) {
  return FormatNumber(std::round(p * 1e6) / 1e6);
}

namespace {

double Rounded(double x) { return std::stod(FormatNumber(x)); }
double RoundedProbability(double p) { return std::stod(FormatProbability(p)); }

json RoundedPlan(const BehavioralPlan& plan) {
  json j = json::object();
  for (const auto& [ks, dist] : plan.dists) {
    json v = json::array();
    for (double p : dist) v.push_back(RoundedProbability(p));
    j[ks] = std::move(v);
  }
  return j;
}

json MixedView(const GameTree& tree, const BehavioralPlan& plan) {
  json out = json::array();
  try {
    const MixedPlan mixed = BehavioralToMixed(tree, plan, 4096);
    for (const auto& [pure, w] : mixed.support) {
      out.push_back({{"plan", pure.choices}, {"weight", RoundedProbability(w)}});
    }
  } catch (const CapacityError&) {
    return nullptr;
  }
  return out;
}

}  // namespace

std::string StrategyMatrixCsv(const GlobalStrategy& strategy,
                              const Network& network) {
  std::string out = "from";
  for (const auto& n : network.nodes) out += "," + n.id;
  out += "\n";
  for (const auto& from : network.nodes) {
    out += from.id;
    for (const auto& to : network.nodes) {
      out += "," + FormatProbability(strategy.prob(from.id, to.id));
    }
    out += "\n";
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> ExportReport(
    const Playbook& playbook, const Scenario& scenario, ReportFormat format) {
  const Network& net = scenario.network;
  std::vector<std::pair<std::string, std::string>> files;
  if (format == ReportFormat::kTabular) {
    std::string trace = "iteration";
    for (const auto& n : net.nodes) trace += "," + n.id;
    trace += ",metric\n";
    for (const auto& rec : playbook.trace) {
      trace += std::to_string(rec.iteration);
      for (const auto& n : net.nodes) trace += "," + FormatNumber(rec.values.at(n.id));
      trace += "," + FormatNumber(rec.metric) + "\n";
    }
    std::string risk = "node,value,risk\n";
    for (const auto& n : net.nodes) {
      risk += n.id + "," + FormatNumber(playbook.values.at(n.id)) + "," +
              FormatNumber(playbook.risk.at(n.id)) + "\n";
    }
    files.emplace_back("value_trace.csv", std::move(trace));
    files.emplace_back("strategy.csv", StrategyMatrixCsv(playbook.strategy, net));
    files.emplace_back("risk.csv", std::move(risk));
    return files;
  }

  json j;
  j["scenario"] = scenario.name;
  j["scheme"] = SchemeName(playbook.scheme);
  j["converged"] = playbook.converged;
  j["cycled"] = playbook.cycled;
  j["iterations"] = playbook.iterations;
  j["solver_invocations"] = playbook.solver_invocations;
  j["params"] = {{"c_a", scenario.params.c_a},
                 {"m_a", scenario.params.m_a},
                 {"gamma", scenario.params.gamma},
                 {"v_max", scenario.v_max}};
  json values = json::object();
  json risk = json::object();
  json strategy = json::object();
  for (const auto& n : net.nodes) {
    values[n.id] = Rounded(playbook.values.at(n.id));
    risk[n.id] = Rounded(playbook.risk.at(n.id));
    json row = json::object();
    for (const auto& [to, p] : playbook.strategy.rows.at(n.id)) {
      row[to] = RoundedProbability(p);
    }
    strategy[n.id] = std::move(row);
  }
  j["values"] = std::move(values);
  j["risk"] = std::move(risk);
  j["strategy"] = std::move(strategy);
  json profiles = json::object();
  for (const auto& [node, profile] : playbook.profiles) {
    const GameTree& tree = scenario.trees.at(node);
    json tau = json::object();
    for (const auto& [z, p] : ComputeOutcomeDistribution(tree, profile)) {
      tau[z] = RoundedProbability(p);
    }
    profiles[node] = {{"attacker", RoundedPlan(profile.attacker)},
                      {"defender", RoundedPlan(profile.defender)},
                      {"attacker_mixed", MixedView(tree, profile.attacker)},
                      {"defender_mixed", MixedView(tree, profile.defender)},
                      {"outcomes", std::move(tau)}};
  }
  j["profiles"] = std::move(profiles);
  json trace = json::array();
  for (const auto& rec : playbook.trace) {
    json vals = json::object();
    for (const auto& [node, v] : rec.values) vals[node] = Rounded(v);
    json metric = std::isfinite(rec.metric) ? json(Rounded(rec.metric)) : json(nullptr);
    trace.push_back({{"iteration", rec.iteration}, {"metric", metric}, {"values", vals}});
  }
  j["trace"] = std::move(trace);
  files.emplace_back("playbook.json", j.dump(2) + "\n");
  return files;
}

std::string DiffJson(const PlaybookDiff& diff) {
  json j;
  j["changed_profiles"] = diff.changed_profiles;
  j["added_nodes"] = diff.added_nodes;
  j["removed_nodes"] = diff.removed_nodes;
  json delta = json::object();
  for (const auto& [from, row] : diff.strategy_delta) {
    json r = json::object();
    for (const auto& [to, d] : row) r[to] = Rounded(d);
    delta[from] = std::move(r);
  }
  j["strategy_delta"] = std::move(delta);
  j["strategy_changed"] = diff.strategy_changed();
  j["empty"] = diff.empty();
  return j.dump(2) + "\n";
}

}  // namespace metapen
