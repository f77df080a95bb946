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

// metapen: solve, adapt, benchmark and score penetration meta games.
//
// Exit codes: 0 converged, 1 input error, 2 no convergence (reports are
// still written).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "metapen/logging.h"
#include "metapen/meta_engine.h"
#include "metapen/rl_baseline.h"
#include "metapen/scenario_io.h"

namespace {

using namespace metapen;  // NOLINT

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNoConvergence = 2;

struct RunConfig {
  std::string scenario_path;
  std::string builtin;
  std::string scheme = "red";
  std::optional<double> c_a;
  std::optional<double> gamma;
  std::optional<double> m_a;
  std::optional<double> v_max;
  double epsilon = 1e-6;
  int max_iters = 200;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out_dir;
  std::vector<std::string> formats{"csv", "json"};
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << content;
}

Scenario LoadScenario(const RunConfig& config) {
  Scenario s;
  if (!config.builtin.empty() && !config.scenario_path.empty()) {
    throw InputError("pass either --scenario or --builtin, not both");
  }
  if (!config.scenario_path.empty()) {
    try {
      s = ParseScenario(ReadFile(config.scenario_path));
    } catch (const InputError& e) {
      throw InputError(config.scenario_path + ": " + e.what());
    }
  } else if (config.builtin == "case-study" || config.builtin.empty()) {
    s = BuiltinCaseStudy();
  } else if (config.builtin == "two-node-chain") {
    s = TwoNodeChain(1.0);
  } else {
    throw InputError("unknown builtin scenario '" + config.builtin + "'");
  }
  if (config.c_a) s.params.c_a = *config.c_a;
  if (config.gamma) s.params.gamma = *config.gamma;
  if (config.m_a) s.params.m_a = *config.m_a;
  if (config.v_max) s.v_max = *config.v_max;
  ValidateScenario(s);
  return s;
}

MetaOptions MakeOptions(const RunConfig& config) {
  if (config.threads < 0) throw InputError("--threads must be nonnegative");
  MetaOptions options;
  options.epsilon = config.epsilon;
  options.max_iters = config.max_iters;
  options.micro.threads = config.threads;
  return options;
}

void WriteReports(const Playbook& book, const Scenario& scenario,
                  const RunConfig& config, const std::string& prefix = "") {
  if (config.out_dir.empty()) return;
  for (const std::string& f : config.formats) {
    for (const auto& [name, body] :
         ExportReport(book, scenario, ParseReportFormat(f))) {
      WriteFile(std::filesystem::path(config.out_dir) / (prefix + name), body);
    }
  }
}

void PrintSummary(const Playbook& book, const Scenario& scenario) {
  std::printf("scheme %s, %s after %d iteration(s)\n",
              std::string(SchemeName(book.scheme)).c_str(),
              book.converged ? "converged" : "NOT converged", book.iterations);
  std::printf("%-12s %12s %8s\n", "node", "value", "risk");
  for (const auto& n : scenario.network.nodes) {
    std::printf("%-12s %12s %8s\n", n.id.c_str(),
                FormatNumber(book.values.at(n.id)).c_str(),
                FormatNumber(book.risk.at(n.id)).c_str());
  }
  std::printf("\nstrategy\n%s", StrategyMatrixCsv(book.strategy, scenario.network).c_str());
}

int CmdSolve(const RunConfig& config) {
  const Scenario scenario = LoadScenario(config);
  const Playbook book =
      RunMeta(scenario, ParseScheme(config.scheme), MakeOptions(config));
  WriteReports(book, scenario, config);
  PrintSummary(book, scenario);
  return book.converged ? kExitOk : kExitNoConvergence;
}

int CmdAdapt(const RunConfig& config, const std::string& change_path,
             const std::string& builtin_change) {
  const Scenario scenario = LoadScenario(config);
  ScenarioChange change;
  if (!change_path.empty()) {
    try {
      change = ParseChange(ReadFile(change_path), scenario);
    } catch (const InputError& e) {
      throw InputError(change_path + ": " + e.what());
    }
  } else if (builtin_change == "app-hardening") {
    change = AppHardeningChange();
  } else {
    throw InputError("adapt needs --change FILE or --builtin-change app-hardening");
  }
  const Scheme scheme = ParseScheme(config.scheme);
  const MetaOptions options = MakeOptions(config);
  const Playbook before = RunMeta(scenario, scheme, options);
  if (!before.converged) {
    std::fprintf(stderr, "base scenario did not converge\n");
    return kExitNoConvergence;
  }
  const AdaptResult after = Adapt(scenario, before, change, scheme, options);
  const std::string before_csv = StrategyMatrixCsv(before.strategy, scenario.network);
  const std::string after_csv =
      StrategyMatrixCsv(after.playbook.strategy, after.scenario.network);
  const std::string diff = DiffJson(after.diff);
  if (!config.out_dir.empty()) {
    const std::filesystem::path dir(config.out_dir);
    WriteFile(dir / "before_strategy.csv", before_csv);
    WriteFile(dir / "after_strategy.csv", after_csv);
    WriteFile(dir / "diff.json", diff);
    WriteReports(after.playbook, after.scenario, config, "after_");
  }
  std::printf("before\n%s\nafter (%d extra iteration(s))\n%s\ndiff\n%s",
              before_csv.c_str(), after.playbook.iterations, after_csv.c_str(),
              diff.c_str());
  return after.playbook.converged ? kExitOk : kExitNoConvergence;
}

int CmdBench(const RunConfig& config, const std::vector<int>& users,
             double budget_ms) {
  if (users.empty()) throw InputError("--users needs at least one count");
  for (int n : users) {
    if (n < 2) throw InputError("--users entries must be at least 2");
  }
  if (!(budget_ms > 0)) throw InputError("--budget-ms must be positive");
  BenchmarkOptions options;
  options.seed = config.seed;
  options.rl_budget_ms = budget_ms;
  const std::string csv = BenchmarkCsv(BenchmarkScaling(users, options));
  if (!config.out_dir.empty()) {
    WriteFile(std::filesystem::path(config.out_dir) / "bench.csv", csv);
  }
  std::printf("%s", csv.c_str());
  return kExitOk;
}

int CmdRisk(const RunConfig& config, const std::vector<double>& sweep) {
  RunConfig base = config;
  std::vector<double> capabilities = sweep;
  if (capabilities.empty()) {
    capabilities.push_back(config.c_a.value_or(LoadScenario(config).params.c_a));
  }
  const Scheme scheme = ParseScheme(config.scheme);
  std::vector<Scenario> scenarios;
  std::vector<Playbook> books;
  bool converged = true;
  for (double c : capabilities) {
    base.c_a = c;
    scenarios.push_back(LoadScenario(base));
    books.push_back(RunMeta(scenarios.back(), scheme, MakeOptions(config)));
    converged = converged && books.back().converged;
  }
  std::string csv = "node";
  for (double c : capabilities) csv += ",c_a=" + FormatNumber(c);
  csv += "\n";
  for (const auto& n : scenarios.front().network.nodes) {
    csv += n.id;
    for (const Playbook& b : books) csv += "," + FormatNumber(b.risk.at(n.id));
    csv += "\n";
  }
  if (!config.out_dir.empty()) {
    WriteFile(std::filesystem::path(config.out_dir) / "risk_sweep.csv", csv);
  }
  std::printf("%s", csv.c_str());
  return converged ? kExitOk : kExitNoConvergence;
}

int CmdShow(const RunConfig& config, bool change) {
  if (change) {
    std::printf("%s", SerializeChange(AppHardeningChange()).c_str());
  } else {
    std::printf("%s", SerializeScenario(LoadScenario(config)).c_str());
  }
  return kExitOk;
}

void AddScenarioFlags(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--scenario", config.scenario_path, "scenario JSON file");
  cmd->add_option("--builtin", config.builtin,
                  "bundled scenario: case-study (default) or two-node-chain");
  cmd->add_option("--scheme", config.scheme, "red, purple or nash")
      ->check(CLI::IsMember({"red", "purple", "nash"}));
  cmd->add_option("--c-a", config.c_a, "attacker capability override");
  cmd->add_option("--gamma", config.gamma, "discount override");
  cmd->add_option("--m-a", config.m_a, "stay penalty override");
  cmd->add_option("--v-max", config.v_max, "risk normalizer override");
  cmd->add_option("--epsilon", config.epsilon, "convergence threshold");
  cmd->add_option("--max-iters", config.max_iters, "iteration cap");
  cmd->add_option("--seed", config.seed, "random seed (benchmark only)");
  cmd->add_option("--threads", config.threads,
                  "micro-stage worker threads, 0 for all cores");
  cmd->add_option("--out", config.out_dir, "output directory for reports");
  cmd->add_option("--format", config.formats, "report formats: csv, json")
      ->delimiter(',')
      ->check(CLI::IsMember({"csv", "json", "tabular", "structured"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penetration meta-game engine"};
  app.require_subcommand(1);
  RunConfig config;

  CLI::App* solve = app.add_subcommand("solve", "run the meta loop on a scenario");
  AddScenarioFlags(solve, config);

  CLI::App* adapt = app.add_subcommand("adapt", "apply a change and re-solve");
  AddScenarioFlags(adapt, config);
  std::string change_path;
  std::string builtin_change;
  adapt->add_option("--change", change_path, "change JSON file");
  adapt->add_option("--builtin-change", builtin_change, "bundled change: app-hardening");

  CLI::App* bench = app.add_subcommand("bench", "meta engine vs Q-learning scaling");
  AddScenarioFlags(bench, config);
  std::vector<int> users{2, 4, 8, 16};
  double budget_ms = 60'000;
  bench->add_option("--users", users, "user-device counts")->delimiter(',');
  bench->add_option("--budget-ms", budget_ms, "Q-learning budget per count");

  CLI::App* risk = app.add_subcommand("risk", "per-node risk scores");
  AddScenarioFlags(risk, config);
  std::vector<double> sweep;
  risk->add_option("--c-a-sweep", sweep, "capabilities to sweep")->delimiter(',');

  CLI::App* show = app.add_subcommand("show", "print a scenario as canonical JSON");
  AddScenarioFlags(show, config);
  bool show_change = false;
  show->add_flag("--builtin-change", show_change, "print the bundled change instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*solve) return CmdSolve(config);
    if (*adapt) return CmdAdapt(config, change_path, builtin_change);
    if (*bench) return CmdBench(config, users, budget_ms);
    if (*risk) return CmdRisk(config, sweep);
    if (*show) return CmdShow(config, show_change);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
  return kExitInput;
}
