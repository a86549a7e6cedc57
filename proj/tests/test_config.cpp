#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wcdyn/config.hpp"

using namespace wcdyn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = WCDYN_SCENARIO_DIR;

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("wcdyn_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + WCDYN_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json primena() { return read_json(kScenarios / "weighted-primena.json"); }

std::string diagnostic_for(const json& doc) {
  try {
    validate_config(parse_config(doc));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, BundledScenariosGiveExpectedExitCodes) {
  const std::map<std::string, int> expected{
      {"weighted-primena", kExitFound},      {"unweighted-translation", kExitNotFound},
      {"weighted-morrey", kExitFound},         {"weighted-primena-orlicz", kExitFound},
      {"piecewise-power-weight", kExitNotFound},        {"radial-weight-2d", kExitFound},
      {"disjoint-shifts", kExitFound},       {"disjoint-heavy-symbol", kExitNotFound},
      {"semi-shift-family", kExitFound}};
  std::size_t seen = 0;
  for (const auto& entry : fs::directory_iterator(kScenarios)) {
    if (entry.path().extension() != ".json") continue;
    const ScenarioConfig cfg = load_config(entry.path());
    ASSERT_TRUE(expected.count(cfg.name)) << cfg.name;
    const RunResult r = run_scenario(cfg);
    EXPECT_EQ(r.exit_code, expected.at(cfg.name)) << cfg.name << " " << r.diagnostic;
    const std::string verdict = r.report["result"]["verdict"];
    const bool found = verdict == "WitnessFound" || verdict == "TailFound";
    EXPECT_EQ(r.exit_code, found ? kExitFound : kExitNotFound) << verdict;
    EXPECT_EQ(r.report["exit_code"], r.exit_code);
    ++seen;
  }
  EXPECT_EQ(seen, expected.size());
}

TEST(Config, MorreyOrderIsDiagnosed) {
  json doc = read_json(kScenarios / "weighted-morrey.json");
  doc["norm"]["q"] = doc["norm"]["p"];
  EXPECT_NE(diagnostic_for(doc).find("norm.q"), std::string::npos) << diagnostic_for(doc);

  const fs::path dir = scratch("morrey");
  std::ofstream(dir / "bad.json") << doc.dump();
  EXPECT_EQ(run_cli((dir / "bad.json").string() + " -o " + (dir / "out").string()), kExitError);
}

TEST(Config, StrictFields) {
  json doc = primena();
  doc["bogus"] = 1;
  EXPECT_NE(diagnostic_for(doc).find("bogus"), std::string::npos);

  doc = primena();
  doc["operators"][0]["symbol"] = "missing";
  EXPECT_NE(diagnostic_for(doc).find("operators[0].symbol"), std::string::npos) << diagnostic_for(doc);

  doc = primena();
  doc["operators"][0]["map"] = "nowhere";
  EXPECT_NE(diagnostic_for(doc).find("operators[0].map"), std::string::npos) << diagnostic_for(doc);

  doc = primena();
  doc["eta"] = "nothing";
  EXPECT_NE(diagnostic_for(doc).find("eta"), std::string::npos);

  doc = primena();
  doc["tol"] = "small";
  EXPECT_NE(diagnostic_for(doc).find("tol"), std::string::npos);

  doc = primena();
  doc.erase("K");
  EXPECT_NE(diagnostic_for(doc).find("K"), std::string::npos);

  doc = primena();
  doc["mode"] = "disjoint";
  EXPECT_FALSE(diagnostic_for(doc).empty());

  doc = read_json(kScenarios / "disjoint-shifts.json");
  doc["operators"][1]["power"] = 1;
  EXPECT_NE(diagnostic_for(doc).find("power"), std::string::npos) << diagnostic_for(doc);

  doc = read_json(kScenarios / "semi-shift-family.json");
  doc["epsilon"] = 1.0;
  EXPECT_NE(diagnostic_for(doc).find("epsilon"), std::string::npos);

  EXPECT_TRUE(diagnostic_for(primena()).empty());
}

TEST(Config, OverridesApply) {
  ScenarioConfig cfg = parse_config(primena());
  Overrides o;
  o.horizon = 50;
  o.tol = 0.5;
  apply_overrides(cfg, o);
  EXPECT_EQ(cfg.horizon, 50);
  EXPECT_EQ(cfg.tol, 0.5);
  const RunResult r = run_scenario(cfg);
  EXPECT_EQ(r.report["horizon"], 50);
}

TEST(Config, LibraryErrorsBecomeExitOne) {
  // Shifts ordered so that the two images coincide: no disjoint aperiodicity bound.
  json doc = read_json(kScenarios / "disjoint-shifts.json");
  doc["maps"]["shift1"]["translation"] = {-2};
  doc["maps"]["shift2"]["translation"] = {-1};
  const RunResult r = run_scenario(parse_config(doc));
  EXPECT_EQ(r.exit_code, kExitError);
  EXPECT_FALSE(r.diagnostic.empty());
  EXPECT_EQ(r.report["exit_code"], kExitError);
}

TEST(Report, CsvHeadersPerMode) {
  const auto header = [](const std::string& scenario) {
    const RunResult r = run_scenario(load_config(kScenarios / scenario));
    EXPECT_EQ(r.curves.size(), 1u);
    const std::string& c = r.curves.at(0).content;
    return c.substr(0, c.find('\n'));
  };
  EXPECT_EQ(header("weighted-primena.json"), "k,n_k,sup_forward,sup_backward,chi_residual");
  EXPECT_EQ(header("disjoint-shifts.json"),
            "k,n_k,sup_forward,sup_backward,gamma_max,gamma_l1_s2,gamma_l2_s1,chi_residual");
  EXPECT_EQ(header("semi-shift-family.json"), "t,pass_chi,pass_product,pass_cross,lambda_t");
}

TEST(Report, NumbersRoundTrip) {
  const RunResult r = run_scenario(load_config(kScenarios / "weighted-primena.json"));
  std::istringstream in(r.curves.at(0).content);
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0;
  const auto& stages = r.report["result"]["stages"];
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 5u);
    EXPECT_EQ(std::stod(cells[2]), stages[rows]["sup_forward"][0].get<double>());
    EXPECT_EQ(std::stod(cells[3]), stages[rows]["sup_backward"][0].get<double>());
    ++rows;
  }
  EXPECT_EQ(rows, stages.size());
  EXPECT_EQ(rows, 8u);
}

TEST(Report, RunsAreDeterministic) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  for (const char* s : {"weighted-primena.json", "disjoint-shifts.json", "semi-shift-family.json"}) {
    const RunResult r1 = run_scenario(load_config(kScenarios / s));
    const RunResult r2 = run_scenario(load_config(kScenarios / s));
    const auto p1 = write_outputs(r1, "x", a);
    const auto p2 = write_outputs(r2, "x", b);
    ASSERT_EQ(p1.size(), p2.size());
    for (std::size_t i = 0; i < p1.size(); ++i) EXPECT_EQ(read_text(p1[i]), read_text(p2[i])) << s;
  }
}

TEST(Report, WritesJsonAndCurves) {
  const fs::path dir = scratch("write");
  const RunResult r = run_scenario(load_config(kScenarios / "semi-shift-family.json"));
  const auto paths = write_outputs(r, "semi", dir);
  ASSERT_EQ(paths.size(), 2u);
  const json doc = read_json(dir / "semi.json");
  EXPECT_EQ(doc["result"]["verdict"], "TailFound");
  EXPECT_EQ(doc["result"]["tail_start"], 11);
  EXPECT_TRUE(fs::exists(dir / "semi-shift-family_semi.csv"));
}

TEST(Config, TableWeightFromCsv) {
  const fs::path dir = scratch("csv");
  std::ofstream(dir / "symbol.csv") << "x,value\n3,1.5\n-2,0.5\n";
  json doc = primena();
  doc["weights"]["tab"] = {{"type", "table"}, {"csv", "symbol.csv"}, {"fallback", 1.0}};
  doc["operators"][0]["symbol"] = "tab";
  std::ofstream(dir / "tab.json") << doc.dump();
  const ScenarioConfig cfg = load_config(dir / "tab.json");
  const WeightSpec& w = cfg.weights.at("tab");
  EXPECT_EQ(w.value(LatticePoint{3}), 1.5);
  EXPECT_EQ(w.value(LatticePoint{-2}), 0.5);
  EXPECT_EQ(w.value(LatticePoint{7}), 1.0);

  std::ofstream(dir / "broken.csv") << "x,value\n3,abc\n";
  doc["weights"]["tab"]["csv"] = "broken.csv";
  std::ofstream(dir / "broken.json") << doc.dump();
  try {
    load_config(dir / "broken.json");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(e.field().find("weights.tab.csv"), std::string::npos) << e.field();
  }
}

TEST(Cli, ExitCodesAndWorstOfMany) {
  const fs::path out = scratch("cli");
  const std::string o = " -o " + out.string();
  const std::string found = (kScenarios / "weighted-primena.json").string();
  const std::string none = (kScenarios / "unweighted-translation.json").string();
  EXPECT_EQ(run_cli(found + o), kExitFound);
  EXPECT_EQ(run_cli(none + o), kExitNotFound);
  EXPECT_EQ(run_cli(found + " " + none + o), kExitNotFound);
  std::ofstream(out / "bad.json") << "{ not json";
  EXPECT_EQ(run_cli(found + " " + none + " " + (out / "bad.json").string() + o), kExitError);
  EXPECT_NE(run_cli((out / "missing.json").string() + o), kExitFound);
  EXPECT_TRUE(fs::exists(out / "weighted-primena.json"));
  EXPECT_TRUE(fs::exists(out / "weighted-primena_transitive.csv"));
  EXPECT_EQ(run_cli(none + " --horizon 20" + o), kExitNotFound);
  EXPECT_EQ(run_cli(none + " --tol 2" + o), kExitError);
  EXPECT_EQ(run_cli(found + " --mode disjoint" + o), kExitError);
}
