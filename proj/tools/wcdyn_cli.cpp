// wcdyn: run transitivity checks described by scenario files.

#include <algorithm>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wcdyn/config.hpp"

namespace {

struct Outcome {
  std::string path;
  std::string name;
  int exit_code = wcdyn::kExitError;
  std::string message;
  std::string verdict;
  std::vector<std::filesystem::path> written;
};

Outcome run_one(const std::string& path, const wcdyn::Overrides& overrides, const std::string& default_out) {
  Outcome o;
  o.path = path;
  try {
    wcdyn::ScenarioConfig cfg = wcdyn::load_config(path);
    wcdyn::apply_overrides(cfg, overrides);
    o.name = cfg.name;
    const wcdyn::RunResult r = wcdyn::run_scenario(cfg);
    o.exit_code = r.exit_code;
    o.message = r.diagnostic;
    if (r.report.contains("result")) o.verdict = r.report["result"]["verdict"].get<std::string>();
    const std::string dir = !cfg.output_dir.empty() ? cfg.output_dir : default_out;
    o.written = wcdyn::write_outputs(r, cfg.name, dir);
  } catch (const std::exception& e) {
    o.exit_code = wcdyn::kExitError;
    o.message = e.what();
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Witness-sequence checks for weighted composition operators on lattices"};
  std::vector<std::string> paths;
  std::string out_dir = "out";
  std::optional<std::int64_t> horizon;
  std::optional<double> tol, epsilon;
  std::string mode;
  int verbosity = 0;
  app.add_option("scenario", paths, "Scenario file(s)")->required()->check(CLI::ExistingFile);
  app.add_option("-o,--out", out_dir, "Output directory (a scenario's output_dir takes precedence)");
  app.add_option("--horizon", horizon, "Override the scan horizon");
  app.add_option("--tol", tol, "Override the stage tolerance");
  app.add_option("--epsilon", epsilon, "Override epsilon for semi mode");
  app.add_option("--mode", mode, "Override the mode")->check(CLI::IsMember({"transitive", "disjoint", "semi"}));
  app.add_flag("-v,--verbose", verbosity, "Print written files");
  CLI11_PARSE(app, argc, argv);

  wcdyn::Overrides overrides;
  overrides.horizon = horizon;
  overrides.tol = tol;
  overrides.epsilon = epsilon;
  if (!mode.empty()) overrides.mode = wcdyn::parse_mode(mode);

  std::vector<std::future<Outcome>> jobs;
  for (const auto& p : paths) jobs.push_back(std::async(std::launch::async, run_one, p, overrides, out_dir));

  int worst = wcdyn::kExitFound;
  for (auto& j : jobs) {
    const Outcome o = j.get();
    if (o.exit_code == wcdyn::kExitError) {
      std::cerr << o.path << ": error: " << o.message << "\n";
      worst = wcdyn::kExitError;
    } else {
      std::cout << o.name << ": " << o.verdict << "\n";
      if (worst != wcdyn::kExitError) worst = std::max(worst, o.exit_code);
    }
    if (verbosity > 0) {
      for (const auto& w : o.written) std::cout << "  wrote " << w.string() << "\n";
    }
  }
  return worst;
}
