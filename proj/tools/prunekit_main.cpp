#include <cstdio>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "prunekit/cli.hpp"
#include "prunekit/parallel.hpp"

using namespace prunekit;

int main(int argc, char** argv) {
  CLI::App app{"prunekit: tree-model quality prediction with explainability-driven feature pruning"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir_override;
  bool verbose = false;

  const std::map<std::string, std::pair<std::string, std::function<std::vector<std::string>(const RunConfig&)>>>
      commands = {
          {"preprocess", {"Extract box-plot features from raw series into features.csv", cmd_preprocess}},
          {"train", {"Cross-validate and fit a model; writes model.json + cv_report.json", cmd_train}},
          {"explain", {"Attribute the model; writes importance_<method>.{json,csv,svg}", cmd_explain}},
          {"sweep", {"Top-p% pruning sweep; writes sweep_<method>.{json,csv} + sweep.svg", cmd_sweep}},
          {"intervals", {"Partial-data experiment; writes intervals.{json,csv,svg}", cmd_intervals}},
          {"synth", {"Generate a synthetic dataset from the config's input spec", cmd_synth}},
      };

  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--output-dir", output_dir_override, "Override the config's output_dir");
    sub->add_flag("--verbose", verbose, "Log progress to stderr");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    RunConfig config = load_config(config_path);
    if (!output_dir_override.empty()) config.output_dir = output_dir_override;
    config.verbose = verbose;
    if (verbose) {
      std::cerr << "prunekit " << kToolVersion << ": " << command << " (config " << config_path
                << ", hash " << config.config_hash << ", threads " << thread_budget() << ")\n";
    }
    std::vector<std::string> artifacts = commands.at(command).second(config);
    nlohmann::json summary{{"command", command},
                           {"status", "ok"},
                           {"artifacts", artifacts},
                           {"config_hash", config.config_hash},
                           {"version", kToolVersion}};
    std::cout << summary.dump() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::string message = e.what();
    for (char& c : message) {
      if (c == '\n') c = ' ';
    }
    std::cerr << "error: " << command << ": " << message << "\n";
    return 1;
  }
}
