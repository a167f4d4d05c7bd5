#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prunekit/model.hpp"
#include "prunekit/pipeline.hpp"

namespace prunekit {

inline constexpr const char* kToolVersion = "0.1.0";

enum class InputFormat { feature_csv, timeseries_dir, synthetic, synthetic_series };

std::string to_string(InputFormat format);

// One reproducible run, loaded from a JSON config document. Every command
// is a pure function of (config, input files).
struct RunConfig {
  InputFormat format = InputFormat::feature_csv;
  std::string input_path;
  SyntheticSpec synthetic;
  SyntheticSeriesSpec synthetic_series;

  std::string target;
  ModelSpec model;
  std::vector<std::string> methods;
  std::vector<double> grid;       // default {10, 20, ..., 100}
  std::vector<double> fractions;  // default {0.1, 0.2, ..., 1.0}
  int k = 5;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  RankOptions rank;
  bool verbose = false;

  std::string config_hash;  // FNV-1a of the canonicalized document
};

RunConfig load_config(const std::string& path);

// Loads/derives the feature table for the configured input source.
FeatureTable load_input_table(const RunConfig& config);

// Raw series for the configured input (timeseries_dir or synthetic_series).
std::vector<TimeSeriesRecord> load_input_records(const RunConfig& config);

// Commands. Each writes its artifacts under config.output_dir and returns
// the list of files written. Errors are reported by exception.
std::vector<std::string> cmd_preprocess(const RunConfig& config);
std::vector<std::string> cmd_train(const RunConfig& config);
std::vector<std::string> cmd_explain(const RunConfig& config);
std::vector<std::string> cmd_sweep(const RunConfig& config);
std::vector<std::string> cmd_intervals(const RunConfig& config);
std::vector<std::string> cmd_synth(const RunConfig& config);

}  // namespace prunekit
