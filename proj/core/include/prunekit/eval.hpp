#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "prunekit/data.hpp"
#include "prunekit/model.hpp"

namespace prunekit {

struct CVReport {
  std::vector<double> fold_scores;         // MAPE %, one per fold
  double mean_mape = 0.0;                  // arithmetic mean of fold_scores
  std::vector<int> fold_assignments;       // per-sample test-fold index
  int k = 0;
  std::uint64_t seed = 0;
};

// Mean absolute percentage error, in percent. Rejects zero ground-truth
// values: the metric is undefined there and clamping would corrupt
// comparisons across feature subsets.
double mape(const std::vector<double>& y_true, const std::vector<double>& y_pred);

// Seeded shuffle, then k contiguous folds whose sizes differ by at most 1.
std::vector<int> kfold_split(std::size_t n, int k, std::uint64_t seed);

// Per fold: train on the complement, score MAPE on the fold.
CVReport cross_validate(const ModelSpec& spec, const FeatureTable& table,
                        const std::string& target, int k, std::uint64_t seed);

nlohmann::json cv_report_to_json(const CVReport& report);
CVReport cv_report_from_json(const nlohmann::json& doc);

}  // namespace prunekit
