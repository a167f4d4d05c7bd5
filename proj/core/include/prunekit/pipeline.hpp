#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "prunekit/data.hpp"
#include "prunekit/eval.hpp"
#include "prunekit/explain.hpp"
#include "prunekit/model.hpp"

namespace prunekit {

struct SweepPoint {
  double p = 0.0;
  std::vector<std::string> selected_features;  // prefix of the ranking
  CVReport cv;
};

struct SweepResult {
  std::string method;
  std::vector<double> grid;
  std::vector<SweepPoint> points;  // grid order
  double best_p = 0.0;
  std::vector<std::string> best_features;
  CVReport baseline_cv;  // the p=100 point
  ImportanceReport ranking;
  std::map<std::string, std::string> metadata;
};

struct IntervalPoint {
  double fraction = 0.0;
  CVReport cv;
};

struct IntervalResult {
  std::vector<IntervalPoint> points;
};

// Ground-truth benchmark standing in for an unavailable real dataset:
// features i.i.d. uniform(1,2), target = sum(coeff_j * x_j) + N(0, sigma) + 10.
struct SyntheticSpec {
  std::size_t n_samples = 100;
  std::vector<double> relevant;  // coefficients, features named rel_0..
  int n_irrelevant = 0;          // features named noise_0..
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::string target_name = "y";
};

// Synthetic sensor experiments: two force channels of varying length whose
// level carries the signal, plus config parameters and one quality target.
struct SyntheticSeriesSpec {
  std::size_t n_records = 10;
  std::size_t min_length = 64;
  std::size_t max_length = 256;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct RankOptions {
  int permutation_repeats = 10;
  int shapley_permutations = 64;
  std::size_t background_cap = 128;
  std::size_t explain_cap = 20;
};

// round-half-up of p/100 * n_features, floored at 1
std::size_t top_feature_count(double p, std::size_t n_features);

// permutation/shapley: train on a seeded 80% split and attribute on the
// held-out 20%; select_k_best: model-free scores on the full table.
ImportanceReport rank_features(const ModelSpec& spec, const FeatureTable& table,
                               const std::string& target, const std::string& method,
                               std::uint64_t seed, const RankOptions& options = {});

// Rank once, then a fresh cross-validation per top-p% projection. All
// points share fold assignments (same n, k, seed). The grid must contain
// 100 (the unpruned baseline).
SweepResult feature_sweep(const ModelSpec& spec, const FeatureTable& table,
                          const std::string& target, const std::string& method,
                          const std::vector<double>& grid, int k, std::uint64_t seed,
                          const RankOptions& options = {});

// Per fraction: truncate_records -> extract_features -> cross_validate;
// targets stay the final-quality values.
IntervalResult interval_experiment(const ModelSpec& spec,
                                   const std::vector<TimeSeriesRecord>& records,
                                   const std::string& target,
                                   const std::vector<double>& fractions, int k,
                                   std::uint64_t seed);

FeatureTable generate_synthetic(const SyntheticSpec& spec);

std::vector<TimeSeriesRecord> generate_synthetic_records(const SyntheticSeriesSpec& spec);

}  // namespace prunekit
