#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "prunekit/data.hpp"
#include "prunekit/eval.hpp"
#include "prunekit/model.hpp"

namespace prunekit {

// Per-feature scores from one attribution method. rank is descending by
// score, ties broken by feature name; it is the contract consumed by the
// pruning pipeline.
struct ImportanceReport {
  std::string method;  // permutation | shapley | select_k_best
  std::map<std::string, double> scores;
  std::vector<std::string> rank;
  std::map<std::string, std::string> metadata;
};

// Fills rank from scores (descending, ties lexicographic).
void finalize_rank(ImportanceReport& report);

enum class ShapleyStrategy { marginalize, retrain };

std::string to_string(ShapleyStrategy s);

struct ShapleyOptions {
  ShapleyStrategy strategy = ShapleyStrategy::marginalize;
  std::string target;  // required for retrain: the refit target column
};

struct ShapleyExplanation {
  Matrix phi;              // n_explained x n_features
  double baseline = 0.0;   // value of the empty coalition
  ShapleyStrategy strategy = ShapleyStrategy::marginalize;
};

// Mean over repeats of (MAPE with feature i permuted - original MAPE);
// positive means important. Permutations come from per-(feature, repeat)
// streams.
ImportanceReport permutation_importance(const Model& model, const FeatureTable& table,
                                        const std::string& target, int repeats,
                                        std::uint64_t seed);

// Full-subset enumeration with weight |S|!(n-|S|-1)!/n!. For marginalize,
// v(S) is the background-mean prediction with features outside S replaced
// by background values. Guarded at n_features <= 20 (<= 10 for retrain).
ShapleyExplanation shapley_exact(const Model& model, const FeatureTable& table,
                                 const std::vector<std::size_t>& explain_rows,
                                 const std::vector<std::size_t>& background,
                                 const ShapleyOptions& options = {});

// Castro-style permutation sampling with the same value function.
ShapleyExplanation shapley_sampled(const Model& model, const FeatureTable& table,
                                   const std::vector<std::size_t>& explain_rows,
                                   const std::vector<std::size_t>& background,
                                   int n_permutations, std::uint64_t seed,
                                   const ShapleyOptions& options = {});

// Global aggregation: mean |phi_i| over explained rows.
ImportanceReport shapley_global(const ShapleyExplanation& expl,
                                const std::vector<std::string>& feature_names);

// Univariate regression F-statistic F = r^2/(1-r^2)*(n-2) per feature.
// Perfectly correlated features get +inf and rank first; zero-variance
// features score 0 with a metadata warning.
ImportanceReport select_k_best_scores(const FeatureTable& table, const std::string& target);

}  // namespace prunekit
