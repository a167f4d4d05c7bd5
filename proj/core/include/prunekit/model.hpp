#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "prunekit/data.hpp"
#include "prunekit/rng.hpp"

namespace prunekit {

using Matrix = std::vector<std::vector<double>>;

struct TreeParams {
  int max_depth = -1;  // -1 = unlimited
  int min_samples_leaf = 1;
  int min_samples_split = 2;
};

// Flat node storage; children referenced by index, root at 0.
// feature < 0 marks a leaf.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;

  // Routing: x[feature] <= threshold goes left.
  double predict(const std::vector<double>& x) const;
  bool uses_feature(int feature) const;
  int max_feature_index() const;
};

// Greedy CART on the squared-error criterion. Threshold candidates are
// midpoints between consecutive distinct sorted values; ties on gain keep
// the lowest feature index, then the lowest threshold. When
// features_per_split > 0, each split draws that many candidate features
// from rng (required in that case).
Tree fit_tree(const Matrix& rows, const std::vector<double>& y, const TreeParams& params,
              RngStream* rng = nullptr, int features_per_split = 0);

enum class ModelKind { decision_tree, random_forest, gradient_boosting };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct ModelSpec {
  ModelKind kind = ModelKind::decision_tree;
  TreeParams tree;
  // forest
  int n_trees = 200;
  int features_per_split = 0;  // 0 = ceil(n_features/3); -1 = all
  bool bootstrap = true;
  // boosting
  int n_stages = 200;
  double learning_rate = 0.05;

  std::uint64_t seed = 0;

  static ModelSpec decision_tree_default(std::uint64_t seed = 0);
  static ModelSpec random_forest_default(std::uint64_t seed = 0);
  static ModelSpec gradient_boosting_default(std::uint64_t seed = 0);
};

// A trained regressor with a uniform predict contract. Immutable after
// fitting; safe to share across threads.
struct Model {
  ModelSpec spec;
  std::vector<std::string> feature_names;

  Tree tree;                // decision_tree
  std::vector<Tree> trees;  // random_forest
  double f0 = 0.0;          // gradient_boosting
  std::vector<Tree> stages;
  std::vector<double> stage_mse;  // training MSE after each stage

  double predict(const std::vector<double>& x) const;
  bool uses_feature(int feature) const;
};

Model fit_decision_tree(const Matrix& rows, const std::vector<double>& y, const ModelSpec& spec);
Model fit_forest(const Matrix& rows, const std::vector<double>& y, const ModelSpec& spec);
Model fit_gbm(const Matrix& rows, const std::vector<double>& y, const ModelSpec& spec);

// Dispatches on spec.kind and records the table's feature names.
Model train(const ModelSpec& spec, const FeatureTable& table, const std::string& target);

// Versioned JSON document; round-trip is lossless for predictions.
nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& doc);

nlohmann::json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& doc);

}  // namespace prunekit
