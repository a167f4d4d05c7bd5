#include "prunekit/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "prunekit/parallel.hpp"

using nlohmann::json;

namespace prunekit {
namespace {

struct TreeBuilder {
  const Matrix& rows;
  const std::vector<double>& y;
  const TreeParams& params;
  RngStream* rng;
  int features_per_split;
  std::vector<TreeNode> nodes;

  double sse(const std::vector<std::size_t>& idx, double& mean_out) const {
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i : idx) {
      sum += y[i];
      sum2 += y[i] * y[i];
    }
    const double n = static_cast<double>(idx.size());
    mean_out = sum / n;
    return std::max(0.0, sum2 - sum * sum / n);
  }

  int build(std::vector<std::size_t> idx, int depth) {
    double mean = 0.0;
    const double node_sse = sse(idx, mean);
    const std::size_t n = idx.size();

    int node_id = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{-1, 0.0, -1, -1, mean});

    const double eps = 1e-10 * std::max(1.0, node_sse);
    if ((params.max_depth >= 0 && depth >= params.max_depth) ||
        n < static_cast<std::size_t>(params.min_samples_split) || node_sse <= eps) {
      return node_id;
    }

    const std::size_t d = rows[idx[0]].size();
    std::vector<std::size_t> candidates;
    if (features_per_split > 0 && static_cast<std::size_t>(features_per_split) < d) {
      if (!rng) throw std::logic_error("fit_tree: feature subsetting requires an rng stream");
      candidates = rng->sample_without_replacement(d, static_cast<std::size_t>(features_per_split));
      std::sort(candidates.begin(), candidates.end());
    } else {
      candidates.resize(d);
      std::iota(candidates.begin(), candidates.end(), std::size_t{0});
    }

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_total = node_sse;
    std::vector<std::size_t> order(idx);

    for (std::size_t f : candidates) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return rows[a][f] < rows[b][f]; });
      double left_sum = 0.0, left_sum2 = 0.0;
      double total_sum = 0.0, total_sum2 = 0.0;
      for (std::size_t i : order) {
        total_sum += y[i];
        total_sum2 += y[i] * y[i];
      }
      for (std::size_t pos = 1; pos < n; ++pos) {
        const double yi = y[order[pos - 1]];
        left_sum += yi;
        left_sum2 += yi * yi;
        const double xa = rows[order[pos - 1]][f];
        const double xb = rows[order[pos]][f];
        if (!(xa < xb)) continue;
        const std::size_t nl = pos, nr = n - pos;
        if (nl < static_cast<std::size_t>(params.min_samples_leaf) ||
            nr < static_cast<std::size_t>(params.min_samples_leaf)) {
          continue;
        }
        const double right_sum = total_sum - left_sum;
        const double right_sum2 = total_sum2 - left_sum2;
        const double sse_l = std::max(0.0, left_sum2 - left_sum * left_sum / nl);
        const double sse_r = std::max(0.0, right_sum2 - right_sum * right_sum / nr);
        const double total = sse_l + sse_r;
        if (total < best_total - eps) {
          best_total = total;
          best_feature = static_cast<int>(f);
          best_threshold = xa + 0.5 * (xb - xa);
        }
      }
    }

    if (best_feature < 0) return node_id;  // no split improves the node

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx) {
      if (rows[i][static_cast<std::size_t>(best_feature)] <= best_threshold) {
        left_idx.push_back(i);
      } else {
        right_idx.push_back(i);
      }
    }
    nodes[static_cast<std::size_t>(node_id)].feature = best_feature;
    nodes[static_cast<std::size_t>(node_id)].threshold = best_threshold;
    int left = build(std::move(left_idx), depth + 1);
    nodes[static_cast<std::size_t>(node_id)].left = left;
    int right = build(std::move(right_idx), depth + 1);
    nodes[static_cast<std::size_t>(node_id)].right = right;
    return node_id;
  }
};

int resolved_features_per_split(const ModelSpec& spec, std::size_t d) {
  if (spec.features_per_split > 0) return spec.features_per_split;
  if (spec.features_per_split < 0) return 0;  // all
  return static_cast<int>((d + 2) / 3);       // ceil(d/3)
}

json tree_to_json(const Tree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  }
  return json{{"nodes", std::move(nodes)}};
}

Tree tree_from_json(const json& doc) {
  Tree tree;
  for (const auto& n : doc.at("nodes")) {
    tree.nodes.push_back(TreeNode{n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(),
                                  n.at(3).get<int>(), n.at(4).get<double>()});
  }
  return tree;
}

}  // namespace

double Tree::predict(const std::vector<double>& x) const {
  const TreeNode* node = &nodes.at(0);
  while (!node->is_leaf()) {
    if (static_cast<std::size_t>(node->feature) >= x.size()) {
      throw std::out_of_range("Tree::predict: feature index out of bounds");
    }
    node = &nodes[static_cast<std::size_t>(
        x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left : node->right)];
  }
  return node->value;
}

bool Tree::uses_feature(int feature) const {
  for (const auto& n : nodes) {
    if (!n.is_leaf() && n.feature == feature) return true;
  }
  return false;
}

int Tree::max_feature_index() const {
  int m = -1;
  for (const auto& n : nodes) {
    if (!n.is_leaf()) m = std::max(m, n.feature);
  }
  return m;
}

Tree fit_tree(const Matrix& rows, const std::vector<double>& y, const TreeParams& params,
              RngStream* rng, int features_per_split) {
  if (rows.empty()) throw std::invalid_argument("fit_tree: empty input");
  if (rows.size() != y.size()) throw std::invalid_argument("fit_tree: rows/targets length mismatch");
  for (double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("fit_tree: non-finite target");
  }
  TreeBuilder builder{rows, y, params, rng, features_per_split, {}};
  std::vector<std::size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  builder.build(std::move(idx), 0);
  return Tree{std::move(builder.nodes)};
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::decision_tree: return "decision_tree";
    case ModelKind::random_forest: return "random_forest";
    case ModelKind::gradient_boosting: return "gradient_boosting";
  }
  throw std::logic_error("unreachable");
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "decision_tree") return ModelKind::decision_tree;
  if (s == "random_forest") return ModelKind::random_forest;
  if (s == "gradient_boosting") return ModelKind::gradient_boosting;
  throw std::invalid_argument("unknown model kind \"" + s +
                              "\" (valid: decision_tree, random_forest, gradient_boosting)");
}

ModelSpec ModelSpec::decision_tree_default(std::uint64_t seed) {
  ModelSpec spec;
  spec.kind = ModelKind::decision_tree;
  spec.tree = TreeParams{8, 2, 2};
  spec.seed = seed;
  return spec;
}

ModelSpec ModelSpec::random_forest_default(std::uint64_t seed) {
  ModelSpec spec;
  spec.kind = ModelKind::random_forest;
  spec.tree = TreeParams{-1, 1, 2};
  spec.n_trees = 200;
  spec.features_per_split = 0;
  spec.bootstrap = true;
  spec.seed = seed;
  return spec;
}

ModelSpec ModelSpec::gradient_boosting_default(std::uint64_t seed) {
  ModelSpec spec;
  spec.kind = ModelKind::gradient_boosting;
  spec.tree = TreeParams{3, 1, 2};
  spec.n_stages = 200;
  spec.learning_rate = 0.05;
  spec.seed = seed;
  return spec;
}

double Model::predict(const std::vector<double>& x) const {
  switch (spec.kind) {
    case ModelKind::decision_tree:
      return tree.predict(x);
    case ModelKind::random_forest: {
      double sum = 0.0;
      for (const auto& t : trees) sum += t.predict(x);
      return sum / static_cast<double>(trees.size());
    }
    case ModelKind::gradient_boosting: {
      double acc = 0.0;
      for (const auto& t : stages) acc += t.predict(x);
      return f0 + spec.learning_rate * acc;
    }
  }
  throw std::logic_error("unreachable");
}

bool Model::uses_feature(int feature) const {
  switch (spec.kind) {
    case ModelKind::decision_tree:
      return tree.uses_feature(feature);
    case ModelKind::random_forest:
      for (const auto& t : trees) {
        if (t.uses_feature(feature)) return true;
      }
      return false;
    case ModelKind::gradient_boosting:
      for (const auto& t : stages) {
        if (t.uses_feature(feature)) return true;
      }
      return false;
  }
  throw std::logic_error("unreachable");
}

Model fit_decision_tree(const Matrix& rows, const std::vector<double>& y, const ModelSpec& spec) {
  Model model;
  model.spec = spec;
  model.tree = fit_tree(rows, y, spec.tree);
  return model;
}

Model fit_forest(const Matrix& rows, const std::vector<double>& y, const ModelSpec& spec) {
  if (spec.n_trees < 1) throw std::invalid_argument("fit_forest: n_trees must be >= 1");
  if (rows.empty()) throw std::invalid_argument("fit_forest: empty input");
  Model model;
  model.spec = spec;
  model.trees.resize(static_cast<std::size_t>(spec.n_trees));
  const std::size_t n = rows.size();
  const int fps = resolved_features_per_split(spec, rows[0].size());
  parallel_for(model.trees.size(), [&](std::size_t t) {
    RngStream stream(spec.seed, "forest_tree", t);
    Matrix sample_rows;
    std::vector<double> sample_y;
    if (spec.bootstrap) {
      sample_rows.reserve(n);
      sample_y.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = static_cast<std::size_t>(stream.next_below(n));
        sample_rows.push_back(rows[j]);
        sample_y.push_back(y[j]);
      }
      model.trees[t] = fit_tree(sample_rows, sample_y, spec.tree, &stream, fps);
    } else {
      model.trees[t] = fit_tree(rows, y, spec.tree, &stream, fps);
    }
  });
  return model;
}

Model fit_gbm(const Matrix& rows, const std::vector<double>& y, const ModelSpec& spec) {
  if (!(spec.learning_rate > 0.0) || spec.learning_rate > 1.0) {
    throw std::invalid_argument("fit_gbm: learning_rate must be in (0, 1]");
  }
  if (spec.n_stages < 0) throw std::invalid_argument("fit_gbm: n_stages must be >= 0");
  if (rows.empty()) throw std::invalid_argument("fit_gbm: empty input");
  if (rows.size() != y.size()) throw std::invalid_argument("fit_gbm: rows/targets length mismatch");

  Model model;
  model.spec = spec;
  const std::size_t n = rows.size();
  model.f0 = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

  std::vector<double> current(n, model.f0);
  std::vector<double> residual(n);
  for (int m = 0; m < spec.n_stages; ++m) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - current[i];
    Tree stage = fit_tree(rows, residual, spec.tree);
    double mse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      current[i] += spec.learning_rate * stage.predict(rows[i]);
      const double e = y[i] - current[i];
      mse += e * e;
    }
    model.stages.push_back(std::move(stage));
    model.stage_mse.push_back(mse / static_cast<double>(n));
  }
  return model;
}

Model train(const ModelSpec& spec, const FeatureTable& table, const std::string& target) {
  const std::vector<double>& y = table.target(target);
  Model model;
  switch (spec.kind) {
    case ModelKind::decision_tree:
      model = fit_decision_tree(table.rows, y, spec);
      break;
    case ModelKind::random_forest:
      model = fit_forest(table.rows, y, spec);
      break;
    case ModelKind::gradient_boosting:
      model = fit_gbm(table.rows, y, spec);
      break;
  }
  model.feature_names = table.feature_names;
  return model;
}

json spec_to_json(const ModelSpec& spec) {
  return json{{"kind", to_string(spec.kind)},
              {"max_depth", spec.tree.max_depth},
              {"min_samples_leaf", spec.tree.min_samples_leaf},
              {"min_samples_split", spec.tree.min_samples_split},
              {"n_trees", spec.n_trees},
              {"features_per_split", spec.features_per_split},
              {"bootstrap", spec.bootstrap},
              {"n_stages", spec.n_stages},
              {"learning_rate", spec.learning_rate},
              {"seed", spec.seed}};
}

ModelSpec spec_from_json(const json& doc) {
  ModelSpec spec;
  spec.kind = model_kind_from_string(doc.at("kind").get<std::string>());
  switch (spec.kind) {
    case ModelKind::decision_tree: spec = ModelSpec::decision_tree_default(); break;
    case ModelKind::random_forest: spec = ModelSpec::random_forest_default(); break;
    case ModelKind::gradient_boosting: spec = ModelSpec::gradient_boosting_default(); break;
  }
  if (doc.contains("max_depth")) spec.tree.max_depth = doc.at("max_depth").get<int>();
  if (doc.contains("min_samples_leaf")) spec.tree.min_samples_leaf = doc.at("min_samples_leaf").get<int>();
  if (doc.contains("min_samples_split")) spec.tree.min_samples_split = doc.at("min_samples_split").get<int>();
  if (doc.contains("n_trees")) spec.n_trees = doc.at("n_trees").get<int>();
  if (doc.contains("features_per_split")) spec.features_per_split = doc.at("features_per_split").get<int>();
  if (doc.contains("bootstrap")) spec.bootstrap = doc.at("bootstrap").get<bool>();
  if (doc.contains("n_stages")) spec.n_stages = doc.at("n_stages").get<int>();
  if (doc.contains("learning_rate")) spec.learning_rate = doc.at("learning_rate").get<double>();
  if (doc.contains("seed")) spec.seed = doc.at("seed").get<std::uint64_t>();
  return spec;
}

json model_to_json(const Model& model) {
  json doc{{"format_version", 1},
           {"kind", to_string(model.spec.kind)},
           {"feature_names", model.feature_names},
           {"spec", spec_to_json(model.spec)}};
  switch (model.spec.kind) {
    case ModelKind::decision_tree:
      doc["tree"] = tree_to_json(model.tree);
      break;
    case ModelKind::random_forest: {
      json trees = json::array();
      for (const auto& t : model.trees) trees.push_back(tree_to_json(t));
      doc["trees"] = std::move(trees);
      break;
    }
    case ModelKind::gradient_boosting: {
      doc["f0"] = model.f0;
      json stages = json::array();
      for (const auto& t : model.stages) stages.push_back(tree_to_json(t));
      doc["stages"] = std::move(stages);
      doc["stage_mse"] = model.stage_mse;
      break;
    }
  }
  return doc;
}

Model model_from_json(const json& doc) {
  if (doc.at("format_version").get<int>() != 1) {
    throw std::runtime_error("unsupported model format_version");
  }
  Model model;
  model.spec = spec_from_json(doc.at("spec"));
  model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
  switch (model.spec.kind) {
    case ModelKind::decision_tree:
      model.tree = tree_from_json(doc.at("tree"));
      break;
    case ModelKind::random_forest:
      for (const auto& t : doc.at("trees")) model.trees.push_back(tree_from_json(t));
      break;
    case ModelKind::gradient_boosting:
      model.f0 = doc.at("f0").get<double>();
      for (const auto& t : doc.at("stages")) model.stages.push_back(tree_from_json(t));
      model.stage_mse = doc.at("stage_mse").get<std::vector<double>>();
      break;
  }
  return model;
}

}  // namespace prunekit
