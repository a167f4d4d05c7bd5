#include "prunekit/eval.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "prunekit/rng.hpp"

using nlohmann::json;

namespace prunekit {

double mape(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
  if (y_true.empty() || y_true.size() != y_pred.size()) {
    throw std::invalid_argument("mape: vectors must be non-empty and of equal length");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == 0.0) {
      throw std::domain_error("mape: zero ground-truth value at index " + std::to_string(i));
    }
    acc += std::abs(y_true[i] - y_pred[i]) / std::abs(y_true[i]);
  }
  return 100.0 * acc / static_cast<double>(y_true.size());
}

std::vector<int> kfold_split(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    throw std::invalid_argument("kfold_split: need 2 <= k <= n");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream stream(seed, "kfold");
  stream.shuffle(order);

  std::vector<int> assignment(n, -1);
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (int fold = 0; fold < k; ++fold) {
    std::size_t size = base + (static_cast<std::size_t>(fold) < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) assignment[order[pos++]] = fold;
  }
  return assignment;
}

CVReport cross_validate(const ModelSpec& spec, const FeatureTable& table,
                        const std::string& target, int k, std::uint64_t seed) {
  const std::vector<double>& y = table.target(target);
  CVReport report;
  report.k = k;
  report.seed = seed;
  report.fold_assignments = kfold_split(table.n_samples(), k, seed);
  report.fold_scores.resize(static_cast<std::size_t>(k));

  for (int fold = 0; fold < k; ++fold) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < table.n_samples(); ++i) {
      (report.fold_assignments[i] == fold ? test_idx : train_idx).push_back(i);
    }
    Model model = train(spec, table.subset(train_idx), target);
    std::vector<double> y_true, y_pred;
    y_true.reserve(test_idx.size());
    y_pred.reserve(test_idx.size());
    for (std::size_t i : test_idx) {
      y_true.push_back(y[i]);
      y_pred.push_back(model.predict(table.rows[i]));
    }
    report.fold_scores[static_cast<std::size_t>(fold)] = mape(y_true, y_pred);
  }
  report.mean_mape = std::accumulate(report.fold_scores.begin(), report.fold_scores.end(), 0.0) /
                     static_cast<double>(k);
  return report;
}

json cv_report_to_json(const CVReport& report) {
  return json{{"fold_scores", report.fold_scores},
              {"mean_mape", report.mean_mape},
              {"fold_assignments", report.fold_assignments},
              {"k", report.k},
              {"seed", report.seed}};
}

CVReport cv_report_from_json(const json& doc) {
  CVReport report;
  report.fold_scores = doc.at("fold_scores").get<std::vector<double>>();
  report.mean_mape = doc.at("mean_mape").get<double>();
  report.fold_assignments = doc.at("fold_assignments").get<std::vector<int>>();
  report.k = doc.at("k").get<int>();
  report.seed = doc.at("seed").get<std::uint64_t>();
  return report;
}

}  // namespace prunekit
