#include "prunekit/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "prunekit/rng.hpp"

namespace prunekit {
namespace {

constexpr int kExactGuard = 20;
constexpr int kRetrainGuard = 10;

void check_model_table(const Model& model, const FeatureTable& table) {
  if (model.feature_names != table.feature_names) {
    throw std::invalid_argument("model and table feature sets differ");
  }
}

// v(S) for both strategies; retrain caches one refit model per coalition.
class CoalitionValue {
 public:
  CoalitionValue(const Model& model, const FeatureTable& table,
                 const std::vector<std::size_t>& background, const ShapleyOptions& options)
      : model_(model), table_(table), background_(background), options_(options) {
    if (options.strategy == ShapleyStrategy::marginalize) {
      if (background.empty()) throw std::invalid_argument("shapley: empty background set");
    } else {
      if (options.target.empty()) {
        throw std::invalid_argument("shapley: retrain strategy needs a target name");
      }
      const auto& y = table.target(options.target);
      empty_value_ = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    }
  }

  double operator()(std::uint64_t mask, const std::vector<double>& x) {
    if (options_.strategy == ShapleyStrategy::marginalize) {
      double sum = 0.0;
      std::vector<double> z(table_.n_features());
      for (std::size_t b : background_) {
        z = table_.rows[b];
        for (std::size_t j = 0; j < z.size(); ++j) {
          if (mask & (1ULL << j)) z[j] = x[j];
        }
        sum += model_.predict(z);
      }
      return sum / static_cast<double>(background_.size());
    }
    if (mask == 0) return empty_value_;
    const Refit& refit = refit_for(mask);
    std::vector<double> xs;
    xs.reserve(refit.columns.size());
    for (std::size_t j : refit.columns) xs.push_back(x[j]);
    return refit.model.predict(xs);
  }

 private:
  struct Refit {
    std::vector<std::size_t> columns;
    Model model;
  };

  const Refit& refit_for(std::uint64_t mask) {
    auto it = cache_.find(mask);
    if (it != cache_.end()) return it->second;
    Refit refit;
    std::vector<std::string> names;
    for (std::size_t j = 0; j < table_.n_features(); ++j) {
      if (mask & (1ULL << j)) {
        refit.columns.push_back(j);
        names.push_back(table_.feature_names[j]);
      }
    }
    refit.model = train(model_.spec, table_.project(names), options_.target);
    return cache_.emplace(mask, std::move(refit)).first->second;
  }

  const Model& model_;
  const FeatureTable& table_;
  const std::vector<std::size_t>& background_;
  ShapleyOptions options_;
  double empty_value_ = 0.0;
  std::unordered_map<std::uint64_t, Refit> cache_;
};

}  // namespace

std::string to_string(ShapleyStrategy s) {
  return s == ShapleyStrategy::marginalize ? "marginalize" : "retrain";
}

void finalize_rank(ImportanceReport& report) {
  report.rank.clear();
  for (const auto& [name, score] : report.scores) {
    (void)score;
    report.rank.push_back(name);
  }
  std::stable_sort(report.rank.begin(), report.rank.end(),
                   [&](const std::string& a, const std::string& b) {
                     double sa = report.scores.at(a), sb = report.scores.at(b);
                     if (sa != sb) return sa > sb;
                     return a < b;
                   });
}

ImportanceReport permutation_importance(const Model& model, const FeatureTable& table,
                                        const std::string& target, int repeats,
                                        std::uint64_t seed) {
  check_model_table(model, table);
  if (repeats < 1) throw std::invalid_argument("permutation_importance: repeats must be >= 1");

  const std::vector<double>& y = table.target(target);
  const std::size_t n = table.n_samples();
  const std::size_t d = table.n_features();

  std::vector<double> original_pred(n);
  for (std::size_t i = 0; i < n; ++i) original_pred[i] = model.predict(table.rows[i]);
  const double original_mape = mape(y, original_pred);

  ImportanceReport report;
  report.method = "permutation";
  for (std::size_t j = 0; j < d; ++j) {
    double acc = 0.0;
    for (int r = 0; r < repeats; ++r) {
      RngStream stream(seed, "perm_importance",
                       (static_cast<std::uint64_t>(j) << 32) | static_cast<std::uint64_t>(r));
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      stream.shuffle(perm);

      std::vector<double> pred(n);
      std::vector<double> x;
      for (std::size_t i = 0; i < n; ++i) {
        x = table.rows[i];
        x[j] = table.rows[perm[i]][j];
        pred[i] = model.predict(x);
      }
      acc += mape(y, pred) - original_mape;
    }
    report.scores[table.feature_names[j]] = acc / static_cast<double>(repeats);
  }
  report.metadata["repeats"] = std::to_string(repeats);
  report.metadata["seed"] = std::to_string(seed);
  report.metadata["metric"] = "MAPE";
  report.metadata["sign_convention"] = "permuted_error_minus_original_error";
  finalize_rank(report);
  return report;
}

ShapleyExplanation shapley_exact(const Model& model, const FeatureTable& table,
                                 const std::vector<std::size_t>& explain_rows,
                                 const std::vector<std::size_t>& background,
                                 const ShapleyOptions& options) {
  check_model_table(model, table);
  const std::size_t n = table.n_features();
  const int guard = options.strategy == ShapleyStrategy::retrain ? kRetrainGuard : kExactGuard;
  if (n > static_cast<std::size_t>(guard)) {
    throw std::invalid_argument("shapley_exact: n_features exceeds the enumeration guard (" +
                                std::to_string(guard) + ")");
  }

  // w[s] = s! (n-s-1)! / n!
  std::vector<double> weight(n);
  for (std::size_t s = 0; s < n; ++s) {
    double w = 1.0 / static_cast<double>(n);
    for (std::size_t i = 1; i <= s; ++i) {
      w *= static_cast<double>(i) / static_cast<double>(n - i);
    }
    weight[s] = w;
  }

  CoalitionValue value(model, table, background, options);
  const std::uint64_t n_masks = 1ULL << n;

  ShapleyExplanation expl;
  expl.strategy = options.strategy;
  std::vector<double> zero(table.n_features(), 0.0);
  expl.baseline = value(0, explain_rows.empty() ? zero : table.rows[explain_rows.front()]);

  for (std::size_t row : explain_rows) {
    const std::vector<double>& x = table.rows.at(row);
    std::vector<double> v(n_masks);
    for (std::uint64_t mask = 0; mask < n_masks; ++mask) v[mask] = value(mask, x);

    std::vector<double> phi(n, 0.0);
    for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
      const int s = std::popcount(mask);
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1ULL << i)) continue;
        phi[i] += weight[static_cast<std::size_t>(s)] * (v[mask | (1ULL << i)] - v[mask]);
      }
    }
    expl.phi.push_back(std::move(phi));
  }
  return expl;
}

ShapleyExplanation shapley_sampled(const Model& model, const FeatureTable& table,
                                   const std::vector<std::size_t>& explain_rows,
                                   const std::vector<std::size_t>& background,
                                   int n_permutations, std::uint64_t seed,
                                   const ShapleyOptions& options) {
  check_model_table(model, table);
  if (n_permutations < 1) throw std::invalid_argument("shapley_sampled: n_permutations >= 1");
  const std::size_t n = table.n_features();

  CoalitionValue value(model, table, background, options);
  ShapleyExplanation expl;
  expl.strategy = options.strategy;
  std::vector<double> zero(table.n_features(), 0.0);
  expl.baseline = value(0, explain_rows.empty() ? zero : table.rows[explain_rows.front()]);

  for (std::size_t row : explain_rows) {
    const std::vector<double>& x = table.rows.at(row);
    const double v_empty = value(0, x);
    std::vector<double> phi(n, 0.0);
    std::vector<std::size_t> order(n);
    for (int p = 0; p < n_permutations; ++p) {
      RngStream stream(seed, "shapley_perm", static_cast<std::uint64_t>(p));
      std::iota(order.begin(), order.end(), std::size_t{0});
      stream.shuffle(order);
      std::uint64_t mask = 0;
      double prev = v_empty;
      for (std::size_t j : order) {
        mask |= 1ULL << j;
        const double cur = value(mask, x);
        phi[j] += cur - prev;
        prev = cur;
      }
    }
    for (double& p : phi) p /= static_cast<double>(n_permutations);
    expl.phi.push_back(std::move(phi));
  }
  return expl;
}

ImportanceReport shapley_global(const ShapleyExplanation& expl,
                                const std::vector<std::string>& feature_names) {
  if (expl.phi.empty()) throw std::invalid_argument("shapley_global: empty explanation");
  ImportanceReport report;
  report.method = "shapley";
  for (std::size_t j = 0; j < feature_names.size(); ++j) {
    double acc = 0.0;
    for (const auto& row : expl.phi) acc += std::abs(row.at(j));
    report.scores[feature_names[j]] = acc / static_cast<double>(expl.phi.size());
  }
  report.metadata["aggregation"] = "mean_abs_phi";
  report.metadata["strategy"] = to_string(expl.strategy);
  finalize_rank(report);
  return report;
}

ImportanceReport select_k_best_scores(const FeatureTable& table, const std::string& target) {
  const std::vector<double>& y = table.target(target);
  const std::size_t n = table.n_samples();
  if (n < 3) throw std::invalid_argument("select_k_best_scores: need n_samples >= 3");

  const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double y_var = 0.0;
  for (double v : y) y_var += (v - y_mean) * (v - y_mean);

  ImportanceReport report;
  report.method = "select_k_best";
  std::vector<std::string> warned;
  for (std::size_t j = 0; j < table.n_features(); ++j) {
    double x_mean = 0.0;
    for (const auto& row : table.rows) x_mean += row[j];
    x_mean /= static_cast<double>(n);
    double x_var = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = table.rows[i][j] - x_mean;
      x_var += dx * dx;
      cov += dx * (y[i] - y_mean);
    }
    double score;
    if (x_var <= 0.0 || y_var <= 0.0) {
      score = 0.0;
      warned.push_back(table.feature_names[j]);
    } else {
      const double r = cov / std::sqrt(x_var * y_var);
      if (std::abs(r) >= 1.0 - 1e-12) {
        score = std::numeric_limits<double>::infinity();
      } else {
        score = r * r / (1.0 - r * r) * static_cast<double>(n - 2);
      }
    }
    report.scores[table.feature_names[j]] = score;
  }
  if (!warned.empty()) {
    std::string joined;
    for (const auto& w : warned) {
      if (!joined.empty()) joined += ",";
      joined += w;
    }
    report.metadata["warning_zero_variance"] = joined;
  }
  report.metadata["score"] = "univariate_f_statistic";
  finalize_rank(report);
  return report;
}

}  // namespace prunekit
