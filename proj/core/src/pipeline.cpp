#include "prunekit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "prunekit/parallel.hpp"
#include "prunekit/rng.hpp"

namespace prunekit {
namespace {

struct AttributionSplit {
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> held_rows;
};

AttributionSplit attribution_split(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("rank_features: need at least 2 samples");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream stream(seed, "attrib_split");
  stream.shuffle(order);
  std::size_t n_held = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                    std::floor(0.2 * static_cast<double>(n) + 0.5)));
  if (n_held >= n) n_held = n - 1;
  AttributionSplit split;
  split.held_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_held));
  split.train_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_held), order.end());
  std::sort(split.held_rows.begin(), split.held_rows.end());
  std::sort(split.train_rows.begin(), split.train_rows.end());
  return split;
}

std::vector<std::size_t> capped_sample(const std::vector<std::size_t>& rows, std::size_t cap,
                                       std::uint64_t seed, std::string_view purpose) {
  if (rows.size() <= cap) return rows;
  RngStream stream(seed, purpose);
  std::vector<std::size_t> picks = stream.sample_without_replacement(rows.size(), cap);
  std::vector<std::size_t> out;
  out.reserve(cap);
  for (std::size_t i : picks) out.push_back(rows[i]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::size_t top_feature_count(double p, std::size_t n_features) {
  auto m = static_cast<std::size_t>(
      std::floor(p / 100.0 * static_cast<double>(n_features) + 0.5));
  return std::max<std::size_t>(1, m);
}

ImportanceReport rank_features(const ModelSpec& spec, const FeatureTable& table,
                               const std::string& target, const std::string& method,
                               std::uint64_t seed, const RankOptions& options) {
  if (method == "select_k_best") {
    return select_k_best_scores(table, target);
  }
  if (method != "permutation" && method != "shapley") {
    throw std::invalid_argument("unknown attribution method \"" + method +
                                "\" (valid: permutation, shapley, select_k_best)");
  }

  AttributionSplit split = attribution_split(table.n_samples(), seed);
  Model model = train(spec, table.subset(split.train_rows), target);

  if (method == "permutation") {
    ImportanceReport report = permutation_importance(model, table.subset(split.held_rows), target,
                                                     options.permutation_repeats, seed);
    report.metadata["evaluated_on"] = "held_out_20pct";
    return report;
  }

  std::vector<std::size_t> background =
      capped_sample(split.train_rows, options.background_cap, seed, "shap_background");
  std::vector<std::size_t> explain_rows =
      capped_sample(split.held_rows, options.explain_cap, seed, "shap_explain");
  ShapleyExplanation expl = shapley_sampled(model, table, explain_rows, background,
                                            options.shapley_permutations, seed);
  ImportanceReport report = shapley_global(expl, table.feature_names);
  report.metadata["n_permutations"] = std::to_string(options.shapley_permutations);
  report.metadata["background_size"] = std::to_string(background.size());
  report.metadata["explained_rows"] = std::to_string(explain_rows.size());
  report.metadata["seed"] = std::to_string(seed);
  report.metadata["evaluated_on"] = "held_out_20pct";
  return report;
}

SweepResult feature_sweep(const ModelSpec& spec, const FeatureTable& table,
                          const std::string& target, const std::string& method,
                          const std::vector<double>& grid, int k, std::uint64_t seed,
                          const RankOptions& options) {
  if (grid.empty()) throw std::invalid_argument("feature_sweep: empty grid");
  bool has_baseline = false;
  for (double p : grid) {
    if (!(p > 0.0) || p > 100.0) throw std::invalid_argument("feature_sweep: p must be in (0, 100]");
    if (p == 100.0) has_baseline = true;
  }
  if (!has_baseline) throw std::invalid_argument("feature_sweep: grid must contain 100 (baseline)");

  SweepResult result;
  result.method = method;
  result.grid = grid;
  result.ranking = rank_features(spec, table, target, method, seed, options);
  result.metadata["rounding"] = "round_half_up(p/100*n_features), min 1";
  result.metadata["fold_seed"] = std::to_string(seed);

  result.points.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t gi) {
    const double p = grid[gi];
    SweepPoint point;
    point.p = p;
    const std::size_t m = top_feature_count(p, table.n_features());
    point.selected_features.assign(result.ranking.rank.begin(),
                                   result.ranking.rank.begin() + static_cast<std::ptrdiff_t>(m));
    // train in original column order so the p=100 point reproduces the
    // unprojected table exactly
    std::vector<std::string> ordered = point.selected_features;
    std::sort(ordered.begin(), ordered.end(), [&](const std::string& a, const std::string& b) {
      return table.feature_index(a) < table.feature_index(b);
    });
    point.cv = cross_validate(spec, table.project(ordered), target, k, seed);
    result.points[gi] = std::move(point);
  });

  const SweepPoint* best = nullptr;
  for (const auto& point : result.points) {
    if (!best) {
      best = &point;
      continue;
    }
    if (point.cv.mean_mape < best->cv.mean_mape ||
        (point.cv.mean_mape == best->cv.mean_mape &&
         (point.selected_features.size() < best->selected_features.size() ||
          (point.selected_features.size() == best->selected_features.size() &&
           point.p < best->p)))) {
      best = &point;
    }
  }
  result.best_p = best->p;
  result.best_features = best->selected_features;
  for (const auto& point : result.points) {
    if (point.p == 100.0) {
      result.baseline_cv = point.cv;
      break;
    }
  }
  return result;
}

IntervalResult interval_experiment(const ModelSpec& spec,
                                   const std::vector<TimeSeriesRecord>& records,
                                   const std::string& target,
                                   const std::vector<double>& fractions, int k,
                                   std::uint64_t seed) {
  if (fractions.empty()) throw std::invalid_argument("interval_experiment: no fractions");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] > 0.0) || fractions[i] > 1.0) {
      throw std::invalid_argument("interval_experiment: fractions must be in (0, 1]");
    }
    if (i > 0 && !(fractions[i] > fractions[i - 1])) {
      throw std::invalid_argument("interval_experiment: fractions must be strictly increasing");
    }
  }
  IntervalResult result;
  result.points.resize(fractions.size());
  parallel_for(fractions.size(), [&](std::size_t i) {
    FeatureTable table = extract_features(truncate_records(records, fractions[i]));
    result.points[i] = IntervalPoint{fractions[i], cross_validate(spec, table, target, k, seed)};
  });
  return result;
}

FeatureTable generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_samples < 1) throw std::invalid_argument("generate_synthetic: n_samples >= 1");
  if (spec.noise_sigma < 0.0) throw std::invalid_argument("generate_synthetic: noise_sigma >= 0");
  bool any_nonzero = std::any_of(spec.relevant.begin(), spec.relevant.end(),
                                 [](double c) { return c != 0.0; });
  if (!any_nonzero) {
    throw std::invalid_argument("generate_synthetic: need at least one nonzero coefficient");
  }

  FeatureTable table;
  for (std::size_t j = 0; j < spec.relevant.size(); ++j) {
    table.feature_names.push_back("rel_" + std::to_string(j));
  }
  for (int j = 0; j < spec.n_irrelevant; ++j) {
    table.feature_names.push_back("noise_" + std::to_string(j));
  }

  RngStream stream(spec.seed, "synthetic");
  std::vector<double> y;
  y.reserve(spec.n_samples);
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    std::vector<double> row;
    row.reserve(table.feature_names.size());
    double target = 10.0;  // shift keeps targets positive so MAPE is defined
    for (double coeff : spec.relevant) {
      double x = 1.0 + stream.next_double();
      row.push_back(x);
      target += coeff * x;
    }
    for (int j = 0; j < spec.n_irrelevant; ++j) row.push_back(1.0 + stream.next_double());
    if (spec.noise_sigma > 0.0) target += spec.noise_sigma * stream.next_gaussian();
    table.rows.push_back(std::move(row));
    y.push_back(target);
  }
  table.targets.emplace(spec.target_name, std::move(y));
  return table;
}

std::vector<TimeSeriesRecord> generate_synthetic_records(const SyntheticSeriesSpec& spec) {
  if (spec.n_records < 1) throw std::invalid_argument("generate_synthetic_records: n_records >= 1");
  if (spec.min_length < 1 || spec.max_length < spec.min_length) {
    throw std::invalid_argument("generate_synthetic_records: bad length range");
  }
  std::vector<TimeSeriesRecord> records;
  records.reserve(spec.n_records);
  for (std::size_t r = 0; r < spec.n_records; ++r) {
    RngStream stream(spec.seed, "synth_series", r);
    TimeSeriesRecord rec;
    rec.id = "rec_" + std::string(3 - std::min<std::size_t>(3, std::to_string(r).size()), '0') +
             std::to_string(r);
    const double level_fa = 1.0 + stream.next_double();
    const double level_fz = 1.0 + stream.next_double();
    for (const auto& [name, level] : {std::pair<std::string, double>{"fa", level_fa},
                                      std::pair<std::string, double>{"fz", level_fz}}) {
      std::size_t len = spec.min_length +
                        static_cast<std::size_t>(stream.next_below(spec.max_length - spec.min_length + 1));
      std::vector<double> samples(len);
      for (std::size_t t = 0; t < len; ++t) {
        // the channel level carries the signal from the first sample on
        samples[t] = level * (1.0 + 0.02 * stream.next_gaussian());
      }
      rec.channels.emplace(name, std::move(samples));
    }
    rec.config["cutting_speed"] = 100.0 + 50.0 * stream.next_double();
    rec.config["depth_of_cut"] = 0.5 + stream.next_double();
    rec.config["feed_rate"] = 0.1 + 0.2 * stream.next_double();
    double target = 5.0 + 3.0 * level_fa + 2.0 * level_fz;
    if (spec.noise_sigma > 0.0) target += spec.noise_sigma * stream.next_gaussian();
    rec.targets["Ra"] = target;
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace prunekit
