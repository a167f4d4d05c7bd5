#pragma once

#include <map>
#include <string>
#include <vector>

namespace prunekit {

// One experiment: variable-length sensor channels, machine configuration
// parameters and the measured quality targets.
struct TimeSeriesRecord {
  std::string id;
  std::map<std::string, std::vector<double>> channels;
  std::map<std::string, double> config;
  std::map<std::string, double> targets;
};

// min <= q1 <= median <= q3 <= max
struct BoxPlotSummary {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

// Named feature matrix plus named target columns. The universal dataset
// currency of the library.
struct FeatureTable {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> rows;              // n_samples x n_features
  std::map<std::string, std::vector<double>> targets; // each of length n_samples

  std::size_t n_samples() const { return rows.size(); }
  std::size_t n_features() const { return feature_names.size(); }

  // Throws if a feature name is unknown. Target columns are kept as-is.
  FeatureTable project(const std::vector<std::string>& features) const;

  // Rows (and target entries) at the given indices, in the given order.
  FeatureTable subset(const std::vector<std::size_t>& row_indices) const;

  const std::vector<double>& target(const std::string& name) const;
  int feature_index(const std::string& name) const;  // -1 if absent
};

// Quartiles use linear interpolation at index h = (n-1)*p on the sorted
// sequence. Throws on empty or non-finite input.
BoxPlotSummary five_number_summary(const std::vector<double>& xs);

// One-sided magnitude spectrum |X_k|, k = 0..n/2 (DC included). The input is
// zero-padded to the next power of two and transformed with a radix-2 FFT,
// so n here is the padded length.
std::vector<double> dft_magnitude(const std::vector<double>& xs);

// CSV with header; every non-target column becomes a feature, in header order.
FeatureTable load_feature_table(const std::string& path,
                                const std::vector<std::string>& target_columns);

void save_feature_table(const FeatureTable& table, const std::string& path);

// Dataset layout: <root>/<record-id>/{<channel>.csv, meta.json}.
std::vector<TimeSeriesRecord> load_timeseries_dir(const std::string& root);

struct ExtractOptions {
  bool include_dc = true;  // drop bin 0 from the frequency-domain summary when false
};

// Per channel: 5 time-domain and 5 frequency-domain box-plot features, plus
// one feature per config parameter. Channels and configs in sorted name
// order; rows follow record order.
FeatureTable extract_features(const std::vector<TimeSeriesRecord>& records,
                              const ExtractOptions& opts = {});

// Keeps the first ceil(fraction * len) samples of every channel.
std::vector<TimeSeriesRecord> truncate_records(const std::vector<TimeSeriesRecord>& records,
                                               double fraction);

}  // namespace prunekit
