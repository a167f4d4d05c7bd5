#include "prunekit/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "prunekit/fft.hpp"
#include "prunekit/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace prunekit {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

double parse_number(const std::string& s, std::size_t row, const std::string& column) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  double value = 0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || begin == end) {
    throw std::runtime_error("non-numeric cell \"" + s + "\" at row " + std::to_string(row) +
                             ", column \"" + column + "\"");
  }
  return value;
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  double h = static_cast<double>(n - 1) * p;
  std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted.back();
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

FeatureTable FeatureTable::project(const std::vector<std::string>& features) const {
  std::vector<int> idx;
  idx.reserve(features.size());
  for (const auto& f : features) {
    int j = feature_index(f);
    if (j < 0) throw std::invalid_argument("project: unknown feature \"" + f + "\"");
    idx.push_back(j);
  }
  FeatureTable out;
  out.feature_names = features;
  out.targets = targets;
  out.rows.reserve(rows.size());
  for (const auto& row : rows) {
    std::vector<double> r;
    r.reserve(idx.size());
    for (int j : idx) r.push_back(row[static_cast<std::size_t>(j)]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

FeatureTable FeatureTable::subset(const std::vector<std::size_t>& row_indices) const {
  FeatureTable out;
  out.feature_names = feature_names;
  out.rows.reserve(row_indices.size());
  for (std::size_t i : row_indices) {
    if (i >= rows.size()) throw std::out_of_range("subset: row index out of range");
    out.rows.push_back(rows[i]);
  }
  for (const auto& [name, col] : targets) {
    std::vector<double> sub;
    sub.reserve(row_indices.size());
    for (std::size_t i : row_indices) sub.push_back(col[i]);
    out.targets.emplace(name, std::move(sub));
  }
  return out;
}

const std::vector<double>& FeatureTable::target(const std::string& name) const {
  auto it = targets.find(name);
  if (it == targets.end()) throw std::invalid_argument("unknown target \"" + name + "\"");
  return it->second;
}

int FeatureTable::feature_index(const std::string& name) const {
  auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) return -1;
  return static_cast<int>(it - feature_names.begin());
}

BoxPlotSummary five_number_summary(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("five_number_summary: empty sequence");
  for (double x : xs) {
    if (!std::isfinite(x)) throw std::invalid_argument("five_number_summary: non-finite sample");
  }
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  BoxPlotSummary s;
  s.min = sorted.front();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  s.max = sorted.back();
  return s;
}

std::vector<double> dft_magnitude(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("dft_magnitude: empty sequence");
  const std::size_t n = fft::next_pow2(xs.size());
  std::vector<std::complex<double>> a(n, {0.0, 0.0});
  for (std::size_t i = 0; i < xs.size(); ++i) a[i] = {xs[i], 0.0};
  fft::transform(a);
  std::vector<double> mags(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) mags[k] = std::abs(a[k]);
  return mags;
}

FeatureTable load_feature_table(const std::string& path,
                                const std::vector<std::string>& target_columns) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open \"" + path + "\"");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV \"" + path + "\"");
  std::vector<std::string> header = split_csv_line(line);
  {
    std::set<std::string> seen;
    for (const auto& h : header) {
      if (!seen.insert(h).second) {
        throw std::runtime_error("duplicate header column \"" + h + "\" in " + path);
      }
    }
  }
  std::set<std::string> target_set(target_columns.begin(), target_columns.end());
  for (const auto& t : target_columns) {
    if (std::find(header.begin(), header.end(), t) == header.end()) {
      throw std::runtime_error("target column \"" + t + "\" absent from " + path);
    }
  }

  FeatureTable table;
  std::vector<int> kind(header.size());  // feature index or ~target
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (target_set.count(header[j])) {
      kind[j] = -1;
      table.targets.emplace(header[j], std::vector<double>{});
    } else {
      kind[j] = static_cast<int>(table.feature_names.size());
      table.feature_names.push_back(header[j]);
    }
  }

  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("row " + std::to_string(row_no) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(header.size()) + " in " + path);
    }
    std::vector<double> row(table.feature_names.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      double v = parse_number(cells[j], row_no, header[j]);
      if (kind[j] >= 0) {
        row[static_cast<std::size_t>(kind[j])] = v;
      } else {
        table.targets[header[j]].push_back(v);
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw std::runtime_error("CSV \"" + path + "\" has no data rows");
  return table;
}

void save_feature_table(const FeatureTable& table, const std::string& path) {
  std::ostringstream out;
  std::vector<std::string> header = table.feature_names;
  for (const auto& [name, col] : table.targets) {
    (void)col;
    header.push_back(name);
  }
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out << ',';
    out << header[j];
  }
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    bool first = true;
    for (double v : table.rows[i]) {
      if (!first) out << ',';
      first = false;
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      (void)ec;
      out.write(buf, ptr - buf);
    }
    for (const auto& [name, col] : table.targets) {
      (void)name;
      if (!first) out << ',';
      first = false;
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, col[i]);
      (void)ec;
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write \"" + path + "\"");
  f << out.str();
}

std::vector<TimeSeriesRecord> load_timeseries_dir(const std::string& root) {
  if (!fs::is_directory(root)) throw std::runtime_error("not a directory: \"" + root + "\"");
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) ids.push_back(entry.path().filename().string());
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) throw std::runtime_error("no record directories under \"" + root + "\"");

  std::vector<TimeSeriesRecord> records;
  for (const auto& id : ids) {
    fs::path dir = fs::path(root) / id;
    TimeSeriesRecord rec;
    rec.id = id;

    fs::path meta = dir / "meta.json";
    std::ifstream mf(meta);
    if (!mf) throw std::runtime_error("record \"" + id + "\": missing meta.json");
    json m;
    try {
      mf >> m;
    } catch (const json::exception& e) {
      throw std::runtime_error("record \"" + id + "\": bad meta.json: " + e.what());
    }
    if (!m.contains("config") || !m.contains("targets")) {
      throw std::runtime_error("record \"" + id + "\": meta.json needs \"config\" and \"targets\"");
    }
    for (const auto& [k, v] : m.at("config").items()) rec.config[k] = v.get<double>();
    for (const auto& [k, v] : m.at("targets").items()) {
      double t = v.get<double>();
      if (!std::isfinite(t)) throw std::runtime_error("record \"" + id + "\": non-finite target " + k);
      rec.targets[k] = t;
    }

    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
      std::string channel = entry.path().stem().string();
      std::ifstream cf(entry.path());
      std::vector<double> samples;
      std::string line;
      std::size_t row_no = 0;
      while (std::getline(cf, line)) {
        ++row_no;
        if (line.empty() || line == "\r") continue;
        samples.push_back(parse_number(split_csv_line(line)[0], row_no, channel));
      }
      if (samples.empty()) {
        throw std::runtime_error("record \"" + id + "\": channel \"" + channel + "\" is empty");
      }
      rec.channels.emplace(std::move(channel), std::move(samples));
    }
    if (rec.channels.empty()) throw std::runtime_error("record \"" + id + "\": no channel CSVs");
    records.push_back(std::move(rec));
  }
  return records;
}

FeatureTable extract_features(const std::vector<TimeSeriesRecord>& records,
                              const ExtractOptions& opts) {
  if (records.empty()) throw std::invalid_argument("extract_features: no records");

  const auto& first = records.front();
  auto key_set = [](const auto& m) {
    std::vector<std::string> keys;
    for (const auto& [k, v] : m) {
      (void)v;
      keys.push_back(k);
    }
    return keys;
  };
  const std::vector<std::string> channel_names = key_set(first.channels);
  const std::vector<std::string> config_names = key_set(first.config);
  const std::vector<std::string> target_names = key_set(first.targets);
  for (const auto& rec : records) {
    if (key_set(rec.channels) != channel_names || key_set(rec.config) != config_names ||
        key_set(rec.targets) != target_names) {
      throw std::invalid_argument("extract_features: record \"" + rec.id +
                                  "\" has a different channel/config/target schema");
    }
  }

  static const char* kStats[] = {"min", "q1", "median", "q3", "max"};
  FeatureTable table;
  for (const auto& ch : channel_names) {
    for (const char* s : kStats) table.feature_names.push_back(ch + "_ts_" + s);
    for (const char* s : kStats) table.feature_names.push_back(ch + "_fq_" + s);
  }
  for (const auto& c : config_names) table.feature_names.push_back(c);

  table.rows.resize(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    const auto& rec = records[i];
    std::vector<double> row;
    row.reserve(table.feature_names.size());
    for (const auto& ch : channel_names) {
      const auto& samples = rec.channels.at(ch);
      BoxPlotSummary ts = five_number_summary(samples);
      std::vector<double> spectrum = dft_magnitude(samples);
      if (!opts.include_dc && spectrum.size() > 1) spectrum.erase(spectrum.begin());
      BoxPlotSummary fq = five_number_summary(spectrum);
      for (double v : {ts.min, ts.q1, ts.median, ts.q3, ts.max}) row.push_back(v);
      for (double v : {fq.min, fq.q1, fq.median, fq.q3, fq.max}) row.push_back(v);
    }
    for (const auto& c : config_names) row.push_back(rec.config.at(c));
    table.rows[i] = std::move(row);
  });

  for (const auto& t : target_names) {
    std::vector<double> col;
    col.reserve(records.size());
    for (const auto& rec : records) col.push_back(rec.targets.at(t));
    table.targets.emplace(t, std::move(col));
  }
  return table;
}

std::vector<TimeSeriesRecord> truncate_records(const std::vector<TimeSeriesRecord>& records,
                                               double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw std::invalid_argument("truncate_records: fraction must be in (0, 1]");
  }
  std::vector<TimeSeriesRecord> out = records;
  for (auto& rec : out) {
    for (auto& [name, samples] : rec.channels) {
      (void)name;
      auto keep = static_cast<std::size_t>(
          std::ceil(fraction * static_cast<double>(samples.size())));
      if (keep < samples.size()) samples.resize(keep);
    }
  }
  return out;
}

}  // namespace prunekit
