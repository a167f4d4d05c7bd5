#include "prunekit/cli.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "prunekit/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace prunekit {
namespace {

const std::set<std::string> kValidMethods = {"permutation", "shapley", "select_k_best"};

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Holds <output_dir>/.prunekit.lock for the duration of a command.
class OutputLock {
 public:
  explicit OutputLock(const std::string& output_dir) {
    fs::create_directories(output_dir);
    path_ = fs::path(output_dir) / ".prunekit.lock";
    if (fs::exists(path_)) {
      throw std::runtime_error("output_dir is locked by another run: " + path_.string());
    }
    std::ofstream(path_) << "prunekit " << kToolVersion << "\n";
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write \"" + path + "\"");
  out << content;
}

void write_json(const std::string& path, json doc, const RunConfig& config) {
  doc["provenance"] = {{"tool", "prunekit"},
                       {"version", kToolVersion},
                       {"config_hash", config.config_hash}};
  write_text(path, doc.dump(2) + "\n");
}

SyntheticSpec synthetic_from_json(const json& doc) {
  SyntheticSpec spec;
  if (doc.contains("n_samples")) spec.n_samples = doc.at("n_samples").get<std::size_t>();
  spec.relevant = doc.at("relevant").get<std::vector<double>>();
  if (doc.contains("n_irrelevant")) spec.n_irrelevant = doc.at("n_irrelevant").get<int>();
  if (doc.contains("noise_sigma")) spec.noise_sigma = doc.at("noise_sigma").get<double>();
  if (doc.contains("seed")) spec.seed = doc.at("seed").get<std::uint64_t>();
  return spec;
}

SyntheticSeriesSpec synthetic_series_from_json(const json& doc) {
  SyntheticSeriesSpec spec;
  if (doc.contains("n_records")) spec.n_records = doc.at("n_records").get<std::size_t>();
  if (doc.contains("min_length")) spec.min_length = doc.at("min_length").get<std::size_t>();
  if (doc.contains("max_length")) spec.max_length = doc.at("max_length").get<std::size_t>();
  if (doc.contains("noise_sigma")) spec.noise_sigma = doc.at("noise_sigma").get<double>();
  if (doc.contains("seed")) spec.seed = doc.at("seed").get<std::uint64_t>();
  return spec;
}

}  // namespace

std::string to_string(InputFormat format) {
  switch (format) {
    case InputFormat::feature_csv: return "feature_csv";
    case InputFormat::timeseries_dir: return "timeseries_dir";
    case InputFormat::synthetic: return "synthetic";
    case InputFormat::synthetic_series: return "synthetic_series";
  }
  throw std::logic_error("unreachable");
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config \"" + path + "\"");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error("bad JSON in config \"" + path + "\": " + e.what());
  }

  RunConfig config;
  config.config_hash = fnv1a_hex(doc.dump());

  const json& input = doc.at("input");
  const std::string format = input.at("format").get<std::string>();
  if (format == "feature_csv") {
    config.format = InputFormat::feature_csv;
    config.input_path = input.at("path").get<std::string>();
  } else if (format == "timeseries_dir") {
    config.format = InputFormat::timeseries_dir;
    config.input_path = input.at("path").get<std::string>();
  } else if (format == "synthetic") {
    config.format = InputFormat::synthetic;
    config.synthetic = synthetic_from_json(input.at("synthetic"));
  } else if (format == "synthetic_series") {
    config.format = InputFormat::synthetic_series;
    config.synthetic_series = synthetic_series_from_json(input.at("synthetic_series"));
  } else {
    throw std::runtime_error(
        "config: unknown input format \"" + format +
        "\" (valid: feature_csv, timeseries_dir, synthetic, synthetic_series)");
  }

  config.target = doc.at("target").get<std::string>();
  config.synthetic.target_name = config.target;
  config.model = spec_from_json(doc.at("model"));

  if (doc.contains("methods")) {
    config.methods = doc.at("methods").get<std::vector<std::string>>();
  } else {
    config.methods = {"permutation"};
  }
  for (const auto& m : config.methods) {
    if (!kValidMethods.count(m)) {
      throw std::runtime_error("config: unknown method \"" + m +
                               "\" (valid: permutation, shapley, select_k_best)");
    }
  }

  if (doc.contains("grid")) {
    config.grid = doc.at("grid").get<std::vector<double>>();
  } else {
    for (int p = 10; p <= 100; p += 10) config.grid.push_back(p);
  }
  if (doc.contains("fractions")) {
    config.fractions = doc.at("fractions").get<std::vector<double>>();
  } else {
    for (int f = 1; f <= 10; ++f) config.fractions.push_back(f / 10.0);
  }

  if (doc.contains("k")) config.k = doc.at("k").get<int>();
  if (config.k < 2) throw std::runtime_error("config: k must be >= 2");
  if (doc.contains("seed")) config.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("output_dir")) config.output_dir = doc.at("output_dir").get<std::string>();

  if (doc.contains("rank")) {
    const json& r = doc.at("rank");
    if (r.contains("permutation_repeats")) config.rank.permutation_repeats = r.at("permutation_repeats").get<int>();
    if (r.contains("shapley_permutations")) config.rank.shapley_permutations = r.at("shapley_permutations").get<int>();
    if (r.contains("background_cap")) config.rank.background_cap = r.at("background_cap").get<std::size_t>();
    if (r.contains("explain_cap")) config.rank.explain_cap = r.at("explain_cap").get<std::size_t>();
  }
  return config;
}

FeatureTable load_input_table(const RunConfig& config) {
  switch (config.format) {
    case InputFormat::feature_csv:
      return load_feature_table(config.input_path, {config.target});
    case InputFormat::timeseries_dir:
      return extract_features(load_timeseries_dir(config.input_path));
    case InputFormat::synthetic:
      return generate_synthetic(config.synthetic);
    case InputFormat::synthetic_series:
      return extract_features(generate_synthetic_records(config.synthetic_series));
  }
  throw std::logic_error("unreachable");
}

std::vector<TimeSeriesRecord> load_input_records(const RunConfig& config) {
  switch (config.format) {
    case InputFormat::timeseries_dir:
      return load_timeseries_dir(config.input_path);
    case InputFormat::synthetic_series:
      return generate_synthetic_records(config.synthetic_series);
    default:
      throw std::runtime_error("this command needs raw series input (timeseries_dir or "
                               "synthetic_series), got " + to_string(config.format));
  }
}

std::vector<std::string> cmd_preprocess(const RunConfig& config) {
  OutputLock lock(config.output_dir);
  FeatureTable table = extract_features(load_input_records(config));
  std::string path = (fs::path(config.output_dir) / "features.csv").string();
  save_feature_table(table, path);
  return {path};
}

std::vector<std::string> cmd_train(const RunConfig& config) {
  OutputLock lock(config.output_dir);
  FeatureTable table = load_input_table(config);
  CVReport cv = cross_validate(config.model, table, config.target, config.k, config.seed);
  Model model = train(config.model, table, config.target);

  std::string model_path = (fs::path(config.output_dir) / "model.json").string();
  std::string cv_path = (fs::path(config.output_dir) / "cv_report.json").string();
  write_json(model_path, model_to_json(model), config);
  write_json(cv_path, cv_report_to_json(cv), config);
  return {model_path, cv_path};
}

std::vector<std::string> cmd_explain(const RunConfig& config) {
  if (config.methods.empty()) throw std::runtime_error("config: methods must be non-empty");
  OutputLock lock(config.output_dir);
  FeatureTable table = load_input_table(config);
  std::vector<std::string> artifacts;
  for (const auto& method : config.methods) {
    ImportanceReport report =
        rank_features(config.model, table, config.target, method, config.seed, config.rank);
    fs::path base = fs::path(config.output_dir) / ("importance_" + method);
    write_json(base.string() + ".json", importance_report_to_json(report), config);
    write_text(base.string() + ".csv", importance_report_csv(report));
    write_text(base.string() + ".svg",
               importance_bar_svg(report, "Feature importance (" + method + ")"));
    for (const char* ext : {".json", ".csv", ".svg"}) artifacts.push_back(base.string() + ext);
  }
  return artifacts;
}

std::vector<std::string> cmd_sweep(const RunConfig& config) {
  if (config.methods.empty()) throw std::runtime_error("config: methods must be non-empty");
  OutputLock lock(config.output_dir);
  FeatureTable table = load_input_table(config);
  std::vector<std::string> artifacts;
  std::vector<SweepResult> results;
  for (const auto& method : config.methods) {
    SweepResult result = feature_sweep(config.model, table, config.target, method, config.grid,
                                       config.k, config.seed, config.rank);
    fs::path base = fs::path(config.output_dir) / ("sweep_" + method);
    write_json(base.string() + ".json", sweep_to_json(result), config);
    write_text(base.string() + ".csv", sweep_csv(result));
    artifacts.push_back(base.string() + ".json");
    artifacts.push_back(base.string() + ".csv");
    results.push_back(std::move(result));
  }
  std::string svg_path = (fs::path(config.output_dir) / "sweep.svg").string();
  write_text(svg_path, sweep_chart_svg(results, "Mean MAPE vs top p% features (" + config.target + ")"));
  artifacts.push_back(svg_path);
  return artifacts;
}

std::vector<std::string> cmd_intervals(const RunConfig& config) {
  OutputLock lock(config.output_dir);
  std::vector<TimeSeriesRecord> records = load_input_records(config);
  IntervalResult result = interval_experiment(config.model, records, config.target,
                                              config.fractions, config.k, config.seed);
  fs::path base = fs::path(config.output_dir) / "intervals";
  write_json(base.string() + ".json", interval_to_json(result), config);
  write_text(base.string() + ".csv", interval_csv(result));
  write_text(base.string() + ".svg",
             interval_chart_svg(result, "Prediction error vs data fraction (" + config.target + ")"));
  return {base.string() + ".json", base.string() + ".csv", base.string() + ".svg"};
}

std::vector<std::string> cmd_synth(const RunConfig& config) {
  OutputLock lock(config.output_dir);
  if (config.format == InputFormat::synthetic) {
    FeatureTable table = generate_synthetic(config.synthetic);
    std::string path = (fs::path(config.output_dir) / "features.csv").string();
    save_feature_table(table, path);
    return {path};
  }
  if (config.format == InputFormat::synthetic_series) {
    std::vector<TimeSeriesRecord> records = generate_synthetic_records(config.synthetic_series);
    fs::path root = fs::path(config.output_dir) / "dataset";
    std::vector<std::string> artifacts;
    for (const auto& rec : records) {
      fs::path dir = root / rec.id;
      fs::create_directories(dir);
      for (const auto& [name, samples] : rec.channels) {
        std::string content;
        for (double v : samples) content += format_double(v) + "\n";
        write_text((dir / (name + ".csv")).string(), content);
      }
      json meta{{"config", rec.config}, {"targets", rec.targets}};
      write_text((dir / "meta.json").string(), meta.dump(2) + "\n");
      artifacts.push_back(dir.string());
    }
    return artifacts;
  }
  throw std::runtime_error("synth needs a synthetic or synthetic_series input spec");
}

}  // namespace prunekit
