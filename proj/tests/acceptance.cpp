// End-to-end acceptance gate. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "prunekit/data.hpp"
#include "prunekit/eval.hpp"
#include "prunekit/explain.hpp"
#include "prunekit/model.hpp"
#include "prunekit/pipeline.hpp"
#include "prunekit/rng.hpp"
#include "test_util.hpp"

using namespace prunekit;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void verdict(int index, const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << index << ": " << name;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << "\n" << std::flush;
  if (!pass) ++g_failures;
}

void run(int index, const std::string& name, const std::function<std::string()>& body) {
  try {
    std::string detail = body();
    verdict(index, name, true, detail);
  } catch (const std::exception& e) {
    verdict(index, name, false, e.what());
  }
}

void require(bool condition, const std::string& message) {
  if (!condition) throw std::runtime_error(message);
}

FeatureTable random_table(std::size_t n_samples, std::size_t n_features, std::uint64_t seed,
                          const char* purpose = "acc_table") {
  RngStream stream(seed, purpose);
  FeatureTable table;
  for (std::size_t j = 0; j < n_features; ++j) table.feature_names.push_back("f" + std::to_string(j));
  std::vector<double> y;
  for (std::size_t i = 0; i < n_samples; ++i) {
    std::vector<double> row(n_features);
    for (double& v : row) v = stream.next_double() * 10.0;
    table.rows.push_back(std::move(row));
    y.push_back(1.0 + stream.next_double() * 9.0);
  }
  table.targets["y"] = std::move(y);
  return table;
}

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

Tree stump(int feature, double threshold, double left, double right) {
  Tree tree;
  tree.nodes = {TreeNode{feature, threshold, 1, 2, 0.0}, TreeNode{-1, 0.0, -1, -1, left},
                TreeNode{-1, 0.0, -1, -1, right}};
  return tree;
}

// --- criterion 1: Shapley axioms -----------------------------------------

std::string criterion_shapley_axioms() {
  double worst_efficiency = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const std::size_t n_features = 3 + seed % 6;  // 3..8
    FeatureTable table = random_table(14, n_features, seed);
    // a constant column can never be split on: a guaranteed dummy feature
    for (auto& row : table.rows) row[n_features - 1] = 7.0;
    ModelSpec spec = ModelSpec::decision_tree_default(seed);
    spec.tree.max_depth = 3;
    Model model = train(spec, table, "y");

    auto explain_rows = std::vector<std::size_t>{0, 1, 2};
    auto background = std::vector<std::size_t>{3, 4, 5, 6, 7};
    ShapleyExplanation expl = shapley_exact(model, table, explain_rows, background);

    for (std::size_t r = 0; r < explain_rows.size(); ++r) {
      double sum = 0.0;
      for (double p : expl.phi[r]) sum += p;
      const double fx = model.predict(table.rows[explain_rows[r]]);
      const double residual = std::abs(sum - (fx - expl.baseline));
      worst_efficiency = std::max(worst_efficiency, residual);
      require(residual < 1e-9, "efficiency residual " + std::to_string(residual));
      for (std::size_t j = 0; j < n_features; ++j) {
        if (!model.uses_feature(static_cast<int>(j))) {
          require(expl.phi[r][j] == 0.0, "dummy feature has nonzero phi");
        }
      }
    }
  }

  // constructed symmetric pair: identical stumps on identical columns
  double worst_symmetry = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream stream(seed, "acc_sym");
    FeatureTable table;
    table.feature_names = {"a", "b", "c"};
    std::vector<double> y;
    for (int i = 0; i < 10; ++i) {
      const double dup = stream.next_double() * 10.0;
      table.rows.push_back({dup, dup, stream.next_double() * 10.0});
      y.push_back(1.0);
    }
    table.targets["y"] = y;
    Model model;
    model.spec = ModelSpec::gradient_boosting_default(0);
    model.spec.learning_rate = 1.0;
    model.spec.n_stages = 2;
    model.feature_names = table.feature_names;
    model.f0 = 0.0;
    model.stages = {stump(0, 5.0, 1.0, 4.0), stump(1, 5.0, 1.0, 4.0)};
    ShapleyExplanation expl = shapley_exact(model, table, {0, 1}, {2, 3, 4, 5});
    for (const auto& phi : expl.phi) {
      worst_symmetry = std::max(worst_symmetry, std::abs(phi[0] - phi[1]));
      require(std::abs(phi[0] - phi[1]) < 1e-9, "symmetric pair differs");
    }
  }
  std::ostringstream detail;
  detail << "max efficiency residual " << worst_efficiency << ", max symmetry gap "
         << worst_symmetry;
  return detail.str();
}

// --- criterion 2: sampling convergence -----------------------------------

std::string criterion_sampling_convergence() {
  FeatureTable table = random_table(20, 6, 77);
  ModelSpec spec = ModelSpec::decision_tree_default(77);
  spec.tree.max_depth = 4;
  Model model = train(spec, table, "y");
  const std::vector<std::size_t> explain_rows = {0, 1};
  const std::vector<std::size_t> background = {2, 3, 4, 5, 6, 7, 8, 9};

  ShapleyExplanation exact = shapley_exact(model, table, explain_rows, background);
  double max_abs_phi = 0.0;
  for (const auto& row : exact.phi)
    for (double p : row) max_abs_phi = std::max(max_abs_phi, std::abs(p));

  std::vector<double> errors;
  for (int n_perm : {100, 1000, 10000}) {
    ShapleyExplanation sampled =
        shapley_sampled(model, table, explain_rows, background, n_perm, 5);
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < exact.phi.size(); ++r) {
      for (std::size_t j = 0; j < exact.phi[r].size(); ++j) {
        acc += std::abs(sampled.phi[r][j] - exact.phi[r][j]);
        ++count;
      }
    }
    errors.push_back(acc / static_cast<double>(count));
  }
  std::ostringstream detail;
  detail << "mean |dphi| ladder " << errors[0] << " / " << errors[1] << " / " << errors[2];
  require(errors[1] <= errors[0] && errors[2] <= errors[1],
          "error not non-increasing: " + detail.str());
  require(errors[2] < 0.05 * max_abs_phi, "final error too large: " + detail.str());
  return detail.str();
}

// --- criterion 3: permutation importance soundness ------------------------

std::string criterion_permutation_soundness() {
  FeatureTable table;
  table.feature_names = {"a", "b"};
  table.rows = {{1, 9}, {2, 8}, {3, 7}, {4, 6}};
  table.targets["y"] = {100, 100, 200, 200};

  Model model;
  model.spec = ModelSpec::decision_tree_default(0);
  model.feature_names = table.feature_names;
  model.tree = stump(0, 2.5, 100.0, 200.0);

  const std::uint64_t seed = 2;  // draws a permutation that flips both halves
  ImportanceReport report = permutation_importance(model, table, "y", 1, seed);
  require(report.scores.at("b") == 0.0, "unused feature scored nonzero");

  // re-derive the expected score from the documented stream contract
  RngStream stream(seed, "perm_importance", 0);  // feature 0, repeat 0
  std::vector<std::size_t> perm = {0, 1, 2, 3};
  stream.shuffle(perm);
  const std::vector<double>& y = table.targets.at("y");
  double mape_permuted = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double a_value = table.rows[perm[i]][0];
    const double pred = a_value <= 2.5 ? 100.0 : 200.0;
    mape_permuted += std::abs(y[i] - pred) / std::abs(y[i]);
  }
  mape_permuted = mape_permuted / 4.0 * 100.0;
  const double expected = mape_permuted - 0.0;  // original predictions are exact
  const double got = report.scores.at("a");
  require(std::abs(got - expected) < 1e-12,
          "hand fixture mismatch: got " + std::to_string(got) + " expected " +
              std::to_string(expected));
  std::ostringstream detail;
  detail << "hand-derived delta " << expected << ", |diff| < 1e-12";
  return detail.str();
}

// --- criterion 4: model correctness oracles -------------------------------

std::string criterion_model_oracles() {
  // exhaustive split search on tiny integer instances
  TreeParams params;  // unlimited depth, leaf 1, split 2
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    RngStream stream(seed, "acc_bft");
    const std::size_t n = 2 + stream.next_below(5);  // 2..6 samples
    const std::size_t d = 1 + stream.next_below(3);
    Matrix rows(n, std::vector<double>(d));
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (double& v : rows[i]) v = static_cast<double>(stream.next_below(8));
      y[i] = static_cast<double>(1 + stream.next_below(9));
    }
    Tree tree = fit_tree(rows, y, params);
    testutil::BruteForceTree oracle(rows, y);
    require(testutil::same_structure(tree.nodes, oracle.nodes()),
            "tree differs from brute force at seed " + std::to_string(seed));
  }

  // GBM training MSE is non-increasing across 200 stages
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    FeatureTable table = random_table(30, 3, seed, "acc_gbm");
    Model model = train(ModelSpec::gradient_boosting_default(seed), table, "y");
    require(model.stage_mse.size() == 200, "missing per-stage MSE");
    for (std::size_t s = 1; s < model.stage_mse.size(); ++s) {
      require(model.stage_mse[s] <= model.stage_mse[s - 1] + 1e-9,
              "stage MSE increased at stage " + std::to_string(s));
    }
  }

  // forest prediction is the exact mean of its trees
  FeatureTable table = random_table(40, 4, 3, "acc_rf");
  ModelSpec spec = ModelSpec::random_forest_default(3);
  spec.n_trees = 20;
  Model model = train(spec, table, "y");
  double worst = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    double mean = 0.0;
    for (const auto& t : model.trees) mean += t.predict(table.rows[i]);
    mean /= static_cast<double>(model.trees.size());
    worst = std::max(worst, std::abs(model.predict(table.rows[i]) - mean));
  }
  require(worst < 1e-12, "forest mean off by " + std::to_string(worst));
  std::ostringstream detail;
  detail << "200 brute-force matches, 20 monotone GBM runs, forest mean gap " << worst;
  return detail.str();
}

// --- criterion 5: DFT correctness -----------------------------------------

std::string criterion_dft() {
  RngStream stream(7, "acc_dft");
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xs(1 + stream.next_below(64));
    for (double& x : xs) x = stream.next_gaussian();
    auto fast = dft_magnitude(xs);
    auto slow = testutil::naive_dft_magnitude(xs);
    require(fast.size() == slow.size(), "spectrum length mismatch");
    for (std::size_t k = 0; k < fast.size(); ++k) {
      worst = std::max(worst, std::abs(fast[k] - slow[k]));
    }
  }
  require(worst < 1e-8, "oracle gap " + std::to_string(worst));

  double worst_parseval = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xs(1 + stream.next_below(100));
    for (double& x : xs) x = stream.next_gaussian();
    auto mags = dft_magnitude(xs);
    const std::size_t n = mags.size() == 1 ? 1 : 2 * (mags.size() - 1);
    double time_energy = 0.0;
    for (double x : xs) time_energy += x * x;
    double freq_energy = mags[0] * mags[0];
    if (n > 1) {
      freq_energy += mags.back() * mags.back();
      for (std::size_t k = 1; k + 1 < mags.size(); ++k) freq_energy += 2.0 * mags[k] * mags[k];
    }
    freq_energy /= static_cast<double>(n);
    worst_parseval =
        std::max(worst_parseval, std::abs(freq_energy - time_energy) / time_energy);
  }
  require(worst_parseval < 1e-6, "Parseval gap " + std::to_string(worst_parseval));
  std::ostringstream detail;
  detail << "max oracle gap " << worst << ", max Parseval rel gap " << worst_parseval;
  return detail.str();
}

// --- criterion 6: qualitative pruning benefit -----------------------------

std::string criterion_pruning_benefit() {
  int successes = 0;
  std::vector<double> grid;
  for (int p = 10; p <= 100; p += 10) grid.push_back(p);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SyntheticSpec gen;
    gen.n_samples = 100;
    gen.relevant = {1.0, 2.0, 3.0};
    gen.n_irrelevant = 7;
    gen.noise_sigma = 0.5;
    gen.seed = seed;
    FeatureTable table = generate_synthetic(gen);

    SweepResult result = feature_sweep(ModelSpec::gradient_boosting_default(seed), table, "y",
                                       "permutation", grid, 5, seed);
    const bool pruned = result.best_p < 100.0;
    std::set<std::string> chosen(result.best_features.begin(), result.best_features.end());
    const bool has_relevant =
        chosen.count("rel_0") && chosen.count("rel_1") && chosen.count("rel_2");
    double best_mape = result.baseline_cv.mean_mape;
    for (const auto& point : result.points) {
      if (point.p == result.best_p) best_mape = point.cv.mean_mape;
    }
    const bool no_worse = best_mape <= result.baseline_cv.mean_mape;
    if (pruned && has_relevant && no_worse) ++successes;
  }
  std::ostringstream detail;
  detail << successes << "/20 seeds improved by pruning";
  require(successes >= 16, detail.str());
  return detail.str();
}

// --- criterion 7: three-method sweep harness ------------------------------

std::string criterion_method_harness() {
  SyntheticSpec gen;
  gen.n_samples = 100;
  gen.relevant = {1.0, 2.0, 3.0};
  gen.n_irrelevant = 7;
  gen.noise_sigma = 0.5;
  gen.seed = 1;
  FeatureTable table = generate_synthetic(gen);

  ModelSpec spec = ModelSpec::gradient_boosting_default(1);
  RankOptions options;
  options.shapley_permutations = 32;
  options.background_cap = 64;
  options.explain_cap = 10;
  std::vector<double> grid = {20, 40, 60, 80, 100};

  std::vector<int> reference;
  for (const std::string method : {"permutation", "shapley", "select_k_best"}) {
    SweepResult result = feature_sweep(spec, table, "y", method, grid, 5, 9, options);
    require(result.points.size() == grid.size(), method + ": wrong point count");
    for (const auto& point : result.points) {
      if (reference.empty()) reference = point.cv.fold_assignments;
      require(point.cv.fold_assignments == reference,
              method + ": fold assignments differ between points/methods");
    }
  }
  return "3 methods x 5 grid points, shared fold assignments";
}

// --- criterion 8: CLI determinism across reruns and thread counts ---------

fs::path temp_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("prunekit_acc_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// relative path -> content, for every regular file under root
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) {
      files[fs::relative(entry.path(), root).string()] = read_file(entry.path());
    }
  }
  return files;
}

std::string criterion_cli_determinism() {
  const std::string bin = PRUNEKIT_BIN;
  fs::path work = temp_dir("cli");

  nlohmann::json tabular{
      {"input",
       {{"format", "synthetic"},
        {"synthetic",
         {{"n_samples", 60}, {"relevant", {1.0, 2.0, 3.0}}, {"n_irrelevant", 4},
          {"noise_sigma", 0.3}, {"seed", 5}}}}},
      {"target", "y"},
      {"model", {{"kind", "gradient_boosting"}, {"n_stages", 40}}},
      {"methods", {"permutation", "shapley", "select_k_best"}},
      {"grid", {50, 100}},
      {"k", 4},
      {"seed", 2},
      {"rank",
       {{"permutation_repeats", 3}, {"shapley_permutations", 16}, {"background_cap", 32},
        {"explain_cap", 6}}},
  };
  nlohmann::json series{
      {"input",
       {{"format", "synthetic_series"},
        {"synthetic_series",
         {{"n_records", 8}, {"min_length", 32}, {"max_length", 64}, {"noise_sigma", 0.05},
          {"seed", 3}}}}},
      {"target", "Ra"},
      {"model", {{"kind", "decision_tree"}, {"max_depth", 3}}},
      {"fractions", {0.5, 1.0}},
      {"k", 4},
      {"seed", 2},
  };
  std::ofstream(work / "tabular.json") << tabular.dump(2);
  std::ofstream(work / "series.json") << series.dump(2);

  const std::vector<std::pair<std::string, std::string>> runs = {
      {"train", "tabular.json"},   {"explain", "tabular.json"}, {"sweep", "tabular.json"},
      {"synth", "tabular.json"},   {"preprocess", "series.json"}, {"intervals", "series.json"},
      {"synth_series", "series.json"},
  };

  auto invoke = [&](const std::string& command, const std::string& config,
                    const fs::path& out_dir, int threads) {
    const std::string real_command = command == "synth_series" ? "synth" : command;
    std::string shell = "PRUNEKIT_THREADS=" + std::to_string(threads) + " " + bin + " " +
                        real_command + " --config " + (work / config).string() +
                        " --output-dir " + out_dir.string() + " >/dev/null 2>&1";
    if (std::system(shell.c_str()) != 0) {
      throw std::runtime_error(real_command + " (" + config + ") exited nonzero");
    }
  };

  for (const auto& [command, config] : runs) {
    fs::path base = work / command;
    invoke(command, config, base / "t1_a", 1);
    invoke(command, config, base / "t1_b", 1);
    invoke(command, config, base / "t4", 4);
    auto a = snapshot(base / "t1_a");
    auto b = snapshot(base / "t1_b");
    auto c = snapshot(base / "t4");
    require(!a.empty(), command + ": no artifacts written");
    require(a == b, command + ": rerun differs at 1 thread");
    require(a == c, command + ": 4-thread run differs from 1-thread run");
  }
  return std::to_string(runs.size()) + " command runs byte-identical across reruns and threads";
}

// --- criterion 9: MAPE properties -----------------------------------------

std::string criterion_mape() {
  RngStream stream(13, "acc_mape");
  std::vector<double> y(25), p(25);
  for (std::size_t i = 0; i < 25; ++i) {
    y[i] = 1.0 + stream.next_double() * 9.0;
    p[i] = y[i] + stream.next_gaussian();
  }
  const double base = mape(y, p);
  double worst = 0.0;
  for (double c : {0.5, 3.0, 1e6}) {
    std::vector<double> yc(25), pc(25);
    for (std::size_t i = 0; i < 25; ++i) {
      yc[i] = c * y[i];
      pc[i] = c * p[i];
    }
    worst = std::max(worst, std::abs(mape(yc, pc) - base) / base);
  }
  require(worst < 1e-12, "scale invariance violated: rel gap " + std::to_string(worst));
  require(mape(y, y) == 0.0, "perfect prediction not exactly zero");
  bool threw = false;
  try {
    mape({1.0, 0.0}, {1.0, 1.0});
  } catch (const std::domain_error&) {
    threw = true;
  }
  require(threw, "zero target not rejected");
  std::ostringstream detail;
  detail << "max scale-invariance rel gap " << worst;
  return detail.str();
}

// --- criterion 10: interval identity at fraction 1.0 ----------------------

std::string criterion_interval_identity() {
  SyntheticSeriesSpec gen;
  gen.n_records = 10;
  gen.min_length = 32;
  gen.max_length = 128;
  gen.noise_sigma = 0.05;
  gen.seed = 17;
  auto records = generate_synthetic_records(gen);
  ModelSpec spec = ModelSpec::decision_tree_default(0);

  IntervalResult result = interval_experiment(spec, records, "Ra", {0.5, 1.0}, 5, 8);
  FeatureTable table = extract_features(records);
  CVReport direct = cross_validate(spec, table, "Ra", 5, 8);

  const CVReport& full = result.points.back().cv;
  require(result.points.back().fraction == 1.0, "last point is not fraction 1.0");
  require(full.fold_scores == direct.fold_scores, "fold scores differ");
  require(full.mean_mape == direct.mean_mape, "mean MAPE differs");
  require(full.fold_assignments == direct.fold_assignments, "fold assignments differ");
  require(cv_report_to_json(full).dump() == cv_report_to_json(direct).dump(),
          "serialized reports differ");
  return "fraction 1.0 report bit-identical to the direct pipeline";
}

}  // namespace

int main() {
  run(1, "Shapley axioms (efficiency, dummy, symmetry)", criterion_shapley_axioms);
  run(2, "Shapley sampling convergence", criterion_sampling_convergence);
  run(3, "permutation importance soundness", criterion_permutation_soundness);
  run(4, "model correctness oracles", criterion_model_oracles);
  run(5, "DFT magnitude correctness", criterion_dft);
  run(6, "pruning improves the synthetic benchmark", criterion_pruning_benefit);
  run(7, "three-method sweep harness", criterion_method_harness);
  run(8, "CLI determinism across reruns and thread counts", criterion_cli_determinism);
  run(9, "MAPE properties", criterion_mape);
  run(10, "partial-data identity at fraction 1.0", criterion_interval_identity);

  if (g_failures > 0) {
    std::cout << g_failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
