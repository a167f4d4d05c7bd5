#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "prunekit/explain.hpp"
#include "prunekit/pipeline.hpp"

namespace prunekit {

// Shortest round-trip decimal representation; used everywhere a number is
// written to a text artifact so reruns are byte-identical.
std::string format_double(double v);

nlohmann::json importance_report_to_json(const ImportanceReport& report);
ImportanceReport importance_report_from_json(const nlohmann::json& doc);

// Two columns (feature, score), sorted by rank.
std::string importance_report_csv(const ImportanceReport& report);

// Horizontal bar chart of the scores.
std::string importance_bar_svg(const ImportanceReport& report, const std::string& title);

nlohmann::json sweep_to_json(const SweepResult& result);
std::string sweep_csv(const SweepResult& result);

// One mean-MAPE-vs-p polyline per sweep (one per attribution method).
std::string sweep_chart_svg(const std::vector<SweepResult>& results, const std::string& title);

nlohmann::json interval_to_json(const IntervalResult& result);
std::string interval_csv(const IntervalResult& result);
std::string interval_chart_svg(const IntervalResult& result, const std::string& title);

}  // namespace prunekit
