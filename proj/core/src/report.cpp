#include "prunekit/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

using nlohmann::json;

namespace prunekit {
namespace {

json score_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double score_from_json(const json& v) {
  if (v.is_string()) {
    return v.get<std::string>() == "-inf" ? -std::numeric_limits<double>::infinity()
                                          : std::numeric_limits<double>::infinity();
  }
  return v.get<double>();
}

std::string svg_header(int width, int height) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<!-- prunekit 0.1.0 -->\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
      << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  return out.str();
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string coord(double v) {
  char buf[32];
  int len = std::snprintf(buf, sizeof buf, "%.2f", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

json importance_report_to_json(const ImportanceReport& report) {
  json scores = json::object();
  for (const auto& [name, score] : report.scores) scores[name] = score_to_json(score);
  return json{{"method", report.method},
              {"scores", std::move(scores)},
              {"rank", report.rank},
              {"metadata", report.metadata}};
}

ImportanceReport importance_report_from_json(const json& doc) {
  ImportanceReport report;
  report.method = doc.at("method").get<std::string>();
  for (const auto& [name, score] : doc.at("scores").items()) {
    report.scores[name] = score_from_json(score);
  }
  report.rank = doc.at("rank").get<std::vector<std::string>>();
  report.metadata = doc.at("metadata").get<std::map<std::string, std::string>>();
  return report;
}

std::string importance_report_csv(const ImportanceReport& report) {
  std::ostringstream out;
  out << "feature,score\n";
  for (const auto& name : report.rank) {
    out << name << ',' << format_double(report.scores.at(name)) << '\n';
  }
  return out.str();
}

std::string importance_bar_svg(const ImportanceReport& report, const std::string& title) {
  const int bar_h = 18, gap = 6, left = 220, right = 40, top = 40;
  const int width = 720;
  const int n = static_cast<int>(report.rank.size());
  const int height = top + n * (bar_h + gap) + 20;

  double max_abs = 0.0;
  for (const auto& [name, score] : report.scores) {
    (void)name;
    if (!std::isinf(score)) max_abs = std::max(max_abs, std::abs(score));
  }
  if (max_abs == 0.0) max_abs = 1.0;

  std::ostringstream out;
  out << svg_header(width, height);
  out << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">"
      << xml_escape(title) << "</text>\n";
  int y = top;
  const double span = width - left - right;
  for (const auto& name : report.rank) {
    double score = report.scores.at(name);
    double frac = std::isinf(score) ? 1.0 : std::abs(score) / max_abs;
    double w = span * frac;
    out << "<text x=\"" << left - 8 << "\" y=\"" << y + bar_h - 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
        << xml_escape(name) << "</text>\n";
    out << "<rect x=\"" << left << "\" y=\"" << y << "\" width=\"" << coord(w) << "\" height=\""
        << bar_h << "\" fill=\"" << (score >= 0 ? "#1f77b4" : "#d62728") << "\"/>\n";
    out << "<text x=\"" << left + 4 << "\" y=\"" << y + bar_h - 4
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"white\">"
        << format_double(score) << "</text>\n";
    y += bar_h + gap;
  }
  out << "</svg>\n";
  return out.str();
}

json sweep_to_json(const SweepResult& result) {
  json points = json::array();
  for (const auto& point : result.points) {
    points.push_back({{"p", point.p},
                      {"selected_features", point.selected_features},
                      {"cv", cv_report_to_json(point.cv)}});
  }
  return json{{"method", result.method},
              {"grid", result.grid},
              {"points", std::move(points)},
              {"best_p", result.best_p},
              {"best_features", result.best_features},
              {"baseline_cv", cv_report_to_json(result.baseline_cv)},
              {"ranking", importance_report_to_json(result.ranking)},
              {"metadata", result.metadata}};
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "p,n_features,mean_mape";
  if (!result.points.empty()) {
    for (std::size_t f = 0; f < result.points.front().cv.fold_scores.size(); ++f) {
      out << ",fold_" << f;
    }
  }
  out << '\n';
  for (const auto& point : result.points) {
    out << format_double(point.p) << ',' << point.selected_features.size() << ','
        << format_double(point.cv.mean_mape);
    for (double s : point.cv.fold_scores) out << ',' << format_double(s);
    out << '\n';
  }
  return out.str();
}

namespace {

std::string line_chart(const std::vector<std::string>& labels,
                       const std::vector<std::vector<double>>& xs,
                       const std::vector<std::vector<double>>& ys, const std::string& title,
                       const std::string& x_label, const std::string& y_label) {
  const int width = 720, height = 440, left = 70, right = 30, top = 50, bottom = 50;
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = std::numeric_limits<double>::infinity(), y_max = -y_min;
  for (std::size_t s = 0; s < xs.size(); ++s) {
    for (double v : xs[s]) {
      x_min = std::min(x_min, v);
      x_max = std::max(x_max, v);
    }
    for (double v : ys[s]) {
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (x_max <= x_min) x_max = x_min + 1.0;
  if (y_max <= y_min) y_max = y_min + 1.0;
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;

  auto sx = [&](double v) {
    return left + (v - x_min) / (x_max - x_min) * (width - left - right);
  };
  auto sy = [&](double v) {
    return height - bottom - (v - y_min) / (y_max - y_min) * (height - top - bottom);
  };

  std::ostringstream out;
  out << svg_header(width, height);
  out << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">"
      << xml_escape(title) << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right
      << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    double xv = x_min + (x_max - x_min) * t / 4.0;
    double yv = y_min + (y_max - y_min) * t / 4.0;
    out << "<text x=\"" << coord(sx(xv)) << "\" y=\"" << height - bottom + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << coord(xv) << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << coord(sy(yv) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << coord(yv)
        << "</text>\n";
  }
  out << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << xml_escape(x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << (top + height - bottom) / 2
      << "\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
      << (top + height - bottom) / 2 << ")\" text-anchor=\"middle\">" << xml_escape(y_label)
      << "</text>\n";

  for (std::size_t s = 0; s < xs.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof *kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < xs[s].size(); ++i) {
      if (i) out << ' ';
      out << coord(sx(xs[s][i])) << ',' << coord(sy(ys[s][i]));
    }
    out << "\"/>\n";
    for (std::size_t i = 0; i < xs[s].size(); ++i) {
      out << "<circle cx=\"" << coord(sx(xs[s][i])) << "\" cy=\"" << coord(sy(ys[s][i]))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    out << "<text x=\"" << width - right - 8 << "\" y=\"" << top + 16 * static_cast<int>(s)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color
        << "\">" << xml_escape(labels[s]) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace

std::string sweep_chart_svg(const std::vector<SweepResult>& results, const std::string& title) {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> xs, ys;
  for (const auto& result : results) {
    // Figure-style label: the univariate baseline goes by "FS"
    labels.push_back(result.method == "select_k_best" ? "FS" : result.method);
    std::vector<double> px, py;
    for (const auto& point : result.points) {
      px.push_back(point.p);
      py.push_back(point.cv.mean_mape);
    }
    xs.push_back(std::move(px));
    ys.push_back(std::move(py));
  }
  return line_chart(labels, xs, ys, title, "top p% of features", "mean MAPE (%)");
}

json interval_to_json(const IntervalResult& result) {
  json points = json::array();
  for (const auto& point : result.points) {
    points.push_back({{"fraction", point.fraction}, {"cv", cv_report_to_json(point.cv)}});
  }
  return json{{"points", std::move(points)}};
}

std::string interval_csv(const IntervalResult& result) {
  std::ostringstream out;
  out << "fraction,mean_mape";
  if (!result.points.empty()) {
    for (std::size_t f = 0; f < result.points.front().cv.fold_scores.size(); ++f) {
      out << ",fold_" << f;
    }
  }
  out << '\n';
  for (const auto& point : result.points) {
    out << format_double(point.fraction) << ',' << format_double(point.cv.mean_mape);
    for (double s : point.cv.fold_scores) out << ',' << format_double(s);
    out << '\n';
  }
  return out.str();
}

std::string interval_chart_svg(const IntervalResult& result, const std::string& title) {
  std::vector<double> xs, ys;
  for (const auto& point : result.points) {
    xs.push_back(point.fraction);
    ys.push_back(point.cv.mean_mape);
  }
  return line_chart({"mean MAPE"}, {xs}, {ys}, title, "fraction of series used", "mean MAPE (%)");
}

}  // namespace prunekit
