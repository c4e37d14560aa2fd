#include "tabeval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "tabeval/canonical_json.hpp"
#include "tabeval/csv.hpp"
#include "tabeval/error.hpp"

namespace tabeval {

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::vector<std::string> spec_order(const ExperimentReport& report) {
  std::vector<std::string> ids;
  for (const auto& c : report.cells) {
    if (std::find(ids.begin(), ids.end(), c.spec_id) == ids.end()) ids.push_back(c.spec_id);
  }
  return ids;
}

const ReportCell* find_cell(const ExperimentReport& report, const std::string& spec_id, const std::string& metric) {
  for (const auto& c : report.cells) {
    if (c.spec_id == spec_id && c.metric == metric) return &c;
  }
  return nullptr;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::optional<double> family_x(const ReportCell& c, const std::string& family) {
  if (!c.spec.is_object() || c.spec.value("variant", "") != family) return std::nullopt;
  const auto& params = c.spec.at("params");
  if (family == "noise_level") return params.at("alpha").get<double>();
  if (family == "noisy_rows") return 100.0 * params.at("fraction").get<double>();
  return std::nullopt;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::string format_table(const ExperimentReport& report) {
  const std::vector<std::string> specs = spec_order(report);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"metric", "base"};
  header.insert(header.end(), specs.begin(), specs.end());
  rows.push_back(header);
  for (const auto& metric : report.metrics) {
    std::vector<std::string> row{metric};
    auto base = report.bases.find(metric);
    row.push_back(base == report.bases.end() ? "-" : fixed3(base->second));
    for (const auto& id : specs) {
      const ReportCell* c = find_cell(report, id, metric);
      if (!c) {
        row.push_back("-");
      } else if (c->error) {
        row.push_back("error");
      } else {
        row.push_back(c->relative ? fixed3(*c->relative) : "-");
      }
    }
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) line += "  ";
      const std::size_t pad = width[i] - row[i].size();
      // Names left-aligned, numbers right-aligned.
      if (i == 0) {
        line += row[i] + std::string(pad, ' ');
      } else {
        line += std::string(pad, ' ') + row[i];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

std::string format_metric_csv(const ExperimentReport& report, const std::string& metric) {
  std::string out = csv::format_record({"spec_id", "variant", "params", "base", "value", "relative"}) + "\n";
  for (const auto& c : report.cells) {
    if (c.metric != metric) continue;
    const std::string variant = c.spec.is_object() ? c.spec.value("variant", "") : "";
    const std::string params = c.spec.is_object() && c.spec.contains("params") ? c.spec["params"].dump() : "{}";
    out += csv::format_record({c.spec_id, variant, params, optional_field(c.base), optional_field(c.value),
                               optional_field(c.relative)}) + "\n";
  }
  return out;
}

std::vector<std::string> chart_families(const ExperimentReport& report) {
  std::vector<std::string> out;
  for (const auto& family : kChartFamilies) {
    const bool present = std::any_of(report.cells.begin(), report.cells.end(),
                                     [&](const ReportCell& c) { return family_x(c, family).has_value(); });
    if (present) out.push_back(family);
  }
  return out;
}

std::string format_family_svg(const ExperimentReport& report, const std::string& family) {
  struct Series {
    std::string metric;
    std::vector<std::pair<double, double>> points;
  };
  std::vector<Series> series;
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = 0.0, y_max = 0.0;
  for (const auto& metric : report.metrics) {
    Series s{metric, {}};
    for (const auto& c : report.cells) {
      if (c.metric != metric) continue;
      const auto x = family_x(c, family);
      if (!x || !c.relative || !std::isfinite(*c.relative)) continue;
      s.points.emplace_back(*x, *c.relative);
      x_min = std::min(x_min, *x);
      x_max = std::max(x_max, *x);
      y_min = std::min(y_min, *c.relative);
      y_max = std::max(y_max, *c.relative);
    }
    std::sort(s.points.begin(), s.points.end());
    series.push_back(std::move(s));
  }
  if (!std::isfinite(x_min)) {
    x_min = 0.0;
    x_max = 1.0;
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;

  const double width = 640, height = 400, left = 70, right = 170, top = 40, bottom = 50;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto sy = [&](double y) { return top + (y_max - y) / (y_max - y_min) * plot_h; };
  const std::string x_label = family == "noisy_rows" ? "noisy rows (%)" : "noise level alpha";

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  o << "  <title>" << xml_escape(family) << ": relative score</title>\n";
  o << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  o << "  <g stroke=\"black\" stroke-width=\"1\">\n";
  o << "    <line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
    << top + plot_h << "\"/>\n";
  o << "    <line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h << "\"/>\n";
  o << "  </g>\n";
  if (y_min < 0.0 && y_max > 0.0) {
    o << "  <line x1=\"" << left << "\" y1=\"" << coord(sy(0.0)) << "\" x2=\"" << left + plot_w << "\" y2=\""
      << coord(sy(0.0)) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";
  }
  o << "  <g font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "    <text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
    << xml_escape(x_label) << "</text>\n";
  o << "    <text x=\"16\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << top + plot_h / 2 << ")\">relative score</text>\n";
  o << "    <text x=\"" << left << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">" << fixed3(x_min)
    << "</text>\n";
  o << "    <text x=\"" << left + plot_w << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">"
    << fixed3(x_max) << "</text>\n";
  o << "    <text x=\"" << left - 6 << "\" y=\"" << top + 4 << "\" text-anchor=\"end\">" << fixed3(y_max)
    << "</text>\n";
  o << "    <text x=\"" << left - 6 << "\" y=\"" << top + plot_h << "\" text-anchor=\"end\">" << fixed3(y_min)
    << "</text>\n";
  o << "  </g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    std::string points;
    for (const auto& [x, y] : series[i].points) {
      if (!points.empty()) points += ' ';
      points += coord(sx(x)) + "," + coord(sy(y));
    }
    o << "  <polyline data-metric=\"" << xml_escape(series[i].metric) << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"2\" points=\"" << points << "\"/>\n";
    const double ly = top + 14.0 * static_cast<double>(i) + 6.0;
    o << "  <text x=\"" << left + plot_w + 30 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" "
      << "font-size=\"11\" fill=\"" << color << "\">" << xml_escape(series[i].metric) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_metric_csvs(const ExperimentReport& report, const std::filesystem::path& dir) {
  for (const auto& metric : report.metrics) {
    write_file_atomic(dir / (metric + ".csv"), format_metric_csv(report, metric));
  }
}

void write_family_svgs(const ExperimentReport& report, const std::filesystem::path& dir) {
  for (const auto& family : chart_families(report)) {
    write_file_atomic(dir / (family + ".svg"), format_family_svg(report, family));
  }
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  write_file_atomic(dir / "report.json", canonical_dump(to_json(report)));
  write_metric_csvs(report, dir);
  write_family_svgs(report, dir);
}

}  // namespace tabeval
