#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <gtest/gtest.h>

#include "tabeval/canonical_json.hpp"
#include "tabeval/csv.hpp"
#include "tabeval/report.hpp"
#include "test_util.hpp"

namespace tabeval {
namespace {

ExperimentReport two_by_three() {
  ExperimentReport report;
  report.metrics = {"faed", "sdv_fidelity"};
  report.bases = {{"faed", 0.5}, {"sdv_fidelity", 0.98}};
  const double alphas[] = {0.1, 0.3, 0.5};
  for (double a : alphas) {
    const PerturbationSpec spec{NoiseLevel{a}, 1};
    const nlohmann::json js = to_json(spec);
    const double faed = 0.5 + 10.0 * a;
    const double fid = 0.98 - 0.1 * a;
    report.cells.push_back({spec.id(), js, "faed", faed, 0.5, 0.5 - faed, std::nullopt});
    report.cells.push_back({spec.id(), js, "sdv_fidelity", fid, 0.98, 0.98 - fid, std::nullopt});
  }
  report.env = {{"tool", "tabeval"}};
  return report;
}

TEST(Report, EmitsJsonAndOneCsvPerMetric) {
  const auto dir = testing::scratch_dir("report_emit");
  const auto report = two_by_three();
  emit_report(report, dir);
  const auto doc = nlohmann::json::parse(read_file(dir / "report.json"));
  EXPECT_EQ(doc.at("cells").size(), 6u);
  for (const char* metric : {"faed", "sdv_fidelity"}) {
    const std::string text = read_file(dir / (std::string(metric) + ".csv"));
    const auto rows = csv::parse(text);
    ASSERT_EQ(rows.size(), 4u) << metric;
    EXPECT_EQ(rows[0], (csv::Record{"spec_id", "variant", "params", "base", "value", "relative"}));
    for (std::size_t i = 1; i < rows.size(); ++i) {
      EXPECT_EQ(rows[i][1], "noise_level");
      const double base = std::stod(rows[i][3]), value = std::stod(rows[i][4]), rel = std::stod(rows[i][5]);
      EXPECT_EQ(rel, base - value);
      EXPECT_TRUE(nlohmann::json::parse(rows[i][2]).contains("alpha"));
    }
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "noise_level.svg"));
  EXPECT_FALSE(std::filesystem::exists(dir / "noisy_rows.svg"));
}

TEST(Report, ByteIdenticalReruns) {
  const auto a = testing::scratch_dir("report_a");
  const auto b = testing::scratch_dir("report_b");
  emit_report(two_by_three(), a);
  emit_report(two_by_three(), b);
  for (const auto& entry : std::filesystem::directory_iterator(a)) {
    EXPECT_EQ(read_file(entry.path()), read_file(b / entry.path().filename())) << entry.path();
  }
}

TEST(Report, SvgIsWellFormedWithOnePolylinePerMetric) {
  const std::string svg = format_family_svg(two_by_three(), "noise_level");
  std::istringstream in(svg);
  boost::property_tree::ptree tree;
  ASSERT_NO_THROW(boost::property_tree::read_xml(in, tree));
  std::vector<std::string> metrics;
  std::vector<std::size_t> point_counts;
  for (const auto& [name, child] : tree.get_child("svg")) {
    if (name != "polyline") continue;
    metrics.push_back(child.get<std::string>("<xmlattr>.data-metric"));
    std::istringstream pts(child.get<std::string>("<xmlattr>.points"));
    std::size_t n = 0;
    for (std::string p; pts >> p;) ++n;
    point_counts.push_back(n);
  }
  EXPECT_EQ(metrics, (std::vector<std::string>{"faed", "sdv_fidelity"}));
  EXPECT_EQ(point_counts, (std::vector<std::size_t>{3, 3}));
}

TEST(Report, TableLayout) {
  auto report = two_by_three();
  report.cells[1].error = "boom";
  report.cells[1].relative.reset();
  const std::string table = format_table(report);
  std::istringstream in(table);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0].rfind("metric", 0), 0u);
  EXPECT_NE(lines[1].find("0.500"), std::string::npos);
  EXPECT_NE(lines[1].find("-1.000"), std::string::npos);
  EXPECT_NE(lines[2].find("error"), std::string::npos);
}

TEST(Report, ChartFamiliesFollowCells) {
  auto report = two_by_three();
  EXPECT_EQ(chart_families(report), (std::vector<std::string>{"noise_level"}));
  report.cells.clear();
  EXPECT_TRUE(chart_families(report).empty());
}

}  // namespace
}  // namespace tabeval
