#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tabeval/harness.hpp"

namespace tabeval {

/// Perturbation families that get a line chart.
inline const std::vector<std::string> kChartFamilies{"noise_level", "noisy_rows"};

/// Aligned text table: one row per metric, base column then one relative
/// column per spec, 3 decimals.
std::string format_table(const ExperimentReport& report);

/// CSV for one metric with header spec_id,variant,params,base,value,relative.
std::string format_metric_csv(const ExperimentReport& report, const std::string& metric);

/// SVG line chart of relative score against the family parameter (alpha for
/// noise_level, row percentage for noisy_rows), one polyline per metric.
std::string format_family_svg(const ExperimentReport& report, const std::string& family);

/// Families from kChartFamilies that have at least one cell in the report.
std::vector<std::string> chart_families(const ExperimentReport& report);

void write_metric_csvs(const ExperimentReport& report, const std::filesystem::path& dir);
void write_family_svgs(const ExperimentReport& report, const std::filesystem::path& dir);

/// report.json, <metric>.csv per metric and <family>.svg per charted family.
/// Throws Error(IoFailure).
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace tabeval
