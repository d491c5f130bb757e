#pragma once

#include <filesystem>
#include <string>

#include "trendfx/experiment.hpp"

namespace trendfx::cli {

enum class ReportFormat { Json, Table };

std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);
ExperimentReport load_report(const std::filesystem::path& path);

/// Metrics table (one row per cell) followed by the paired-test table;
/// p-values below 0.05 carry a '*'.
std::string render_table(const ExperimentReport& report);

/// Writes report.json or report.txt into `dir`, creating it when needed.
std::filesystem::path emit_report(const ExperimentReport& report, const std::filesystem::path& dir,
                                  ReportFormat format);

/// predictions/<label>.csv with t,actual,predicted and trend/<name>.csv with
/// t,raw,trend. Returns the number of files written.
std::size_t emit_plot_data(const ExperimentOutput& output, const std::filesystem::path& dir);

}  // namespace trendfx::cli
