#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "json.hpp"

#include "covcpd/covtensor.hpp"
#include "covcpd/cusum.hpp"
#include "covcpd/detector.hpp"
#include "covcpd/simlab.hpp"

namespace covcpd {

// grid: one sampled curve per row, projected onto the basis.
// coefficients: one coefficient vector per row, used as is.
enum class Layout { grid, coefficients };

Layout layout_from_string(const std::string& name);
std::string to_string(Layout layout);

struct IngestOptions {
  Layout layout = Layout::grid;
  BasisSpec basis = BasisSpec::band(2, 8);
  // CSV only: the first row holds the sampling points t_j instead of a curve.
  // Without it the grid is t_j = j / n.
  bool header = false;
};

struct IngestResult {
  CurvePanel panel;
  std::size_t grid_size = 0;  // 0 for coefficient input
};

// Reads a CSV file or a JSON document ({"grid": [...], "curves": [[...], ...]},
// or {"basis": {"start", "length"}, "curves": [...]} for coefficients). The
// format is chosen by the .json extension.
IngestResult ingest(const std::filesystem::path& path, const IngestOptions& options);
IngestResult ingest_csv(std::istream& in, const IngestOptions& options);
IngestResult ingest_json(const nlohmann::json& doc, const IngestOptions& options);

// Whitespace, comma or newline separated numbers, or a JSON array.
std::vector<double> read_number_list(const std::filesystem::path& path);

nlohmann::json to_json(const BasisSpec& basis);
nlohmann::json to_json(const EigenSpectrum& spectrum);
nlohmann::json to_json(const TestResult& result);
nlohmann::json to_json(const SegmentTree& tree);
nlohmann::json to_json(const ExperimentReport& report);
nlohmann::json to_json(std::span<const LocalizationSummary> summaries);

// Coefficient-layout panel document; re-ingests bit-exactly.
nlohmann::json panel_to_json(const CurvePanel& panel);

// Tidy CSV, one row per configuration x replicate.
void write_report_csv(std::ostream& out, const ExperimentReport& report);
void write_localization_csv(std::ostream& out, std::span<const LocalizationSummary> summaries);

// Two columns: theta, T_N(theta).
void write_tn_curve_csv(std::ostream& out, const CusumCurve& curve);

// Curves evaluated on `grid`, one row per curve, optional header with t_j.
void write_panel_grid_csv(std::ostream& out, const CurvePanel& panel, std::span<const double> grid,
                          bool header);

}  // namespace covcpd
