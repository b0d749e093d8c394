#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mobility/estimation.hpp"
#include "mobility/model.hpp"
#include "mobility/records.hpp"
#include "mobility/types.hpp"

namespace mobility::io {

inline constexpr std::string_view kToolName = "mobility";
inline constexpr std::string_view kToolVersion = "1.0.0";

enum class ReportFormat { document, delimited };

ReportFormat parse_report_format(std::string_view name);

/// Results for one cohort. Every part is optional so the same structure
/// carries estimate, identify, bootstrap and premia output.
struct CohortResult {
  CohortSpec cohort;
  std::optional<double> observations;
  /// Written in insertion order.
  std::vector<std::pair<std::string, TransitionMatrix>> matrices;
  std::optional<estimation::MarginalShares> shares;
  std::optional<MobilityIndexes> indexes;
  std::optional<ModelParams> params;
  std::optional<model::ValidityReport> validity;
  std::optional<estimation::BootstrapSummary> bootstrap;
  std::optional<estimation::PremiaReport> premia;
  nlohmann::ordered_json diagnostics = nlohmann::ordered_json::object();
};

struct Report {
  std::string command;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> warnings;
  std::vector<CohortResult> cohorts;
};

/// P, R, Q (and the raw trace-program solution R0), shares, diagnostics.
CohortResult cohort_result(const CohortSpec& cohort, const estimation::Decomposition& d);
void attach_estimates(CohortResult& r, const estimation::Estimates& e);

nlohmann::ordered_json to_document(const Report& report);
/// Header `cohort,section,name,from,to,value,se`; one row per matrix cell,
/// share, index, parameter, diagnostic and premia figure.
std::string to_delimited(const Report& report);

/// Throws Error(io) naming the path when it cannot be written.
void write_report(const Report& report, const std::filesystem::path& path, ReportFormat format);
std::string render_report(const Report& report, ReportFormat format);

/// Fixed-width tables for the terminal: matrices to 4 decimals, indexes and
/// parameters to 3, standard errors in brackets.
std::string format_summary(const Report& report);

struct CohortMatrices {
  std::string label;
  std::map<std::string, Matrix3> matrices;
};

/// Reads the matrices back from either report format.
std::vector<CohortMatrices> read_report_matrices(const std::filesystem::path& path);
std::vector<CohortMatrices> read_report_matrices_text(const std::string& text);

}  // namespace mobility::io
