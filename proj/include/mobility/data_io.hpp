#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mobility/records.hpp"
#include "mobility/types.hpp"

namespace mobility::io {

/// A data row that could not be parsed. `line` is 1-based and counts the header.
struct Rejection {
  std::size_t line = 0;
  std::string message;
};

template <typename Record>
struct ParseResult {
  std::vector<Record> records;
  std::vector<Rejection> rejections;
  std::size_t data_lines = 0;
};

struct ParseOptions {
  int min_birth_year = 1800;
  int max_birth_year = 2100;
  /// Fatal when more than this fraction of data rows is rejected.
  double max_rejected_fraction = 0.5;
};

/// Micro CSV: header `birth_year,father_class,child_class[,weight]` (any
/// column order). Class codes W|M|U, case-insensitive; weight defaults to 1.
/// Malformed rows are rejected with line-numbered diagnostics. A missing
/// required column or a rejection rate above the limit throws Error(io).
ParseResult<MicroRecord> parse_micro_csv(const std::filesystem::path& path, const ParseOptions& options = {});
ParseResult<MicroRecord> parse_micro_csv(std::istream& in, const ParseOptions& options = {},
                                         const std::string& source = "<stream>");
void write_micro_csv(std::ostream& out, std::span<const MicroRecord> records);

/// Income CSV: header `wave_year,birth_year,occ_class,income`. Rows with a
/// nonpositive income are rejected.
ParseResult<IncomeRecord> parse_income_csv(const std::filesystem::path& path, const ParseOptions& options = {});
ParseResult<IncomeRecord> parse_income_csv(std::istream& in, const ParseOptions& options = {},
                                           const std::string& source = "<stream>");
void write_income_csv(std::ostream& out, std::span<const IncomeRecord> records);

/// Cohort config: one `label,birth_from,birth_to` triple per line; an
/// optional header starting with `label`, blank lines and `#` comments are
/// skipped. Throws Error(io) on malformed lines or overlapping cohorts.
std::vector<CohortSpec> parse_cohorts(const std::filesystem::path& path);
std::vector<CohortSpec> parse_cohorts(std::istream& in, const std::string& source = "<stream>");
void write_cohorts(std::ostream& out, std::span<const CohortSpec> cohorts);

/// Children born 1940-1951, 1952-1965 and 1966-1977.
std::vector<CohortSpec> default_cohorts();

/// Throws Error(io) if any two cohorts overlap or a range is inverted.
void check_cohorts(std::span<const CohortSpec> cohorts);

/// Sums the weights (or counts records when use_weights is false) falling in
/// the cohort into the (father, child) cell. Throws Error(data) when the
/// cohort holds no records.
TransitionCounts aggregate_counts(std::span<const MicroRecord> records, const CohortSpec& cohort,
                                  bool use_weights = false);

/// Counts CSV: header `cohort,father_class,child_class,count`, one row per cell.
struct LabeledCounts {
  std::string cohort;
  TransitionCounts counts;
};
std::vector<LabeledCounts> parse_counts_csv(const std::filesystem::path& path);
std::vector<LabeledCounts> parse_counts_csv(std::istream& in, const std::string& source = "<stream>");
void write_counts_csv(std::ostream& out, std::span<const LabeledCounts> counts);

/// Expands integer counts into one unit-weight record per pair. Birth years
/// cycle through the cohort range so every record falls inside it.
std::vector<MicroRecord> expand_counts(const TransitionCounts& counts, const CohortSpec& cohort);

/// Three rows of three numbers separated by commas and/or whitespace.
/// Blank lines and `#` comments are ignored.
Matrix3 parse_matrix_text(std::istream& in, const std::string& source = "<stream>");

/// Opens a file for reading or throws Error(io) naming the path.
std::ifstream open_input(const std::filesystem::path& path);

}  // namespace mobility::io
