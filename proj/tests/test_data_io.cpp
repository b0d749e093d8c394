#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mobility/data_io.hpp"
#include "mobility/estimation.hpp"
#include "mobility/report.hpp"
#include "support.hpp"

using namespace mobility;
using namespace mobility::io;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a throw");
  return ErrorKind::usage;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("mobility_test_" + name);
}

}  // namespace

TEST_CASE("micro csv") {
  SUBCASE("columns in any order, optional weight, lower-case codes") {
    std::istringstream in("child_class,weight,birth_year,father_class\nm,2.5,1945,w\nU,1,1950,M\n");
    const auto r = parse_micro_csv(in);
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0] == MicroRecord{1945, OccClass::Working, OccClass::Middle, 2.5});
    CHECK(r.records[1].father_class == OccClass::Middle);
    CHECK(r.rejections.empty());
  }
  SUBCASE("weight defaults to one") {
    std::istringstream in("birth_year,father_class,child_class\n1960,W,W\n");
    CHECK(parse_micro_csv(in).records.at(0).weight == 1.0);
  }
  SUBCASE("bad rows are rejected with line numbers") {
    std::istringstream in(
        "birth_year,father_class,child_class,weight\n"
        "1945,W,M,1\n"
        "1945,X,M,1\n"
        "abc,W,M,1\n"
        "1700,W,M,1\n"
        "1945,W,M,-2\n"
        "1945,W\n"
        "1946,U,U,1\n"
        "1947,M,W,1\n"
        "1948,M,M,1\n"
        "1949,W,U,1\n");
    const auto r = parse_micro_csv(in);
    CHECK(r.records.size() == 5);
    REQUIRE(r.rejections.size() == 5);
    CHECK(r.rejections[0].line == 3);
    CHECK(r.rejections[4].line == 7);
    CHECK(r.data_lines == 10);
  }
  SUBCASE("mostly garbage is fatal") {
    std::istringstream in("birth_year,father_class,child_class\n1945,Q,M\n1945,Q,M\n1945,W,M\n");
    CHECK(kind_of([&] { parse_micro_csv(in); }) == ErrorKind::io);
  }
  SUBCASE("missing column is fatal") {
    std::istringstream in("birth_year,father_class\n1945,W\n");
    CHECK(kind_of([&] { parse_micro_csv(in); }) == ErrorKind::io);
  }
  SUBCASE("missing file names the path") {
    try {
      parse_micro_csv(std::filesystem::path("/no/such/micro.csv"));
      FAIL("expected a throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::io);
      CHECK(std::string(e.what()).find("/no/such/micro.csv") != std::string::npos);
    }
  }
  SUBCASE("write then read") {
    const std::vector<MicroRecord> recs{{1941, OccClass::Upper, OccClass::Working, 0.1},
                                        {1977, OccClass::Middle, OccClass::Upper, 12.75}};
    std::stringstream buf;
    write_micro_csv(buf, recs);
    CHECK(parse_micro_csv(buf).records == recs);
  }
}

TEST_CASE("income csv") {
  std::istringstream in(
      "wave_year,birth_year,occ_class,income\n2000,1945,W,1200\n2000,1945,M,0\n2002,1950,U,-5\n2002,1950,U,800\n"
      "2004,1950,M,950\n");
  const auto r = parse_income_csv(in);
  CHECK(r.records.size() == 3);
  CHECK(r.rejections.size() == 2);

  const std::vector<IncomeRecord> recs{{1995, 1940, OccClass::Middle, 1234.5678}, {2012, 1977, OccClass::Upper, 1e-3}};
  std::stringstream buf;
  write_income_csv(buf, recs);
  CHECK(parse_income_csv(buf).records == recs);
}

TEST_CASE("cohort config") {
  SUBCASE("header, comments and blank lines") {
    std::istringstream in("label,birth_from,birth_to\n# oldest\nA,1900,1920\n\nB,1921,1950\n");
    const auto c = parse_cohorts(in);
    REQUIRE(c.size() == 2);
    CHECK(c[1] == CohortSpec{"B", 1921, 1950});
  }
  SUBCASE("defaults") {
    const auto c = default_cohorts();
    REQUIRE(c.size() == 3);
    CHECK(c[0] == CohortSpec{"I", 1940, 1951});
    CHECK(c[1] == CohortSpec{"II", 1952, 1965});
    CHECK(c[2] == CohortSpec{"III", 1966, 1977});
    CHECK(parse_cohorts(fixture::path("cohorts.csv")) == c);
  }
  SUBCASE("round trip") {
    const auto c = default_cohorts();
    std::stringstream buf;
    write_cohorts(buf, c);
    CHECK(parse_cohorts(buf) == c);
  }
  SUBCASE("overlap, inversion, duplicates, malformed") {
    std::istringstream overlap("A,1900,1950\nB,1950,1960\n");
    CHECK(kind_of([&] { parse_cohorts(overlap); }) == ErrorKind::io);
    std::istringstream inverted("A,1960,1950\n");
    CHECK(kind_of([&] { parse_cohorts(inverted); }) == ErrorKind::io);
    std::istringstream dup("A,1900,1910\nA,1911,1920\n");
    CHECK(kind_of([&] { parse_cohorts(dup); }) == ErrorKind::io);
    std::istringstream bad("A,19x0,1910\n");
    CHECK(kind_of([&] { parse_cohorts(bad); }) == ErrorKind::io);
  }
}

TEST_CASE("aggregation") {
  const std::vector<MicroRecord> recs{{1945, OccClass::Working, OccClass::Middle, 2.0},
                                      {1946, OccClass::Working, OccClass::Middle, 3.0},
                                      {1950, OccClass::Upper, OccClass::Upper, 0.5},
                                      {1960, OccClass::Upper, OccClass::Upper, 1.0}};
  const CohortSpec c{"I", 1940, 1951};
  const auto plain = aggregate_counts(recs, c);
  CHECK(plain(OccClass::Working, OccClass::Middle) == 2.0);
  CHECK(plain.total() == 3.0);
  const auto weighted = aggregate_counts(recs, c, true);
  CHECK(weighted(OccClass::Working, OccClass::Middle) == 5.0);
  CHECK(weighted(OccClass::Upper, OccClass::Upper) == 0.5);
  CHECK(kind_of([&] { aggregate_counts(recs, {"X", 1800, 1810}); }) == ErrorKind::data);
}

TEST_CASE("counts csv and expansion") {
  SUBCASE("fixture matches the frozen counts") {
    const auto all = parse_counts_csv(fixture::path("reference_counts.csv"));
    REQUIRE(all.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(all[k].cohort == fixture::kLabels[k]);
      CHECK(all[k].counts == fixture::counts(k));
    }
  }
  SUBCASE("round trip") {
    const std::vector<LabeledCounts> rows{{"a", fixture::counts(0)}, {"b", fixture::counts(2)}};
    std::stringstream buf;
    write_counts_csv(buf, rows);
    const auto back = parse_counts_csv(buf);
    REQUIRE(back.size() == 2);
    CHECK(back[1].counts == fixture::counts(2));
  }
  SUBCASE("expansion reproduces the counts inside the cohort") {
    const CohortSpec c{"II", 1952, 1965};
    const auto recs = expand_counts(fixture::counts(1), c);
    CHECK(recs.size() == 8325);
    for (const auto& r : recs) REQUIRE(c.contains(r.birth_year));
    CHECK(aggregate_counts(recs, c) == fixture::counts(1));
  }
  SUBCASE("micro fixture aggregates to the counts fixture") {
    const auto parsed = parse_micro_csv(fixture::path("reference_micro.csv"));
    CHECK(parsed.records.size() == 15389);
    CHECK(parsed.rejections.empty());
    const auto cohorts = default_cohorts();
    for (std::size_t k = 0; k < 3; ++k) CHECK(aggregate_counts(parsed.records, cohorts[k]) == fixture::counts(k));
  }
}

TEST_CASE("matrix text") {
  std::istringstream in("# Q\n0.2, 0.3, 0.5\n0.1 0.8 0.1\n\n0.3\t0.3\t0.4\n");
  const auto m = parse_matrix_text(in);
  CHECK(m[0][2] == 0.5);
  CHECK(m[2][0] == 0.3);
  std::istringstream short_in("1 0 0\n0 1 0\n");
  CHECK(kind_of([&] { parse_matrix_text(short_in); }) == ErrorKind::io);
  std::istringstream junk("1 0 0\n0 1 x\n0 0 1\n");
  CHECK(kind_of([&] { parse_matrix_text(junk); }) == ErrorKind::io);
}

TEST_CASE("report files") {
  Report report;
  report.command = "estimate";
  report.seed = 99;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto d = estimation::decompose(fixture::counts(k));
    auto r = cohort_result(default_cohorts()[k], d);
    attach_estimates(r, estimation::estimate_all(d));
    report.cohorts.push_back(std::move(r));
  }

  for (auto format : {ReportFormat::document, ReportFormat::delimited}) {
    const auto path = temp_path(format == ReportFormat::document ? "report.json" : "report.csv");
    write_report(report, path, format);
    const auto back = read_report_matrices(path);
    REQUIRE(back.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(back[k].label == fixture::kLabels[k]);
      for (const auto& [name, m] : report.cohorts[k].matrices)
        CHECK(fixture::max_abs_diff(back[k].matrices.at(name), m.entries()) <= 1e-15);
    }
    std::filesystem::remove(path);
  }

  SUBCASE("document layout") {
    const auto doc = to_document(report);
    CHECK(doc["tool"] == "mobility");
    CHECK(doc["version"] == std::string(kToolVersion));
    CHECK(doc["seed"] == 99);
    const auto& c = doc["cohorts"][0];
    for (const char* key : {"label", "birth_from", "birth_to", "observations", "matrices", "shares", "indexes",
                            "params", "validity", "diagnostics"})
      CHECK(c.contains(key));
    CHECK(c["diagnostics"].contains("amended"));
    CHECK(c["diagnostics"].contains("qr_residual"));
  }
  SUBCASE("delimited layout") {
    const auto text = to_delimited(report);
    CHECK(text.rfind("cohort,section,name,from,to,value,se\n", 0) == 0);
    CHECK(text.find("I,index,i_obs,,,") != std::string::npos);
    CHECK(text.find("III,matrix,Q,U,U,") != std::string::npos);
  }
  SUBCASE("unwritable destination") {
    CHECK(kind_of([&] { write_report(report, "/no/such/dir/r.json", ReportFormat::document); }) == ErrorKind::io);
  }
  SUBCASE("format names") {
    CHECK(parse_report_format("delimited") == ReportFormat::delimited);
    CHECK(kind_of([&] { parse_report_format("xml"); }) == ErrorKind::usage);
  }
}
