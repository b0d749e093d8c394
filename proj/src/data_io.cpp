#include "mobility/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace mobility::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delim = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<int> to_int(std::string_view s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> to_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool is_skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

// Locates the named columns in a header row.
struct Header {
  std::map<std::string, std::size_t> index;
  std::size_t width = 0;

  std::optional<std::size_t> find(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
};

Header read_header(std::istream& in, std::size_t& line_no, const std::string& source,
                   std::initializer_list<const char*> required) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    Header h;
    const auto cols = split(line);
    h.width = cols.size();
    for (std::size_t i = 0; i < cols.size(); ++i) h.index[lower(cols[i])] = i;
    for (const char* name : required) {
      if (!h.find(name))
        throw Error(ErrorKind::io, source + ": missing required column '" + name + "'");
    }
    return h;
  }
  throw Error(ErrorKind::io, source + ": file is empty (a header row is required)");
}

template <typename Record, typename RowParser>
ParseResult<Record> parse_rows(std::istream& in, const Header& header, std::size_t line_no,
                               const ParseOptions& options, const std::string& source, RowParser&& parse_row) {
  ParseResult<Record> result;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    ++result.data_lines;
    const auto cols = split(line);
    if (cols.size() != header.width) {
      std::ostringstream os;
      os << "expected " << header.width << " fields, found " << cols.size();
      result.rejections.push_back({line_no, os.str()});
      continue;
    }
    std::string error;
    if (auto rec = parse_row(cols, error)) {
      result.records.push_back(*rec);
    } else {
      result.rejections.push_back({line_no, error});
    }
  }
  if (result.data_lines > 0 &&
      static_cast<double>(result.rejections.size()) > options.max_rejected_fraction * static_cast<double>(result.data_lines)) {
    std::ostringstream os;
    os << source << ": " << result.rejections.size() << " of " << result.data_lines
       << " rows rejected; first: line " << result.rejections.front().line << ": " << result.rejections.front().message;
    throw Error(ErrorKind::io, os.str());
  }
  return result;
}

std::optional<OccClass> to_class(std::string_view s, const char* column, std::string& error) {
  try {
    return parse_class_code(s);
  } catch (const Error&) {
    error = std::string(column) + ": unknown class code '" + std::string(s) + "'";
    return std::nullopt;
  }
}

std::optional<int> to_year(std::string_view s, const char* column, const ParseOptions& options, std::string& error) {
  auto y = to_int(s);
  if (!y) {
    error = std::string(column) + ": not an integer year '" + std::string(s) + "'";
    return std::nullopt;
  }
  if (*y < options.min_birth_year || *y > options.max_birth_year) {
    std::ostringstream os;
    os << column << ": year " << *y << " outside [" << options.min_birth_year << ", " << options.max_birth_year << "]";
    error = os.str();
    return std::nullopt;
  }
  return y;
}

// Shortest representation that reads back to the same double.
std::string exact(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open input file '" + path.string() + "'");
  return in;
}

ParseResult<MicroRecord> parse_micro_csv(std::istream& in, const ParseOptions& options, const std::string& source) {
  std::size_t line_no = 0;
  const Header h = read_header(in, line_no, source, {"birth_year", "father_class", "child_class"});
  const std::size_t c_year = *h.find("birth_year");
  const std::size_t c_father = *h.find("father_class");
  const std::size_t c_child = *h.find("child_class");
  const auto c_weight = h.find("weight");

  return parse_rows<MicroRecord>(in, h, line_no, options, source,
                                 [&](const std::vector<std::string_view>& cols, std::string& error) -> std::optional<MicroRecord> {
    MicroRecord rec;
    auto year = to_year(cols[c_year], "birth_year", options, error);
    if (!year) return std::nullopt;
    auto father = to_class(cols[c_father], "father_class", error);
    if (!father) return std::nullopt;
    auto child = to_class(cols[c_child], "child_class", error);
    if (!child) return std::nullopt;
    rec.birth_year = *year;
    rec.father_class = *father;
    rec.child_class = *child;
    if (c_weight && !cols[*c_weight].empty()) {
      auto w = to_double(cols[*c_weight]);
      if (!w || *w < 0.0) {
        error = "weight: expected a nonnegative number, got '" + std::string(cols[*c_weight]) + "'";
        return std::nullopt;
      }
      rec.weight = *w;
    }
    return rec;
  });
}

ParseResult<MicroRecord> parse_micro_csv(const std::filesystem::path& path, const ParseOptions& options) {
  auto in = open_input(path);
  return parse_micro_csv(in, options, path.string());
}

void write_micro_csv(std::ostream& out, std::span<const MicroRecord> records) {
  out << "birth_year,father_class,child_class,weight\n";
  for (const auto& r : records)
    out << r.birth_year << ',' << class_code(r.father_class) << ',' << class_code(r.child_class) << ','
        << exact(r.weight) << '\n';
}

ParseResult<IncomeRecord> parse_income_csv(std::istream& in, const ParseOptions& options, const std::string& source) {
  std::size_t line_no = 0;
  const Header h = read_header(in, line_no, source, {"wave_year", "birth_year", "occ_class", "income"});
  const std::size_t c_wave = *h.find("wave_year");
  const std::size_t c_year = *h.find("birth_year");
  const std::size_t c_class = *h.find("occ_class");
  const std::size_t c_income = *h.find("income");

  return parse_rows<IncomeRecord>(in, h, line_no, options, source,
                                  [&](const std::vector<std::string_view>& cols, std::string& error) -> std::optional<IncomeRecord> {
    IncomeRecord rec;
    auto wave = to_int(cols[c_wave]);
    if (!wave) {
      error = "wave_year: not an integer year '" + std::string(cols[c_wave]) + "'";
      return std::nullopt;
    }
    auto year = to_year(cols[c_year], "birth_year", options, error);
    if (!year) return std::nullopt;
    auto cls = to_class(cols[c_class], "occ_class", error);
    if (!cls) return std::nullopt;
    auto income = to_double(cols[c_income]);
    if (!income || *income <= 0.0) {
      error = "income: expected a positive number, got '" + std::string(cols[c_income]) + "'";
      return std::nullopt;
    }
    rec.wave_year = *wave;
    rec.birth_year = *year;
    rec.occ_class = *cls;
    rec.income = *income;
    return rec;
  });
}

ParseResult<IncomeRecord> parse_income_csv(const std::filesystem::path& path, const ParseOptions& options) {
  auto in = open_input(path);
  return parse_income_csv(in, options, path.string());
}

void write_income_csv(std::ostream& out, std::span<const IncomeRecord> records) {
  out << "wave_year,birth_year,occ_class,income\n";
  for (const auto& r : records)
    out << r.wave_year << ',' << r.birth_year << ',' << class_code(r.occ_class) << ',' << exact(r.income) << '\n';
}

void check_cohorts(std::span<const CohortSpec> cohorts) {
  for (std::size_t i = 0; i < cohorts.size(); ++i) {
    const auto& a = cohorts[i];
    if (a.birth_from > a.birth_to)
      throw Error(ErrorKind::io, "cohort '" + a.label + "': birth_from is after birth_to");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& b = cohorts[j];
      if (a.label == b.label) throw Error(ErrorKind::io, "duplicate cohort label '" + a.label + "'");
      if (a.birth_from <= b.birth_to && b.birth_from <= a.birth_to)
        throw Error(ErrorKind::io, "cohorts '" + b.label + "' and '" + a.label + "' overlap");
    }
  }
}

std::vector<CohortSpec> parse_cohorts(std::istream& in, const std::string& source) {
  std::vector<CohortSpec> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    const auto cols = split(line);
    if (cols.size() == 3 && lower(cols[0]) == "label") continue;
    auto from = cols.size() == 3 ? to_int(cols[1]) : std::nullopt;
    auto to = cols.size() == 3 ? to_int(cols[2]) : std::nullopt;
    if (!from || !to || cols[0].empty()) {
      std::ostringstream os;
      os << source << ":" << line_no << ": expected 'label,birth_from,birth_to'";
      throw Error(ErrorKind::io, os.str());
    }
    out.push_back({std::string(cols[0]), *from, *to});
  }
  if (out.empty()) throw Error(ErrorKind::io, source + ": no cohorts defined");
  check_cohorts(out);
  return out;
}

std::vector<CohortSpec> parse_cohorts(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_cohorts(in, path.string());
}

void write_cohorts(std::ostream& out, std::span<const CohortSpec> cohorts) {
  out << "label,birth_from,birth_to\n";
  for (const auto& c : cohorts) out << c.label << ',' << c.birth_from << ',' << c.birth_to << '\n';
}

std::vector<CohortSpec> default_cohorts() {
  return {{"I", 1940, 1951}, {"II", 1952, 1965}, {"III", 1966, 1977}};
}

TransitionCounts aggregate_counts(std::span<const MicroRecord> records, const CohortSpec& cohort, bool use_weights) {
  TransitionCounts counts;
  std::size_t matched = 0;
  for (const auto& rec : records) {
    if (!cohort.contains(rec.birth_year)) continue;
    counts.add(rec.father_class, rec.child_class, use_weights ? rec.weight : 1.0);
    ++matched;
  }
  if (matched == 0) throw Error(ErrorKind::data, "cohort '" + cohort.label + "' has no records");
  return counts;
}

std::vector<LabeledCounts> parse_counts_csv(std::istream& in, const std::string& source) {
  std::size_t line_no = 0;
  const Header h = read_header(in, line_no, source, {"father_class", "child_class", "count"});
  const auto c_cohort = h.find("cohort");
  const std::size_t c_father = *h.find("father_class");
  const std::size_t c_child = *h.find("child_class");
  const std::size_t c_count = *h.find("count");

  std::vector<LabeledCounts> out;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    const auto cols = split(line);
    std::string error;
    auto fail = [&](const std::string& msg) {
      std::ostringstream os;
      os << source << ":" << line_no << ": " << msg;
      throw Error(ErrorKind::io, os.str());
    };
    if (cols.size() != h.width) fail("wrong number of fields");
    auto father = to_class(cols[c_father], "father_class", error);
    auto child = to_class(cols[c_child], "child_class", error);
    auto count = to_double(cols[c_count]);
    if (!father || !child) fail(error);
    if (!count || *count < 0.0) fail("count: expected a nonnegative number");
    const std::string label = c_cohort ? std::string(cols[*c_cohort]) : std::string("all");
    auto it = std::find_if(out.begin(), out.end(), [&](const LabeledCounts& lc) { return lc.cohort == label; });
    if (it == out.end()) {
      out.push_back({label, TransitionCounts{}});
      it = std::prev(out.end());
    }
    it->counts.add(*father, *child, *count);
  }
  if (out.empty()) throw Error(ErrorKind::io, source + ": no counts");
  return out;
}

std::vector<LabeledCounts> parse_counts_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_counts_csv(in, path.string());
}

void write_counts_csv(std::ostream& out, std::span<const LabeledCounts> counts) {
  out << "cohort,father_class,child_class,count\n";
  for (const auto& lc : counts)
    for (OccClass f : kAllClasses)
      for (OccClass c : kAllClasses)
        out << lc.cohort << ',' << class_code(f) << ',' << class_code(c) << ',' << exact(lc.counts(f, c)) << '\n';
}

std::vector<MicroRecord> expand_counts(const TransitionCounts& counts, const CohortSpec& cohort) {
  std::vector<MicroRecord> out;
  const int span = cohort.birth_to - cohort.birth_from + 1;
  std::size_t k = 0;
  for (OccClass f : kAllClasses) {
    for (OccClass c : kAllClasses) {
      const double v = counts(f, c);
      if (v != std::floor(v)) throw Error(ErrorKind::data, "expand_counts needs integer counts");
      for (std::size_t i = 0; i < static_cast<std::size_t>(v); ++i, ++k)
        out.push_back({cohort.birth_from + static_cast<int>(k % static_cast<std::size_t>(span)), f, c, 1.0});
    }
  }
  return out;
}

Matrix3 parse_matrix_text(std::istream& in, const std::string& source) {
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (is_skippable(line)) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      auto v = to_double(tok);
      if (!v) throw Error(ErrorKind::io, source + ": not a number '" + tok + "'");
      values.push_back(*v);
    }
  }
  if (values.size() != 9)
    throw Error(ErrorKind::io, source + ": expected 9 matrix entries, found " + std::to_string(values.size()));
  Matrix3 m{};
  for (std::size_t i = 0; i < 9; ++i) m[i / 3][i % 3] = values[i];
  return m;
}

}  // namespace mobility::io
