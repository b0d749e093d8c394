#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mobility/data_io.hpp"
#include "mobility/estimation.hpp"
#include "mobility/model.hpp"
#include "mobility/report.hpp"
#include "mobility/simulator.hpp"

namespace mobility::cli {

namespace {

using nlohmann::json;

struct Options {
  std::string input;
  std::string counts;
  std::string cohorts;
  std::string out;
  std::string format = "document";
  bool weights = false;
  std::uint64_t seed = kDefaultSeed;
  std::size_t replications = 1000;
  unsigned threads = 1;

  // identify
  std::string cohort;
  std::string matrix = "Q";

  // simulate
  std::string params;
  std::string fathers;
  long long population = -1;
  std::string label = "sim";
};

struct CohortInput {
  CohortSpec cohort;
  TransitionCounts counts;
  std::vector<MicroRecord> records;
};

std::vector<CohortSpec> load_cohorts(const Options& o) {
  auto cohorts = o.cohorts.empty() ? io::default_cohorts() : io::parse_cohorts(o.cohorts);
  io::check_cohorts(cohorts);
  return cohorts;
}

template <typename Record>
void note_rejections(const io::ParseResult<Record>& parsed, std::vector<std::string>& warnings) {
  if (parsed.rejections.empty()) return;
  const auto& first = parsed.rejections.front();
  warnings.push_back(std::to_string(parsed.rejections.size()) + " of " + std::to_string(parsed.data_lines) +
                     " rows rejected (first at line " + std::to_string(first.line) + ": " + first.message + ")");
}

std::vector<CohortInput> load_pairs(const Options& o, std::vector<std::string>& warnings) {
  if (o.input.empty() == o.counts.empty())
    throw Error(ErrorKind::usage, "give exactly one of --input (micro CSV) or --counts (counts CSV)");
  const auto cohorts = load_cohorts(o);
  std::vector<CohortInput> out;

  if (!o.counts.empty()) {
    for (auto& lc : io::parse_counts_csv(o.counts)) {
      auto it = std::find_if(cohorts.begin(), cohorts.end(), [&](const CohortSpec& c) { return c.label == lc.cohort; });
      CohortSpec spec = it != cohorts.end() ? *it : CohortSpec{lc.cohort, 0, 0};
      out.push_back({spec, lc.counts, io::expand_counts(lc.counts, spec)});
    }
    return out;
  }

  auto parsed = io::parse_micro_csv(o.input);
  note_rejections(parsed, warnings);
  std::size_t assigned = 0;
  for (const auto& c : cohorts) {
    CohortInput ci{c, io::aggregate_counts(parsed.records, c, o.weights), {}};
    std::copy_if(parsed.records.begin(), parsed.records.end(), std::back_inserter(ci.records),
                 [&](const MicroRecord& r) { return c.contains(r.birth_year); });
    assigned += ci.records.size();
    out.push_back(std::move(ci));
  }
  if (assigned < parsed.records.size())
    warnings.push_back(std::to_string(parsed.records.size() - assigned) + " records fall outside every cohort");
  return out;
}

void emit(const io::Report& report, const Options& o, std::ostream& out) {
  const auto format = io::parse_report_format(o.format);
  if (!o.out.empty()) io::write_report(report, o.out, format);
  out << "mobility " << io::kToolVersion << " " << report.command;
  if (report.seed) out << " (seed " << *report.seed << ")";
  out << '\n' << io::format_summary(report);
  if (!o.out.empty()) out << "report written to " << o.out << '\n';
}

int cmd_estimate(const Options& o, std::ostream& out) {
  io::Report report;
  report.command = "estimate";
  for (const auto& ci : load_pairs(o, report.warnings)) {
    const auto d = estimation::decompose(ci.counts);
    auto r = io::cohort_result(ci.cohort, d);
    io::attach_estimates(r, estimation::estimate_all(d));
    report.cohorts.push_back(std::move(r));
  }
  emit(report, o, out);
  return kExitOk;
}

int cmd_bootstrap(const Options& o, std::ostream& out) {
  if (o.replications < 1) throw Error(ErrorKind::usage, "--replications must be at least 1");
  io::Report report;
  report.command = "bootstrap";
  report.seed = o.seed;
  if (o.replications < estimation::kLowReplicationThreshold)
    report.warnings.push_back("only " + std::to_string(o.replications) + " bootstrap replications (fewer than " +
                              std::to_string(estimation::kLowReplicationThreshold) + "); standard errors are rough");
  const auto inputs = load_pairs(o, report.warnings);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const auto& ci = inputs[k];
    const auto d = estimation::decompose(ci.counts);
    auto r = io::cohort_result(ci.cohort, d);
    io::attach_estimates(r, estimation::estimate_all(d));
    estimation::BootstrapOptions bo;
    bo.replications = o.replications;
    // One stream per cohort position.
    bo.seed = substream_seed(o.seed, k);
    bo.use_weights = o.weights;
    bo.threads = o.threads;
    auto summary = estimation::bootstrap(ci.records, ci.cohort, bo);
    r.diagnostics["bootstrap_dropped"] = summary.dropped;
    if (summary.degenerate) report.warnings.push_back("cohort " + ci.cohort.label + ": degenerate bootstrap");
    r.bootstrap = std::move(summary);
    report.cohorts.push_back(std::move(r));
  }
  emit(report, o, out);
  return kExitOk;
}

std::vector<io::CohortMatrices> load_matrices(const Options& o) {
  if (o.input.empty()) throw Error(ErrorKind::usage, "--input is required");
  auto in = io::open_input(o.input);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text.compare(first, 14, "cohort,section") == 0)) {
    auto all = io::read_report_matrices_text(text);
    std::vector<io::CohortMatrices> picked;
    for (auto& c : all)
      if (o.cohort.empty() || c.label == o.cohort) picked.push_back(std::move(c));
    if (picked.empty()) throw Error(ErrorKind::usage, "no cohort '" + o.cohort + "' in " + o.input);
    return picked;
  }
  std::istringstream is(text);
  io::CohortMatrices single{o.cohort.empty() ? std::string("input") : o.cohort, {}};
  single.matrices[o.matrix] = io::parse_matrix_text(is, o.input);
  return {single};
}

int cmd_identify(const Options& o, std::ostream& out) {
  io::Report report;
  report.command = "identify";
  for (const auto& cm : load_matrices(o)) {
    const auto it = cm.matrices.find(o.matrix);
    if (it == cm.matrices.end())
      throw Error(ErrorKind::data, "cohort " + cm.label + " has no matrix '" + o.matrix + "'");
    const auto q = TransitionMatrix::normalized(it->second, 1e-6);
    const auto id = model::identify_params(q);
    io::CohortResult r;
    r.cohort = CohortSpec{cm.label, 0, 0};
    r.matrices = {{o.matrix, q}};
    r.params = id.params;
    r.validity = id.validity;
    // From Q directly so boundary matrices (zero-width supports) still report.
    const double i_true = 1.0 - q.trace() / 3.0;
    const double i_opp = model::i_opp_from_params(id.params);
    r.diagnostics["i_true"] = i_true;
    r.diagnostics["i_opp"] = i_opp;
    r.diagnostics["i_loi"] = i_opp - i_true;
    if (!id.validity.valid())
      report.warnings.push_back("cohort " + cm.label + ": " + id.validity.summary());
    report.cohorts.push_back(std::move(r));
  }
  emit(report, o, out);
  return kExitOk;
}

double number_field(const json& obj, const char* key, double fallback, bool required) {
  if (!obj.contains(key)) {
    if (required) throw Error(ErrorKind::usage, std::string("missing field '") + key + "'");
    return fallback;
  }
  if (!obj[key].is_number()) throw Error(ErrorKind::usage, std::string("field '") + key + "' must be a number");
  return obj[key].get<double>();
}

struct SimInput {
  ModelParams params;
  std::optional<Primitives> primitives;
  std::optional<Thresholds> thresholds;
};

SimInput load_sim_input(const std::string& path) {
  if (path.empty()) throw Error(ErrorKind::usage, "--params is required");
  auto in = io::open_input(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, "malformed parameter file '" + path + "': " + e.what());
  }
  SimInput s;
  if (doc.contains("params")) {
    const auto& p = doc["params"];
    s.params = {number_field(p, "lambda_M", 0, true),   number_field(p, "lambda_U", 0, true),
                number_field(p, "theta_max", 0, true),  number_field(p, "theta_min", 0, true),
                number_field(p, "theta_M_min", 0, true), number_field(p, "theta_M_max", 0, true)};
    return s;
  }
  if (!doc.contains("primitives"))
    throw Error(ErrorKind::usage, "parameter file '" + path + "' needs a 'params' or 'primitives' object");
  const auto& p = doc["primitives"];
  Primitives pr;
  pr.mu_W = number_field(p, "mu_W", 0, true);
  pr.mu_M = number_field(p, "mu_M", 0, true);
  pr.mu_U = number_field(p, "mu_U", 0, true);
  pr.sigma2_W = number_field(p, "sigma2_W", 1, false);
  pr.sigma2_M = number_field(p, "sigma2_M", 1, false);
  pr.sigma2_U = number_field(p, "sigma2_U", 1, false);
  pr.c_M_e = number_field(p, "c_M_e", 0, false);
  pr.c_U_e = number_field(p, "c_U_e", 0, false);
  pr.delta = number_field(p, "delta", 0, false);
  pr.kappa = number_field(p, "kappa", 0, false);
  sim::Supports sup;
  if (doc.contains("supports")) {
    const auto& q = doc["supports"];
    sup.theta_max = number_field(q, "theta_max", 1, false);
    sup.theta_min = number_field(q, "theta_min", 0, false);
    sup.theta_M_min = number_field(q, "theta_M_min", 0, false);
    sup.theta_M_max = number_field(q, "theta_M_max", 1, false);
  }
  s.primitives = pr;
  s.thresholds = model::thresholds_from_primitives(pr);
  s.params = sim::params_from_primitives(pr, sup);
  return s;
}

ClassShares parse_fathers(const std::string& text) {
  if (text.empty()) throw Error(ErrorKind::usage, "--fathers is required (three shares, e.g. 0.5,0.4,0.1)");
  Vector3 v{};
  std::stringstream ss(text);
  std::string cell;
  std::size_t i = 0;
  while (std::getline(ss, cell, ',')) {
    if (i >= 3) throw Error(ErrorKind::usage, "--fathers takes exactly three shares");
    try {
      std::size_t used = 0;
      v[i] = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw Error(ErrorKind::usage, "bad share '" + cell + "' in --fathers");
    }
    ++i;
  }
  if (i != 3) throw Error(ErrorKind::usage, "--fathers takes exactly three shares");
  try {
    return ClassShares::from_weights(v);
  } catch (const Error& e) {
    throw Error(ErrorKind::usage, std::string("--fathers: ") + e.what());
  }
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  if (o.population < 1) throw Error(ErrorKind::usage, "--n must be a positive population size");
  const auto input = load_sim_input(o.params);
  if (input.thresholds) {
    const auto& t = *input.thresholds;
    out << "thresholds: lambda_M=" << fixed(t.lambda_M, 4) << " lambda_U=" << fixed(t.lambda_U, 4)
        << " lambda_WU=" << fixed(t.lambda_WU, 4) << '\n';
    if (!t.ordering_holds)
      throw Error(ErrorKind::invalid_primitives, "violated: lambda_M < lambda_WU < lambda_U");
    if (!t.in_unit_interval) throw Error(ErrorKind::invalid_primitives, "violated: thresholds within [0,1]");
  }
  const auto report = model::validate(input.params);
  if (!report.valid()) throw Error(ErrorKind::invalid_params, report.summary());

  sim::SimConfig cfg{input.params, parse_fathers(o.fathers), static_cast<std::size_t>(o.population), o.seed, o.threads};
  const auto counts = sim::simulate_cohort(cfg);
  const auto q = model::build_true_matrix(input.params);
  const auto p = estimation::estimate_P(counts);

  out << "mobility " << io::kToolVersion << " simulate (seed " << o.seed << ", n " << o.population << ")\n";
  out << "  theoretical Q                empirical P\n";
  double worst = 0.0;
  for (OccClass f : kAllClasses) {
    out << "  " << class_code(f) << " ";
    for (OccClass t : kAllClasses) out << ' ' << fixed(q(f, t), 4);
    out << "     ";
    for (OccClass t : kAllClasses) {
      out << ' ' << fixed(p(f, t), 4);
      worst = std::max(worst, std::abs(p(f, t) - q(f, t)));
    }
    out << '\n';
  }
  out << "  max |P - Q| = " << fixed(worst, 6) << '\n';

  if (!o.out.empty()) {
    std::ofstream file(o.out, std::ios::binary);
    if (!file) throw Error(ErrorKind::io, "cannot write counts to '" + o.out + "'");
    const std::vector<io::LabeledCounts> rows{{o.label, counts}};
    io::write_counts_csv(file, rows);
    out << "counts written to " << o.out << '\n';
  }
  return kExitOk;
}

int cmd_premia(const Options& o, std::ostream& out) {
  if (o.input.empty()) throw Error(ErrorKind::usage, "--input (income CSV) is required");
  io::Report report;
  report.command = "premia";
  auto parsed = io::parse_income_csv(o.input);
  note_rejections(parsed, report.warnings);
  for (const auto& c : load_cohorts(o)) {
    io::CohortResult r;
    r.cohort = c;
    auto premia = estimation::income_premia(parsed.records, c);
    if (!premia.variance_ratios_defined)
      report.warnings.push_back("cohort " + c.label + ": degenerate income dispersion, risk premium undefined");
    r.premia = std::move(premia);
    report.cohorts.push_back(std::move(r));
  }
  emit(report, o, out);
  return kExitOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage:
    case ErrorKind::io:
    case ErrorKind::data: return kExitUsage;
    default: return kExitFailure;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Intergenerational occupational mobility: decomposition, identification, simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(io::kToolVersion));

  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Write the report to this file");
    sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"document", "delimited"}));
  };
  auto add_pairs = [&](CLI::App* sub) {
    sub->add_option("--input", o.input, "Micro CSV: birth_year,father_class,child_class[,weight]");
    sub->add_option("--counts", o.counts, "Counts CSV: cohort,father_class,child_class,count");
    sub->add_option("--cohorts", o.cohorts, "Cohort file: label,birth_from,birth_to");
    sub->add_flag("--weights", o.weights, "Use the weight column when aggregating");
  };

  auto* estimate = app.add_subcommand("estimate", "Estimate P, decompose into Q and R, identify parameters");
  add_pairs(estimate);
  add_output(estimate);

  auto* boot = app.add_subcommand("bootstrap", "Point estimates with bootstrap standard errors");
  add_pairs(boot);
  add_output(boot);
  boot->add_option("--replications", o.replications, "Bootstrap replications")->capture_default_str();
  boot->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  boot->add_option("--threads", o.threads, "Worker threads (0 = all cores); results do not depend on it");

  auto* identify = app.add_subcommand("identify", "Identify the six model parameters from a true-mobility matrix");
  identify->add_option("--input", o.input, "Nine numbers (row-major) or a report from estimate")->required();
  identify->add_option("--cohort", o.cohort, "Only this cohort of a report");
  identify->add_option("--matrix", o.matrix, "Matrix to read from a report")->capture_default_str();
  add_output(identify);

  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo draw of a cohort from the choice model");
  simulate->add_option("--params", o.params, "JSON with 'params', or 'primitives' plus optional 'supports'")
      ->required();
  simulate->add_option("--fathers", o.fathers, "Father class shares W,M,U")->required();
  simulate->add_option("--n", o.population, "Number of agents")->required();
  simulate->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  simulate->add_option("--threads", o.threads, "Worker threads (0 = all cores); counts do not depend on it");
  simulate->add_option("--label", o.label, "Cohort label in the counts file")->capture_default_str();
  simulate->add_option("--out", o.out, "Write simulated counts (counts CSV) to this file");

  auto* premia = app.add_subcommand("premia", "Return and risk premium proxies from income panels");
  premia->add_option("--input", o.input, "Income CSV: wave_year,birth_year,class,income")->required();
  premia->add_option("--cohorts", o.cohorts, "Cohort file: label,birth_from,birth_to");
  add_output(premia);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand(estimate)) return cmd_estimate(o, out);
    if (app.got_subcommand(boot)) return cmd_bootstrap(o, out);
    if (app.got_subcommand(identify)) return cmd_identify(o, out);
    if (app.got_subcommand(simulate)) return cmd_simulate(o, out);
    if (app.got_subcommand(premia)) return cmd_premia(o, out);
  } catch (const Error& e) {
    err << "error (" << error_kind_name(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace mobility::cli
