#include "mobility/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mobility/data_io.hpp"

namespace mobility::io {

using nlohmann::ordered_json;

ReportFormat parse_report_format(std::string_view name) {
  if (name == "document") return ReportFormat::document;
  if (name == "delimited") return ReportFormat::delimited;
  throw Error(ErrorKind::usage, "unknown report format '" + std::string(name) + "' (document|delimited)");
}

CohortResult cohort_result(const CohortSpec& cohort, const estimation::Decomposition& d) {
  CohortResult r;
  r.cohort = cohort;
  r.observations = d.observations;
  r.matrices = {{"P", d.P}, {"R", d.R}, {"Q", d.Q}, {"R0", d.R0}};
  r.shares = estimation::MarginalShares{d.fathers, d.children};
  r.diagnostics["amended"] = d.amended;
  r.diagnostics["amendment_passes"] = d.amendment_passes;
  r.diagnostics["qr_residual"] = d.qr_residual;
  r.diagnostics["share_residual"] = d.share_residual;
  return r;
}

void attach_estimates(CohortResult& r, const estimation::Estimates& e) {
  r.indexes = e.indexes;
  r.params = e.params;
  r.validity = e.validity;
}

namespace {

std::string exact(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json matrix_json(const Matrix3& m) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : m) rows.push_back({row[0], row[1], row[2]});
  return rows;
}

const std::array<std::pair<const char*, double MobilityIndexes::*>, 5> kIndexFields{{
    {"i_obs", &MobilityIndexes::i_obs},
    {"i_true", &MobilityIndexes::i_true},
    {"i_os", &MobilityIndexes::i_os},
    {"i_opp", &MobilityIndexes::i_opp},
    {"i_loi", &MobilityIndexes::i_loi},
}};

const std::array<std::pair<const char*, double ModelParams::*>, 6> kParamFields{{
    {"lambda_M", &ModelParams::lambda_M},
    {"lambda_U", &ModelParams::lambda_U},
    {"theta_max", &ModelParams::theta_max},
    {"theta_min", &ModelParams::theta_min},
    {"theta_M_min", &ModelParams::theta_M_min},
    {"theta_M_max", &ModelParams::theta_M_max},
}};

ordered_json premia_json(const estimation::PremiaReport& p) {
  ordered_json out;
  out["mean_ratio_MW"] = number(p.mean_ratio_MW);
  out["mean_ratio_UM"] = number(p.mean_ratio_UM);
  out["var_ratio_MW"] = number(p.var_ratio_MW);
  out["var_ratio_UM"] = number(p.var_ratio_UM);
  out["mean_ratios_defined"] = p.mean_ratios_defined;
  out["variance_ratios_defined"] = p.variance_ratios_defined;
  out["rejected"] = p.rejected;
  ordered_json pooled = ordered_json::object();
  for (OccClass c : kAllClasses) {
    const auto& m = p.pooled[index_of(c)];
    pooled[std::string(1, class_code(c))] = {{"n", m.n}, {"mean_log", m.mean}, {"sd_log", m.sd}};
  }
  out["pooled"] = pooled;
  ordered_json waves = ordered_json::array();
  for (const auto& w : p.waves) {
    ordered_json wj;
    wj["wave_year"] = w.wave_year;
    for (OccClass c : kAllClasses) {
      const auto& m = w.classes[index_of(c)];
      wj[std::string(1, class_code(c))] = {
          {"n", m.n}, {"mean_log", m.mean}, {"sd_log", m.sd}, {"used", w.used[index_of(c)]}};
    }
    waves.push_back(wj);
  }
  out["waves"] = waves;
  return out;
}

}  // namespace

ordered_json to_document(const Report& report) {
  ordered_json doc;
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  doc["command"] = report.command;
  doc["seed"] = report.seed ? ordered_json(*report.seed) : ordered_json(nullptr);
  doc["warnings"] = report.warnings;
  ordered_json cohorts = ordered_json::array();
  for (const auto& r : report.cohorts) {
    ordered_json c;
    c["label"] = r.cohort.label;
    c["birth_from"] = r.cohort.birth_from;
    c["birth_to"] = r.cohort.birth_to;
    if (r.observations) c["observations"] = *r.observations;
    if (!r.matrices.empty()) {
      ordered_json m = ordered_json::object();
      for (const auto& [name, mat] : r.matrices) m[name] = matrix_json(mat.entries());
      c["matrices"] = m;
    }
    if (r.shares) {
      const auto& f = r.shares->fathers.values();
      const auto& ch = r.shares->children.values();
      c["shares"] = {{"fathers", {f[0], f[1], f[2]}}, {"children", {ch[0], ch[1], ch[2]}}};
    }
    if (r.indexes) {
      ordered_json ix;
      for (const auto& [name, field] : kIndexFields) ix[name] = number((*r.indexes).*field);
      c["indexes"] = ix;
    }
    if (r.params) {
      ordered_json px;
      for (const auto& [name, field] : kParamFields) px[name] = number((*r.params).*field);
      c["params"] = px;
    }
    if (r.validity) {
      ordered_json v;
      v["valid"] = r.validity->valid();
      v["violations"] = ordered_json::array();
      for (auto a : r.validity->violations) v["violations"].push_back(model::describe(a));
      c["validity"] = v;
    }
    if (r.bootstrap) {
      const auto& b = *r.bootstrap;
      ordered_json se;
      ordered_json ix, px;
      for (const auto& [name, field] : kIndexFields) ix[name] = b.se.indexes.*field;
      for (const auto& [name, field] : kParamFields) px[name] = b.se.params.*field;
      se["indexes"] = ix;
      se["params"] = px;
      c["standard_errors"] = se;
      c["bootstrap"] = {{"replications", b.replications},
                        {"successful", b.successful},
                        {"dropped", b.dropped},
                        {"seed", b.seed},
                        {"degenerate", b.degenerate},
                        {"low_replication_warning", b.low_replication_warning}};
    }
    if (r.premia) c["premia"] = premia_json(*r.premia);
    c["diagnostics"] = r.diagnostics;
    cohorts.push_back(c);
  }
  doc["cohorts"] = cohorts;
  return doc;
}

std::string to_delimited(const Report& report) {
  std::ostringstream os;
  os << "cohort,section,name,from,to,value,se\n";
  auto row = [&](const std::string& cohort, const char* section, const std::string& name, const std::string& from,
                 const std::string& to, const std::string& value, const std::string& se) {
    os << cohort << ',' << section << ',' << name << ',' << from << ',' << to << ',' << value << ',' << se << '\n';
  };
  for (const auto& r : report.cohorts) {
    const std::string& label = r.cohort.label;
    for (const auto& [name, mat] : r.matrices)
      for (OccClass f : kAllClasses)
        for (OccClass t : kAllClasses)
          row(label, "matrix", name, std::string(1, class_code(f)), std::string(1, class_code(t)), exact(mat(f, t)), "");
    if (r.shares) {
      for (OccClass c : kAllClasses) {
        row(label, "shares", "fathers", std::string(1, class_code(c)), "", exact(r.shares->fathers[c]), "");
        row(label, "shares", "children", "", std::string(1, class_code(c)), exact(r.shares->children[c]), "");
      }
    }
    if (r.indexes)
      for (const auto& [name, field] : kIndexFields)
        row(label, "index", name, "", "", exact((*r.indexes).*field),
            r.bootstrap ? exact(r.bootstrap->se.indexes.*field) : "");
    if (r.params)
      for (const auto& [name, field] : kParamFields)
        row(label, "param", name, "", "", exact((*r.params).*field),
            r.bootstrap ? exact(r.bootstrap->se.params.*field) : "");
    if (r.validity) row(label, "validity", "valid", "", "", r.validity->valid() ? "1" : "0", "");
    if (r.bootstrap) {
      row(label, "bootstrap", "replications", "", "", std::to_string(r.bootstrap->replications), "");
      row(label, "bootstrap", "successful", "", "", std::to_string(r.bootstrap->successful), "");
      row(label, "bootstrap", "dropped", "", "", std::to_string(r.bootstrap->dropped), "");
    }
    if (r.premia) {
      const auto& p = *r.premia;
      row(label, "premia", "mean_ratio_MW", "", "", exact(p.mean_ratio_MW), "");
      row(label, "premia", "mean_ratio_UM", "", "", exact(p.mean_ratio_UM), "");
      row(label, "premia", "var_ratio_MW", "", "", exact(p.var_ratio_MW), "");
      row(label, "premia", "var_ratio_UM", "", "", exact(p.var_ratio_UM), "");
      for (const auto& w : p.waves)
        for (OccClass c : kAllClasses) {
          const auto& m = w.classes[index_of(c)];
          const std::string wave = std::to_string(w.wave_year);
          const std::string cls(1, class_code(c));
          row(label, "premia_wave", "n", wave, cls, std::to_string(m.n), "");
          row(label, "premia_wave", "mean_log", wave, cls, exact(m.mean), "");
          row(label, "premia_wave", "sd_log", wave, cls, exact(m.sd), "");
        }
    }
    for (const auto& [key, value] : r.diagnostics.items()) {
      std::string v;
      if (value.is_boolean()) v = value.get<bool>() ? "1" : "0";
      else if (value.is_number_float()) v = exact(value.get<double>());
      else if (value.is_string()) v = value.get<std::string>();
      else v = value.dump();
      row(label, "diagnostic", key, "", "", v, "");
    }
  }
  return os.str();
}

std::string render_report(const Report& report, ReportFormat format) {
  if (format == ReportFormat::delimited) return to_delimited(report);
  return to_document(report).dump(2) + "\n";
}

void write_report(const Report& report, const std::filesystem::path& path, ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write report to '" + path.string() + "'");
  out << render_report(report, format);
  if (!out) throw Error(ErrorKind::io, "failed writing report to '" + path.string() + "'");
}

namespace {

std::string fixed(double v, int decimals) {
  if (!std::isfinite(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace

std::string format_summary(const Report& report) {
  std::ostringstream os;
  for (const auto& w : report.warnings) os << "warning: " << w << '\n';
  for (const auto& r : report.cohorts) {
    os << "== Cohort " << r.cohort.label;
    if (r.cohort.birth_from != 0 || r.cohort.birth_to != 0)
      os << " (born " << r.cohort.birth_from << "-" << r.cohort.birth_to << ")";
    if (r.observations) os << ", " << fixed(*r.observations, 0) << " pairs";
    os << '\n';
    for (const auto& [name, mat] : r.matrices) {
      if (name == "R0") continue;
      os << "  " << name << "        W       M       U\n";
      for (OccClass f : kAllClasses) {
        os << "    " << class_code(f) << "  ";
        for (OccClass t : kAllClasses) os << "  " << fixed(mat(f, t), 4);
        os << '\n';
      }
    }
    auto se_text = [&](double v) { return r.bootstrap ? " (" + fixed(v, 3) + ")" : std::string(); };
    if (r.indexes) {
      os << "  indexes:";
      for (const auto& [name, field] : kIndexFields)
        os << ' ' << name << '=' << fixed((*r.indexes).*field, 3)
           << (r.bootstrap ? se_text(r.bootstrap->se.indexes.*field) : "");
      os << '\n';
    }
    if (r.params) {
      os << "  params: ";
      for (const auto& [name, field] : kParamFields)
        os << ' ' << name << '=' << fixed((*r.params).*field, 3)
           << (r.bootstrap ? se_text(r.bootstrap->se.params.*field) : "");
      os << '\n';
    }
    if (r.validity) os << "  validity: " << r.validity->summary() << '\n';
    if (r.bootstrap)
      os << "  bootstrap: " << r.bootstrap->successful << "/" << r.bootstrap->replications
         << " replicates used, " << r.bootstrap->dropped << " dropped, seed " << r.bootstrap->seed << '\n';
    if (r.premia) {
      const auto& p = *r.premia;
      os << "  return premium: M/W=" << fixed(p.mean_ratio_MW, 3) << " U/M=" << fixed(p.mean_ratio_UM, 3) << '\n';
      os << "  risk premium:   M/W=" << fixed(p.var_ratio_MW, 3) << " U/M=" << fixed(p.var_ratio_UM, 3);
      if (!p.variance_ratios_defined) os << "  [degenerate: zero dispersion]";
      os << '\n';
      if (p.rejected) os << "  rejected income records: " << p.rejected << '\n';
    }
    if (!r.diagnostics.empty()) {
      os << "  diagnostics:";
      for (const auto& [key, value] : r.diagnostics.items()) {
        os << ' ' << key << '=';
        if (value.is_number_float()) os << fixed(value.get<double>(), 6);
        else os << value.dump();
      }
      os << '\n';
    }
  }
  return os.str();
}

std::vector<CohortMatrices> read_report_matrices_text(const std::string& text) {
  std::vector<CohortMatrices> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    ordered_json doc;
    try {
      doc = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::io, std::string("malformed report document: ") + e.what());
    }
    if (!doc.contains("cohorts") || !doc["cohorts"].is_array())
      throw Error(ErrorKind::io, "report document has no 'cohorts' array");
    for (const auto& c : doc["cohorts"]) {
      CohortMatrices cm;
      cm.label = c.value("label", "");
      if (c.contains("matrices")) {
        for (const auto& [name, rows] : c["matrices"].items()) {
          Matrix3 m{};
          for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) m[i][j] = rows.at(i).at(j).get<double>();
          cm.matrices[name] = m;
        }
      }
      out.push_back(cm);
    }
    return out;
  }

  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("cohort,section", 0) != 0) throw Error(ErrorKind::io, "not a delimited report");
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cols.push_back(cell);
    if (cols.size() < 6 || cols[1] != "matrix") continue;
    auto it = std::find_if(out.begin(), out.end(), [&](const CohortMatrices& c) { return c.label == cols[0]; });
    if (it == out.end()) {
      out.push_back({cols[0], {}});
      it = std::prev(out.end());
    }
    const auto from = index_of(parse_class_code(cols[3]));
    const auto to = index_of(parse_class_code(cols[4]));
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cols[5].data(), cols[5].data() + cols[5].size(), v);
    if (ec != std::errc{}) throw Error(ErrorKind::io, "bad matrix value '" + cols[5] + "'");
    it->matrices[cols[2]][from][to] = v;
  }
  return out;
}

std::vector<CohortMatrices> read_report_matrices(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return read_report_matrices_text(buf.str());
}

}  // namespace mobility::io
