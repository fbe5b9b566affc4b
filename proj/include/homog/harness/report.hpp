#pragma once

#include <homog/harness/experiments.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace homog::harness {

namespace fs = std::filesystem;

inline void write_records_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  os << "eps,t,metric,value,problem_tag\n" << std::setprecision(17);
  for (const auto& r : records) os << r.eps << ',' << r.t << ',' << r.metric << ',' << r.value << ",\"" << r.problem_tag << "\"\n";
}

/// Parses the CSV written by write_records_csv.
inline std::vector<SweepRecord> read_records_csv(std::istream& is) {
  std::vector<SweepRecord> out;
  std::string line;
  if (!std::getline(is, line) || line.rfind("eps,t,metric,value,problem_tag", 0) != 0)
    throw ConfigError("records file has no 'eps,t,metric,value,problem_tag' header");
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
      if (ch == '"') quoted = !quoted;
      else if (ch == ',' && !quoted) {
        cols.push_back(cur);
        cur.clear();
      } else cur += ch;
    }
    cols.push_back(cur);
    if (cols.size() != 5) throw ConfigError("records line " + std::to_string(lineno) + ": expected 5 columns");
    SweepRecord r;
    try {
      r.eps = std::stod(cols[0]);
      r.t = std::stod(cols[1]);
      r.value = std::stod(cols[3]);
    } catch (const std::exception&) {
      throw ConfigError("records line " + std::to_string(lineno) + ": malformed number");
    }
    r.metric = cols[2];
    r.problem_tag = cols[4];
    out.push_back(r);
  }
  return out;
}

inline std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
  return out;
}

inline json fits_to_json(const std::vector<FitSummary>& fits) {
  json arr = json::array();
  for (const auto& f : fits) {
    json j{{"metric", f.metric}, {"problem_tag", f.problem_tag}};
    if (f.fit) {
      j["slope"] = f.fit->slope;
      j["intercept"] = f.fit->intercept;
      j["residual"] = f.fit->residual;
      j["eps"] = f.fit->eps;
    } else {
      j["error"] = f.error;
    }
    arr.push_back(j);
  }
  return arr;
}

inline json outcome_to_json(const ExperimentOutcome& out) {
  json th = json::array();
  for (const auto& t : out.thresholds)
    th.push_back(json{{"kind", t.rule.kind},
                      {"metric", t.rule.metric},
                      {"variant", t.rule.variant},
                      {"value", t.rule.value},
                      {"observed", t.observed},
                      {"pass", t.pass},
                      {"note", t.note}});
  json scalars = json::object();
  for (const auto& [k, v] : out.scalars) scalars[k] = v;
  return json{{"experiment", out.experiment},
              {"description", out.description},
              {"config", to_json(out.config)},
              {"cell", out.cell},
              {"scalars", scalars},
              {"fits", fits_to_json(out.fits)},
              {"thresholds", th},
              {"pass", out.pass()}};
}

/// records.csv, report.json and plotdata/<metric>_<tag>.dat (ln eps, ln error).
inline void write_report(const ExperimentOutcome& out, const fs::path& dir) {
  fs::create_directories(dir / "plotdata");
  {
    std::ofstream f(dir / "records.csv");
    if (!f) throw ConfigError("cannot write to output directory '" + dir.string() + "'");
    write_records_csv(f, out.records);
  }
  {
    std::ofstream f(dir / "report.json");
    f << outcome_to_json(out).dump(2) << '\n';
  }
  for (const auto& fit : out.fits) {
    if (!fit.fit) continue;
    std::ofstream f(dir / "plotdata" / (sanitize(fit.metric + "_" + fit.problem_tag) + ".dat"));
    f << "# ln_eps ln_error  slope " << fit.fit->slope << '\n' << std::setprecision(12);
    for (std::size_t i = 0; i < fit.fit->eps.size(); ++i)
      f << std::log(fit.fit->eps[i]) << ' ' << std::log(fit.fit->values[i]) << '\n';
  }
}

inline void print_summary(std::ostream& os, const ExperimentOutcome& out) {
  os << out.experiment << ": " << out.description << '\n';
  for (const auto& [k, v] : out.scalars) os << "  " << k << " = " << v << '\n';
  for (const auto& f : out.fits) {
    os << "  fit " << f.metric << " [" << f.problem_tag << "] ";
    if (f.fit) os << "slope " << std::fixed << std::setprecision(3) << f.fit->slope << " residual " << f.fit->residual
                  << std::defaultfloat << '\n';
    else os << "n/a (" << f.error << ")\n";
  }
  for (const auto& t : out.thresholds) {
    os << "  " << (t.pass ? "PASS " : "FAIL ") << t.rule.kind << ' ' << t.rule.metric;
    if (!t.rule.variant.empty()) os << " variant=" << t.rule.variant;
    os << " observed " << t.observed << " limit " << t.rule.value;
    if (!t.note.empty()) os << " (" << t.note << ')';
    os << '\n';
  }
}

/// Re-evaluates a saved run: reads report.json for the config and records.csv for the data.
inline ExperimentOutcome load_report(const fs::path& dir) {
  std::ifstream rj(dir / "report.json");
  if (!rj) throw ConfigError("no report.json in '" + dir.string() + "'");
  json j;
  try {
    j = json::parse(rj);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("report.json is not valid JSON: ") + e.what());
  }
  ExperimentOutcome out;
  out.config = from_json(j.at("config"));
  out.experiment = out.config.experiment;
  out.description = j.value("description", "");
  out.cell = j.value("cell", json::object());
  const json scalars = j.value("scalars", json::object());
  for (const auto& [k, v] : scalars.items()) out.scalars[k] = v.get<Real>();
  std::ifstream rc(dir / "records.csv");
  if (!rc) throw ConfigError("no records.csv in '" + dir.string() + "'");
  out.records = read_records_csv(rc);
  out.fits = fit_all(out.records);
  evaluate_thresholds(out);
  return out;
}

}  // namespace homog::harness
