// Command-line front end: run experiments, sweeps and cell solves, and re-check saved reports.
#include <homog/harness/report.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace hh = homog::harness;

namespace {

struct Common {
  std::string config;
  std::string out;
  int jobs = 0;
  long budget_nodes = 0;
};

hh::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw homog::ConfigError("cannot open config file '" + path + "'");
  try {
    return hh::json::parse(in);
  } catch (const hh::json::parse_error& e) {
    throw homog::ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

void apply_common(hh::ExperimentConfig& c, const Common& o) {
  if (!o.out.empty()) c.output = o.out;
  if (o.jobs > 0) c.jobs = o.jobs;
  if (o.budget_nodes > 0) c.budget_nodes = o.budget_nodes;
}

int execute(const hh::ExperimentConfig& c) {
  const auto outcome = hh::run_experiment(c);
  hh::write_report(outcome, c.output);
  hh::print_summary(std::cout, outcome);
  std::cout << "report written to " << c.output << '\n';
  return outcome.pass() ? 0 : 1;
}

void add_common(CLI::App* sub, Common& o, bool with_config) {
  if (with_config) sub->add_option("--config", o.config, "JSON file overriding the experiment defaults");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--jobs", o.jobs, "parallel eps jobs")->check(CLI::PositiveNumber);
  sub->add_option("--budget-nodes", o.budget_nodes, "largest mesh node count allowed")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic homogenization error sweeps for parabolic systems"};
  app.require_subcommand(1);

  Common cell_opt, sweep_opt, run_opt;
  std::string experiment, report_dir, run_config;

  auto* list = app.add_subcommand("list", "list the registered experiments");
  auto* cell = app.add_subcommand("cell", "solve the cell problem and print the effective coefficients");
  add_common(cell, cell_opt, true);
  auto* sweep = app.add_subcommand("sweep", "run a registered experiment");
  sweep->add_option("experiment", experiment, "experiment name (see `list`)")->required();
  add_common(sweep, sweep_opt, true);
  auto* run = app.add_subcommand("run", "run the experiment named in a config file");
  run->add_option("config", run_config, "JSON config with an 'experiment' field")->required();
  add_common(run, run_opt, false);
  auto* report = app.add_subcommand("report", "re-evaluate fits and thresholds of a saved run");
  report->add_option("dir", report_dir, "directory holding report.json and records.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    homog::set_warnings_enabled(true);
    if (*list) {
      for (const auto& e : hh::registry()) std::cout << e.name << "\n    " << e.description << '\n';
      return 0;
    }
    if (*cell) {
      auto c = hh::resolve_config("cell", cell_opt.config.empty() ? hh::json::object() : read_json_file(cell_opt.config));
      if (cell_opt.out.empty()) c.output = "out/cell";
      apply_common(c, cell_opt);
      return execute(c);
    }
    if (*sweep) {
      auto c = hh::resolve_config(experiment, sweep_opt.config.empty() ? hh::json::object() : read_json_file(sweep_opt.config));
      if (sweep_opt.out.empty()) c.output = "out/" + experiment;
      apply_common(c, sweep_opt);
      return execute(c);
    }
    if (*run) {
      const auto j = read_json_file(run_config);
      if (!j.is_object() || !j.contains("experiment") || !j.at("experiment").is_string())
        throw homog::ConfigError("field 'experiment': must name a registered experiment (" + hh::registry_names() + ")");
      auto c = hh::resolve_config(j.at("experiment").get<std::string>(), j);
      apply_common(c, run_opt);
      return execute(c);
    }
    if (*report) {
      const auto outcome = hh::load_report(report_dir);
      hh::print_summary(std::cout, outcome);
      return outcome.pass() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
