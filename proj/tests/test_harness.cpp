#include <homog/harness/report.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace homog;
using namespace homog::harness;

namespace {

std::string config_error(const json& j) {
  try {
    validate(from_json(j, find_experiment("dirichlet_l2").defaults()));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("homog_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Config, RoundTripsThroughJson) {
  for (const auto& entry : registry()) {
    const ExperimentConfig c = entry.defaults();
    const ExperimentConfig back = from_json(to_json(c));
    EXPECT_TRUE(back == c) << entry.name;
    EXPECT_NO_THROW(validate(c)) << entry.name;
  }
}

TEST(Config, InfinityIsSpelledOut) {
  ExperimentConfig c = find_experiment("ibvp_Gp").defaults();
  const json j = to_json(c);
  EXPECT_EQ(j["p"][0], "inf");
  EXPECT_TRUE(std::isinf(from_json(j).p[0]));
}

TEST(Config, OverridesApplyOnTopOfDefaults) {
  const auto c = resolve_config("dirichlet_l2", json{{"eps", {0.2, 0.1}}, {"domain", {{"delta", 0.2}}}});
  EXPECT_EQ(c.experiment, "dirichlet_l2");
  ASSERT_EQ(c.eps.size(), 2u);
  EXPECT_DOUBLE_EQ(c.delta, 0.2);
  EXPECT_EQ(c.bc, "dirichlet");
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(config_error(json{{"eps", {0.1, -0.05}}}).find("field 'eps[1]'"), std::string::npos);
  EXPECT_NE(config_error(json{{"eps", {0.5}}}).find("field 'eps[0]'"), std::string::npos);
  EXPECT_NE(config_error(json{{"bc", "robin"}}).find("field 'bc'"), std::string::npos);
  EXPECT_NE(config_error(json{{"cells_per_eps", 8}}).find("field 'cells_per_eps'"), std::string::npos);
  EXPECT_NE(config_error(json{{"metrics", {"L3"}}}).find("field 'metrics[0]'"), std::string::npos);
  EXPECT_NE(config_error(json{{"solver", {{"scheme", "rk4"}}}}).find("field 'solver.scheme'"), std::string::npos);
  EXPECT_NE(config_error(json{{"domain", {{"lenghts", {1.0}}}}}).find("unknown field"), std::string::npos);
  EXPECT_NE(config_error(json{{"t", "soon"}}).find("field 't'"), std::string::npos);
  EXPECT_EQ(config_error(json::object()), "");
}

TEST(Config, LoadsFromFile) {
  const auto dir = scratch("config");
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "c.json");
    f << R"({"experiment": "cell", "coefficient": {"kind": "laminate", "values": [1, 4], "n_cell": 64}})";
  }
  const auto c = load_config((dir / "c.json").string());
  EXPECT_EQ(c.coefficient.kind, "laminate");
  {
    std::ofstream f(dir / "bad.json");
    f << "{ not json";
  }
  EXPECT_THROW(load_config((dir / "bad.json").string()), ConfigError);
  EXPECT_THROW(load_config((dir / "missing.json").string()), ConfigError);
}

TEST(Registry, NamesAndLookup) {
  EXPECT_EQ(registry().size(), 19u);
  for (const auto& e : registry()) EXPECT_EQ(find_experiment(e.name).name, e.name);
  try {
    find_experiment("nope");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("dirichlet_l2"), std::string::npos);
  }
}

TEST(Builders, ObjectsMatchConfig) {
  ExperimentConfig c;
  c.lattice = {{2.0, 0.0}, {0.0, 1.0}};
  c.lengths = {1.0, 1.0};
  c.coefficient.m = 2;
  c.coefficient.mode = {1, 1};
  const auto lat = build_lattice(c);
  EXPECT_NEAR(lat.cell_volume, 2.0, 1e-14);
  EXPECT_NEAR(lat.basis(0, 0), 2.0, 1e-14);
  const auto g = build_coefficient(c);
  EXPECT_GE(g.norm_sup(), 2.0);
  EXPECT_EQ(build_symbol(c).dimension(), 2);
  c.coefficient.m = 3;
  EXPECT_THROW(build_symbol(c), ConfigError);
  c.coefficient = CoefficientConfig{};
  c.coefficient.m = 2;
  c.coefficient.kind = "constant";
  c.coefficient.matrix = {{2.0, 0.0}, {0.0, 3.0}};
  EXPECT_NEAR(build_coefficient(c).eval(Point::Zero(2))(1, 1), 3.0, 1e-14);
  EXPECT_EQ(build_domain(c).dimension, 2);
}

TEST(Builders, DataPresets) {
  const std::vector<Real> len{1.0};
  const Point mid = Point::Constant(1, 0.5);
  EXPECT_NEAR(build_profile(preset("sin"), len)(mid), 1.0, 1e-14);
  EXPECT_NEAR(build_profile(preset("cos"), len)(mid), 0.0, 1e-14);
  EXPECT_NEAR(build_profile(preset("zero"), len)(mid), 0.0, 1e-14);
  EXPECT_NEAR(build_profile(preset("constant"), len)(mid), 1.0, 1e-14);
  EXPECT_GT(build_profile(preset("bump"), len)(mid), 0.0);
}

TEST(Records, CsvRoundTrip) {
  std::vector<SweepRecord> recs(2);
  recs[0].eps = 0.1;
  recs[0].t = 0.5;
  recs[0].metric = "L2";
  recs[0].value = 1.234567890123e-3;
  recs[0].problem_tag = "coef=sinusoid;bc=dirichlet;variant=plain;p=inf";
  recs[1] = recs[0];
  recs[1].eps = 0.05;
  recs[1].problem_tag = "a,b";
  std::stringstream ss;
  write_records_csv(ss, recs);
  const auto back = read_records_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].value, recs[0].value);
  EXPECT_EQ(back[0].problem_tag, recs[0].problem_tag);
  EXPECT_EQ(back[1].problem_tag, "a,b");
  std::stringstream bad("eps,t\n");
  EXPECT_THROW(read_records_csv(bad), ConfigError);
}

TEST(Thresholds, EvaluateOnSyntheticRecords) {
  ExperimentOutcome out;
  for (Real e : {0.1, 0.05, 0.025, 0.0125}) {
    SweepRecord r;
    r.eps = e;
    r.metric = "L2";
    r.value = 2.0 * e;
    r.problem_tag = "x;variant=plain;p=2";
    out.records.push_back(r);
    r.value = std::sqrt(e);
    r.problem_tag = "x;variant=smoothed;p=2";
    out.records.push_back(r);
  }
  out.scalars["margin"] = 0.5;
  auto rule = [](std::string kind, std::string metric, Real value, std::string variant = "") {
    ThresholdConfig t;
    t.kind = std::move(kind);
    t.metric = std::move(metric);
    t.value = value;
    t.variant = std::move(variant);
    return t;
  };
  out.config.thresholds = {rule("min_slope", "L2", 0.9, "plain"),   rule("min_slope", "L2", 0.9),
                           rule("max_residual", "L2", 1e-10),       rule("max_value", "L2", 0.2, "plain"),
                           rule("scalar_min", "margin", 0.0),       rule("scalar_max", "missing", 1.0),
                           rule("min_slope", "H1", 0.5)};
  evaluate_thresholds(out);
  ASSERT_EQ(out.thresholds.size(), 7u);
  EXPECT_TRUE(out.thresholds[0].pass);
  EXPECT_NEAR(out.thresholds[0].observed, 1.0, 1e-12);
  EXPECT_FALSE(out.thresholds[1].pass);
  EXPECT_NEAR(out.thresholds[1].observed, 0.5, 1e-12);
  EXPECT_TRUE(out.thresholds[2].pass);
  EXPECT_TRUE(out.thresholds[3].pass);
  EXPECT_TRUE(out.thresholds[4].pass);
  EXPECT_FALSE(out.thresholds[5].pass);
  EXPECT_FALSE(out.thresholds[6].pass);
  EXPECT_FALSE(out.pass());
  const auto fits = fit_all(out.records);
  EXPECT_EQ(fits.size(), 2u);
}

TEST(Thresholds, RatioSpreadAgainstProfile) {
  ExperimentOutcome out;
  RateProfile prof;
  prof.name = ProfileName::Theta;
  prof.p = 2.0;
  for (Real e : {0.1, 0.05, 0.025, 0.0125}) {
    SweepRecord r;
    r.eps = e;
    r.metric = "Lp_time_L2";
    r.value = 3.0 * rate_profile_eval(prof, e);
    r.problem_tag = "x;p=2";
    out.records.push_back(r);
  }
  ThresholdConfig t;
  t.kind = "ratio_spread";
  t.metric = "Lp_time_L2";
  t.value = 1.0 + 1e-12;
  t.profile = "Theta";
  t.profile_p = 2.0;
  out.config.thresholds = {t};
  evaluate_thresholds(out);
  EXPECT_TRUE(out.thresholds[0].pass);
  EXPECT_NEAR(out.thresholds[0].observed, 1.0, 1e-12);
}

TEST(Experiments, CellRun) {
  const auto c = resolve_config("cell", json{{"coefficient", {{"n_cell", 256}}}, {"cell_resolution", 256}});
  const auto out = run_experiment(c);
  EXPECT_TRUE(out.pass());
  EXPECT_NEAR(out.scalars.at("g_eff"), std::sqrt(3.0), 1e-4);
  EXPECT_GE(out.scalars.at("lambda_bound_margin"), 0.0);
  EXPECT_TRUE(out.cell.contains("g_eff"));
}

TEST(Experiments, SteklovRun) {
  const auto out = run_experiment(resolve_config("steklov"));
  EXPECT_TRUE(out.pass());
  EXPECT_LE(out.scalars.at("contraction_ratio"), 1.0 + 1e-10);
}

TEST(Experiments, ContourRun) {
  const auto out = run_experiment(resolve_config("contour", json{{"contour", {{"mesh_cells", 32}, {"samples", 3}}}}));
  EXPECT_TRUE(out.pass());
  EXPECT_LE(out.scalars.at("contour_max_error"), 1e-6);
}

TEST(Experiments, SmallSweepHasFirstOrderRate) {
  const auto c = resolve_config("dirichlet_l2", json{{"eps", {0.25, 0.125, 0.0625, 0.03125}}});
  const auto out = run_experiment(c);
  bool found = false;
  for (const auto& f : out.fits)
    if (f.metric == "L2" && f.fit) {
      found = true;
      EXPECT_GE(f.fit->slope, 0.9);
    }
  EXPECT_TRUE(found);
}

TEST(Report, WriteAndReload) {
  const auto out = run_experiment(resolve_config("steklov"));
  const auto dir = scratch("report");
  write_report(out, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "records.csv"));
  const auto back = load_report(dir);
  EXPECT_EQ(back.experiment, "steklov");
  EXPECT_EQ(back.records.size(), out.records.size());
  ASSERT_EQ(back.thresholds.size(), out.thresholds.size());
  for (std::size_t i = 0; i < out.thresholds.size(); ++i) EXPECT_EQ(back.thresholds[i].pass, out.thresholds[i].pass);
  std::ostringstream os;
  print_summary(os, out);
  EXPECT_NE(os.str().find("PASS"), std::string::npos);
  EXPECT_THROW(load_report(scratch("empty")), ConfigError);
}
