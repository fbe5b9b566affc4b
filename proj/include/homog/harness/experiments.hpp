#pragma once

#include <homog/harness/config.hpp>

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace homog::harness {

struct FitSummary {
  std::string metric;
  std::string problem_tag;
  std::optional<RateFit> fit;
  std::string error;  ///< why no fit was possible
};

struct ThresholdResult {
  ThresholdConfig rule;
  Real observed = 0.0;
  bool pass = false;
  std::string note;
};

struct ExperimentOutcome {
  std::string experiment;
  std::string description;
  ExperimentConfig config;
  std::vector<SweepRecord> records;
  std::map<std::string, Real> scalars;
  json cell = json::object();
  std::vector<FitSummary> fits;
  std::vector<ThresholdResult> thresholds;

  bool pass() const {
    for (const auto& t : thresholds)
      if (!t.pass) return false;
    return true;
  }
};

struct ExperimentEntry {
  std::string name;
  std::string description;
  std::function<ExperimentConfig()> defaults;
};

// ---------------------------------------------------------------- defaults

namespace detail {

inline ThresholdConfig rule(std::string kind, std::string metric, Real value, std::string variant = "", Real p = 0.0) {
  ThresholdConfig t;
  t.kind = std::move(kind);
  t.metric = std::move(metric);
  t.value = value;
  t.variant = std::move(variant);
  t.p = p;
  return t;
}

inline ExperimentConfig base(const std::string& name, const std::string& bc) {
  ExperimentConfig c;
  c.experiment = name;
  c.bc = bc;
  c.initial = preset(bc == "neumann" ? "cos" : "sin");
  c.source = preset("zero");
  return c;
}

inline ExperimentConfig l2_defaults(const std::string& name, const std::string& bc) {
  auto c = base(name, bc);
  c.metrics = {"L2"};
  if (bc == "neumann") c.metrics.push_back("mean_drift");
  c.thresholds = {rule("min_slope", "L2", 0.9), rule("max_residual", "L2", 0.25)};
  if (bc == "neumann") c.thresholds.push_back(rule("max_value", "mean_drift", 1e-10));
  return c;
}

inline ExperimentConfig h1_defaults(const std::string& name, const std::string& bc) {
  auto c = base(name, bc);
  c.metrics = {"H1_corrected", "flux_L2"};
  c.thresholds = {rule("min_slope", "H1_corrected", 0.45, "smoothed"), rule("min_slope", "H1_corrected", 0.45, "plain"),
                  rule("min_slope", "flux_L2", 0.45, "smoothed"), rule("min_slope", "flux_L2", 0.45, "plain")};
  return c;
}

inline ExperimentConfig interior_defaults(const std::string& name, const std::string& bc) {
  auto c = base(name, bc);
  c.metrics = {"H1_interior_corrected", "flux_L2_interior"};
  c.thresholds = {rule("min_slope", "H1_interior_corrected", 0.9, "smoothed"),
                  rule("min_slope", "H1_interior_corrected", 0.9, "plain")};
  return c;
}

inline ExperimentConfig ibvp_defaults(const std::string& name, const std::string& bc, const std::string& kind) {
  auto c = base(name, bc);
  if (kind == "theta") {
    c.initial = preset("zero");
    c.source = preset("sin");
    c.metrics = {"L2"};
    c.thresholds = {rule("min_slope", "L2", 0.9)};
  } else if (kind == "Lp") {
    c.metrics = {"Lp_time_L2"};
    c.p = {2.0};
    auto r = rule("ratio_spread", "Lp_time_L2", 3.0, "", 2.0);
    r.profile = "Theta";
    r.profile_p = 2.0;
    c.thresholds = {r};
  } else if (kind == "h1") {
    c.initial = preset("zero");
    c.source = preset("sin");
    c.metrics = {"H1_corrected", "flux_L2"};
    c.thresholds = {rule("min_slope", "H1_corrected", 0.45, "smoothed"), rule("min_slope", "H1_corrected", 0.45, "plain")};
  } else {
    c.initial = preset("zero");
    // A constant source only moves the Neumann kernel, where both solutions agree exactly.
    c.source = preset(bc == "neumann" ? "cos" : "constant");
    c.metrics = {"Lp_time_H1"};
    c.p = {std::numeric_limits<Real>::infinity()};
    const Real inf = std::numeric_limits<Real>::infinity();
    c.thresholds = {rule("min_slope", "Lp_time_H1", 0.45, "smoothed", inf), rule("min_slope", "Lp_time_H1", 0.45, "plain", inf)};
  }
  return c;
}

}  // namespace detail

inline const std::vector<ExperimentEntry>& registry() {
  using namespace detail;
  static const std::vector<ExperimentEntry> entries{
      {"cell",
       "Cell problem: effective matrix, Voigt-Reuss bracket, corrector bound and special-case classification.",
       [] {
         auto c = base("cell", "dirichlet");
         c.metrics.clear();
         c.cell_resolution = 1024;
         c.coefficient.n_cell = 1024;
         c.thresholds = {rule("scalar_min", "voigt_reuss_margin", -1e-8), rule("scalar_min", "lambda_bound_margin", 0.0)};
         return c;
       }},
      {"steklov",
       "Steklov smoothing: contraction in L2, defect at most eps r1 ||Dv||, and the shift x^2 -> x^2 + eps^2/12.",
       [] {
         auto c = base("steklov", "dirichlet");
         c.metrics.clear();
         c.eps = {0.1, 0.05};
         c.thresholds = {rule("scalar_max", "contraction_ratio", 1.0 + 1e-10), rule("scalar_min", "defect_margin", -1e-8),
                         rule("scalar_max", "quadratic_shift_error", 1e-10)};
         return c;
       }},
      {"dirichlet_l2", "Dirichlet problem: ||u_eps(t) - u0(t)||_L2 decays like eps / (t + eps^2)^{1/2}.",
       [] { return l2_defaults("dirichlet_l2", "dirichlet"); }},
      {"dirichlet_h1_corr",
       "Dirichlet problem: H1 error of the first-order approximation and L2 flux error decay like eps^{1/2} for fixed t.",
       [] { return h1_defaults("dirichlet_h1_corr", "dirichlet"); }},
      {"dirichlet_interior",
       "Dirichlet problem: H1 error of the first-order approximation away from the boundary decays like eps.",
       [] { return interior_defaults("dirichlet_interior", "dirichlet"); }},
      {"neumann_l2", "Neumann problem: L2 error decays like eps; the mean of u_eps is conserved.",
       [] { return l2_defaults("neumann_l2", "neumann"); }},
      {"neumann_h1_corr", "Neumann problem: H1 error of the first-order approximation decays like eps^{1/2}.",
       [] { return h1_defaults("neumann_h1_corr", "neumann"); }},
      {"neumann_interior", "Neumann problem: interior H1 error of the first-order approximation decays like eps.",
       [] { return interior_defaults("neumann_interior", "neumann"); }},
      {"ibvp_theta", "Dirichlet problem with a source and zero initial data: L2 error at fixed t decays like eps.",
       [] { return ibvp_defaults("ibvp_theta", "dirichlet", "theta"); }},
      {"ibvp_Lp", "Dirichlet problem: L_p-in-time L2 error normalised by its rate profile stays bounded.",
       [] { return ibvp_defaults("ibvp_Lp", "dirichlet", "Lp"); }},
      {"ibvp_h1", "Dirichlet problem with a source: H1 error of the first-order approximation decays like eps^{1/2}.",
       [] { return ibvp_defaults("ibvp_h1", "dirichlet", "h1"); }},
      {"ibvp_Gp",
       "Dirichlet problem with a source: L_p-in-time H1 error of the approximation built from the time-shifted "
       "effective solution decays like eps^{1/2}.",
       [] { return ibvp_defaults("ibvp_Gp", "dirichlet", "Gp"); }},
      {"second_ibvp_theta", "Neumann problem with a source and zero initial data: L2 error decays like eps.",
       [] { return ibvp_defaults("second_ibvp_theta", "neumann", "theta"); }},
      {"second_ibvp_Lp", "Neumann problem: L_p-in-time L2 error normalised by its rate profile stays bounded.",
       [] { return ibvp_defaults("second_ibvp_Lp", "neumann", "Lp"); }},
      {"second_ibvp_h1", "Neumann problem with a source: H1 error of the first-order approximation decays like eps^{1/2}.",
       [] { return ibvp_defaults("second_ibvp_h1", "neumann", "h1"); }},
      {"second_ibvp_Gp",
       "Neumann problem with a source: L_p-in-time H1 error of the time-shifted approximation decays like eps^{1/2}.",
       [] { return ibvp_defaults("second_ibvp_Gp", "neumann", "Gp"); }},
      {"resolvent", "Resolvent at a real zeta left of the spectrum: L2 error decays like eps.",
       [] {
         auto c = base("resolvent", "dirichlet");
         c.metrics = {"resolvent_L2"};
         c.thresholds = {rule("min_slope", "resolvent_L2", 0.9)};
         return c;
       }},
      {"contour",
       "Semigroup by contour integration of the resolvent agrees with the spectral evaluation on random data.",
       [] {
         auto c = base("contour", "dirichlet");
         c.metrics.clear();
         c.thresholds = {rule("scalar_max", "contour_max_error", 1e-6)};
         return c;
       }},
      {"special_cases",
       "Constant coefficient: the first-order approximation is exact and every error metric vanishes.",
       [] {
         auto c = base("special_cases", "dirichlet");
         c.coefficient.kind = "constant";
         c.metrics = {"L2", "H1", "H1_corrected", "flux_L2", "resolvent_L2"};
         for (const auto& m : {"L2", "H1", "H1_corrected", "resolvent_L2"}) c.thresholds.push_back(rule("max_value", m, 1e-8));
         // S_eps still moves b(D)u0, so only the unsmoothed flux approximations are exact here.
         c.thresholds.push_back(rule("max_value", "flux_L2", 1e-8, "plain"));
         c.thresholds.push_back(rule("max_value", "flux_L2", 1e-8, "effective"));
         c.thresholds.push_back(rule("scalar_max", "g_tilde_deviation", 1e-8));
         return c;
       }},
  };
  return entries;
}

inline std::string registry_names() {
  std::string s;
  for (const auto& e : registry()) s += (s.empty() ? "" : ", ") + e.name;
  return s;
}

inline const ExperimentEntry& find_experiment(const std::string& name) {
  for (const auto& e : registry())
    if (e.name == name) return e;
  throw ConfigError("unknown experiment '" + name + "'; valid names: " + registry_names());
}

// ------------------------------------------------------------------ runners

inline json cell_to_json(const CellSolution& sol) {
  auto mat = [](const Matrix& a) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      json r = json::array();
      for (Eigen::Index j = 0; j < a.cols(); ++j) r.push_back(a(i, j));
      rows.push_back(r);
    }
    return rows;
  };
  const auto sc = classify_special_case(sol, 1e-8);
  return json{{"g_eff", mat(sol.g_eff)},
              {"g_bar", mat(sol.g_bar)},
              {"g_under", mat(sol.g_under)},
              {"lambda_h1", sol.lambda_h1},
              {"M_bound", sol.M_bound},
              {"residual", sol.residual},
              {"resolution", sol.resolution},
              {"method", sol.method},
              {"special_case", sc.label()},
              {"special_case_consistent", sc.consistent()}};
}

namespace detail {

inline Real min_sym_eig(const Matrix& a) {
  const Matrix s = 0.5 * (a + a.transpose());
  return Eigen::SelfAdjointEigenSolver<Matrix>(s).eigenvalues().minCoeff();
}

inline void run_cell(ExperimentOutcome& out) {
  const auto& c = out.config;
  const auto g = build_coefficient(c);
  const auto b = build_symbol(c);
  const int res = c.cell_resolution > 0 ? c.cell_resolution : c.coefficient.n_cell;
  CellSolverOptions opt;
  opt.tolerance = c.cell_tolerance;
  const auto sol = solve_cell_problem(g, b, std::max(res, 8), opt);
  out.cell = cell_to_json(sol);
  out.scalars["voigt_reuss_margin"] = std::min(min_sym_eig(sol.g_bar - sol.g_eff), min_sym_eig(sol.g_eff - sol.g_under));
  out.scalars["lambda_bound_margin"] = sol.M_bound - sol.lambda_h1;
  out.scalars["lambda_h1"] = sol.lambda_h1;
  out.scalars["residual"] = sol.residual;
  out.scalars["g_tilde_deviation"] = sol.g_tilde_deviation();
  if (sol.m == 1) out.scalars["g_eff"] = sol.g_eff(0, 0);
}

/// Smoothing checks on 1-periodic trigonometric test functions, sampled on a
/// uniform grid of the unit torus where the discrete L2 norm is exact.
inline void run_steklov(ExperimentOutcome& out) {
  const auto& c = out.config;
  const auto lat = build_lattice(c);
  const int d = lat.dimension;
  const Real two_pi = 2.0 * std::numbers::pi;
  constexpr int kGrid = 64;

  auto v = [d, two_pi](const Point& x) {
    const Real s = d == 1 ? x(0) : x(0) + 2.0 * x(1);
    const Real q = d == 1 ? 3.0 * x(0) : 2.0 * x(0) - x(1);
    return std::sin(two_pi * s) + 0.5 * std::cos(two_pi * q);
  };
  auto grad_sq = [d, two_pi](const Point& x) {
    const Real s = d == 1 ? x(0) : x(0) + 2.0 * x(1);
    const Real q = d == 1 ? 3.0 * x(0) : 2.0 * x(0) - x(1);
    const Real a = two_pi * std::cos(two_pi * s);
    const Real bq = -0.5 * two_pi * std::sin(two_pi * q);
    if (d == 1) return std::pow(a + 3.0 * bq, 2);
    return std::pow(a + 2.0 * bq, 2) + std::pow(2.0 * a - bq, 2);
  };

  std::vector<Point> pts;
  const int total = d == 1 ? kGrid : kGrid * kGrid;
  for (int k = 0; k < total; ++k) {
    Point x(d);
    x(0) = static_cast<Real>(k % kGrid) / kGrid;
    if (d == 2) x(1) = static_cast<Real>(k / kGrid) / kGrid;
    pts.push_back(x);
  }
  Real v_norm = 0.0, dv_norm = 0.0;
  for (const auto& x : pts) {
    v_norm += v(x) * v(x);
    dv_norm += grad_sq(x);
  }
  v_norm = std::sqrt(v_norm / total);
  dv_norm = std::sqrt(dv_norm / total);

  Real contraction = 0.0, margin = std::numeric_limits<Real>::infinity(), shift_err = 0.0;
  for (Real eps : c.eps) {
    const SmoothingSpec spec{lat, eps, c.quadrature_order};
    const auto sv = steklov_apply(v, spec, pts);
    Real s_norm = 0.0, defect = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      s_norm += sv[i] * sv[i];
      defect += std::pow(sv[i] - v(pts[i]), 2);
    }
    s_norm = std::sqrt(s_norm / total);
    defect = std::sqrt(defect / total);
    contraction = std::max(contraction, s_norm / v_norm);
    margin = std::min(margin, eps * lat.r1 * dv_norm - defect);
    SweepRecord r;
    r.eps = eps;
    r.metric = "steklov_defect";
    r.value = defect;
    r.problem_tag = "steklov";
    out.records.push_back(r);

    if (lat.is_rectangular()) {
      // S_eps x1^2 = x1^2 + eps^2 a^2 / 12 for a cell of width a along the first axis.
      const Real a = lat.basis(0, 0);
      const auto sq = steklov_apply([](const Point& x) { return x(0) * x(0); }, spec, pts);
      for (std::size_t i = 0; i < pts.size(); ++i)
        shift_err = std::max(shift_err, std::abs(sq[i] - pts[i](0) * pts[i](0) - eps * eps * a * a / 12.0));
    }
  }
  out.scalars["contraction_ratio"] = contraction;
  out.scalars["defect_margin"] = margin;
  if (lat.is_rectangular()) out.scalars["quadratic_shift_error"] = shift_err;
}

inline void run_sweep(ExperimentOutcome& out) {
  const auto pb = build_sweep(out.config);
  const auto res = error_sweep(pb);
  out.records = res.records;
  out.cell = cell_to_json(*res.cell);
  out.scalars["g_tilde_deviation"] = res.cell->g_tilde_deviation();
  out.scalars["lambda_h1"] = res.cell->lambda_h1;
}

/// Contour semigroup against the spectral one on random nodal data.
inline void run_contour(ExperimentOutcome& out) {
  const auto& c = out.config;
  validate(c);
  const auto g = build_coefficient(c);
  const auto b = build_symbol(c);
  CellSolverOptions copt;
  copt.tolerance = c.cell_tolerance;
  const int res = c.cell_resolution > 0 ? c.cell_resolution : 64;
  const auto cell = solve_cell_problem(g, b, res, copt);
  out.cell = cell_to_json(cell);
  const auto domain = build_domain(c);
  const auto mesh = build_mesh(domain, domain.lengths.front() / c.contour.mesh_cells);
  OperatorOptions oo;
  oo.dense_limit = c.dense_limit;
  const auto op = assemble_operator(OperatorCoefficient::effective(cell.g_eff), b, boundary_kind_from_string(c.bc), mesh, oo);
  if (!op.has_dense_spectrum())
    throw BudgetError("contour check needs a dense spectrum; dimension " + std::to_string(op.dim()) +
                      " exceeds solver.dense_limit");
  std::mt19937 rng(c.contour.seed);
  std::normal_distribution<Real> normal;
  ContourSpec spec;
  spec.nodes = c.contour.nodes;
  Real worst = 0.0;
  for (int s = 0; s < c.contour.samples; ++s) {
    Field phi(mesh, b.n());
    for (Eigen::Index i = 0; i < phi.values.size(); ++i) phi.values(i) = normal(rng);
    phi = op.prolong(op.restrict(phi));
    const Real scale = norm(phi, NormKind::L2);
    for (Real t : c.contour.times) {
      const Field exact = exp_apply(op, t, phi);
      const Field approx = contour_exp_apply(op, t, phi, spec);
      const Real err = norm(Field(approx - exact), NormKind::L2) / scale;
      worst = std::max(worst, err);
      SweepRecord r;
      r.eps = 0.0;
      r.t = t;
      r.metric = "contour_error";
      r.value = err;
      r.problem_tag = "sample=" + std::to_string(s);
      out.records.push_back(r);
    }
  }
  out.scalars["contour_max_error"] = worst;
  out.scalars["dimension"] = op.dim();
}

inline std::string p_filter(Real p) { return p > 0.0 ? ";p=" + homog::detail::p_tag(p) : std::string(); }

/// Records of `metric` grouped by problem tag, restricted by the rule's filters.
inline std::map<std::string, std::vector<ErrorRecord>> groups(const ExperimentOutcome& out, const ThresholdConfig& t) {
  std::map<std::string, std::vector<ErrorRecord>> g;
  const std::string vf = t.variant.empty() ? "" : "variant=" + t.variant;
  const std::string pf = p_filter(t.p);
  for (const auto& r : out.records) {
    if (r.metric != t.metric || r.fit_excluded) continue;
    if (!vf.empty() && r.problem_tag.find(vf) == std::string::npos) continue;
    if (!pf.empty() && r.problem_tag.find(pf) == std::string::npos) continue;
    g[r.problem_tag].push_back(r);
  }
  for (auto& [tag, recs] : g)
    std::stable_sort(recs.begin(), recs.end(), [](const ErrorRecord& a, const ErrorRecord& b) { return a.eps > b.eps; });
  return g;
}

inline ThresholdResult evaluate(const ExperimentOutcome& out, const ThresholdConfig& t) {
  ThresholdResult r;
  r.rule = t;
  if (t.kind == "scalar_max" || t.kind == "scalar_min") {
    const auto it = out.scalars.find(t.metric);
    if (it == out.scalars.end()) {
      r.note = "scalar '" + t.metric + "' was not produced";
      return r;
    }
    r.observed = it->second;
    r.pass = t.kind == "scalar_max" ? r.observed <= t.value : r.observed >= t.value;
    return r;
  }
  const auto g = groups(out, t);
  if (g.empty()) {
    r.note = "no records of metric '" + t.metric + "' match the filters";
    return r;
  }
  if (t.kind == "max_value") {
    for (const auto& [tag, recs] : g)
      for (const auto& e : recs) r.observed = std::max(r.observed, e.value);
    r.pass = r.observed <= t.value;
    return r;
  }
  if (t.kind == "ratio_spread") {
    RateProfile prof;
    try {
      prof.name = profile_from_string(t.profile);
    } catch (const Error& e) {
      r.note = e.what();
      return r;
    }
    prof.p = t.profile_p;
    for (const auto& [tag, recs] : g) {
      Real lo = std::numeric_limits<Real>::infinity(), hi = 0.0;
      for (const auto& e : recs) {
        const Real q = e.value / rate_profile_eval(prof, e.eps);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
      }
      r.observed = std::max(r.observed, lo > 0.0 ? hi / lo : std::numeric_limits<Real>::infinity());
    }
    r.pass = r.observed <= t.value;
    return r;
  }
  // min_slope / max_residual over every matching tag
  bool first = true;
  for (const auto& [tag, recs] : g) {
    RateFit fit;
    try {
      fit = fit_rate(recs);
    } catch (const FitError& e) {
      r.note = tag + ": " + e.what();
      r.pass = false;
      return r;
    }
    const Real v = t.kind == "min_slope" ? fit.slope : fit.residual;
    if (first) r.observed = v;
    r.observed = t.kind == "min_slope" ? std::min(r.observed, v) : std::max(r.observed, v);
    first = false;
  }
  r.pass = t.kind == "min_slope" ? r.observed >= t.value : r.observed <= t.value;
  return r;
}

}  // namespace detail

/// Rate fits for every (metric, tag) group that has an eps dependence.
inline std::vector<FitSummary> fit_all(const std::vector<SweepRecord>& records) {
  std::map<std::pair<std::string, std::string>, std::vector<ErrorRecord>> g;
  for (const auto& r : records)
    if (!r.fit_excluded && r.eps > 0.0) g[{r.metric, r.problem_tag}].push_back(r);
  std::vector<FitSummary> out;
  for (auto& [key, recs] : g) {
    std::set<Real> distinct;
    for (const auto& r : recs) distinct.insert(r.eps);
    if (distinct.size() < 4) continue;
    FitSummary s;
    s.metric = key.first;
    s.problem_tag = key.second;
    if (std::none_of(recs.begin(), recs.end(), [](const ErrorRecord& r) { return r.value > 0.0; })) {
      s.error = "all errors vanish";
      out.push_back(std::move(s));
      continue;
    }
    try {
      s.fit = fit_rate(recs);
    } catch (const FitError& e) {
      s.error = e.what();
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline void evaluate_thresholds(ExperimentOutcome& out) {
  out.thresholds.clear();
  for (const auto& t : out.config.thresholds) out.thresholds.push_back(detail::evaluate(out, t));
}

/// Runs one experiment with a resolved configuration.
inline ExperimentOutcome run_experiment(const ExperimentConfig& config) {
  const auto& entry = find_experiment(config.experiment);
  validate(config);
  ExperimentOutcome out;
  out.experiment = entry.name;
  out.description = entry.description;
  out.config = config;
  if (entry.name == "cell") detail::run_cell(out);
  else if (entry.name == "steklov") detail::run_steklov(out);
  else if (entry.name == "contour") detail::run_contour(out);
  else detail::run_sweep(out);
  out.fits = fit_all(out.records);
  evaluate_thresholds(out);
  return out;
}

/// Registry defaults for `name`, with the fields of `overrides` applied on top.
inline ExperimentConfig resolve_config(const std::string& name, const json& overrides = json::object()) {
  ExperimentConfig c = from_json(overrides, find_experiment(name).defaults());
  c.experiment = name;
  return c;
}

}  // namespace homog::harness
