#pragma once

#include <homog/pipeline.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace homog::harness {

using json = nlohmann::json;

struct CoefficientConfig {
  std::string kind = "sinusoid";  ///< constant | sinusoid | laminate | checkerboard | table
  int m = 1;
  Real mean = 2.0;
  Real amplitude = 1.0;
  std::vector<int> mode{1};
  std::vector<Real> values;  ///< laminate layer values; checkerboard uses the first two
  std::vector<Real> fractions;
  int axis = 0;
  std::vector<std::vector<Real>> matrix;                ///< constant: the m x m value
  std::vector<std::vector<std::vector<Real>>> samples;  ///< table: row-major sample matrices
  bool discontinuous = false;                           ///< table only
  int n_cell = 256;                                     ///< sampling resolution per axis
};

struct SymbolConfig {
  std::string kind = "gradient";  ///< gradient | custom
  std::vector<std::vector<std::vector<Real>>> matrices;
};

/// Named analytic family for phi or F.
struct DataConfig {
  std::string kind = "sin";  ///< zero | constant | sin | cos | bump
  std::vector<int> mode{1};
  Real amplitude = 1.0;
  std::vector<Real> center;
  Real width = 0.25;
  std::string time_profile = "constant";  ///< sources: constant | cos
};

inline DataConfig preset(const std::string& kind) {
  DataConfig d;
  d.kind = kind;
  return d;
}

/// Pass/fail rule evaluated on the outcome of an experiment.
struct ThresholdConfig {
  std::string kind = "min_slope";  ///< min_slope | max_residual | max_value | ratio_spread | scalar_max | scalar_min
  std::string metric;              ///< metric name, or scalar name for scalar_* kinds
  std::string variant;             ///< optional variant filter
  Real p = 0.0;                    ///< optional p filter for time-Lebesgue metrics (0 = none)
  Real value = 0.0;
  std::string profile;             ///< ratio_spread: rate profile the values are divided by
  Real profile_p = 2.0;
};

struct ContourConfig {
  int nodes = 128;
  int mesh_cells = 128;
  int samples = 10;
  std::vector<Real> times{0.25, 1.0};
  unsigned seed = 1;
};

struct ExperimentConfig {
  std::string experiment = "dirichlet_l2";
  CoefficientConfig coefficient;
  std::vector<std::vector<Real>> lattice{{1.0}};
  SymbolConfig symbol;
  std::vector<Real> lengths{1.0};
  Real delta = 0.25;
  std::string bc = "dirichlet";
  DataConfig initial;
  DataConfig source = preset("zero");
  std::vector<Real> eps{0.1, 0.05, 0.025, 0.0125};
  Real t = 0.5;
  Real T = 1.0;
  int time_steps = 40;
  std::vector<Real> p{2.0};
  Real zeta = -1.0;
  std::vector<std::string> variants{"smoothed", "plain"};
  bool effective_variant = true;
  std::vector<std::string> metrics{"L2"};
  int cells_per_eps = 16;
  int cell_resolution = 0;
  int quadrature_order = 6;
  std::string scheme = "eigen_exact";
  bool lumped_mass = false;
  int dense_limit = 4000;
  Real cell_tolerance = 1e-12;
  bool discretization_check = false;
  Real discretization_tolerance = 0.1;
  ContourConfig contour;
  std::vector<ThresholdConfig> thresholds;
  std::string output = "out";
  long budget_nodes = 2'000'000;
  int jobs = 1;

  int dimension() const { return static_cast<int>(lattice.size()); }
};

// ---------------------------------------------------------------- JSON I/O

namespace detail {

inline json real_to_json(Real x) {
  if (std::isinf(x)) return x > 0 ? json("inf") : json("-inf");
  return json(x);
}

class Reader {
 public:
  Reader(json j, std::string path) : j_(std::move(j)), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    read(j_.at(key), path_.empty() ? std::string(key) : path_ + "." + key, out);
  }

  Reader child(const char* key) {
    seen_.insert(key);
    return Reader(j_.contains(key) ? j_.at(key) : json::object(), path_.empty() ? std::string(key) : path_ + "." + key);
  }
  bool has(const char* key) const { return j_.contains(key); }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("field '" + (path_.empty() ? k : path_ + "." + k) + "': unknown field");
  }

  static void read(const json& j, const std::string& path, Real& out) {
    if (j.is_string()) {
      const auto s = j.get<std::string>();
      if (s == "inf") return void(out = std::numeric_limits<Real>::infinity());
      if (s == "-inf") return void(out = -std::numeric_limits<Real>::infinity());
      throw ConfigError("field '" + path + "': expected a number or \"inf\"");
    }
    if (!j.is_number()) throw ConfigError("field '" + path + "': expected a number");
    out = j.get<Real>();
  }
  static void read(const json& j, const std::string& path, int& out) {
    if (!j.is_number_integer()) throw ConfigError("field '" + path + "': expected an integer");
    out = j.get<int>();
  }
  static void read(const json& j, const std::string& path, long& out) {
    if (!j.is_number_integer()) throw ConfigError("field '" + path + "': expected an integer");
    out = j.get<long>();
  }
  static void read(const json& j, const std::string& path, unsigned& out) {
    if (!j.is_number_unsigned()) throw ConfigError("field '" + path + "': expected a non-negative integer");
    out = j.get<unsigned>();
  }
  static void read(const json& j, const std::string& path, bool& out) {
    if (!j.is_boolean()) throw ConfigError("field '" + path + "': expected true or false");
    out = j.get<bool>();
  }
  static void read(const json& j, const std::string& path, std::string& out) {
    if (!j.is_string()) throw ConfigError("field '" + path + "': expected a string");
    out = j.get<std::string>();
  }
  template <class T>
  static void read(const json& j, const std::string& path, std::vector<T>& out) {
    if (!j.is_array()) throw ConfigError("field '" + path + "': expected a list");
    out.clear();
    for (std::size_t i = 0; i < j.size(); ++i) {
      T v{};
      read(j[i], path + "[" + std::to_string(i) + "]", v);
      out.push_back(std::move(v));
    }
  }
  static void read(const json& j, const std::string& path, ThresholdConfig& out) {
    Reader r(j, path);
    r.get("kind", out.kind);
    r.get("metric", out.metric);
    r.get("variant", out.variant);
    r.get("p", out.p);
    r.get("value", out.value);
    r.get("profile", out.profile);
    r.get("profile_p", out.profile_p);
    r.finish();
  }

  std::string where() const { return path_.empty() ? std::string("config: ") : "field '" + path_ + "': "; }

 private:
  json j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline json data_to_json(const DataConfig& d) {
  return json{{"kind", d.kind},       {"mode", d.mode},   {"amplitude", d.amplitude},
              {"center", d.center},   {"width", d.width}, {"time_profile", d.time_profile}};
}

inline void data_from_json(Reader r, DataConfig& d) {
  r.get("kind", d.kind);
  r.get("mode", d.mode);
  r.get("amplitude", d.amplitude);
  r.get("center", d.center);
  r.get("width", d.width);
  r.get("time_profile", d.time_profile);
  r.finish();
}

}  // namespace detail

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  const auto& k = c.coefficient;
  j["coefficient"] = json{{"kind", k.kind},         {"m", k.m},           {"mean", k.mean},
                          {"amplitude", k.amplitude}, {"mode", k.mode},     {"values", k.values},
                          {"fractions", k.fractions}, {"axis", k.axis},     {"matrix", k.matrix},
                          {"samples", k.samples},     {"discontinuous", k.discontinuous}, {"n_cell", k.n_cell}};
  j["lattice"] = json{{"basis", c.lattice}};
  j["symbol"] = json{{"kind", c.symbol.kind}, {"matrices", c.symbol.matrices}};
  j["domain"] = json{{"lengths", c.lengths}, {"delta", c.delta}};
  j["bc"] = c.bc;
  j["initial"] = detail::data_to_json(c.initial);
  j["source"] = detail::data_to_json(c.source);
  j["eps"] = c.eps;
  j["t"] = c.t;
  j["T"] = c.T;
  j["time_steps"] = c.time_steps;
  json ps = json::array();
  for (Real p : c.p) ps.push_back(detail::real_to_json(p));
  j["p"] = ps;
  j["zeta"] = c.zeta;
  j["variants"] = c.variants;
  j["effective_variant"] = c.effective_variant;
  j["metrics"] = c.metrics;
  j["cells_per_eps"] = c.cells_per_eps;
  j["cell_resolution"] = c.cell_resolution;
  j["quadrature_order"] = c.quadrature_order;
  j["solver"] = json{{"scheme", c.scheme},
                     {"lumped_mass", c.lumped_mass},
                     {"dense_limit", c.dense_limit},
                     {"cell_tolerance", c.cell_tolerance}};
  j["discretization_check"] = json{{"enabled", c.discretization_check}, {"tolerance", c.discretization_tolerance}};
  j["contour"] = json{{"nodes", c.contour.nodes},
                      {"mesh_cells", c.contour.mesh_cells},
                      {"samples", c.contour.samples},
                      {"times", c.contour.times},
                      {"seed", c.contour.seed}};
  json th = json::array();
  for (const auto& t : c.thresholds)
    th.push_back(json{{"kind", t.kind},
                      {"metric", t.metric},
                      {"variant", t.variant},
                      {"p", detail::real_to_json(t.p)},
                      {"value", t.value},
                      {"profile", t.profile},
                      {"profile_p", detail::real_to_json(t.profile_p)}});
  j["thresholds"] = th;
  j["output"] = c.output;
  j["budget_nodes"] = c.budget_nodes;
  j["jobs"] = c.jobs;
  return j;
}

/// Reads the fields present in `j` on top of `base`; unknown fields are errors.
inline ExperimentConfig from_json(const json& j, ExperimentConfig c = {}) {
  detail::Reader r(j, "");
  r.get("experiment", c.experiment);
  {
    auto k = r.child("coefficient");
    auto& cc = c.coefficient;
    k.get("kind", cc.kind);
    k.get("m", cc.m);
    k.get("mean", cc.mean);
    k.get("amplitude", cc.amplitude);
    k.get("mode", cc.mode);
    k.get("values", cc.values);
    k.get("fractions", cc.fractions);
    k.get("axis", cc.axis);
    k.get("matrix", cc.matrix);
    k.get("samples", cc.samples);
    k.get("discontinuous", cc.discontinuous);
    k.get("n_cell", cc.n_cell);
    k.finish();
  }
  {
    auto l = r.child("lattice");
    l.get("basis", c.lattice);
    l.finish();
  }
  {
    auto s = r.child("symbol");
    s.get("kind", c.symbol.kind);
    s.get("matrices", c.symbol.matrices);
    s.finish();
  }
  {
    auto d = r.child("domain");
    d.get("lengths", c.lengths);
    d.get("delta", c.delta);
    d.finish();
  }
  r.get("bc", c.bc);
  if (r.has("initial")) detail::data_from_json(r.child("initial"), c.initial);
  else r.child("initial");
  if (r.has("source")) detail::data_from_json(r.child("source"), c.source);
  else r.child("source");
  r.get("eps", c.eps);
  r.get("t", c.t);
  r.get("T", c.T);
  r.get("time_steps", c.time_steps);
  r.get("p", c.p);
  r.get("zeta", c.zeta);
  r.get("variants", c.variants);
  r.get("effective_variant", c.effective_variant);
  r.get("metrics", c.metrics);
  r.get("cells_per_eps", c.cells_per_eps);
  r.get("cell_resolution", c.cell_resolution);
  r.get("quadrature_order", c.quadrature_order);
  {
    auto s = r.child("solver");
    s.get("scheme", c.scheme);
    s.get("lumped_mass", c.lumped_mass);
    s.get("dense_limit", c.dense_limit);
    s.get("cell_tolerance", c.cell_tolerance);
    s.finish();
  }
  {
    auto d = r.child("discretization_check");
    d.get("enabled", c.discretization_check);
    d.get("tolerance", c.discretization_tolerance);
    d.finish();
  }
  {
    auto k = r.child("contour");
    k.get("nodes", c.contour.nodes);
    k.get("mesh_cells", c.contour.mesh_cells);
    k.get("samples", c.contour.samples);
    k.get("times", c.contour.times);
    k.get("seed", c.contour.seed);
    k.finish();
  }
  r.get("thresholds", c.thresholds);
  r.get("output", c.output);
  r.get("budget_nodes", c.budget_nodes);
  r.get("jobs", c.jobs);
  r.finish();
  return c;
}

inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return to_json(a) == to_json(b); }

inline ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j, base);
}

// -------------------------------------------------------------- validation

inline void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& field, const std::string& msg) { throw ConfigError("field '" + field + "': " + msg); };
  const int d = c.dimension();
  if (d < 1 || d > 2) fail("lattice.basis", "must be a 1x1 or 2x2 matrix");
  for (const auto& row : c.lattice)
    if (static_cast<int>(row.size()) != d) fail("lattice.basis", "must be square");
  if (static_cast<int>(c.lengths.size()) != d) fail("domain.lengths", "needs one length per lattice dimension");
  for (std::size_t i = 0; i < c.lengths.size(); ++i)
    if (!(c.lengths[i] > 0.0)) fail("domain.lengths[" + std::to_string(i) + "]", "must be positive");
  if (c.delta < 0.0) fail("domain.delta", "must be non-negative");
  if (c.bc != "dirichlet" && c.bc != "neumann") fail("bc", "must be 'dirichlet' or 'neumann'");
  if (c.eps.empty()) fail("eps", "must not be empty");
  Real min_edge = c.lengths.front();
  for (Real l : c.lengths) min_edge = std::min(min_edge, l);
  Real eps_max = min_edge / 4.0;
  if (c.delta > 0.0) eps_max = std::min(eps_max, c.delta);
  for (std::size_t i = 0; i < c.eps.size(); ++i) {
    const std::string f = "eps[" + std::to_string(i) + "]";
    if (!(c.eps[i] > 0.0)) fail(f, "must be positive");
    if (c.eps[i] > eps_max + 1e-15)
      fail(f, "exceeds the admissible range eps <= " + std::to_string(eps_max) + " (domain edge / 4 and delta)");
  }
  if (!(c.t > 0.0)) fail("t", "must be positive");
  if (!(c.T > 0.0)) fail("T", "must be positive");
  if (c.time_steps < 1) fail("time_steps", "must be >= 1");
  for (std::size_t i = 0; i < c.p.size(); ++i)
    if (!(c.p[i] >= 1.0)) fail("p[" + std::to_string(i) + "]", "must lie in [1, inf]");
  for (std::size_t i = 0; i < c.variants.size(); ++i)
    if (c.variants[i] != "smoothed" && c.variants[i] != "plain")
      fail("variants[" + std::to_string(i) + "]", "must be 'smoothed' or 'plain'");
  for (std::size_t i = 0; i < c.metrics.size(); ++i)
    if (std::find(known_metrics().begin(), known_metrics().end(), c.metrics[i]) == known_metrics().end())
      fail("metrics[" + std::to_string(i) + "]", "unknown metric '" + c.metrics[i] + "'");
  if (c.cells_per_eps < 16) fail("cells_per_eps", "must be >= 16 (resolution rule h <= eps/16)");
  if (c.cell_resolution != 0 && c.cell_resolution < 8) fail("cell_resolution", "must be 0 (match the mesh) or >= 8");
  if (c.coefficient.n_cell < 1) fail("coefficient.n_cell", "must be positive");
  if (c.coefficient.m < 1) fail("coefficient.m", "must be positive");
  if (c.quadrature_order < 1) fail("quadrature_order", "must be >= 1");
  if (c.scheme != "eigen_exact" && c.scheme != "backward_euler" && c.scheme != "crank_nicolson")
    fail("solver.scheme", "must be eigen_exact, backward_euler or crank_nicolson");
  if (c.budget_nodes < 1) fail("budget_nodes", "must be positive");
  if (c.jobs < 1) fail("jobs", "must be >= 1");
  if (c.contour.nodes < 16) fail("contour.nodes", "must be >= 16");
  if (c.contour.mesh_cells < 2 || c.contour.mesh_cells > 201) fail("contour.mesh_cells", "must lie in [2, 201]");
  for (const std::string& k : {c.initial.kind, c.source.kind})
    if (k != "zero" && k != "constant" && k != "sin" && k != "cos" && k != "bump")
      fail(&k == &c.initial.kind ? "initial.kind" : "source.kind", "unknown preset '" + k + "'");
  if (c.source.time_profile != "constant" && c.source.time_profile != "cos")
    fail("source.time_profile", "must be 'constant' or 'cos'");
  for (std::size_t i = 0; i < c.thresholds.size(); ++i) {
    const auto& t = c.thresholds[i];
    static const std::set<std::string> kinds{"min_slope", "max_residual", "max_value", "ratio_spread", "scalar_max", "scalar_min"};
    if (!kinds.count(t.kind)) fail("thresholds[" + std::to_string(i) + "].kind", "unknown threshold kind '" + t.kind + "'");
    if (t.metric.empty()) fail("thresholds[" + std::to_string(i) + "].metric", "must be set");
  }
}

// ------------------------------------------------------- building objects

inline Matrix to_matrix(const std::vector<std::vector<Real>>& rows, const std::string& field) {
  if (rows.empty()) throw ConfigError("field '" + field + "': empty matrix");
  Matrix a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw ConfigError("field '" + field + "': ragged matrix");
    for (std::size_t j = 0; j < rows[i].size(); ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return a;
}

/// `lattice.basis` lists the basis vectors a_j; they become the columns of A.
inline LatticeSpec build_lattice(const ExperimentConfig& c) {
  return dual_lattice(Matrix(to_matrix(c.lattice, "lattice.basis").transpose()));
}

inline PeriodicCoefficient build_coefficient(const ExperimentConfig& c) {
  const auto lat = build_lattice(c);
  const auto& k = c.coefficient;
  if (k.kind == "constant") {
    const Matrix v = k.matrix.empty() ? Matrix(k.mean * Matrix::Identity(k.m, k.m)) : to_matrix(k.matrix, "coefficient.matrix");
    return constant_coefficient(lat, v);
  }
  if (k.kind == "sinusoid") return sinusoid_coefficient(lat, k.m, k.mean, k.amplitude, k.mode, k.n_cell);
  if (k.kind == "laminate") return laminate_coefficient(lat, k.m, k.values, k.fractions, k.axis, k.n_cell);
  if (k.kind == "checkerboard") {
    if (k.values.size() != 2) throw ConfigError("field 'coefficient.values': checkerboard needs two values");
    return checkerboard_coefficient(lat, k.m, k.values[0], k.values[1], k.n_cell);
  }
  if (k.kind == "table") {
    std::vector<Matrix> s;
    for (std::size_t i = 0; i < k.samples.size(); ++i)
      s.push_back(to_matrix(k.samples[i], "coefficient.samples[" + std::to_string(i) + "]"));
    return PeriodicCoefficient::from_samples(lat, k.n_cell, std::move(s), k.discontinuous);
  }
  throw ConfigError("field 'coefficient.kind': unknown kind '" + k.kind +
                    "' (constant, sinusoid, laminate, checkerboard, table)");
}

inline DifferentialSymbol build_symbol(const ExperimentConfig& c) {
  if (c.symbol.kind == "gradient") {
    DifferentialSymbol b = gradient_symbol(c.dimension());
    if (c.coefficient.m != c.dimension())
      throw ConfigError("field 'coefficient.m': the gradient symbol needs m = d = " + std::to_string(c.dimension()));
    return b;
  }
  if (c.symbol.kind == "custom") {
    std::vector<Matrix> bl;
    for (std::size_t i = 0; i < c.symbol.matrices.size(); ++i)
      bl.push_back(to_matrix(c.symbol.matrices[i], "symbol.matrices[" + std::to_string(i) + "]"));
    if (static_cast<int>(bl.size()) != c.dimension())
      throw ConfigError("field 'symbol.matrices': needs one matrix per lattice dimension");
    return make_symbol(std::move(bl));
  }
  throw ConfigError("field 'symbol.kind': must be 'gradient' or 'custom'");
}

inline DomainSpec build_domain(const ExperimentConfig& c) {
  DomainSpec d;
  d.dimension = c.dimension();
  d.lengths = c.lengths;
  d.delta = c.delta;
  return d;
}

/// Scalar profile of a data preset on the box with the given edge lengths.
inline std::function<Real(const Point&)> build_profile(const DataConfig& d, const std::vector<Real>& lengths) {
  const Real pi = std::numbers::pi;
  const Real amp = d.amplitude;
  auto mode = [&](std::size_t l) { return l < d.mode.size() ? d.mode[l] : (d.mode.empty() ? 1 : d.mode.back()); };
  if (d.kind == "zero") return [](const Point&) { return 0.0; };
  if (d.kind == "constant") return [amp](const Point&) { return amp; };
  if (d.kind == "sin" || d.kind == "cos") {
    std::vector<Real> k;
    for (std::size_t l = 0; l < lengths.size(); ++l) k.push_back(mode(l) * pi / lengths[l]);
    const bool use_sin = d.kind == "sin";
    return [k, amp, use_sin](const Point& x) {
      Real v = amp;
      for (std::size_t l = 0; l < k.size(); ++l) v *= use_sin ? std::sin(k[l] * x(static_cast<Eigen::Index>(l))) : std::cos(k[l] * x(static_cast<Eigen::Index>(l)));
      return v;
    };
  }
  if (d.kind == "bump") {
    std::vector<Real> c = d.center;
    if (c.empty())
      for (Real l : lengths) c.push_back(0.5 * l);
    if (c.size() != lengths.size()) throw ConfigError("field 'center': needs one coordinate per dimension");
    const Real w = d.width;
    if (!(w > 0.0)) throw ConfigError("field 'width': must be positive");
    return [c, w, amp](const Point& x) {
      Real r2 = 0.0;
      for (std::size_t l = 0; l < c.size(); ++l) r2 += std::pow((x(static_cast<Eigen::Index>(l)) - c[l]) / w, 2);
      return r2 < 1.0 ? amp * std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
    };
  }
  throw ConfigError("unknown data preset '" + d.kind + "'");
}

inline std::function<Vector(const Point&)> build_vector_data(const DataConfig& d, const std::vector<Real>& lengths, int n) {
  auto f = build_profile(d, lengths);
  return [f, n](const Point& x) { return Vector::Constant(n, f(x)); };
}

inline SourceTerm build_source(const DataConfig& d, const std::vector<Real>& lengths, int n) {
  SourceTerm s;
  if (d.kind == "zero") return SourceTerm::zero(n);
  auto f = build_vector_data(d, lengths, n);
  const bool oscillating = d.time_profile == "cos";
  s.time_constant = !oscillating;
  s.eval = [f, n, oscillating](const std::shared_ptr<const Mesh>& mesh, Real t) {
    Field u = interpolate(mesh, n, f);
    if (oscillating) u.values *= std::cos(t);
    return u;
  };
  return s;
}

/// SweepProblem for the sweep-type experiments.
inline SweepProblem build_sweep(const ExperimentConfig& c) {
  validate(c);
  SweepProblem pb;
  pb.g = build_coefficient(c);
  pb.b = build_symbol(c);
  pb.domain = build_domain(c);
  pb.bc = boundary_kind_from_string(c.bc);
  pb.phi = build_vector_data(c.initial, c.lengths, pb.b.n());
  pb.F = build_source(c.source, c.lengths, pb.b.n());
  pb.eps = c.eps;
  pb.t = c.t;
  pb.T = c.T;
  pb.time_steps = c.time_steps;
  pb.p_list = c.p;
  pb.variants.clear();
  for (const auto& v : c.variants) pb.variants.push_back(corrector_variant_from_string(v));
  pb.effective_variant = c.effective_variant;
  pb.metrics = c.metrics;
  pb.zeta = c.zeta;
  pb.cells_per_eps = c.cells_per_eps;
  pb.cell_resolution = c.cell_resolution;
  pb.quadrature_order = c.quadrature_order;
  pb.scheme = time_scheme_from_string(c.scheme);
  pb.operator_options.lumped_mass = c.lumped_mass;
  pb.operator_options.dense_limit = c.dense_limit;
  pb.cell_options.tolerance = c.cell_tolerance;
  pb.discretization_check = c.discretization_check;
  pb.discretization_tolerance = c.discretization_tolerance;
  pb.budget_nodes = c.budget_nodes;
  pb.jobs = c.jobs;
  pb.tag = "coef=" + c.coefficient.kind + ";phi=" + c.initial.kind + ";F=" + c.source.kind;
  return pb;
}

}  // namespace homog::harness
