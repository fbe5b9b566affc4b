#pragma once

#include <homog/correctors.hpp>
#include <homog/error_analysis.hpp>

#include <algorithm>
#include <complex>
#include <functional>
#include <future>
#include <set>
#include <string>
#include <vector>

namespace homog {

/// Everything one eps sweep needs; built by the harness from a config.
struct SweepProblem {
  PeriodicCoefficient g;
  DifferentialSymbol b;
  DomainSpec domain;
  BoundaryKind bc = BoundaryKind::dirichlet;
  std::function<Vector(const Point&)> phi;
  SourceTerm F = SourceTerm::zero();
  std::vector<Real> eps;
  Real t = 0.5;       ///< evaluation time of the pointwise-in-time metrics
  Real T = 1.0;       ///< horizon of the time-Lebesgue metrics
  int time_steps = 40;
  std::vector<Real> p_list{2.0};
  std::vector<CorrectorVariant> variants{CorrectorVariant::smoothed, CorrectorVariant::plain};
  bool effective_variant = true;  ///< also report u0 alone / g0 b(D)u0 as the approximation
  std::vector<std::string> metrics{"L2", "H1_corrected", "flux_L2"};
  Real zeta = -1.0;   ///< spectral parameter of the resolvent metric
  int cells_per_eps = 16;
  int cell_resolution = 0;  ///< 0: same as cells_per_eps, so the cell grid matches the mesh
  int quadrature_order = 6;
  TimeScheme scheme = TimeScheme::eigen_exact;
  OperatorOptions operator_options;
  CellSolverOptions cell_options;
  bool discretization_check = false;
  Real discretization_tolerance = 0.1;
  long budget_nodes = 2'000'000;
  int jobs = 1;
  std::string tag;
};

inline const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> names{"L2",          "H1",          "H1_corrected", "H1_interior_corrected",
                                              "flux_L2",     "flux_L2_interior", "Lp_time_L2", "Lp_time_H1",
                                              "resolvent_L2", "mean_drift"};
  return names;
}

struct SweepRecord : ErrorRecord {
  bool fit_excluded = false;  ///< set when the discretization proxy exceeds its tolerance
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::shared_ptr<const CellSolution> cell;

  std::vector<ErrorRecord> fit_records(const std::string& metric, const std::string& tag_contains = "") const {
    std::vector<ErrorRecord> all;
    for (const auto& r : records)
      if (!r.fit_excluded) all.push_back(r);
    return select_metric(all, metric, tag_contains);
  }
};

inline long mesh_node_count(const DomainSpec& domain, Real h) {
  long n = 1;
  for (Real l : domain.lengths) n *= std::lround(l / h) + 1;
  return n;
}

namespace detail {

inline std::string variant_tag(const std::string& base, const std::string& variant) {
  return base + ";variant=" + variant;
}

inline std::string p_tag(Real p) { return std::isinf(p) ? std::string("inf") : std::to_string(p); }

/// All metrics for one eps on a mesh with h = eps / cells_per_eps.
inline std::vector<SweepRecord> sweep_one(const SweepProblem& pb, const CellSolution& cell, Real eps, int cells_per_eps) {
  const std::set<std::string> want(pb.metrics.begin(), pb.metrics.end());
  auto wants = [&](const char* m) { return want.count(m) > 0; };
  const Real h = eps / cells_per_eps;
  const auto mesh = build_mesh(pb.domain, h);
  OperatorOptions oo = pb.operator_options;
  oo.min_cells_per_eps = std::min(oo.min_cells_per_eps, cells_per_eps);
  const auto a_eps = assemble_operator(OperatorCoefficient::oscillating(pb.g, eps), pb.b, pb.bc, mesh, oo);
  const auto a_0 = assemble_operator(OperatorCoefficient::effective(cell.g_eff), pb.b, pb.bc, mesh, oo);
  const Field phi = interpolate(mesh, pb.b.n(), pb.phi);
  const CorrectorOptions copt{pb.quadrature_order};
  const std::string base = pb.tag + ";bc=" + to_string(pb.bc);

  std::vector<SweepRecord> out;
  auto emit = [&](Real t, const std::string& metric, Real value, const std::string& tag) {
    SweepRecord r;
    r.eps = eps;
    r.t = t;
    r.metric = metric;
    r.value = value;
    r.problem_tag = tag;
    out.push_back(r);
  };

  std::vector<std::string> variant_names;
  for (auto v : pb.variants) variant_names.emplace_back(to_string(v));
  if (pb.effective_variant) variant_names.emplace_back("effective");

  auto corrected = [&](const Field& u0, const Field& w, const std::string& variant) {
    if (variant == "effective") return u0;
    const Field corr = corrector_apply(cell, pb.b, eps, w, corrector_variant_from_string(variant), pb.bc, copt);
    return first_order_approx(u0, corr, eps);
  };
  auto flux_reference = [&](const Field& u0, const std::string& variant) {
    if (variant == "effective") return flux(u0, OperatorCoefficient::effective(cell.g_eff), pb.b);
    return flux_approx(cell, pb.b, eps, u0, corrector_variant_from_string(variant), pb.bc, copt);
  };

  const bool pointwise = wants("L2") || wants("H1") || wants("H1_corrected") || wants("H1_interior_corrected") ||
                         wants("flux_L2") || wants("flux_L2_interior") || wants("mean_drift");
  const bool lp = wants("Lp_time_L2") || wants("Lp_time_H1");

  if (pointwise || lp) {
    std::vector<Real> nodes;
    if (pointwise) nodes.push_back(pb.t);
    if (lp) {
      const auto u = TimeGrid::uniform(pb.T, pb.time_steps);
      nodes.insert(nodes.end(), u.nodes.begin(), u.nodes.end());
    }
    TimeGrid grid = TimeGrid::from_nodes(nodes, pb.scheme);
    if (wants("Lp_time_H1")) grid = grid.with_shift(eps * eps);
    const Trajectory ue = duhamel_solve(a_eps, phi, pb.F, grid);
    const Trajectory u0 = duhamel_solve(a_0, phi, pb.F, grid);

    if (pointwise) {
      const Field& ue_t = ue.at(pb.t);
      const Field& u0_t = u0.at(pb.t);
      const Field diff = ue_t - u0_t;
      if (wants("L2")) emit(pb.t, "L2", norm(diff, NormKind::L2), base);
      if (wants("H1")) emit(pb.t, "H1", norm(diff, NormKind::H1), base);
      if (wants("H1_corrected") || wants("H1_interior_corrected"))
        for (const auto& v : variant_names) {
          const Field err = ue_t - corrected(u0_t, u0_t, v);
          if (wants("H1_corrected")) emit(pb.t, "H1_corrected", norm(err, NormKind::H1), variant_tag(base, v));
          if (wants("H1_interior_corrected"))
            emit(pb.t, "H1_interior_corrected", norm(err, NormKind::H1_interior, pb.domain.delta), variant_tag(base, v));
        }
      if (wants("flux_L2") || wants("flux_L2_interior")) {
        const ElementField pe = flux(ue_t, a_eps);
        for (const auto& v : variant_names) {
          const ElementField d = pe - flux_reference(u0_t, v);
          if (wants("flux_L2")) emit(pb.t, "flux_L2", norm(d), variant_tag(base, v));
          if (wants("flux_L2_interior"))
            emit(pb.t, "flux_L2_interior", norm(d, true, pb.domain.delta), variant_tag(base, v));
        }
      }
      if (wants("mean_drift")) {
        const Vector m0 = field_mean(ue.states.front());
        Real drift = 0.0;
        for (const auto& s : ue.states) drift = std::max(drift, (field_mean(s) - m0).cwiseAbs().maxCoeff());
        emit(pb.t, "mean_drift", drift, base);
      }
    }

    if (lp) {
      // Time-Lebesgue metrics on the uniform nodes of (0, T).
      const auto uniform = TimeGrid::uniform(pb.T, pb.time_steps);
      std::vector<Real> l2_vals;
      for (Real t : uniform.nodes) l2_vals.push_back(norm(Field(ue.at(t) - u0.at(t)), NormKind::L2));
      if (wants("Lp_time_L2"))
        for (Real p : pb.p_list)
          emit(pb.T, "Lp_time_L2", time_norm(uniform.nodes, l2_vals, p), base + ";p=" + p_tag(p));
      if (wants("Lp_time_H1"))
        for (const auto& v : variant_names) {
          std::vector<Real> h1_vals;
          for (Real t : uniform.nodes) {
            const Field w = shifted_state(a_0, u0, eps, t, grid);
            h1_vals.push_back(norm(Field(ue.at(t) - corrected(u0.at(t), w, v)), NormKind::H1));
          }
          for (Real p : pb.p_list)
            emit(pb.T, "Lp_time_H1", time_norm(uniform.nodes, h1_vals, p), variant_tag(base, v) + ";p=" + p_tag(p));
        }
    }
  }

  if (wants("resolvent_L2")) {
    const Field re = resolvent_apply_real(a_eps, pb.zeta, phi);
    const Field r0 = resolvent_apply_real(a_0, pb.zeta, phi);
    emit(0.0, "resolvent_L2", norm(Field(re - r0), NormKind::L2), base + ";zeta=" + std::to_string(pb.zeta));
  }
  return out;
}

}  // namespace detail

inline void validate_sweep(const SweepProblem& pb) {
  pb.domain.validate();
  if (pb.eps.empty()) throw DomainError("eps list is empty");
  for (Real e : pb.eps)
    if (!(e > 0.0)) throw DomainError("eps values must be positive");
  for (const auto& m : pb.metrics)
    if (std::find(known_metrics().begin(), known_metrics().end(), m) == known_metrics().end())
      throw DomainError("unknown metric '" + m + "'");
  if (!pb.phi) throw DomainError("initial data is missing");
  if (pb.cells_per_eps < pb.operator_options.min_cells_per_eps)
    throw ResolutionError("cells_per_eps = " + std::to_string(pb.cells_per_eps) + " violates h <= eps/" +
                          std::to_string(pb.operator_options.min_cells_per_eps));
  if (pb.bc == BoundaryKind::neumann && std::any_of(pb.metrics.begin(), pb.metrics.end(), [&](const std::string& m) {
        return m == "resolvent_L2";
      }) && std::abs(pb.zeta) < 1e-12)
    throw SingularResolventError("zeta = 0 is in the Neumann spectrum");
  const int factor = pb.discretization_check ? 2 : 1;
  for (Real e : pb.eps) {
    const long nodes = mesh_node_count(pb.domain, e / (pb.cells_per_eps * factor));
    if (nodes > pb.budget_nodes)
      throw BudgetError("eps = " + std::to_string(e) + " needs " + std::to_string(nodes) + " mesh nodes, budget is " +
                        std::to_string(pb.budget_nodes));
  }
}

/// Runs the sweep; records are ordered by eps descending.
inline SweepResult error_sweep(const SweepProblem& pb) {
  validate_sweep(pb);
  SweepResult res;
  const int cell_res = pb.cell_resolution > 0 ? pb.cell_resolution : pb.cells_per_eps;
  res.cell = std::make_shared<const CellSolution>(solve_cell_problem(pb.g, pb.b, cell_res, pb.cell_options));
  std::shared_ptr<const CellSolution> fine_cell;
  if (pb.discretization_check) {
    const int fine_res = pb.cell_resolution > 0 ? 2 * pb.cell_resolution : 2 * pb.cells_per_eps;
    fine_cell = std::make_shared<const CellSolution>(solve_cell_problem(pb.g, pb.b, fine_res, pb.cell_options));
  }

  std::vector<Real> eps = pb.eps;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  auto job = [&](Real e) {
    auto recs = detail::sweep_one(pb, *res.cell, e, pb.cells_per_eps);
    if (pb.discretization_check) {
      const auto fine = detail::sweep_one(pb, *fine_cell, e, 2 * pb.cells_per_eps);
      for (std::size_t i = 0; i < recs.size() && i < fine.size(); ++i) {
        const Real proxy = std::abs(recs[i].value - fine[i].value);
        if (proxy > pb.discretization_tolerance * recs[i].value) recs[i].fit_excluded = true;
      }
    }
    return recs;
  };

  std::vector<std::vector<SweepRecord>> per_eps(eps.size());
  if (pb.jobs <= 1) {
    for (std::size_t i = 0; i < eps.size(); ++i) per_eps[i] = job(eps[i]);
  } else {
    std::vector<std::future<std::vector<SweepRecord>>> futures;
    std::size_t next = 0;
    while (next < eps.size() || !futures.empty()) {
      while (next < eps.size() && futures.size() < static_cast<std::size_t>(pb.jobs)) {
        futures.push_back(std::async(std::launch::async, job, eps[next]));
        ++next;
      }
      // Collect in submission order; the writer stays single-threaded.
      const std::size_t done = next - futures.size();
      per_eps[done] = futures.front().get();
      futures.erase(futures.begin());
    }
  }
  for (auto& v : per_eps)
    for (auto& r : v) res.records.push_back(std::move(r));
  return res;
}

}  // namespace homog
