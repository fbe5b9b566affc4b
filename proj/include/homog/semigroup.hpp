#pragma once

#include <homog/operators.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

namespace homog {

enum class TimeScheme { eigen_exact, backward_euler, crank_nicolson };

inline const char* to_string(TimeScheme s) {
  switch (s) {
    case TimeScheme::eigen_exact: return "eigen_exact";
    case TimeScheme::backward_euler: return "backward_euler";
    case TimeScheme::crank_nicolson: return "crank_nicolson";
  }
  return "?";
}

inline TimeScheme time_scheme_from_string(const std::string& s) {
  if (s == "eigen_exact") return TimeScheme::eigen_exact;
  if (s == "backward_euler") return TimeScheme::backward_euler;
  if (s == "crank_nicolson") return TimeScheme::crank_nicolson;
  throw ConfigError("unknown time scheme '" + s + "' (eigen_exact, backward_euler, crank_nicolson)");
}

/// Output times 0 = t_0 < t_1 < ... < t_K = T and the evaluation scheme.
struct TimeGrid {
  std::vector<Real> nodes{0.0, 1.0};
  TimeScheme scheme = TimeScheme::eigen_exact;
  int min_substeps = 400;  ///< time-stepping schemes: at least this many steps per unit of t

  static TimeGrid uniform(Real T, int steps, TimeScheme scheme = TimeScheme::eigen_exact) {
    if (!(T > 0.0)) throw DomainError("final time must be positive");
    if (steps < 1) throw DomainError("time grid needs at least one step");
    TimeGrid g;
    g.scheme = scheme;
    g.nodes.resize(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) g.nodes[static_cast<std::size_t>(k)] = T * k / steps;
    return g;
  }

  /// Sorted, deduplicated node list; 0 is always included.
  static TimeGrid from_nodes(std::vector<Real> times, TimeScheme scheme = TimeScheme::eigen_exact) {
    times.push_back(0.0);
    std::sort(times.begin(), times.end());
    TimeGrid g;
    g.scheme = scheme;
    g.nodes.clear();
    for (Real t : times) {
      if (t < 0.0) throw DomainError("time nodes must be non-negative");
      if (g.nodes.empty() || t - g.nodes.back() > 1e-12 * std::max(1.0, t)) g.nodes.push_back(t);
    }
    g.validate();
    return g;
  }

  Real T() const { return nodes.back(); }
  Real dt() const {
    Real d = 0.0;
    for (std::size_t k = 1; k < nodes.size(); ++k) d = std::max(d, nodes[k] - nodes[k - 1]);
    return d;
  }

  void validate() const {
    if (nodes.size() < 2) throw DomainError("time grid needs at least two nodes");
    if (nodes.front() != 0.0) throw DomainError("time grid must start at 0");
    for (std::size_t k = 1; k < nodes.size(); ++k)
      if (!(nodes[k] > nodes[k - 1])) throw DomainError("time nodes must be strictly increasing");
  }

  /// Adds t - s for every node t >= s, so states shifted back by s are on the grid.
  TimeGrid with_shift(Real s) const {
    std::vector<Real> all = nodes;
    for (Real t : nodes)
      if (t - s >= 0.0) all.push_back(t - s);
    TimeGrid g = from_nodes(all, scheme);
    g.min_substeps = min_substeps;
    return g;
  }
};

/// Ordered (t, u(t)) pairs on one mesh.
struct Trajectory {
  std::vector<Real> times;
  std::vector<Field> states;
  std::vector<ElementField> fluxes;  ///< optional, parallel to states when filled
  std::string tag;

  void push(Real t, Field u) {
    if (!times.empty() && !(t > times.back())) throw DomainError("trajectory times must be strictly increasing");
    if (!states.empty() && u.mesh != states.front().mesh) throw DomainError("trajectory states must share one mesh");
    times.push_back(t);
    states.push_back(std::move(u));
  }

  std::size_t size() const { return times.size(); }

  /// Index of the node at time t, or -1.
  int find(Real t) const {
    const Real tol = 1e-10 * std::max(1.0, std::abs(t));
    const auto it = std::lower_bound(times.begin(), times.end(), t - tol);
    if (it != times.end() && std::abs(*it - t) <= tol) return static_cast<int>(it - times.begin());
    return -1;
  }

  const Field& at(Real t) const {
    const int k = find(t);
    if (k < 0) throw MissingNodeError("trajectory has no node at t = " + std::to_string(t));
    return states[static_cast<std::size_t>(k)];
  }

  /// CSV rows t,L2,H1[,u_0,u_1,...].
  void write_csv(std::ostream& os, bool nodal_values = false) const {
    os.precision(12);
    os << "t,L2,H1";
    if (nodal_values && !states.empty())
      for (Eigen::Index i = 0; i < states.front().values.size(); ++i) os << ",u_" << i;
    os << '\n';
    for (std::size_t k = 0; k < times.size(); ++k) {
      os << times[k] << ',' << norm(states[k], NormKind::L2) << ',' << norm(states[k], NormKind::H1);
      if (nodal_values)
        for (Eigen::Index i = 0; i < states[k].values.size(); ++i) os << ',' << states[k].values(i);
      os << '\n';
    }
  }
};

/// Right-hand side F(., t) as nodal fields on a mesh.
struct SourceTerm {
  std::function<Field(const std::shared_ptr<const Mesh>&, Real)> eval;
  bool time_constant = true;
  Real p = std::numeric_limits<Real>::infinity();  ///< exponent of the time-Lebesgue class of F

  static SourceTerm zero(int ncomp = 1) {
    SourceTerm s;
    s.eval = [ncomp](const std::shared_ptr<const Mesh>& mesh, Real) { return Field(mesh, ncomp); };
    return s;
  }

  /// F(x, t) = f(x), scalar.
  static SourceTerm stationary(std::function<Real(const Point&)> f) {
    SourceTerm s;
    s.eval = [f = std::move(f)](const std::shared_ptr<const Mesh>& mesh, Real) { return interpolate_scalar(mesh, f); };
    return s;
  }

  void validate() const {
    if (!eval) throw DomainError("source term has no evaluator");
    if (!(p >= 1.0)) throw DomainError("source exponent p must lie in [1, inf]");
  }
};

namespace detail {

/// One interval of u' = -A u + F, F constant on the interval, by time stepping.
inline Vector step_interval(const DiscreteOperator& op, const Vector& v0, const Vector& load, Real length,
                            TimeScheme scheme, int steps) {
  const Real dt = length / steps;
  Vector v = v0;
  if (scheme == TimeScheme::backward_euler) {
    const auto fac = op.shifted_factor(1.0 / dt);
    for (int k = 0; k < steps; ++k) v = fac->solve(op.M * v / dt + load);
  } else {
    const auto fac = op.shifted_factor(2.0 / dt);
    for (int k = 0; k < steps; ++k) v = fac->solve(op.M * v * (2.0 / dt) - op.K * v + 2.0 * load);
  }
  return v;
}

/// Step count refined by doubling until the result changes by less than 1%.
inline Vector step_refined(const DiscreteOperator& op, const Vector& v0, const Vector& load, Real length,
                           TimeScheme scheme, int min_steps) {
  int steps = std::max(1, min_steps);
  Vector prev = step_interval(op, v0, load, length, scheme, steps);
  for (int round = 0; round < 6; ++round) {
    steps *= 2;
    Vector next = step_interval(op, v0, load, length, scheme, steps);
    const Real scale = std::max(next.norm(), std::numeric_limits<Real>::min());
    const bool settled = (next - prev).norm() <= 0.01 * scale;
    prev = std::move(next);
    if (settled) break;
  }
  return prev;
}

inline bool use_eigen(const DiscreteOperator& op, TimeScheme scheme) {
  return scheme == TimeScheme::eigen_exact && op.has_dense_spectrum();
}

/// (1 - e^{-lambda dt}) / lambda with the lambda -> 0 limit.
inline Real duhamel_weight(Real lambda, Real dt) {
  if (std::abs(lambda * dt) < 1e-14) return dt;
  return -std::expm1(-lambda * dt) / lambda;
}

/// Modal coordinates of a free-dof vector. Kernel components (Neumann) are
/// carried separately and exactly, so the kernel part is conserved to rounding.
class ModalState {
 public:
  ModalState(const DiscreteOperator& op, const Vector& v) : op_(op), sp_(op.spectrum()) {
    q_ = op.kernel.cols();
    if (q_ > 0) {
      const Matrix mz = op.M * op.kernel;
      gram_ = (op.kernel.transpose() * mz).ldlt();
      kc_ = gram_.solve(mz.transpose() * v);
    }
    c_ = modes().transpose() * (op.M * op.project(v));
  }

  /// Advances by dt under u' = -A u + M^{-1} load (load may be empty for F = 0).
  void advance(Real dt, const Vector& load) {
    const auto lam = sp_.values.tail(c_.size());
    if (load.size() == 0) {
      c_ = ((-lam.array() * dt).exp() * c_.array()).matrix();
      return;
    }
    const Vector fhat = modes().transpose() * load;
    for (Eigen::Index j = 0; j < c_.size(); ++j)
      c_(j) = std::exp(-lam(j) * dt) * c_(j) + duhamel_weight(lam(j), dt) * fhat(j);
    if (q_ > 0) kc_ += dt * gram_.solve(op_.kernel.transpose() * load);
  }

  Vector state() const {
    Vector v = modes() * c_;
    if (q_ > 0) v = op_.project(v) + op_.kernel * kc_;
    return v;
  }

 private:
  Eigen::Block<const Matrix, Eigen::Dynamic, Eigen::Dynamic, true> modes() const { return sp_.vectors.rightCols(sp_.vectors.cols() - q_); }

  const DiscreteOperator& op_;
  const Spectrum& sp_;
  Eigen::Index q_ = 0;
  Eigen::LDLT<Matrix> gram_;
  Vector kc_;
  Vector c_;
};

}  // namespace detail

/// u(t) = e^{-A t} phi. Eigen-exact when the operator is small enough,
/// otherwise time stepping with at least min_substeps steps per unit time.
inline Field exp_apply(const DiscreteOperator& op, Real t, const Field& phi, const TimeGrid& grid = {}) {
  op.check_mesh(phi);
  if (t < 0.0) throw DomainError("time must be non-negative");
  if (t == 0.0) return phi;
  const Vector v = op.restrict(phi);
  if (detail::use_eigen(op, grid.scheme)) {
    detail::ModalState st(op, v);
    st.advance(t, Vector());
    return op.prolong(st.state());
  }
  const TimeScheme scheme = grid.scheme == TimeScheme::eigen_exact ? TimeScheme::backward_euler : grid.scheme;
  const int steps = std::max(grid.min_substeps, static_cast<int>(std::ceil(grid.min_substeps * t)));
  return op.prolong(detail::step_refined(op, v, Vector::Zero(v.size()), t, scheme, steps));
}

/// Trajectory of u' = -A u + F, u(0) = phi at every grid node. F is frozen at
/// the midpoint of each grid interval (exact for time-constant F).
inline Trajectory duhamel_solve(const DiscreteOperator& op, const Field& phi, const SourceTerm& F,
                                const TimeGrid& grid) {
  op.check_mesh(phi);
  F.validate();
  grid.validate();
  Trajectory traj;
  traj.tag = op.coefficient.label() + "/" + to_string(op.bc);
  Vector v = op.restrict(phi);
  {
    Field u0 = phi;
    traj.push(0.0, u0);
  }
  Vector cached_load;
  auto load_at = [&](Real t) -> Vector {
    if (F.time_constant && cached_load.size() > 0) return cached_load;
    Vector b = op.load(F.eval(op.mesh, t));
    if (F.time_constant) cached_load = b;
    return b;
  };

  if (detail::use_eigen(op, grid.scheme)) {
    detail::ModalState st(op, v);
    Vector load;
    for (std::size_t k = 1; k < grid.nodes.size(); ++k) {
      const Real t0 = grid.nodes[k - 1];
      const Real dt = grid.nodes[k] - t0;
      if (!F.time_constant || load.size() == 0) load = load_at(t0 + 0.5 * dt);
      st.advance(dt, load);
      traj.push(grid.nodes[k], op.prolong(st.state()));
    }
    return traj;
  }

  const TimeScheme scheme = grid.scheme == TimeScheme::eigen_exact ? TimeScheme::backward_euler : grid.scheme;
  for (std::size_t k = 1; k < grid.nodes.size(); ++k) {
    const Real t0 = grid.nodes[k - 1];
    const Real dt = grid.nodes[k] - t0;
    const int steps = std::max(1, static_cast<int>(std::ceil(grid.min_substeps * dt)));
    v = detail::step_refined(op, v, load_at(t0 + 0.5 * dt), dt, scheme, steps);
    traj.push(grid.nodes[k], op.prolong(v));
  }
  return traj;
}

/// Contour gamma = {Re zeta = vertex + |Im zeta|} traversed around the spectrum.
struct ContourSpec {
  Real vertex = 0.0;  ///< crossing point c/2 on the real axis; <= 0 selects half the spectral bound
  int nodes = 128;    ///< trapezoid nodes on the upper ray
  Real u_min = -4.0;  ///< start of the double-exponential parameter range
  Real radius = 0.0;  ///< truncation radius |zeta| at the end of the ray, filled by contour_exp_apply

  void validate() const {
    if (nodes < 16) throw DomainError("contour quadrature needs at least 16 nodes");
  }
};

namespace detail {

inline ComplexVector shifted_complex_solve(const DiscreteOperator& op, Complex zeta, const ComplexVector& rhs) {
  ComplexSparseMatrix a = op.K.cast<Complex>() - zeta * op.M.cast<Complex>();
  a.makeCompressed();
  Eigen::SparseLU<ComplexSparseMatrix> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw SingularResolventError("contour node hits the discrete spectrum");
  return lu.solve(rhs);
}

}  // namespace detail

/// e^{-A t} phi = -(2 pi i)^{-1} int_gamma e^{-zeta t} (A - zeta)^{-1} phi dzeta.
/// By conjugate symmetry this is Im(I)/pi with
/// I = int_0^inf e^{-zeta(s) t} (A - zeta(s))^{-1} phi (1 + i) ds, zeta(s) = vertex + (1 + i) s,
/// evaluated by the trapezoid rule in u after s = exp(u - e^{-u}).
inline Field contour_exp_apply(const DiscreteOperator& op, Real t, const Field& phi, ContourSpec spec = {}) {
  op.check_mesh(phi);
  spec.validate();
  if (!(t > 0.0)) throw DomainError("contour representation needs t > 0");
  const Real lam = op.lambda_min();
  const Real bound = op.is_neumann() ? lam : std::max(op.c_lower, 0.0);
  if (spec.vertex <= 0.0) spec.vertex = 0.5 * (bound > 0.0 ? std::min(bound, lam) : lam);
  if (spec.vertex >= lam)
    throw DomainError("contour vertex " + std::to_string(spec.vertex) + " is not left of the spectrum (lambda_min = " +
                      std::to_string(lam) + ")");

  Vector v = op.restrict(phi);
  Vector kernel_part = Vector::Zero(v.size());
  if (op.is_neumann()) {
    const Vector pv = op.project(v);
    kernel_part = v - pv;
    v = pv;
  }
  const ComplexVector rhs = (op.M * v).cast<Complex>();

  const Real s_max = std::max(14.0 * std::log(10.0) / t - spec.vertex, 1.0);
  // u_max solves u - e^{-u} = ln s_max.
  Real u_max = std::log(s_max);
  for (int it = 0; it < 50; ++it) {
    const Real fval = u_max - std::exp(-u_max) - std::log(s_max);
    u_max -= fval / (1.0 + std::exp(-u_max));
  }
  const Complex dir(1.0, 1.0);
  spec.radius = std::abs(spec.vertex + dir * s_max);
  const int n = spec.nodes;
  const Real du = (u_max - spec.u_min) / (n - 1);
  ComplexVector acc = ComplexVector::Zero(v.size());
  for (int k = 0; k < n; ++k) {
    const Real u = spec.u_min + k * du;
    const Real s = std::exp(u - std::exp(-u));
    const Real ds = s * (1.0 + std::exp(-u));
    const Real w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
    const Complex zeta = spec.vertex + dir * s;
    const ComplexVector x = detail::shifted_complex_solve(op, zeta, rhs);
    acc += (w * du * ds) * std::exp(-zeta * t) * dir * x;
  }
  const Vector out = acc.imag() / std::numbers::pi + kernel_part;
  return op.prolong(out);
}

/// w_eps(t) = e^{-A0 eps^2} u0(t - eps^2) for t >= eps^2 and 0 before.
inline Field shifted_state(const DiscreteOperator& a_eff, const Trajectory& u0, Real eps, Real t,
                           const TimeGrid& grid = {}) {
  const Real s = eps * eps;
  if (u0.states.empty()) throw MissingNodeError("empty effective trajectory");
  if (t < s) {
    Field z(u0.states.front().mesh, u0.states.front().ncomp);
    z.boundary = a_eff.bc;
    return z;
  }
  return exp_apply(a_eff, s, u0.at(t - s), grid);
}

}  // namespace homog
