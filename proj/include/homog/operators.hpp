#pragma once

#include <homog/coefficient.hpp>
#include <homog/field.hpp>
#include <homog/symbol.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <memory>
#include <mutex>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace homog {

/// Either g(x/eps) or the constant effective matrix g0.
struct OperatorCoefficient {
  enum class Kind { oscillating, effective };
  Kind kind = Kind::effective;
  std::shared_ptr<const PeriodicCoefficient> g;
  Real eps = 0.0;
  Matrix g0;

  static OperatorCoefficient oscillating(const PeriodicCoefficient& g, Real eps) {
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    OperatorCoefficient c;
    c.kind = Kind::oscillating;
    c.g = std::make_shared<const PeriodicCoefficient>(g);
    c.eps = eps;
    return c;
  }
  static OperatorCoefficient effective(const Matrix& g0) {
    OperatorCoefficient c;
    c.kind = Kind::effective;
    c.g0 = 0.5 * (g0 + g0.transpose());
    return c;
  }

  bool is_oscillating() const { return kind == Kind::oscillating; }
  int m() const { return is_oscillating() ? g->m() : static_cast<int>(g0.rows()); }

  Matrix at(const Point& x) const { return is_oscillating() ? g->eval(x / eps) : g0; }

  /// ||g^{-1}||^{-1} and ||g|| (sup over the cell for oscillating coefficients).
  std::pair<Real, Real> bounds() const {
    if (is_oscillating()) return {1.0 / g->norm_inv_sup(), g->norm_sup()};
    return eigen_range(g0);
  }

  std::string label() const {
    return is_oscillating() ? "oscillating(eps=" + std::to_string(eps) + ")" : std::string("effective");
  }
};

struct OperatorOptions {
  bool lumped_mass = false;
  int min_cells_per_eps = 16;  ///< resolution rule h <= eps / min_cells_per_eps
  int dense_limit = 4000;      ///< largest dimension for the dense eigendecomposition
};

/// Generalized eigenpairs K v = lambda M v with M-orthonormal eigenvectors.
struct Spectrum {
  Vector values;
  Matrix vectors;
};

/// Discrete Dirichlet or Neumann operator on a mesh. Dirichlet boundary nodes
/// are eliminated, so K and M act on the free dofs (free node * n + c).
class DiscreteOperator {
 public:
  std::shared_ptr<const Mesh> mesh;
  DifferentialSymbol symbol;
  OperatorCoefficient coefficient;
  BoundaryKind bc = BoundaryKind::dirichlet;
  OperatorOptions options;
  SparseMatrix K;
  SparseMatrix M;
  SparseMatrix M_full;             ///< mass on all nodes, used for load vectors
  std::vector<int> free_index;     ///< node -> free node index, -1 on eliminated nodes
  std::vector<Matrix> g_element;   ///< coefficient on each element
  Matrix kernel;                   ///< Neumann: dofs x q basis of Ker b(D); empty for Dirichlet
  Real c_lower = 0.0;              ///< analytic lower bound c0 (diam O)^{-2} (Dirichlet)
  Real c0 = 0.0;
  Real c1 = 0.0;

  int n() const { return symbol.n(); }
  Eigen::Index dim() const { return K.rows(); }
  bool is_neumann() const { return bc == BoundaryKind::neumann; }

  /// Free-dof vector of a nodal field; eliminated boundary values are dropped.
  Vector restrict(const Field& u) const {
    check_mesh(u);
    Vector r(dim());
    const int nc = n();
    for (int i = 0; i < mesh->node_count(); ++i) {
      const int f = free_index[static_cast<std::size_t>(i)];
      if (f >= 0) r.segment(static_cast<Eigen::Index>(f) * nc, nc) = u.at_node(i);
    }
    return r;
  }

  template <class Scalar>
  BasicField<Scalar> prolong(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) const {
    BasicField<Scalar> u;
    u.mesh = mesh;
    u.ncomp = n();
    u.boundary = bc;
    u.values = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(static_cast<Eigen::Index>(mesh->node_count()) * n());
    for (int i = 0; i < mesh->node_count(); ++i) {
      const int f = free_index[static_cast<std::size_t>(i)];
      if (f >= 0) u.values.segment(static_cast<Eigen::Index>(i) * n(), n()) = v.segment(static_cast<Eigen::Index>(f) * n(), n());
    }
    return u;
  }
  Field prolong(const Vector& v) const { return prolong<Real>(v); }

  /// Load vector (v, phi_i) on the free dofs.
  Vector load(const Field& f) const {
    check_mesh(f);
    const Vector full = M_full * f.values;
    Vector r(dim());
    const int nc = n();
    for (int i = 0; i < mesh->node_count(); ++i) {
      const int fi = free_index[static_cast<std::size_t>(i)];
      if (fi >= 0) r.segment(static_cast<Eigen::Index>(fi) * nc, nc) = full.segment(static_cast<Eigen::Index>(i) * nc, nc);
    }
    return r;
  }

  /// M-orthogonal projection onto the complement of the kernel (identity for Dirichlet).
  Vector project(const Vector& v) const {
    if (kernel.cols() == 0) return v;
    const Matrix mz = M * kernel;
    const Vector coeff = (kernel.transpose() * mz).ldlt().solve(mz.transpose() * v);
    return v - kernel * coeff;
  }

  bool has_dense_spectrum() const { return dim() <= options.dense_limit; }

  /// Full generalized eigendecomposition, computed once and shared by copies.
  const Spectrum& spectrum() const {
    if (!has_dense_spectrum())
      throw SolverError("operator dimension " + std::to_string(dim()) + " exceeds the dense eigensolver limit " +
                        std::to_string(options.dense_limit));
    std::call_once(cache_->spectrum_once, [this] {
      const Matrix kd(K);
      const Matrix md(M);
      Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(kd, md);
      if (es.info() != Eigen::Success) throw SolverError("generalized eigensolver failed");
      cache_->spectrum.values = es.eigenvalues();
      cache_->spectrum.vectors = es.eigenvectors();
      if (is_neumann())
        for (Eigen::Index k = 0; k < kernel.cols(); ++k) cache_->spectrum.values(k) = 0.0;
    });
    return cache_->spectrum;
  }

  /// Smallest eigenvalue for Dirichlet, first nonzero eigenvalue for Neumann.
  Real lambda_min() const {
    std::call_once(cache_->lambda_once, [this] {
      if (has_dense_spectrum())
        cache_->lambda_min = spectrum().values(kernel.cols());
      else
        cache_->lambda_min = inverse_iteration();
    });
    return cache_->lambda_min;
  }

  /// LDLT of K + shift M, cached per shift value.
  std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> shifted_factor(Real shift) const {
    std::lock_guard<std::mutex> lock(cache_->factor_mutex);
    for (const auto& [s, f] : cache_->factors)
      if (s == shift) return f;
    SparseMatrix a = K + shift * M;
    auto f = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(a);
    if (f->info() != Eigen::Success) throw SolverError("LDLT factorization of K + s M failed");
    cache_->factors.emplace_back(shift, f);
    return f;
  }

  void check_mesh(const Field& u) const {
    if (u.mesh != mesh) throw DomainError("field does not live on the operator's mesh");
    if (u.ncomp != n()) throw DomainError("field has the wrong number of components");
  }

 private:
  struct Cache {
    std::once_flag spectrum_once;
    Spectrum spectrum;
    std::once_flag lambda_once;
    Real lambda_min = 0.0;
    std::mutex factor_mutex;
    std::vector<std::pair<Real, std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>>>> factors;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();

  Real inverse_iteration() const {
    // Smallest eigenvalue of K + M on the kernel complement, minus the shift.
    const Real shift = 1.0;
    const auto fac = shifted_factor(shift);
    std::mt19937 rng(7);
    std::normal_distribution<Real> normal;
    Vector v(dim());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
    v = project(v);
    Real mu = 0.0;
    for (int it = 0; it < 2000; ++it) {
      v /= std::sqrt(v.dot(M * v));
      Vector w = project(fac->solve(M * v));
      const Real mu_new = v.dot((K + shift * M) * v);
      v = w;
      if (it > 5 && std::abs(mu_new - mu) <= 1e-12 * std::abs(mu_new)) {
        mu = mu_new;
        break;
      }
      mu = mu_new;
    }
    return mu - shift;
  }
};

namespace detail {
inline void add_block(std::vector<Triplet>& trips, Eigen::Index r, Eigen::Index c, const Matrix& blk) {
  for (Eigen::Index i = 0; i < blk.rows(); ++i)
    for (Eigen::Index j = 0; j < blk.cols(); ++j)
      if (blk(i, j) != 0.0) trips.emplace_back(r + i, c + j, blk(i, j));
}
}  // namespace detail

/// Stiffness int <g b(D)u, b(D)v> and mass on the mesh, with the coefficient
/// sampled at the midpoint of each grid square.
inline DiscreteOperator assemble_operator(const OperatorCoefficient& coef, const DifferentialSymbol& b, BoundaryKind bc,
                                          std::shared_ptr<const Mesh> mesh, const OperatorOptions& opt = {}) {
  if (b.dimension() != mesh->dimension()) throw DomainError("symbol dimension does not match the mesh");
  if (b.m() != coef.m()) throw EllipticityError("coefficient size does not match the symbol");
  if (coef.is_oscillating()) {
    const Real ratio = coef.eps / mesh->h();
    if (ratio < opt.min_cells_per_eps - 1e-9)
      throw ResolutionError("mesh size " + std::to_string(mesh->h()) + " is too coarse for eps = " +
                            std::to_string(coef.eps) + "; need h <= eps/" + std::to_string(opt.min_cells_per_eps));
  }
  const int nc = b.n();
  if (bc == BoundaryKind::neumann && nc > 1)
    throw DomainError("Neumann problems are supported for scalar unknowns only (kernel = constants)");

  DiscreteOperator op;
  op.mesh = mesh;
  op.symbol = b;
  op.coefficient = coef;
  op.bc = bc;
  op.options = opt;

  const int nodes = mesh->node_count();
  op.free_index.assign(static_cast<std::size_t>(nodes), -1);
  int free = 0;
  for (int i = 0; i < nodes; ++i)
    if (bc == BoundaryKind::neumann || !mesh->is_boundary(i)) op.free_index[static_cast<std::size_t>(i)] = free++;
  const Eigen::Index dofs = static_cast<Eigen::Index>(free) * nc;
  const Eigen::Index full_dofs = static_cast<Eigen::Index>(nodes) * nc;

  std::vector<Triplet> kt;
  std::vector<Triplet> mt;
  std::vector<Triplet> mft;
  const Matrix id = Matrix::Identity(nc, nc);
  op.g_element.reserve(mesh->elements().size());
  for (const auto& el : mesh->elements()) {
    const Matrix ge = coef.at(mesh->square_midpoint(el.square));
    op.g_element.push_back(ge);
    std::vector<Matrix> bs;
    for (int a = 0; a < el.vertex_count; ++a) bs.push_back(b.at(el.grad.col(a)));
    const Matrix mloc = p1_local_mass(el.vertex_count, el.measure);
    for (int a = 0; a < el.vertex_count; ++a) {
      const int na = el.vertex[static_cast<std::size_t>(a)];
      const int fa = op.free_index[static_cast<std::size_t>(na)];
      for (int c = 0; c < el.vertex_count; ++c) {
        const int ncv = el.vertex[static_cast<std::size_t>(c)];
        const int fc = op.free_index[static_cast<std::size_t>(ncv)];
        const Real mass = opt.lumped_mass ? (a == c ? el.measure / el.vertex_count : 0.0) : mloc(a, c);
        detail::add_block(mft, static_cast<Eigen::Index>(na) * nc, static_cast<Eigen::Index>(ncv) * nc, mass * id);
        if (fa < 0 || fc < 0) continue;
        const Eigen::Index ra = static_cast<Eigen::Index>(fa) * nc;
        const Eigen::Index rc = static_cast<Eigen::Index>(fc) * nc;
        detail::add_block(kt, ra, rc,
                          el.measure * bs[static_cast<std::size_t>(a)].transpose() * ge * bs[static_cast<std::size_t>(c)]);
        detail::add_block(mt, ra, rc, mass * id);
      }
    }
  }
  op.K.resize(dofs, dofs);
  op.K.setFromTriplets(kt.begin(), kt.end());
  op.M.resize(dofs, dofs);
  op.M.setFromTriplets(mt.begin(), mt.end());
  op.M_full.resize(full_dofs, full_dofs);
  op.M_full.setFromTriplets(mft.begin(), mft.end());
  // Exact symmetry regardless of summation order.
  op.K = SparseMatrix(0.5 * (op.K + SparseMatrix(op.K.transpose())));
  op.K.makeCompressed();
  op.M.makeCompressed();
  op.M_full.makeCompressed();

  const auto [glo, ghi] = coef.bounds();
  op.c0 = b.alpha0 * glo;
  op.c1 = b.alpha1 * ghi;
  const Real diam = mesh->domain().diameter();
  op.c_lower = bc == BoundaryKind::dirichlet ? op.c0 / (diam * diam) : 0.0;
  if (bc == BoundaryKind::neumann) op.kernel = Matrix::Ones(dofs, 1);
  return op;
}

/// Operator with prescribed K and M on the interior nodes of a synthetic 1D
/// Dirichlet mesh; for algebraic checks of the semigroup routines.
inline DiscreteOperator matrix_operator(const SparseMatrix& k, const SparseMatrix& m) {
  if (k.rows() != k.cols() || m.rows() != k.rows() || k.rows() < 1) throw DomainError("K and M must be square and equal-sized");
  DomainSpec dom;
  const auto mesh = build_mesh(dom, 1.0 / static_cast<Real>(k.rows() + 1));
  DiscreteOperator op = assemble_operator(OperatorCoefficient::effective(Matrix::Identity(1, 1)), gradient_symbol(1),
                                          BoundaryKind::dirichlet, mesh);
  op.K = k;
  op.M = m;
  op.c_lower = 0.0;
  return op;
}

/// Unit-coefficient full-gradient stiffness sum_c int |grad u_c|^2 on the
/// operator's free dofs.
inline SparseMatrix unit_stiffness(const DiscreteOperator& op) {
  const int nc = op.n();
  std::vector<Triplet> trips;
  for (const auto& el : op.mesh->elements())
    for (int a = 0; a < el.vertex_count; ++a)
      for (int c = 0; c < el.vertex_count; ++c) {
        const int fa = op.free_index[static_cast<std::size_t>(el.vertex[static_cast<std::size_t>(a)])];
        const int fc = op.free_index[static_cast<std::size_t>(el.vertex[static_cast<std::size_t>(c)])];
        if (fa < 0 || fc < 0) continue;
        const Real v = el.measure * el.grad.col(a).dot(el.grad.col(c));
        for (int k = 0; k < nc; ++k)
          trips.emplace_back(static_cast<Eigen::Index>(fa) * nc + k, static_cast<Eigen::Index>(fc) * nc + k, v);
      }
  SparseMatrix k1(op.dim(), op.dim());
  k1.setFromTriplets(trips.begin(), trips.end());
  return k1;
}

/// u = (A - zeta)^{-1} f, i.e. (K - zeta M) u = (f, phi_i). Throws
/// SingularResolventError when zeta is (numerically) in the discrete spectrum.
inline ComplexField resolvent_apply(const DiscreteOperator& op, Complex zeta, const Field& f) {
  const Vector rhs = op.load(f);
  const ComplexVector crhs = rhs.cast<Complex>();
  ComplexSparseMatrix a = op.K.cast<Complex>() - zeta * op.M.cast<Complex>();
  a.makeCompressed();
  Eigen::SparseLU<ComplexSparseMatrix> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success)
    throw SingularResolventError("K - zeta M is singular at zeta = (" + std::to_string(zeta.real()) + ", " +
                                 std::to_string(zeta.imag()) + ")");

  // Condition estimate ||A||_1 * max ||A^{-1} x|| / ||x|| over a few probes.
  Real norm_a = 0.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    Real s = 0.0;
    for (ComplexSparseMatrix::InnerIterator it(a, k); it; ++it) s += std::abs(it.value());
    norm_a = std::max(norm_a, s);
  }
  std::mt19937 rng(11);
  std::normal_distribution<Real> normal;
  Real inv_norm = 0.0;
  for (int probe = 0; probe < 2; ++probe) {
    ComplexVector x(a.rows());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    if (op.is_neumann() && probe == 1) x = op.M.cast<Complex>() * op.kernel.col(0).cast<Complex>();
    const ComplexVector y = lu.solve(x);
    inv_norm = std::max(inv_norm, y.norm() / x.norm());
  }
  const Real cond = norm_a * inv_norm;
  if (!std::isfinite(cond) || cond > 1e12)
    throw SingularResolventError("zeta lies in the discrete spectrum (condition estimate " + std::to_string(cond) + ")");

  ComplexVector u = lu.solve(crhs);
  const Real rn = std::max(rhs.norm(), std::numeric_limits<Real>::min());
  for (int refine = 0; refine < 3; ++refine) {
    const ComplexVector r = crhs - a * u;
    if (r.norm() <= 1e-10 * rn) break;
    u += lu.solve(r);
  }
  if ((crhs - a * u).norm() > 1e-10 * rn)
    throw SolverError("resolvent residual exceeds 1e-10 (condition estimate " + std::to_string(cond) + ")");
  return op.prolong<Complex>(u);
}

/// Real zeta below the spectrum: real arithmetic through a cached LDLT.
inline Field resolvent_apply_real(const DiscreteOperator& op, Real zeta, const Field& f) {
  const Vector rhs = op.load(f);
  if (op.is_neumann() && std::abs(zeta) <= 1e-12 * std::max(1.0, op.c1))
    throw SingularResolventError("zeta = 0 hits the Neumann kernel (constants)");
  const auto fac = op.shifted_factor(-zeta);
  if (!fac->vectorD().allFinite() || (fac->vectorD().array() <= 0.0).any()) {
    // zeta above the bottom of the spectrum: indefinite, use the LU route.
    const ComplexField z = resolvent_apply(op, Complex(zeta, 0.0), f);
    return Field(op.mesh, op.n(), z.values.real(), op.bc);
  }
  Vector u = fac->solve(rhs);
  const SparseMatrix a = op.K - zeta * op.M;
  for (int refine = 0; refine < 3; ++refine) {
    const Vector r = rhs - a * u;
    if (r.norm() <= 1e-10 * rhs.norm()) break;
    u += fac->solve(r);
  }
  if ((rhs - a * u).norm() > 1e-10 * std::max(rhs.norm(), std::numeric_limits<Real>::min()))
    throw SolverError("resolvent residual exceeds 1e-10");
  return op.prolong(u);
}

/// v minus its M-orthogonal projection onto the kernel basis.
inline Field kernel_projection(const DiscreteOperator& op, const Field& v) {
  if (!op.is_neumann()) throw DomainError("kernel projection requires a Neumann operator");
  op.check_mesh(v);
  const Vector z = op.kernel.col(0);
  const Real mean = z.dot(op.M * v.values) / z.dot(op.M * z);
  Field out = v;
  for (Eigen::Index i = 0; i < out.values.size(); ++i) out.values(i) -= mean;
  out.boundary = BoundaryKind::neumann;
  return out;
}

/// Integral of u over O divided by |O|.
inline Vector field_mean(const Field& u) {
  Vector acc = Vector::Zero(u.ncomp);
  Real vol = 0.0;
  for (const auto& el : u.mesh->elements()) {
    for (int a = 0; a < el.vertex_count; ++a)
      acc += el.measure / el.vertex_count * u.at_node(el.vertex[static_cast<std::size_t>(a)]);
    vol += el.measure;
  }
  return acc / vol;
}

enum class NormKind { L2, H1, L2_interior, H1_interior };

/// Element-wise norms: L2 with the consistent P1 mass, H1 adds the
/// full-gradient seminorm; interior kinds keep elements inside O'.
template <class Scalar>
Real norm(const BasicField<Scalar>& u, NormKind kind, Real delta = 0.0) {
  const bool interior = kind == NormKind::L2_interior || kind == NormKind::H1_interior;
  const bool grad = kind == NormKind::H1 || kind == NormKind::H1_interior;
  std::vector<bool> mask;
  if (interior) mask = u.mesh->interior_element_mask(delta);
  Real acc = 0.0;
  const auto& els = u.mesh->elements();
  for (std::size_t e = 0; e < els.size(); ++e) {
    if (interior && !mask[e]) continue;
    const auto& el = els[e];
    const Matrix mloc = p1_local_mass(el.vertex_count, el.measure);
    for (int c = 0; c < u.ncomp; ++c) {
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1> loc(el.vertex_count);
      for (int a = 0; a < el.vertex_count; ++a)
        loc(a) = u.values(static_cast<Eigen::Index>(el.vertex[static_cast<std::size_t>(a)]) * u.ncomp + c);
      acc += std::real(loc.dot(mloc.template cast<Scalar>() * loc));
      if (grad) acc += el.measure * (el.grad.template cast<Scalar>() * loc).squaredNorm();
    }
  }
  return std::sqrt(std::max(acc, 0.0));
}

/// L2 norm of an element-wise constant field, optionally restricted to O'.
inline Real norm(const ElementField& p, bool interior = false, Real delta = 0.0) {
  std::vector<bool> mask;
  if (interior) mask = p.mesh->interior_element_mask(delta);
  Real acc = 0.0;
  const auto& els = p.mesh->elements();
  for (std::size_t e = 0; e < els.size(); ++e) {
    if (interior && !mask[e]) continue;
    acc += els[e].measure * p.values.col(static_cast<Eigen::Index>(e)).squaredNorm();
  }
  return std::sqrt(acc);
}

/// Matrix in coordinate text format, one "row col value" triple per line.
inline void write_coordinate(std::ostream& os, const SparseMatrix& a) {
  os.precision(17);
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace homog
