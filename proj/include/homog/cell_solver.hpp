#pragma once

#include <homog/coefficient.hpp>
#include <homog/linear_algebra.hpp>
#include <homog/p1.hpp>
#include <homog/symbol.hpp>

#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace homog {

/// Uniform periodic triangulation of the cell in fractional coordinates.
/// Nodes i/R (1D) or (i/R, j/R) with index i + R j; square (i,j) holds the
/// lower triangle 2s and the upper triangle 2s+1, s = i + R j.
class CellGrid {
 public:
  CellGrid(const LatticeSpec& lattice, int resolution) : lattice_(lattice), resolution_(resolution) {
    const int d = lattice.dimension;
    const int r = resolution;
    const Real h = 1.0 / r;
    if (d == 1) {
      nodes_ = r;
      for (int i = 0; i < r; ++i) {
        P1Element e;
        e.vertex_count = 2;
        e.vertex = {i, (i + 1) % r, 0};
        e.grad.resize(1, 2);
        e.grad << -1.0 / h, 1.0 / h;
        e.grad = lattice.dual_basis * e.grad;
        e.measure = h * lattice.cell_volume;
        e.square = i;
        e.centroid = Point::Constant(1, (i + 0.5) * h);
        elements_.push_back(std::move(e));
      }
      return;
    }
    nodes_ = r * r;
    auto id = [r](int i, int j) { return (i % r) + r * (j % r); };
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < r; ++i)
        for (int upper = 0; upper < 2; ++upper) {
          P1Element e;
          e.vertex_count = 3;
          if (!upper)
            e.vertex = {id(i, j), id(i + 1, j), id(i + 1, j + 1)};
          else
            e.vertex = {id(i, j), id(i + 1, j + 1), id(i, j + 1)};
          e.grad = lattice.dual_basis * triangle_reference_gradients(upper != 0, h, h);
          e.measure = 0.5 * h * h * lattice.cell_volume;
          e.square = i + r * j;
          e.centroid = Point(2);
          if (!upper)
            e.centroid << (i + 2.0 / 3.0) * h, (j + 1.0 / 3.0) * h;
          else
            e.centroid << (i + 1.0 / 3.0) * h, (j + 2.0 / 3.0) * h;
          elements_.push_back(std::move(e));
        }
  }

  const LatticeSpec& lattice() const { return lattice_; }
  int resolution() const { return resolution_; }
  int node_count() const { return nodes_; }
  const std::vector<P1Element>& elements() const { return elements_; }

  /// Fractional midpoint of the square an element belongs to.
  Point square_midpoint(int square) const {
    const int r = resolution_;
    Point tau(lattice_.dimension);
    tau(0) = ((square % r) + 0.5) / r;
    if (lattice_.dimension == 2) tau(1) = ((square / r) + 0.5) / r;
    return tau;
  }

  /// Element containing the fractional point tau (wrapped) and the barycentric
  /// weights of its vertices.
  std::pair<int, std::array<Real, 3>> locate(const Point& tau) const {
    const int r = resolution_;
    const Real s0 = PeriodicCoefficient::frac(tau(0)) * r;
    int i = std::min(static_cast<int>(std::floor(s0)), r - 1);
    const Real u = s0 - i;
    if (lattice_.dimension == 1) return {i, {1.0 - u, u, 0.0}};
    const Real s1 = PeriodicCoefficient::frac(tau(1)) * r;
    int j = std::min(static_cast<int>(std::floor(s1)), r - 1);
    const Real v = s1 - j;
    const auto [upper, w] = triangle_locate(u, v);
    return {2 * (i + r * j) + (upper ? 1 : 0), w};
  }

 private:
  LatticeSpec lattice_;
  int resolution_ = 0;
  int nodes_ = 0;
  std::vector<P1Element> elements_;
};

/// Solution of the periodic cell problem and the derived matrices.
struct CellSolution {
  std::shared_ptr<const CellGrid> grid;
  int n = 1;
  int m = 1;
  Matrix lambda;                 ///< (nodes * n) x m, column k is the k-th column of Lambda
  std::vector<Matrix> g_tilde;   ///< per element, m x m
  std::vector<Matrix> g_element; ///< coefficient used on each element
  Matrix g_eff;
  Matrix g_bar;
  Matrix g_under;
  Real lambda_h1 = 0.0;
  Real lambda_mean = 0.0;        ///< largest |mean| of a Lambda entry over the cell
  Real M_bound = 0.0;
  Real residual = 0.0;           ///< worst relative residual over the m columns
  int resolution = 0;
  std::string method;

  /// Lambda (n x m) at fractional coordinates, P1 interpolation.
  Matrix lambda_at_fractional(const Point& tau) const {
    const auto [e, w] = grid->locate(tau);
    const auto& el = grid->elements()[static_cast<std::size_t>(e)];
    Matrix out = Matrix::Zero(n, m);
    for (int a = 0; a < el.vertex_count; ++a) {
      const Eigen::Index node = el.vertex[static_cast<std::size_t>(a)];
      out += w[static_cast<std::size_t>(a)] * lambda.middleRows(node * n, n);
    }
    return out;
  }
  Matrix lambda_at(const Point& y) const { return lambda_at_fractional(grid->lattice().to_fractional(y)); }

  /// g~ (m x m) at fractional coordinates, constant per element.
  const Matrix& g_tilde_at_fractional(const Point& tau) const {
    return g_tilde[static_cast<std::size_t>(grid->locate(tau).first)];
  }
  const Matrix& g_tilde_at(const Point& y) const { return g_tilde_at_fractional(grid->lattice().to_fractional(y)); }

  /// ||g~ - g0||_{L2(cell)} (Frobenius pointwise).
  Real g_tilde_deviation() const {
    Real acc = 0.0;
    for (std::size_t e = 0; e < g_tilde.size(); ++e)
      acc += grid->elements()[e].measure * (g_tilde[e] - g_eff).squaredNorm();
    return std::sqrt(acc);
  }
};

struct CellSolverOptions {
  Real tolerance = 1e-12;
  int direct_max_resolution = 64;  ///< bordered direct solve at or below this resolution
  int max_iterations = 0;          ///< 0 selects 20 * dofs
};

/// M = (|Omega| (1 + (2 r0)^{-2}) m alpha0^{-1} ||g|| ||g^{-1}||)^{1/2}.
inline Real lambda_bound_constant(const PeriodicCoefficient& g, const DifferentialSymbol& b) {
  const auto& lat = g.lattice();
  return std::sqrt(lat.cell_volume * (1.0 + 1.0 / std::pow(2.0 * lat.r0, 2)) * g.m() / b.alpha0 * g.norm_sup() *
                   g.norm_inv_sup());
}

/// Solves b(D)^* g (b(D) Lambda + 1_m) = 0 on the periodic P1 space with zero
/// mean, then assembles g~ = g (b(D) Lambda + 1_m) and g0 = |Omega|^{-1} int g~.
inline CellSolution solve_cell_problem(const PeriodicCoefficient& g, const DifferentialSymbol& b, int resolution,
                                       const CellSolverOptions& opt = {}) {
  const auto& lat = g.lattice();
  const int d = lat.dimension;
  if (resolution < 8) throw DomainError("cell resolution must be >= 8");
  if (b.dimension() != d) throw EllipticityError("symbol dimension does not match the lattice");
  if (b.m() != g.m()) throw EllipticityError("symbol has m = " + std::to_string(b.m()) +
                                             " rows but the coefficient is " + std::to_string(g.m()) + "x" +
                                             std::to_string(g.m()));
  if (!(b.alpha0 > 0.0)) throw EllipticityError("symbol is not elliptic");

  auto grid = std::make_shared<const CellGrid>(lat, resolution);
  const int n = b.n();
  const int m = b.m();
  const Eigen::Index dofs = static_cast<Eigen::Index>(grid->node_count()) * n;

  CellSolution sol;
  sol.grid = grid;
  sol.n = n;
  sol.m = m;
  sol.resolution = resolution;

  // B_a = sum_l (grad phi_a)_l b_l for each element vertex.
  auto vertex_symbols = [&](const P1Element& el) {
    std::vector<Matrix> bs;
    for (int a = 0; a < el.vertex_count; ++a) bs.push_back(b.at(el.grad.col(a)));
    return bs;
  };

  std::vector<Triplet> trips;
  Matrix rhs = Matrix::Zero(dofs, m);
  sol.g_element.reserve(grid->elements().size());
  for (const auto& el : grid->elements()) {
    const Matrix ge = g.eval_fractional(grid->square_midpoint(el.square));
    sol.g_element.push_back(ge);
    const auto bs = vertex_symbols(el);
    for (int a = 0; a < el.vertex_count; ++a) {
      const Eigen::Index ra = static_cast<Eigen::Index>(el.vertex[static_cast<std::size_t>(a)]) * n;
      for (int c = 0; c < el.vertex_count; ++c) {
        const Eigen::Index rc = static_cast<Eigen::Index>(el.vertex[static_cast<std::size_t>(c)]) * n;
        const Matrix blk = el.measure * bs[static_cast<std::size_t>(a)].transpose() * ge * bs[static_cast<std::size_t>(c)];
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) trips.emplace_back(ra + i, rc + j, blk(i, j));
      }
      rhs.middleRows(ra, n) -= el.measure * bs[static_cast<std::size_t>(a)].transpose() * ge;
    }
  }
  SparseMatrix k(dofs, dofs);
  k.setFromTriplets(trips.begin(), trips.end());
  k.makeCompressed();

  const bool direct = resolution <= opt.direct_max_resolution;
  sol.lambda = Matrix::Zero(dofs, m);
  if (direct) {
    sol.lambda = bordered_direct_solve(k, rhs, n);
    sol.method = "direct";
  } else {
    sol.method = "cg";
    const int max_iter = opt.max_iterations > 0 ? opt.max_iterations : static_cast<int>(20 * dofs);
    for (int col = 0; col < m; ++col) {
      const auto res = projected_cg(k, rhs.col(col), n, opt.tolerance, max_iter);
      if (!res.converged) {
        warn("cell CG did not converge (relative residual " + std::to_string(res.relative_residual) +
             "); falling back to the bordered direct solve");
        sol.lambda = bordered_direct_solve(k, rhs, n);
        sol.method = "direct";
        break;
      }
      sol.lambda.col(col) = res.x;
    }
  }

  for (int col = 0; col < m; ++col) {
    const Real fn = rhs.col(col).norm();
    const Real rn = (k * sol.lambda.col(col) - rhs.col(col)).norm();
    const Real rel = fn > 0.0 ? rn / fn : rn;
    sol.residual = std::max(sol.residual, rel);
  }
  if (sol.residual > 1e-10)
    throw SolverError("cell problem residual " + std::to_string(sol.residual) + " exceeds 1e-10");

  // g~, g0, Voigt-Reuss means on the same element quadrature.
  sol.g_eff = Matrix::Zero(m, m);
  sol.g_bar = Matrix::Zero(m, m);
  Matrix inv_mean = Matrix::Zero(m, m);
  const Matrix id = Matrix::Identity(m, m);
  sol.g_tilde.reserve(grid->elements().size());
  Real h1_sq = 0.0;
  for (std::size_t e = 0; e < grid->elements().size(); ++e) {
    const auto& el = grid->elements()[e];
    const auto bs = vertex_symbols(el);
    Matrix bl = Matrix::Zero(m, m);
    for (int a = 0; a < el.vertex_count; ++a) {
      const Eigen::Index ra = static_cast<Eigen::Index>(el.vertex[static_cast<std::size_t>(a)]) * n;
      bl += bs[static_cast<std::size_t>(a)] * sol.lambda.middleRows(ra, n);
    }
    const Matrix& ge = sol.g_element[e];
    sol.g_tilde.push_back(ge * (bl + id));
    sol.g_eff += el.measure * sol.g_tilde.back();
    sol.g_bar += el.measure * ge;
    inv_mean += el.measure * ge.inverse();

    // ||Lambda||_{H1}: consistent mass plus full-gradient stiffness, all entries.
    const Matrix mloc = p1_local_mass(el.vertex_count, el.measure);
    for (int col = 0; col < m; ++col)
      for (int c = 0; c < n; ++c) {
        Vector loc(el.vertex_count);
        for (int a = 0; a < el.vertex_count; ++a)
          loc(a) = sol.lambda(static_cast<Eigen::Index>(el.vertex[static_cast<std::size_t>(a)]) * n + c, col);
        const Vector grad = el.grad * loc;
        h1_sq += loc.dot(mloc * loc) + el.measure * grad.squaredNorm();
      }
  }
  sol.g_eff /= lat.cell_volume;
  sol.g_bar /= lat.cell_volume;
  sol.g_under = (inv_mean / lat.cell_volume).inverse();
  sol.lambda_h1 = std::sqrt(h1_sq);

  // Nodes carry equal weight on the uniform periodic grid.
  for (int col = 0; col < m; ++col)
    for (int c = 0; c < n; ++c) {
      Real s = 0.0;
      for (int a = 0; a < grid->node_count(); ++a) s += sol.lambda(static_cast<Eigen::Index>(a) * n + c, col);
      sol.lambda_mean = std::max(sol.lambda_mean, std::abs(s) / grid->node_count());
    }
  sol.M_bound = lambda_bound_constant(g, b);
  return sol;
}

/// (g_under, g_bar) by quadrature over the coefficient samples.
inline std::pair<Matrix, Matrix> voigt_reuss(const PeriodicCoefficient& g) {
  return {g.mean_inverse().inverse(), g.mean()};
}

struct SpecialCaseReport {
  bool effective_equals_bar = false;
  bool effective_equals_under = false;
  Real distance_bar = 0.0;
  Real distance_under = 0.0;
  /// Consequences that must accompany each identity.
  bool lambda_vanishes = true;
  bool g_tilde_constant = true;

  std::string label() const {
    if (effective_equals_bar && effective_equals_under) return "effective_equals_bar+effective_equals_under";
    if (effective_equals_bar) return "effective_equals_bar";
    if (effective_equals_under) return "effective_equals_under";
    return "generic";
  }
  bool consistent() const { return lambda_vanishes && g_tilde_constant; }
};

inline Real spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

inline SpecialCaseReport classify_special_case(const CellSolution& sol, Real tol) {
  SpecialCaseReport r;
  r.distance_bar = spectral_norm(sol.g_eff - sol.g_bar);
  r.distance_under = spectral_norm(sol.g_eff - sol.g_under);
  r.effective_equals_bar = r.distance_bar <= tol;
  r.effective_equals_under = r.distance_under <= tol;
  if (r.effective_equals_bar) r.lambda_vanishes = sol.lambda_h1 <= tol;
  if (r.effective_equals_under) r.g_tilde_constant = sol.g_tilde_deviation() <= tol;
  return r;
}

struct LambdaBoundCheck {
  Real lambda_h1 = 0.0;
  Real M_bound = 0.0;
  bool pass = false;
};

inline LambdaBoundCheck lambda_bound_check(const CellSolution& sol, const PeriodicCoefficient& g,
                                           const DifferentialSymbol& b, Real tol = 1e-6) {
  LambdaBoundCheck c;
  c.lambda_h1 = sol.lambda_h1;
  c.M_bound = lambda_bound_constant(g, b);
  c.pass = c.lambda_h1 <= c.M_bound + tol;
  return c;
}

}  // namespace homog
