#pragma once

#include <homog/types.hpp>

#include <Eigen/SparseLU>

#include <cmath>
#include <string>

namespace homog {

struct IterativeResult {
  Vector x;
  int iterations = 0;
  Real relative_residual = 0.0;
  bool converged = false;
};

/// Removes the per-component mean from a node-major vector with `ncomp`
/// interleaved components (entry node * ncomp + c).
inline void remove_component_means(Vector& v, int ncomp) {
  const Eigen::Index nodes = v.size() / ncomp;
  for (int c = 0; c < ncomp; ++c) {
    Real s = 0.0;
    for (Eigen::Index a = 0; a < nodes; ++a) s += v(a * ncomp + c);
    s /= static_cast<Real>(nodes);
    for (Eigen::Index a = 0; a < nodes; ++a) v(a * ncomp + c) -= s;
  }
}

/// Jacobi-preconditioned conjugate gradients for K x = f restricted to the
/// subspace of vectors with zero component means. K must be symmetric positive
/// semidefinite with kernel equal to the per-component constants.
inline IterativeResult projected_cg(const SparseMatrix& k, const Vector& f, int ncomp, Real tol, int max_iter) {
  IterativeResult res;
  res.x = Vector::Zero(f.size());
  Vector r = f;
  remove_component_means(r, ncomp);
  const Real rhs_norm = r.norm();
  if (rhs_norm == 0.0) {
    res.converged = true;
    return res;
  }
  const Vector inv_diag = k.diagonal().cwiseInverse();
  auto precondition = [&](const Vector& v) {
    Vector z = inv_diag.cwiseProduct(v);
    remove_component_means(z, ncomp);
    return z;
  };
  Vector z = precondition(r);
  Vector p = z;
  Real rz = r.dot(z);
  for (int it = 1; it <= max_iter; ++it) {
    const Vector kp = k * p;
    const Real alpha = rz / p.dot(kp);
    res.x += alpha * p;
    r -= alpha * kp;
    remove_component_means(r, ncomp);
    res.iterations = it;
    res.relative_residual = r.norm() / rhs_norm;
    if (res.relative_residual <= tol) {
      res.converged = true;
      break;
    }
    z = precondition(r);
    const Real rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  remove_component_means(res.x, ncomp);
  return res;
}

/// Solves K x = f subject to zero component means through the bordered
/// (Lagrange multiplier) system [K C; C^T 0], factored once for all columns.
inline Matrix bordered_direct_solve(const SparseMatrix& k, const Matrix& f, int ncomp) {
  const Eigen::Index n = k.rows();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(k.nonZeros() + 2 * n));
  for (int col = 0; col < k.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(k, col); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index c = n + (i % ncomp);
    trips.emplace_back(i, c, 1.0);
    trips.emplace_back(c, i, 1.0);
  }
  SparseMatrix bordered(n + ncomp, n + ncomp);
  bordered.setFromTriplets(trips.begin(), trips.end());
  bordered.makeCompressed();
  Eigen::SparseLU<SparseMatrix> lu;
  lu.analyzePattern(bordered);
  lu.factorize(bordered);
  if (lu.info() != Eigen::Success) throw SolverError("bordered cell system factorization failed: " + lu.lastErrorMessage());
  Matrix rhs = Matrix::Zero(n + ncomp, f.cols());
  rhs.topRows(n) = f;
  const Matrix sol = lu.solve(rhs);
  return sol.topRows(n);
}

}  // namespace homog
