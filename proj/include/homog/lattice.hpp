#pragma once

#include <homog/types.hpp>

#include <cmath>
#include <limits>

namespace homog {

/// Periodicity lattice Gamma with basis a_1..a_d (columns of `basis`), its dual
/// basis b_j with <b_j, a_k> = delta_jk, and the derived cell constants.
struct LatticeSpec {
  int dimension = 1;
  Matrix basis;       ///< d x d, column j is a_j
  Matrix dual_basis;  ///< d x d, column j is b_j
  Real r0 = 0.5;      ///< half the shortest nonzero dual lattice vector
  Real r1 = 0.5;      ///< half the diameter of the cell
  Real cell_volume = 1.0;

  /// Fractional coordinates tau with y = A tau.
  Point to_fractional(const Point& y) const { return dual_basis.transpose() * y; }
  Point to_physical(const Point& tau) const { return basis * tau; }

  /// True when the basis is diagonal, so the cell grid can align with axis-parallel meshes.
  bool is_rectangular() const {
    for (int i = 0; i < dimension; ++i)
      for (int j = 0; j < dimension; ++j)
        if (i != j && std::abs(basis(i, j)) > 1e-14) return false;
    return true;
  }
};

/// Builds the lattice data from the basis vectors (columns of `basis`).
/// Throws DegenerateLatticeError for a singular or unsupported basis.
inline LatticeSpec dual_lattice(const Matrix& basis) {
  const int d = static_cast<int>(basis.rows());
  if (d < 1 || d > 2 || basis.cols() != d)
    throw DegenerateLatticeError("lattice basis must be a square 1x1 or 2x2 matrix");

  const Real det = basis.determinant();
  const Real scale = std::pow(basis.norm(), d);
  if (!(std::abs(det) > 1e-12 * scale))
    throw DegenerateLatticeError("lattice basis is linearly dependent (det = " + std::to_string(det) + ")");

  LatticeSpec lat;
  lat.dimension = d;
  lat.basis = basis;
  lat.dual_basis = basis.inverse().transpose();
  lat.cell_volume = std::abs(det);

  // Shortest nonzero dual vector over a bounded index box; enough for cells
  // that are not pathologically sheared.
  constexpr int kRange = 6;
  Real shortest = std::numeric_limits<Real>::infinity();
  if (d == 1) {
    shortest = std::abs(lat.dual_basis(0, 0));
  } else {
    for (int i = -kRange; i <= kRange; ++i)
      for (int j = -kRange; j <= kRange; ++j) {
        if (i == 0 && j == 0) continue;
        const Point v = i * lat.dual_basis.col(0) + j * lat.dual_basis.col(1);
        shortest = std::min(shortest, v.norm());
      }
  }
  lat.r0 = 0.5 * shortest;

  // diam of {A tau : |tau_j| < 1/2} is the longest A sigma, sigma in {-1,0,1}^d.
  Real diam = 0.0;
  if (d == 1) {
    diam = std::abs(basis(0, 0));
  } else {
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        diam = std::max(diam, (i * basis.col(0) + j * basis.col(1)).norm());
  }
  lat.r1 = 0.5 * diam;
  return lat;
}

inline LatticeSpec unit_lattice(int d) { return dual_lattice(Matrix::Identity(d, d)); }

}  // namespace homog
