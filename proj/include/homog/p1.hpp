#pragma once

#include <homog/types.hpp>

#include <array>
#include <vector>

namespace homog {

/// Lowest-order Lagrange element on an interval or a triangle of a uniform grid.
struct P1Element {
  std::array<int, 3> vertex{0, 0, 0};
  int vertex_count = 2;
  Matrix grad;       ///< d x vertex_count, gradients of the hat functions (constant on the element)
  Real measure = 0;  ///< length or area
  int square = 0;    ///< index of the grid interval / square the element belongs to
  Point centroid;

  /// sum_a grad_a u_a for an n-component nodal vector (node-major); returns n x d.
  Matrix gradient(const Vector& u, int ncomp) const {
    Matrix g = Matrix::Zero(ncomp, grad.rows());
    for (int a = 0; a < vertex_count; ++a)
      for (int c = 0; c < ncomp; ++c)
        g.row(c) += u(static_cast<Eigen::Index>(vertex[static_cast<std::size_t>(a)]) * ncomp + c) *
                    grad.col(a).transpose();
    return g;
  }
};

/// Consistent P1 mass matrix of an element of the given measure.
inline Matrix p1_local_mass(int vertex_count, Real measure) {
  if (vertex_count == 2) {
    Matrix mloc(2, 2);
    mloc << 2, 1, 1, 2;
    return mloc * (measure / 6.0);
  }
  Matrix mloc(3, 3);
  mloc << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  return mloc * (measure / 12.0);
}

/// Square (i,j) of a grid with spacings (hx, hy) split along the diagonal
/// (i,j)-(i+1,j+1). Lower triangle: (0,0),(hx,0),(hx,hy); upper: (0,0),(hx,hy),(0,hy).
/// Returns gradients in the local axis-aligned coordinates.
inline Matrix triangle_reference_gradients(bool upper, Real hx, Real hy) {
  Matrix g(2, 3);
  if (!upper) {
    g << -1.0 / hx, 1.0 / hx, 0.0,  //
        0.0, -1.0 / hy, 1.0 / hy;
  } else {
    g << 0.0, 1.0 / hx, -1.0 / hx,  //
        -1.0 / hy, 0.0, 1.0 / hy;
  }
  return g;
}

/// Barycentric weights of local coordinates (u, v) in [0,1)^2 of a split square,
/// ordered as the vertices of the triangle that contains the point.
inline std::pair<bool, std::array<Real, 3>> triangle_locate(Real u, Real v) {
  if (u >= v) return {false, {1.0 - u, u - v, v}};
  return {true, {1.0 - v, u, v - u}};
}

}  // namespace homog
