#pragma once

#include <homog/cell_solver.hpp>
#include <homog/operators.hpp>
#include <homog/smoothing.hpp>

#include <string>
#include <vector>

namespace homog {

enum class CorrectorVariant { smoothed, plain };

inline const char* to_string(CorrectorVariant v) { return v == CorrectorVariant::smoothed ? "smoothed" : "plain"; }

inline CorrectorVariant corrector_variant_from_string(const std::string& s) {
  if (s == "smoothed") return CorrectorVariant::smoothed;
  if (s == "plain") return CorrectorVariant::plain;
  throw ConfigError("unknown corrector variant '" + s + "' (smoothed, plain)");
}

namespace detail {

/// b(D)u (m-vector) of each element.
inline Matrix element_symbol_values(const Field& u, const DifferentialSymbol& b) {
  const auto& els = u.mesh->elements();
  Matrix out(b.m(), static_cast<Eigen::Index>(els.size()));
  for (std::size_t e = 0; e < els.size(); ++e) out.col(static_cast<Eigen::Index>(e)) = b.apply(u.gradient_on(static_cast<int>(e)));
  return out;
}

/// Nodal recovery of an element-wise field: mean over the elements sharing the node.
inline Matrix nodal_average(const Mesh& mesh, const Matrix& per_element) {
  Matrix acc = Matrix::Zero(per_element.rows(), mesh.node_count());
  Vector count = Vector::Zero(mesh.node_count());
  const auto& els = mesh.elements();
  for (std::size_t e = 0; e < els.size(); ++e)
    for (int a = 0; a < els[e].vertex_count; ++a) {
      const int node = els[e].vertex[static_cast<std::size_t>(a)];
      acc.col(node) += per_element.col(static_cast<Eigen::Index>(e));
      count(node) += 1.0;
    }
  for (int i = 0; i < mesh.node_count(); ++i) acc.col(i) /= count(i);
  return acc;
}

/// S_eps b(D) P_O u at the given points (m x points).
inline Matrix smoothed_symbol_values(const Field& u, const DifferentialSymbol& b, const SmoothingSpec& spec,
                                     const std::vector<Point>& points) {
  const ReflectedField ext(u, spec.eps * spec.lattice.r1 * (1.0 + 1e-9));
  const auto vals = steklov_apply([&](const Point& y) { return Vector(b.apply(ext.gradient_at(y))); }, spec, points);
  Matrix out(b.m(), static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = vals[i];
  return out;
}

}  // namespace detail

struct CorrectorOptions {
  int quadrature_order = 6;
};

/// Nodal values of Lambda^eps S_eps b(D) P_O u0 (smoothed) or Lambda^eps b(D) u0
/// (plain, with b(D)u0 recovered at nodes by averaging over adjacent elements).
/// The caller scales by eps.
inline Field corrector_apply(const CellSolution& cell, const DifferentialSymbol& b, Real eps, const Field& u0,
                             CorrectorVariant variant, BoundaryKind bc, const CorrectorOptions& opt = {}) {
  (void)bc;
  const Mesh& mesh = *u0.mesh;
  if (b.n() != cell.n || b.m() != cell.m) throw DomainError("symbol does not match the cell solution");
  if (u0.ncomp != cell.n) throw DomainError("field component count does not match the cell solution");
  std::vector<Point> nodes(static_cast<std::size_t>(mesh.node_count()));
  for (int i = 0; i < mesh.node_count(); ++i) nodes[static_cast<std::size_t>(i)] = mesh.node(i);

  Matrix bu;
  if (variant == CorrectorVariant::smoothed) {
    SmoothingSpec spec{cell.grid->lattice(), eps, opt.quadrature_order};
    bu = detail::smoothed_symbol_values(u0, b, spec, nodes);
  } else {
    bu = detail::nodal_average(mesh, detail::element_symbol_values(u0, b));
  }
  Field out(u0.mesh, cell.n);
  for (int i = 0; i < mesh.node_count(); ++i)
    out.values.segment(static_cast<Eigen::Index>(i) * cell.n, cell.n) =
        cell.lambda_at(nodes[static_cast<std::size_t>(i)] / eps) * bu.col(i);
  return out;
}

/// u0 + eps * corr.
inline Field first_order_approx(const Field& u0, const Field& corr, Real eps) {
  u0.check_same_mesh(corr);
  Field out(u0.mesh, u0.ncomp, u0.values + eps * corr.values);
  return out;
}

/// p = g b(D)u per element, g sampled at the square midpoints.
inline ElementField flux(const Field& u, const OperatorCoefficient& coef, const DifferentialSymbol& b) {
  const auto& mesh = *u.mesh;
  const Matrix bu = detail::element_symbol_values(u, b);
  ElementField p{u.mesh, Matrix(b.m(), bu.cols())};
  for (std::size_t e = 0; e < mesh.elements().size(); ++e)
    p.values.col(static_cast<Eigen::Index>(e)) =
        coef.at(mesh.square_midpoint(mesh.elements()[e].square)) * bu.col(static_cast<Eigen::Index>(e));
  return p;
}

/// Flux with the coefficients the operator was assembled with.
inline ElementField flux(const Field& u, const DiscreteOperator& op) {
  op.check_mesh(u);
  const Matrix bu = detail::element_symbol_values(u, op.symbol);
  ElementField p{u.mesh, Matrix(op.symbol.m(), bu.cols())};
  for (Eigen::Index e = 0; e < bu.cols(); ++e) p.values.col(e) = op.g_element[static_cast<std::size_t>(e)] * bu.col(e);
  return p;
}

/// g~^eps S_eps b(D) P_O u0 (smoothed) or g~^eps b(D) u0 (plain), per element;
/// g~ is read at the element centroid.
inline ElementField flux_approx(const CellSolution& cell, const DifferentialSymbol& b, Real eps, const Field& u0,
                                CorrectorVariant variant, BoundaryKind bc, const CorrectorOptions& opt = {}) {
  (void)bc;
  const auto& els = u0.mesh->elements();
  Matrix bu;
  if (variant == CorrectorVariant::smoothed) {
    std::vector<Point> centroids;
    centroids.reserve(els.size());
    for (const auto& el : els) centroids.push_back(el.centroid);
    SmoothingSpec spec{cell.grid->lattice(), eps, opt.quadrature_order};
    bu = detail::smoothed_symbol_values(u0, b, spec, centroids);
  } else {
    bu = detail::element_symbol_values(u0, b);
  }
  ElementField p{u0.mesh, Matrix(cell.m, bu.cols())};
  for (std::size_t e = 0; e < els.size(); ++e)
    p.values.col(static_cast<Eigen::Index>(e)) = cell.g_tilde_at(els[e].centroid / eps) * bu.col(static_cast<Eigen::Index>(e));
  return p;
}

inline ElementField operator-(const ElementField& a, const ElementField& b) {
  if (a.mesh != b.mesh || a.values.rows() != b.values.rows()) throw DomainError("element fields live on different meshes");
  return ElementField{a.mesh, a.values - b.values};
}

}  // namespace homog
