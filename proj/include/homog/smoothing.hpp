#pragma once

#include <homog/lattice.hpp>
#include <homog/quadrature.hpp>

#include <cmath>
#include <type_traits>
#include <vector>

namespace homog {

struct SmoothingSpec {
  LatticeSpec lattice;
  Real eps = 0.1;
  int order = 6;  ///< Gauss-Legendre points per axis

  void validate() const {
    if (!(eps > 0.0)) throw DomainError("smoothing eps must be positive");
    if (order < 1) throw DomainError("smoothing quadrature order must be >= 1");
  }

  /// Offsets eps * z_k with weights; z_k runs over a tensor Gauss rule on the cell.
  std::pair<std::vector<Point>, std::vector<Real>> stencil() const {
    validate();
    const auto rule = gauss_legendre_centered(order);
    const int d = lattice.dimension;
    std::vector<Point> offsets;
    std::vector<Real> weights;
    if (d == 1) {
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        offsets.push_back(eps * lattice.to_physical(Point::Constant(1, rule.nodes[i])));
        weights.push_back(rule.weights[i]);
      }
    } else {
      for (std::size_t j = 0; j < rule.nodes.size(); ++j)
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
          Point tau(2);
          tau << rule.nodes[i], rule.nodes[j];
          offsets.push_back(eps * lattice.to_physical(tau));
          weights.push_back(rule.weights[i] * rule.weights[j]);
        }
    }
    return {offsets, weights};
  }
};

/// (S_eps v)(x) = |Omega|^{-1} int_Omega v(x - eps z) dz at every evaluation point.
/// `v` maps a Point to a Real or an Eigen vector, and throws ExtensionError
/// when asked for a value outside its support.
template <class Fn>
auto steklov_apply(const Fn& v, const SmoothingSpec& spec, const std::vector<Point>& points) {
  using Value = std::decay_t<decltype(v(points.front()))>;
  const auto [offsets, weights] = spec.stencil();
  std::vector<Value> out;
  out.reserve(points.size());
  for (const auto& x : points) {
    Value acc = weights[0] * v(Point(x - offsets[0]));
    for (std::size_t k = 1; k < offsets.size(); ++k) acc += weights[k] * v(Point(x - offsets[k]));
    out.push_back(acc);
  }
  return out;
}

namespace detail {
inline Real squared_magnitude(Real x) { return x * x; }
template <class Derived>
Real squared_magnitude(const Eigen::MatrixBase<Derived>& x) {
  return x.squaredNorm();
}
}  // namespace detail

/// Discrete L2 norm of (S_eps - I) v over weighted evaluation points.
template <class Fn>
Real steklov_defect_norm(const Fn& v, const SmoothingSpec& spec, const std::vector<Point>& points,
                         const std::vector<Real>& weights) {
  const auto smoothed = steklov_apply(v, spec, points);
  Real acc = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    acc += weights[i] * detail::squared_magnitude(smoothed[i] - v(points[i]));
  return std::sqrt(acc);
}

}  // namespace homog
