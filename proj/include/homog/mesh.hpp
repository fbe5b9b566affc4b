#pragma once

#include <homog/p1.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace homog {

/// Interval (0, L) or rectangle (0, L1) x (0, L2), with an optional interior
/// margin delta describing O' = {x : dist(x, boundary) > delta}.
struct DomainSpec {
  int dimension = 1;
  std::vector<Real> lengths{1.0};
  Real delta = 0.0;

  Real diameter() const {
    Real s = 0.0;
    for (Real l : lengths) s += l * l;
    return std::sqrt(s);
  }
  Real min_edge() const {
    Real e = lengths.front();
    for (Real l : lengths) e = std::min(e, l);
    return e;
  }

  void validate() const {
    if (dimension < 1 || dimension > 2) throw DomainError("domain dimension must be 1 or 2");
    if (static_cast<int>(lengths.size()) != dimension) throw DomainError("domain needs one length per axis");
    for (Real l : lengths)
      if (!(l > 0.0)) throw DomainError("domain lengths must be positive");
    if (delta < 0.0) throw DomainError("interior margin delta must be non-negative");
    if (delta > 0.0 && !(delta < 0.5 * min_edge())) throw DomainError("interior margin leaves an empty subdomain");
  }

  /// Distance from x to the boundary.
  Real boundary_distance(const Point& x) const {
    Real dist = std::numeric_limits<Real>::infinity();
    for (int l = 0; l < dimension; ++l) dist = std::min({dist, x(l), lengths[static_cast<std::size_t>(l)] - x(l)});
    return dist;
  }
};

/// Uniform P1 mesh of a DomainSpec; lexicographic node order (axis 0 fastest),
/// squares split along the (i,j)-(i+1,j+1) diagonal in 2D.
class Mesh {
 public:
  Mesh(const DomainSpec& domain, Real h) : domain_(domain), h_(h) {
    domain.validate();
    if (!(h > 0.0)) throw MeshingError("mesh size must be positive");
    const int d = domain.dimension;
    for (int l = 0; l < d; ++l) {
      const Real ratio = domain.lengths[static_cast<std::size_t>(l)] / h;
      const long cells = std::lround(ratio);
      if (cells < 1 || std::abs(ratio - static_cast<Real>(cells)) > 1e-8 * ratio)
        throw MeshingError("mesh size " + std::to_string(h) + " does not divide edge length " +
                           std::to_string(domain.lengths[static_cast<std::size_t>(l)]));
      cells_[l] = static_cast<int>(cells);
    }
    if (d == 1) cells_[1] = 0;
    const int nx = cells_[0];
    const int ny = cells_[1];
    const int rows = d == 1 ? 1 : ny + 1;
    for (int j = 0; j < rows; ++j)
      for (int i = 0; i <= nx; ++i) {
        Point x(d);
        x(0) = i * h;
        if (d == 2) x(1) = j * h;
        const bool bdry = i == 0 || i == nx || (d == 2 && (j == 0 || j == ny));
        coords_.push_back(x);
        boundary_.push_back(bdry);
      }
    if (d == 1) {
      for (int i = 0; i < nx; ++i) {
        P1Element e;
        e.vertex_count = 2;
        e.vertex = {i, i + 1, 0};
        e.grad.resize(1, 2);
        e.grad << -1.0 / h, 1.0 / h;
        e.measure = h;
        e.square = i;
        e.centroid = Point::Constant(1, (i + 0.5) * h);
        elements_.push_back(std::move(e));
      }
      return;
    }
    auto id = [nx](int i, int j) { return i + (nx + 1) * j; };
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (int upper = 0; upper < 2; ++upper) {
          P1Element e;
          e.vertex_count = 3;
          if (!upper)
            e.vertex = {id(i, j), id(i + 1, j), id(i + 1, j + 1)};
          else
            e.vertex = {id(i, j), id(i + 1, j + 1), id(i, j + 1)};
          e.grad = triangle_reference_gradients(upper != 0, h, h);
          e.measure = 0.5 * h * h;
          e.square = i + nx * j;
          e.centroid = Point(2);
          if (!upper)
            e.centroid << (i + 2.0 / 3.0) * h, (j + 1.0 / 3.0) * h;
          else
            e.centroid << (i + 1.0 / 3.0) * h, (j + 2.0 / 3.0) * h;
          elements_.push_back(std::move(e));
        }
  }

  const DomainSpec& domain() const { return domain_; }
  int dimension() const { return domain_.dimension; }
  Real h() const { return h_; }
  int cells(int axis) const { return cells_[axis]; }
  int node_count() const { return static_cast<int>(coords_.size()); }
  int boundary_node_count() const {
    int c = 0;
    for (bool b : boundary_) c += b ? 1 : 0;
    return c;
  }
  const Point& node(int i) const { return coords_[static_cast<std::size_t>(i)]; }
  bool is_boundary(int i) const { return boundary_[static_cast<std::size_t>(i)]; }
  const std::vector<P1Element>& elements() const { return elements_; }
  int square_count() const { return dimension() == 1 ? cells_[0] : cells_[0] * cells_[1]; }

  Point square_midpoint(int square) const {
    Point x(dimension());
    x(0) = ((square % cells_[0]) + 0.5) * h_;
    if (dimension() == 2) x(1) = ((square / cells_[0]) + 0.5) * h_;
    return x;
  }

  bool contains(const Point& x, Real tol = 1e-12) const {
    for (int l = 0; l < dimension(); ++l)
      if (x(l) < -tol || x(l) > domain_.lengths[static_cast<std::size_t>(l)] + tol) return false;
    return true;
  }

  /// Element containing x (clamped into the closed domain) and barycentric weights.
  std::pair<int, std::array<Real, 3>> locate(const Point& x) const {
    const int nx = cells_[0];
    const Real s0 = std::clamp(x(0) / h_, 0.0, static_cast<Real>(nx));
    const int i = std::min(static_cast<int>(std::floor(s0)), nx - 1);
    const Real u = s0 - i;
    if (dimension() == 1) return {i, {1.0 - u, u, 0.0}};
    const int ny = cells_[1];
    const Real s1 = std::clamp(x(1) / h_, 0.0, static_cast<Real>(ny));
    const int j = std::min(static_cast<int>(std::floor(s1)), ny - 1);
    const Real v = s1 - j;
    const auto [upper, w] = triangle_locate(u, v);
    return {2 * (i + nx * j) + (upper ? 1 : 0), w};
  }

  /// Nodes at distance > delta from the boundary.
  std::vector<bool> interior_node_mask(Real delta) const {
    std::vector<bool> mask(coords_.size());
    for (std::size_t i = 0; i < coords_.size(); ++i) mask[i] = domain_.boundary_distance(coords_[i]) > delta + 1e-12;
    return mask;
  }

  /// Elements lying in the closure of O' (all vertices at distance >= delta).
  std::vector<bool> interior_element_mask(Real delta) const {
    std::vector<bool> mask(elements_.size());
    for (std::size_t e = 0; e < elements_.size(); ++e) {
      bool inside = true;
      for (int a = 0; a < elements_[e].vertex_count; ++a)
        inside = inside &&
                 domain_.boundary_distance(coords_[static_cast<std::size_t>(elements_[e].vertex[static_cast<std::size_t>(a)])]) >=
                     delta - 1e-12;
      mask[e] = inside;
    }
    return mask;
  }

 private:
  DomainSpec domain_;
  Real h_ = 0.0;
  int cells_[2] = {0, 0};
  std::vector<Point> coords_;
  std::vector<bool> boundary_;
  std::vector<P1Element> elements_;
};

inline std::shared_ptr<const Mesh> build_mesh(const DomainSpec& domain, Real h) {
  return std::make_shared<const Mesh>(domain, h);
}

}  // namespace homog
