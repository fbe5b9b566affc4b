#pragma once

#include <homog/mesh.hpp>

#include <functional>
#include <memory>
#include <optional>

namespace homog {

/// Nodal P1 field with `ncomp` components per node (entry node * ncomp + c).
template <class Scalar>
struct BasicField {
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::shared_ptr<const Mesh> mesh;
  int ncomp = 1;
  VectorType values;
  std::optional<BoundaryKind> boundary;  ///< set for solutions of a boundary value problem

  BasicField() = default;
  BasicField(std::shared_ptr<const Mesh> m, int components)
      : mesh(std::move(m)), ncomp(components), values(VectorType::Zero(static_cast<Eigen::Index>(mesh->node_count()) * components)) {}
  BasicField(std::shared_ptr<const Mesh> m, int components, VectorType v, std::optional<BoundaryKind> bc = std::nullopt)
      : mesh(std::move(m)), ncomp(components), values(std::move(v)), boundary(bc) {
    if (values.size() != static_cast<Eigen::Index>(mesh->node_count()) * ncomp)
      throw DomainError("field size does not match its mesh");
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> at_node(int node) const {
    return values.segment(static_cast<Eigen::Index>(node) * ncomp, ncomp);
  }

  /// P1 interpolation at x (clamped into the closed domain).
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> value_at(const Point& x) const {
    const auto [e, w] = mesh->locate(x);
    const auto& el = mesh->elements()[static_cast<std::size_t>(e)];
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(ncomp);
    for (int a = 0; a < el.vertex_count; ++a)
      out += w[static_cast<std::size_t>(a)] * at_node(el.vertex[static_cast<std::size_t>(a)]);
    return out;
  }

  /// n x d gradient on element e.
  Matrix gradient_on(int e) const
    requires std::is_same_v<Scalar, Real>
  {
    return mesh->elements()[static_cast<std::size_t>(e)].gradient(values, ncomp);
  }

  BasicField& operator+=(const BasicField& o) {
    check_same_mesh(o);
    values += o.values;
    return *this;
  }
  BasicField& operator-=(const BasicField& o) {
    check_same_mesh(o);
    values -= o.values;
    return *this;
  }
  friend BasicField operator-(BasicField a, const BasicField& b) {
    a -= b;
    a.boundary.reset();
    return a;
  }
  friend BasicField operator+(BasicField a, const BasicField& b) {
    a += b;
    return a;
  }
  friend BasicField operator*(Scalar s, BasicField a) {
    a.values *= s;
    return a;
  }

  void check_same_mesh(const BasicField& o) const {
    if (mesh != o.mesh || ncomp != o.ncomp) throw DomainError("fields live on different meshes");
  }
};

using Field = BasicField<Real>;
using ComplexField = BasicField<Complex>;

/// Element-wise constant field (fluxes, gradients): values.col(e) on element e.
struct ElementField {
  std::shared_ptr<const Mesh> mesh;
  Matrix values;  ///< ncomp x elements

  int ncomp() const { return static_cast<int>(values.rows()); }
  Vector value_at(const Point& x) const { return values.col(mesh->locate(x).first); }
};

/// Nodal interpolant of a closed-form function.
inline Field interpolate(const std::shared_ptr<const Mesh>& mesh, int ncomp, const std::function<Vector(const Point&)>& fn) {
  Field f(mesh, ncomp);
  for (int i = 0; i < mesh->node_count(); ++i) f.values.segment(static_cast<Eigen::Index>(i) * ncomp, ncomp) = fn(mesh->node(i));
  return f;
}

inline Field interpolate_scalar(const std::shared_ptr<const Mesh>& mesh, const std::function<Real(const Point&)>& fn) {
  return interpolate(mesh, 1, [&](const Point& x) { return Vector::Constant(1, fn(x)); });
}

/// Even reflection of a P1 field across every face of the box, usable up to
/// `margin` outside the domain. Serves as the extension operator P_O.
class ReflectedField {
 public:
  ReflectedField(const Field& u, Real margin) : u_(u), margin_(margin) {
    if (margin < 0.0) throw ExtensionError("extension margin must be non-negative");
    if (margin > u.mesh->domain().min_edge())
      throw ExtensionError("extension margin " + std::to_string(margin) + " exceeds the domain edge length");
  }

  Real margin() const { return margin_; }
  const Field& base() const { return u_; }

  /// Reflected point inside the domain and the per-axis sign of the reflection.
  std::pair<Point, std::array<int, 2>> reflect(const Point& x) const {
    const auto& dom = u_.mesh->domain();
    Point y = x;
    std::array<int, 2> sign{1, 1};
    for (int l = 0; l < dom.dimension; ++l) {
      const Real len = dom.lengths[static_cast<std::size_t>(l)];
      if (x(l) < -margin_ - 1e-12 || x(l) > len + margin_ + 1e-12)
        throw ExtensionError("point outside the extended domain; a larger extension margin is required");
      if (x(l) < 0.0) {
        y(l) = -x(l);
        sign[static_cast<std::size_t>(l)] = -1;
      } else if (x(l) > len) {
        y(l) = 2.0 * len - x(l);
        sign[static_cast<std::size_t>(l)] = -1;
      }
    }
    return {y, sign};
  }

  Vector value_at(const Point& x) const { return u_.value_at(reflect(x).first); }

  /// Gradient (n x d) of the extended function at x: piecewise constant, with
  /// the normal derivative flipped on reflected copies.
  Matrix gradient_at(const Point& x) const {
    const auto [y, sign] = reflect(x);
    Matrix g = u_.gradient_on(u_.mesh->locate(y).first);
    for (int l = 0; l < u_.mesh->dimension(); ++l) g.col(l) *= sign[static_cast<std::size_t>(l)];
    return g;
  }

 private:
  Field u_;
  Real margin_;
};

inline ReflectedField extend_field(const Field& u, Real margin) { return ReflectedField(u, margin); }

}  // namespace homog
