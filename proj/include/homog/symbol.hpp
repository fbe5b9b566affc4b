#pragma once

#include <homog/types.hpp>

#include <cmath>
#include <numbers>
#include <vector>

namespace homog {

/// First-order operator b(D) = sum_l b_l D_l with constant m x n matrices b_l.
///
/// All computations use the real form sum_l b_l d/dx_l; the factor -i of
/// D_l = -i d/dx_l cancels in every quadratic form, in g~ and in the corrector
/// products, so real coefficients stay real throughout.
struct DifferentialSymbol {
  std::vector<Matrix> b;  ///< b_1..b_d, each m x n
  Real alpha0 = 0.0;
  Real alpha1 = 0.0;

  int dimension() const { return static_cast<int>(b.size()); }
  int m() const { return static_cast<int>(b.front().rows()); }
  int n() const { return static_cast<int>(b.front().cols()); }

  /// b(xi) = sum_l xi_l b_l.
  Matrix at(const Point& xi) const {
    Matrix s = Matrix::Zero(m(), n());
    for (int l = 0; l < dimension(); ++l) s += xi(l) * b[static_cast<std::size_t>(l)];
    return s;
  }

  /// Applies the symbol to an n x d gradient: sum_l b_l grad.col(l).
  Vector apply(const Matrix& grad) const {
    Vector out = Vector::Zero(m());
    for (int l = 0; l < dimension(); ++l) out += b[static_cast<std::size_t>(l)] * grad.col(l);
    return out;
  }
};

/// Extreme eigenvalues of b(theta)^* b(theta) over a sampled unit sphere:
/// theta = +-1 in 1D and 1024 uniform angles in 2D.
/// Throws EllipticityError when the rank condition fails.
inline std::pair<Real, Real> symbol_bounds(const std::vector<Matrix>& b) {
  if (b.empty() || b.size() > 2) throw EllipticityError("symbol needs 1 or 2 matrices b_l");
  const auto rows = b.front().rows();
  const auto cols = b.front().cols();
  for (const auto& bl : b)
    if (bl.rows() != rows || bl.cols() != cols) throw EllipticityError("symbol matrices differ in shape");
  if (rows < cols) throw EllipticityError("symbol requires m >= n");

  std::vector<Point> thetas;
  if (b.size() == 1) {
    thetas.push_back(Point::Constant(1, 1.0));
    thetas.push_back(Point::Constant(1, -1.0));
  } else {
    constexpr int kAngles = 1024;
    for (int k = 0; k < kAngles; ++k) {
      const Real phi = 2.0 * std::numbers::pi * k / kAngles;
      Point t(2);
      t << std::cos(phi), std::sin(phi);
      thetas.push_back(t);
    }
  }

  Real lo = std::numeric_limits<Real>::infinity();
  Real hi = 0.0;
  for (const auto& t : thetas) {
    Matrix s = Matrix::Zero(rows, cols);
    for (std::size_t l = 0; l < b.size(); ++l) s += t(static_cast<Eigen::Index>(l)) * b[l];
    const auto [mn, mx] = eigen_range(s.transpose() * s);
    lo = std::min(lo, mn);
    hi = std::max(hi, mx);
  }
  if (!(lo > 1e-12 * std::max<Real>(hi, 1.0)))
    throw EllipticityError("symbol is rank deficient on the unit sphere (alpha0 = " + std::to_string(lo) + ")");
  return {lo, hi};
}

inline DifferentialSymbol make_symbol(std::vector<Matrix> b) {
  DifferentialSymbol s;
  const auto [a0, a1] = symbol_bounds(b);
  s.b = std::move(b);
  s.alpha0 = a0;
  s.alpha1 = a1;
  return s;
}

/// b(D) = D (the gradient): m = d, n = 1.
inline DifferentialSymbol gradient_symbol(int d) {
  std::vector<Matrix> b;
  for (int l = 0; l < d; ++l) {
    Matrix bl = Matrix::Zero(d, 1);
    bl(l, 0) = 1.0;
    b.push_back(bl);
  }
  return make_symbol(std::move(b));
}

}  // namespace homog
