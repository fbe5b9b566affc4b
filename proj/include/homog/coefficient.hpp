#pragma once

#include <homog/lattice.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace homog {

/// Gamma-periodic Hermitian m x m matrix field sampled on a uniform grid of
/// the cell (N samples per axis, in fractional coordinates).
///
/// Continuous coefficients are sampled at the grid nodes i/N and evaluated by
/// multilinear interpolation. Discontinuous ones (laminates, checkerboards)
/// are sampled at the grid-cell centres (i+1/2)/N and evaluated piecewise
/// constant, so material interfaces on the grid lines stay sharp.
class PeriodicCoefficient {
 public:
  using Closure = std::function<Matrix(const Point& tau)>;

  PeriodicCoefficient() = default;

  /// Samples `f` (given in fractional coordinates tau in [0,1)^d).
  static PeriodicCoefficient sample(const LatticeSpec& lattice, int m, int resolution, const Closure& f,
                                    bool discontinuous, std::string kind = "custom") {
    if (resolution < 1) throw CoefficientError("coefficient resolution must be positive");
    PeriodicCoefficient g;
    g.lattice_ = lattice;
    g.m_ = m;
    g.resolution_ = resolution;
    g.discontinuous_ = discontinuous;
    g.kind_ = std::move(kind);
    const int d = lattice.dimension;
    const int count = d == 1 ? resolution : resolution * resolution;
    g.samples_.reserve(static_cast<std::size_t>(count));
    const Real offset = discontinuous ? 0.5 : 0.0;
    for (int k = 0; k < count; ++k) {
      Point tau(d);
      tau(0) = ((k % resolution) + offset) / resolution;
      if (d == 2) tau(1) = ((k / resolution) + offset) / resolution;
      g.samples_.push_back(f(tau));
    }
    g.finalize();
    return g;
  }

  /// Builds from explicit samples (row-major over axis 0 fastest).
  static PeriodicCoefficient from_samples(const LatticeSpec& lattice, int resolution, std::vector<Matrix> samples,
                                          bool discontinuous, std::string kind = "table") {
    const int d = lattice.dimension;
    const std::size_t count = static_cast<std::size_t>(d == 1 ? resolution : resolution * resolution);
    if (samples.size() != count)
      throw CoefficientError("table has " + std::to_string(samples.size()) + " samples, expected " +
                             std::to_string(count));
    PeriodicCoefficient g;
    g.lattice_ = lattice;
    g.m_ = static_cast<int>(samples.front().rows());
    g.resolution_ = resolution;
    g.discontinuous_ = discontinuous;
    g.kind_ = std::move(kind);
    g.samples_ = std::move(samples);
    g.finalize();
    return g;
  }

  const LatticeSpec& lattice() const { return lattice_; }
  int m() const { return m_; }
  int resolution() const { return resolution_; }
  bool discontinuous() const { return discontinuous_; }
  const std::string& kind() const { return kind_; }
  const std::vector<Matrix>& samples() const { return samples_; }
  Real norm_sup() const { return norm_sup_; }
  Real norm_inv_sup() const { return norm_inv_sup_; }

  /// g at fractional coordinates tau (wrapped into the cell).
  Matrix eval_fractional(const Point& tau) const {
    const int d = lattice_.dimension;
    const int n = resolution_;
    if (discontinuous_) {
      int idx[2] = {0, 0};
      for (int l = 0; l < d; ++l) idx[l] = wrap(static_cast<long>(std::floor(frac(tau(l)) * n)));
      return samples_[static_cast<std::size_t>(idx[0] + n * idx[1])];
    }
    if (d == 1) {
      const Real s = frac(tau(0)) * n;
      const Real fl = std::floor(s);
      const Real w = s - fl;
      const int i0 = wrap(static_cast<long>(fl));
      const int i1 = wrap(i0 + 1L);
      if (w == 0.0) return samples_[static_cast<std::size_t>(i0)];
      return (1.0 - w) * samples_[static_cast<std::size_t>(i0)] + w * samples_[static_cast<std::size_t>(i1)];
    }
    const Real s0 = frac(tau(0)) * n;
    const Real s1 = frac(tau(1)) * n;
    const Real f0 = std::floor(s0);
    const Real f1 = std::floor(s1);
    const Real w0 = s0 - f0;
    const Real w1 = s1 - f1;
    const int i0 = wrap(static_cast<long>(f0));
    const int j0 = wrap(static_cast<long>(f1));
    const int i1 = wrap(i0 + 1L);
    const int j1 = wrap(j0 + 1L);
    auto at = [&](int i, int j) -> const Matrix& { return samples_[static_cast<std::size_t>(i + n * j)]; };
    Matrix out = (1.0 - w0) * (1.0 - w1) * at(i0, j0);
    if (w0 != 0.0) out += w0 * (1.0 - w1) * at(i1, j0);
    if (w1 != 0.0) out += (1.0 - w0) * w1 * at(i0, j1);
    if (w0 != 0.0 && w1 != 0.0) out += w0 * w1 * at(i1, j1);
    return out;
  }

  /// g at a physical cell point y.
  Matrix eval(const Point& y) const { return eval_fractional(lattice_.to_fractional(y)); }

  /// Arithmetic mean of g over the cell (uniform sample quadrature).
  Matrix mean() const {
    Matrix acc = Matrix::Zero(m_, m_);
    for (const auto& s : samples_) acc += s;
    return acc / static_cast<Real>(samples_.size());
  }

  /// Arithmetic mean of g^{-1} over the cell.
  Matrix mean_inverse() const {
    Matrix acc = Matrix::Zero(m_, m_);
    for (const auto& s : samples_) {
      Eigen::LDLT<Matrix> ldlt(s);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw CoefficientError("coefficient sample is singular or indefinite");
      acc += ldlt.solve(Matrix::Identity(m_, m_));
    }
    return acc / static_cast<Real>(samples_.size());
  }

  static Real frac(Real x) { return x - std::floor(x); }

 private:
  int wrap(long i) const {
    const long n = resolution_;
    return static_cast<int>(((i % n) + n) % n);
  }

  void finalize() {
    Real worst = 0.0;
    norm_sup_ = 0.0;
    norm_inv_sup_ = 0.0;
    for (auto& s : samples_) {
      if (s.rows() != m_ || s.cols() != m_) throw CoefficientError("coefficient samples must all be m x m");
      worst = std::max(worst, (s - s.transpose()).cwiseAbs().maxCoeff());
      s = 0.5 * (s + s.transpose()).eval();
      const auto [lo, hi] = eigen_range(s);
      if (!(lo > 0.0)) throw CoefficientError("coefficient sample is not positive definite (min eigenvalue " +
                                              std::to_string(lo) + ")");
      norm_sup_ = std::max(norm_sup_, hi);
      norm_inv_sup_ = std::max(norm_inv_sup_, 1.0 / lo);
    }
    if (worst > 1e-10) warn("coefficient samples were not symmetric (max asymmetry " + std::to_string(worst) +
                            "); symmetrized");
  }

  LatticeSpec lattice_;
  int m_ = 1;
  int resolution_ = 1;
  bool discontinuous_ = false;
  std::string kind_;
  std::vector<Matrix> samples_;
  Real norm_sup_ = 0.0;
  Real norm_inv_sup_ = 0.0;
};

/// g(x/eps) at each point, with x/eps wrapped into the cell.
inline std::vector<Matrix> sample_scaled(const PeriodicCoefficient& g, Real eps, const std::vector<Point>& points) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  std::vector<Matrix> out;
  out.reserve(points.size());
  for (const auto& x : points) out.push_back(g.eval(x / eps));
  return out;
}

// Closed-form families, sampled at construction.

inline PeriodicCoefficient constant_coefficient(const LatticeSpec& lat, const Matrix& value) {
  return PeriodicCoefficient::sample(
      lat, static_cast<int>(value.rows()), 1, [&](const Point&) { return value; }, false, "constant");
}

/// (mean + amplitude sin(2 pi <k, tau>)) 1_m.
inline PeriodicCoefficient sinusoid_coefficient(const LatticeSpec& lat, int m, Real mean, Real amplitude,
                                                const std::vector<int>& mode, int resolution) {
  return PeriodicCoefficient::sample(
      lat, m, resolution,
      [&](const Point& tau) {
        Real phase = 0.0;
        for (int l = 0; l < lat.dimension; ++l)
          phase += (static_cast<std::size_t>(l) < mode.size() ? mode[static_cast<std::size_t>(l)] : 0) * tau(l);
        return Matrix((mean + amplitude * std::sin(2.0 * std::numbers::pi * phase)) * Matrix::Identity(m, m));
      },
      false, "sinusoid");
}

/// Layers along `axis`: values[k] 1_m on consecutive bands of width fractions[k].
inline PeriodicCoefficient laminate_coefficient(const LatticeSpec& lat, int m, const std::vector<Real>& values,
                                                std::vector<Real> fractions, int axis, int resolution) {
  if (values.empty()) throw CoefficientError("laminate needs at least one value");
  if (fractions.empty()) fractions.assign(values.size(), 1.0 / static_cast<Real>(values.size()));
  if (fractions.size() != values.size()) throw CoefficientError("laminate values/fractions length mismatch");
  Real total = 0.0;
  for (Real f : fractions) total += f;
  if (axis < 0 || axis >= lat.dimension) throw CoefficientError("laminate axis out of range");
  return PeriodicCoefficient::sample(
      lat, m, resolution,
      [&](const Point& tau) {
        const Real s = tau(axis) * total;
        Real edge = 0.0;
        for (std::size_t k = 0; k < values.size(); ++k) {
          edge += fractions[k];
          if (s < edge) return Matrix(values[k] * Matrix::Identity(m, m));
        }
        return Matrix(values.back() * Matrix::Identity(m, m));
      },
      true, "laminate");
}

/// 2D checkerboard: a on the quadrants where (tau1 < 1/2) == (tau2 < 1/2), b elsewhere.
inline PeriodicCoefficient checkerboard_coefficient(const LatticeSpec& lat, int m, Real a, Real b, int resolution) {
  if (lat.dimension != 2) throw CoefficientError("checkerboard requires a 2D lattice");
  return PeriodicCoefficient::sample(
      lat, m, resolution,
      [&](const Point& tau) {
        const bool same = (tau(0) < 0.5) == (tau(1) < 0.5);
        return Matrix((same ? a : b) * Matrix::Identity(m, m));
      },
      true, "checkerboard");
}

}  // namespace homog
