#include <homog/field.hpp>
#include <homog/mesh.hpp>
#include <homog/smoothing.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace homog;

namespace {

const Real kTwoPi = 2.0 * std::numbers::pi;

std::vector<Point> grid1d(int n, Real a = 0.0, Real b = 1.0) {
  std::vector<Point> pts;
  for (int k = 0; k < n; ++k) pts.push_back(Point::Constant(1, a + (b - a) * (k + 0.5) / n));
  return pts;
}

}  // namespace

TEST(Steklov, PreservesConstants) {
  for (int d : {1, 2}) {
    const SmoothingSpec spec{unit_lattice(d), 0.1, 6};
    std::vector<Point> pts{Point::Constant(d, 0.3), Point::Constant(d, 0.9)};
    for (Real v : steklov_apply([](const Point&) { return 4.5; }, spec, pts)) EXPECT_NEAR(v, 4.5, 1e-14);
  }
}

TEST(Steklov, PreservesLinearFunctions) {
  const SmoothingSpec spec{unit_lattice(1), 0.2, 6};
  const auto pts = grid1d(17, -1.0, 2.0);
  const auto s = steklov_apply([](const Point& x) { return x(0); }, spec, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(s[i], pts[i](0), 1e-14);
}

TEST(Steklov, QuadraticShift) {
  for (Real eps : {0.1, 0.05, 0.3}) {
    const SmoothingSpec spec{unit_lattice(1), eps, 6};
    const auto pts = grid1d(33, -1.0, 1.0);
    const auto s = steklov_apply([](const Point& x) { return x(0) * x(0); }, spec, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(s[i], pts[i](0) * pts[i](0) + eps * eps / 12.0, 1e-14);
  }
}

TEST(Steklov, SineIsMultipliedBySinc) {
  // S_eps sin(k x) = sinc(k eps / 2) sin(k x) on the unit cell.
  const Real eps = 0.1, k = kTwoPi;
  const SmoothingSpec spec{unit_lattice(1), eps, 8};
  const auto pts = grid1d(40);
  const auto s = steklov_apply([&](const Point& x) { return std::sin(k * x(0)); }, spec, pts);
  const Real factor = std::sin(k * eps / 2.0) / (k * eps / 2.0);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(s[i], factor * std::sin(k * pts[i](0)), 1e-12);
}

TEST(Steklov, DefectBound) {
  // ||(S_eps - I) sin 2 pi x|| <= eps r1 ||2 pi cos 2 pi x|| on a uniform grid of one period.
  const int n = 256;
  const auto pts = grid1d(n);
  const std::vector<Real> w(n, 1.0 / n);
  auto v = [](const Point& x) { return std::sin(kTwoPi * x(0)); };
  Real dv = 0.0;
  for (const auto& x : pts) dv += std::pow(kTwoPi * std::cos(kTwoPi * x(0)), 2) / n;
  dv = std::sqrt(dv);
  Real previous = 1e9;
  for (Real eps : {0.2, 0.1, 0.05, 0.025}) {
    const SmoothingSpec spec{unit_lattice(1), eps, 6};
    const Real defect = steklov_defect_norm(v, spec, pts, w);
    EXPECT_LE(defect, eps * spec.lattice.r1 * dv + 1e-8);
    EXPECT_LE(defect, previous);
    previous = defect;
  }
  const SmoothingSpec spec{unit_lattice(1), 0.1, 6};
  EXPECT_NEAR(steklov_defect_norm([](const Point&) { return 2.0; }, spec, pts, w), 0.0, 1e-14);
}

TEST(Steklov, ContractionOnRandomTrigonometricPolynomials) {
  std::mt19937 rng(5);
  std::normal_distribution<Real> normal;
  const int n = 64;
  std::vector<Point> pts;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      Point x(2);
      x << static_cast<Real>(i) / n, static_cast<Real>(j) / n;
      pts.push_back(x);
    }
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::array<Real, 4>> terms;
    for (int k = 0; k < 6; ++k)
      terms.push_back({normal(rng), std::round(4 * normal(rng)), std::round(4 * normal(rng)), normal(rng)});
    auto v = [&](const Point& x) {
      Real s = 0.0;
      for (const auto& t : terms) s += t[0] * std::cos(kTwoPi * (t[1] * x(0) + t[2] * x(1)) + t[3]);
      return s;
    };
    for (Real eps : {0.3, 0.1}) {
      const SmoothingSpec spec{unit_lattice(2), eps, 6};
      const auto s = steklov_apply(v, spec, pts);
      Real sn = 0.0, vn = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        sn += s[i] * s[i];
        vn += v(pts[i]) * v(pts[i]);
      }
      EXPECT_LE(std::sqrt(sn), std::sqrt(vn) + 1e-10);
    }
  }
}

TEST(Steklov, CommutesWithDerivative) {
  // d/dx S_eps v = S_eps v' for smooth v, compared by central differences.
  const SmoothingSpec spec{unit_lattice(1), 0.1, 8};
  auto v = [](const Point& x) { return std::exp(std::sin(3.0 * x(0))); };
  auto dv = [](const Point& x) { return 3.0 * std::cos(3.0 * x(0)) * std::exp(std::sin(3.0 * x(0))); };
  const Real h = 1e-5;
  for (Real x0 : {0.2, 0.5, 0.8}) {
    const auto s = steklov_apply(v, spec, {Point::Constant(1, x0 + h), Point::Constant(1, x0 - h)});
    const auto sd = steklov_apply(dv, spec, {Point::Constant(1, x0)});
    EXPECT_NEAR((s[0] - s[1]) / (2.0 * h), sd[0], 1e-7);
  }
}

TEST(Steklov, PeriodicMultiplierBound) {
  // ||f^eps S_eps v|| <= |Omega|^{-1/2} ||f||_{L2(Omega)} ||v|| with f = 1 + cos 2 pi y.
  const Real eps = 0.05;
  const SmoothingSpec spec{unit_lattice(1), eps, 6};
  const int n = 4000;
  const auto pts = grid1d(n, 0.0, 2.0);
  auto v = [](const Point& x) { return std::exp(-20.0 * std::pow(x(0) - 1.0, 2)); };
  const auto s = steklov_apply(v, spec, pts);
  Real lhs = 0.0, vn = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Real f = 1.0 + std::cos(kTwoPi * pts[i](0) / eps);
    lhs += f * f * s[i] * s[i] * 2.0 / n;
  }
  // v is negligible outside (0, 2); extend its norm integral to a wider interval.
  for (const auto& x : grid1d(8000, -2.0, 4.0)) vn += v(x) * v(x) * 6.0 / 8000;
  const Real f_norm = std::sqrt(1.5);
  EXPECT_LE(std::sqrt(lhs), f_norm * std::sqrt(vn) * (1.0 + 1e-3));
}

TEST(Steklov, VectorValued) {
  const SmoothingSpec spec{unit_lattice(1), 0.1, 6};
  const auto s = steklov_apply(
      [](const Point& x) {
        Vector r(2);
        r << x(0), x(0) * x(0);
        return r;
      },
      spec, {Point::Constant(1, 0.5)});
  EXPECT_NEAR(s[0](0), 0.5, 1e-14);
  EXPECT_NEAR(s[0](1), 0.25 + 0.01 / 12.0, 1e-14);
}

TEST(Steklov, ReflectedFieldNeedsMargin) {
  DomainSpec dom;
  const auto mesh = build_mesh(dom, 1.0 / 32);
  const Field u = interpolate_scalar(mesh, [](const Point& x) { return std::cos(std::numbers::pi * x(0)); });
  const SmoothingSpec spec{unit_lattice(1), 0.1, 6};
  const ReflectedField ok(u, 0.1 * spec.lattice.r1 * (1.0 + 1e-9));
  EXPECT_NO_THROW(steklov_apply([&](const Point& x) { return ok.value_at(x); }, spec, {Point::Constant(1, 0.0)}));
  const ReflectedField small(u, 0.01);
  EXPECT_THROW(steklov_apply([&](const Point& x) { return small.value_at(x); }, spec, {Point::Constant(1, 0.0)}),
               ExtensionError);
}

TEST(Steklov, InvalidSpec) {
  SmoothingSpec spec{unit_lattice(1), 0.0, 6};
  EXPECT_THROW(spec.validate(), DomainError);
  spec.eps = 0.1;
  spec.order = 0;
  EXPECT_THROW(spec.validate(), DomainError);
}
