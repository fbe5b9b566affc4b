#include <homog/cell_solver.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace homog;

namespace {

const Real kPi = std::numbers::pi;

Real min_eig(const Matrix& a) { return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (a + a.transpose())).eigenvalues().minCoeff(); }

}  // namespace

TEST(CellProblem, ConstantCoefficientHasNoCorrector) {
  const auto g = constant_coefficient(unit_lattice(2), 3.0 * Matrix::Identity(2, 2));
  const auto sol = solve_cell_problem(g, gradient_symbol(2), 16);
  EXPECT_LT(sol.lambda.norm(), 1e-12);
  EXPECT_LT((sol.g_eff - 3.0 * Matrix::Identity(2, 2)).norm(), 1e-12);
  EXPECT_LT(sol.g_tilde_deviation(), 1e-12);
  EXPECT_LT(sol.lambda_h1, 1e-10);
}

TEST(CellProblem, OneDimensionalHarmonicMean) {
  // g0 = (int 1/g)^{-1} = sqrt(3) for g = 2 + sin 2 pi y.
  const auto g = sinusoid_coefficient(unit_lattice(1), 1, 2.0, 1.0, {1}, 1024);
  const auto sol = solve_cell_problem(g, gradient_symbol(1), 1024);
  EXPECT_NEAR(sol.g_eff(0, 0), std::sqrt(3.0), 1e-5);
  EXPECT_LE(sol.residual, 1e-10);
}

TEST(CellProblem, OneDimensionalLambdaDerivativeMatchesClosedForm) {
  // Lambda' = g0 / g - 1 on each element.
  const int n = 256;
  const auto g = sinusoid_coefficient(unit_lattice(1), 1, 2.0, 1.0, {1}, n);
  const auto sol = solve_cell_problem(g, gradient_symbol(1), n);
  const auto& els = sol.grid->elements();
  Real worst = 0.0;
  for (std::size_t e = 0; e < els.size(); ++e) {
    const Real slope = els[e].gradient(sol.lambda.col(0), 1)(0, 0);
    const Real ge = sol.g_element[e](0, 0);
    worst = std::max(worst, std::abs(slope - (sol.g_eff(0, 0) / ge - 1.0)));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(CellProblem, LambdaH1MatchesQuadratureOfClosedForm) {
  const int n = 512;
  const auto g = sinusoid_coefficient(unit_lattice(1), 1, 2.0, 1.0, {1}, n);
  const auto sol = solve_cell_problem(g, gradient_symbol(1), n);
  // Lambda' = sqrt(3)/g - 1, Lambda = zero-mean antiderivative; midpoint quadrature on a fine grid.
  const int q = 200000;
  std::vector<Real> lam(q), dl(q);
  Real acc = 0.0;
  for (int k = 0; k < q; ++k) {
    const Real y = (k + 0.5) / q;
    dl[static_cast<std::size_t>(k)] = std::sqrt(3.0) / (2.0 + std::sin(2.0 * kPi * y)) - 1.0;
    acc += dl[static_cast<std::size_t>(k)] / q;
    lam[static_cast<std::size_t>(k)] = acc;
  }
  Real mean = 0.0;
  for (Real v : lam) mean += v / q;
  Real h1 = 0.0;
  for (int k = 0; k < q; ++k)
    h1 += (std::pow(lam[static_cast<std::size_t>(k)] - mean, 2) + std::pow(dl[static_cast<std::size_t>(k)], 2)) / q;
  EXPECT_NEAR(sol.lambda_h1, std::sqrt(h1), 1e-4);
}

TEST(CellProblem, LaminateGivesHarmonicAndArithmeticMeans) {
  // Layers across axis 0: g0 = diag(harmonic, arithmetic) for values {1, 4}.
  const auto g = laminate_coefficient(unit_lattice(2), 2, {1.0, 4.0}, {}, 0, 32);
  const auto sol = solve_cell_problem(g, gradient_symbol(2), 32);
  EXPECT_NEAR(sol.g_eff(0, 0), 1.6, 1e-9);
  EXPECT_NEAR(sol.g_eff(1, 1), 2.5, 1e-9);
  EXPECT_NEAR(sol.g_eff(0, 1), 0.0, 1e-9);
  const auto sc = classify_special_case(sol, 1e-8);
  EXPECT_FALSE(sc.effective_equals_bar);
  EXPECT_FALSE(sc.effective_equals_under);
}

TEST(CellProblem, CheckerboardMatchesGeometricMean) {
  // Two-phase checkerboard: g0 = sqrt(a b) 1 (Dykhne), approached as the grid is refined.
  Real previous = 1e9;
  for (int n : {16, 32, 64}) {
    const auto g = checkerboard_coefficient(unit_lattice(2), 2, 1.0, 4.0, n);
    const auto sol = solve_cell_problem(g, gradient_symbol(2), n);
    const Real err = std::abs(sol.g_eff(0, 0) - 2.0);
    EXPECT_LT(err, previous);
    previous = err;
    EXPECT_NEAR(sol.g_eff(0, 0), sol.g_eff(1, 1), 1e-9);
    EXPECT_EQ(classify_special_case(sol, 1e-6).label(), "generic");
  }
  EXPECT_LT(previous, 0.05);
}

TEST(CellProblem, IterativeAndDirectSolversAgree) {
  const auto g = sinusoid_coefficient(unit_lattice(2), 2, 3.0, 1.0, {1, 1}, 32);
  CellSolverOptions direct, cg;
  direct.direct_max_resolution = 64;
  cg.direct_max_resolution = 0;
  const auto a = solve_cell_problem(g, gradient_symbol(2), 32, direct);
  const auto b = solve_cell_problem(g, gradient_symbol(2), 32, cg);
  EXPECT_NE(a.method, b.method);
  EXPECT_LT((a.g_eff - b.g_eff).norm(), 1e-9);
  EXPECT_LT((a.lambda - b.lambda).norm() / a.lambda.norm(), 1e-8);
}

TEST(CellProblem, InvariantsOnTwoDimensionalSolve) {
  const auto g = sinusoid_coefficient(unit_lattice(2), 2, 3.0, 2.0, {1, 2}, 32);
  const auto sol = solve_cell_problem(g, gradient_symbol(2), 32);
  EXPECT_LE(sol.residual, 1e-10);
  EXPECT_LE(sol.lambda_mean, 1e-10 * std::max(1.0, sol.lambda.norm()));
  // |Omega|^{-1} int g~ = g0
  Matrix avg = Matrix::Zero(2, 2);
  for (std::size_t e = 0; e < sol.g_tilde.size(); ++e) avg += sol.grid->elements()[e].measure * sol.g_tilde[e];
  EXPECT_LT((avg - sol.g_eff).norm(), 1e-12);
  EXPECT_LT((sol.g_eff - sol.g_eff.transpose()).norm(), 1e-10);
  EXPECT_GT(min_eig(sol.g_eff), 0.0);
}

TEST(CellProblem, ResolutionConvergenceIsMonotone) {
  const auto lat = unit_lattice(2);
  auto g_at = [&](int n) {
    const auto g = sinusoid_coefficient(lat, 2, 3.0, 2.0, {1, 1}, n);
    return solve_cell_problem(g, gradient_symbol(2), n).g_eff;
  };
  const Matrix g32 = g_at(32), g64 = g_at(64), g128 = g_at(128);
  EXPECT_LT((g64 - g128).norm(), (g32 - g64).norm());
}

TEST(CellProblem, RejectsCoarseOrMismatchedInput) {
  const auto g = constant_coefficient(unit_lattice(1), Matrix::Identity(1, 1));
  EXPECT_THROW(solve_cell_problem(g, gradient_symbol(1), 4), DomainError);
  EXPECT_THROW(solve_cell_problem(g, gradient_symbol(2), 16), EllipticityError);
}

TEST(VoigtReuss, ClosedForms) {
  {
    const auto g = constant_coefficient(unit_lattice(1), Matrix::Constant(1, 1, 5.0));
    const auto [lo, hi] = voigt_reuss(g);
    EXPECT_NEAR(lo(0, 0), 5.0, 1e-14);
    EXPECT_NEAR(hi(0, 0), 5.0, 1e-14);
  }
  {
    const auto g = sinusoid_coefficient(unit_lattice(1), 1, 2.0, 1.0, {1}, 1024);
    const auto [lo, hi] = voigt_reuss(g);
    EXPECT_NEAR(lo(0, 0), std::sqrt(3.0), 1e-8);
    EXPECT_NEAR(hi(0, 0), 2.0, 1e-12);
  }
  {
    const auto g = laminate_coefficient(unit_lattice(1), 1, {1.0, 4.0}, {}, 0, 64);
    const auto [lo, hi] = voigt_reuss(g);
    EXPECT_NEAR(lo(0, 0), 1.6, 1e-12);
    EXPECT_NEAR(hi(0, 0), 2.5, 1e-12);
  }
}

TEST(VoigtReuss, BracketHoldsOnRandomCoefficients) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<Real> amp(0.1, 0.9);
  std::uniform_int_distribution<int> mode(1, 3);
  for (int k = 0; k < 20; ++k) {
    const bool two_d = k % 2 == 1;
    const auto lat = unit_lattice(two_d ? 2 : 1);
    const int d = two_d ? 2 : 1;
    const Real mean = 2.0;
    const auto g = sinusoid_coefficient(lat, d, mean, mean * amp(rng), {mode(rng), mode(rng)}, two_d ? 24 : 64);
    const auto sol = solve_cell_problem(g, gradient_symbol(d), two_d ? 24 : 64);
    EXPECT_GE(min_eig(sol.g_eff - sol.g_under), -1e-8);
    EXPECT_GE(min_eig(sol.g_bar - sol.g_eff), -1e-8);
    EXPECT_TRUE(lambda_bound_check(sol, g, gradient_symbol(d)).pass);
  }
}

TEST(SpecialCases, Classification) {
  {
    const auto g = constant_coefficient(unit_lattice(1), Matrix::Constant(1, 1, 2.0));
    const auto sc = classify_special_case(solve_cell_problem(g, gradient_symbol(1), 16), 1e-8);
    EXPECT_TRUE(sc.effective_equals_bar);
    EXPECT_TRUE(sc.effective_equals_under);
    EXPECT_TRUE(sc.consistent());
    EXPECT_EQ(sc.label(), "effective_equals_bar+effective_equals_under");
  }
  {
    const auto g = sinusoid_coefficient(unit_lattice(1), 1, 2.0, 1.0, {1}, 64);
    const auto sol = solve_cell_problem(g, gradient_symbol(1), 64);
    const auto sc = classify_special_case(sol, 1e-8);
    EXPECT_EQ(sc.label(), "effective_equals_under");
    EXPECT_TRUE(sc.consistent());
    EXPECT_LT(sol.g_tilde_deviation(), 1e-8);
  }
}

TEST(LambdaBound, ConstantGivesZero) {
  const auto g = constant_coefficient(unit_lattice(2), 2.0 * Matrix::Identity(2, 2));
  const auto c = lambda_bound_check(solve_cell_problem(g, gradient_symbol(2), 16), g, gradient_symbol(2));
  EXPECT_LE(c.lambda_h1, 1e-10);
  EXPECT_TRUE(c.pass);
  // M = (|Omega| (1 + (2 r0)^{-2}) m / alpha0 ||g|| ||g^{-1}||)^{1/2} = (2 * 2)^{1/2}
  EXPECT_NEAR(c.M_bound, 2.0, 1e-12);
}
