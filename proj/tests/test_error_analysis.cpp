#include <homog/error_analysis.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace homog;

namespace {

const Real kInf = std::numeric_limits<Real>::infinity();

std::vector<ErrorRecord> power_law(Real c, Real slope, std::vector<Real> eps) {
  std::vector<ErrorRecord> out;
  for (Real e : eps) out.push_back({e, 0.0, "L2", c * std::pow(e, slope), "x"});
  return out;
}

Real profile(ProfileName n, Real p, Real eps) {
  RateProfile r;
  r.name = n;
  r.p = p;
  return rate_profile_eval(r, eps);
}

}  // namespace

TEST(FitRate, RecoversExactPowerLaw) {
  const auto fit = fit_rate(power_law(3.0, 1.5, {0.1, 0.05, 0.025, 0.0125}));
  EXPECT_NEAR(fit.slope, 1.5, 1e-12);
  EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-12);
  EXPECT_LT(fit.residual, 1e-12);
}

TEST(FitRate, NoisyDataStaysClose) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<Real> u(-0.05, 0.05);
  for (int k = 0; k < 20; ++k) {
    auto recs = power_law(1.0, 1.0, {0.2, 0.1, 0.05, 0.025, 0.0125});
    for (auto& r : recs) r.value *= std::exp(u(rng));
    const auto fit = fit_rate(recs);
    EXPECT_NEAR(fit.slope, 1.0, 0.1);
    EXPECT_LE(fit.residual, 0.1);
  }
}

TEST(FitRate, RejectsInsufficientData) {
  EXPECT_THROW(fit_rate(power_law(1.0, 1.0, {0.1, 0.05, 0.025})), FitError);
  EXPECT_THROW(fit_rate(power_law(1.0, 1.0, {0.1, 0.08, 0.06, 0.05})), FitError);
  EXPECT_THROW(fit_rate(power_law(1.0, 1.0, {0.1, 0.1, 0.025, 0.0125})), FitError);
  auto recs = power_law(1.0, 1.0, {0.1, 0.05, 0.025, 0.0125});
  recs[1].value = 0.0;
  set_warnings_enabled(false);
  EXPECT_THROW(fit_rate(recs), FitError);
  recs.push_back({0.00625, 0.0, "L2", 0.00625, "x"});
  EXPECT_NEAR(fit_rate(recs).slope, 1.0, 1e-12);
  set_warnings_enabled(true);
}

TEST(SelectMetric, FiltersAndSorts) {
  std::vector<ErrorRecord> recs{{0.05, 0, "L2", 1, "a;variant=plain"},
                                {0.1, 0, "L2", 2, "a;variant=smoothed"},
                                {0.1, 0, "L2", 3, "a;variant=plain"},
                                {0.1, 0, "H1", 4, "a;variant=plain"}};
  const auto s = select_metric(recs, "L2", "variant=plain");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s[0].eps, 0.1);
  EXPECT_DOUBLE_EQ(s[1].eps, 0.05);
}

TEST(Profiles, LogarithmicCases) {
  const Real l = std::log(10.0) + 1.0;
  EXPECT_NEAR(profile(ProfileName::theta, 2.0, 0.1), 0.1 * std::sqrt(l), 1e-15);
  EXPECT_NEAR(profile(ProfileName::theta, 2.0, 0.1), 0.181730, 1e-6);
  EXPECT_NEAR(profile(ProfileName::Theta, 2.0, 0.1), 0.181730, 1e-6);
  EXPECT_NEAR(profile(ProfileName::rho, 4.0, 0.1), std::sqrt(0.1) * std::pow(l, 0.75), 1e-15);
  EXPECT_NEAR(profile(ProfileName::sigma, kInf, 0.1), 0.1 * l, 1e-15);
  EXPECT_NEAR(profile(ProfileName::alpha, 4.0 / 3.0, 0.1), std::sqrt(0.1) * std::pow(l, 0.75), 1e-15);
  EXPECT_NEAR(profile(ProfileName::tau, 1.0, 0.1), 0.1 * l, 1e-15);
}

TEST(Profiles, PowerCases) {
  const Real e = 0.01;
  EXPECT_NEAR(profile(ProfileName::theta, 1.5, e), std::pow(e, 2.0 / 3.0), 1e-15);
  EXPECT_DOUBLE_EQ(profile(ProfileName::theta, 3.0, e), e);
  EXPECT_DOUBLE_EQ(profile(ProfileName::theta, kInf, e), e);
  EXPECT_DOUBLE_EQ(profile(ProfileName::Theta, 1.5, e), e);
  EXPECT_NEAR(profile(ProfileName::Theta, 4.0, e), 0.1, 1e-15);
  EXPECT_NEAR(profile(ProfileName::rho, 3.0, e), std::pow(e, 1.0 / 3.0), 1e-15);
  EXPECT_NEAR(profile(ProfileName::rho, kInf, e), 0.1, 1e-15);
  EXPECT_NEAR(profile(ProfileName::sigma, 4.0, e), 0.1, 1e-15);
  EXPECT_NEAR(profile(ProfileName::alpha, 1.0, e), 0.1, 1e-15);
  EXPECT_NEAR(profile(ProfileName::alpha, 1.6, e), std::pow(e, 0.25), 1e-15);
  EXPECT_NEAR(profile(ProfileName::tau, 1.5, e), std::pow(e, 1.0 / 3.0), 1e-15);
}

TEST(Profiles, ContinuousAcrossThresholdsUpToLogFactor) {
  // Away from the log point the exponents meet: theta at p -> 2 from below tends to eps.
  EXPECT_NEAR(profile(ProfileName::theta, 2.0 - 1e-9, 0.1), 0.1, 1e-8);
  EXPECT_NEAR(profile(ProfileName::Theta, 2.0 + 1e-9, 0.1), 0.1, 1e-8);
  EXPECT_NEAR(profile(ProfileName::rho, 4.0 - 1e-9, 0.1), std::sqrt(0.1), 1e-8);
}

TEST(Profiles, MonotoneInEps) {
  for (auto [n, p] : std::vector<std::pair<ProfileName, Real>>{{ProfileName::theta, 2.0},
                                                               {ProfileName::Theta, 3.0},
                                                               {ProfileName::rho, 4.0},
                                                               {ProfileName::sigma, kInf},
                                                               {ProfileName::alpha, 1.2},
                                                               {ProfileName::tau, 1.0}}) {
    Real prev = 0.0;
    for (Real e : {0.001, 0.01, 0.1, 0.3}) {
      const Real v = profile(n, p, e);
      EXPECT_GT(v, prev) << to_string(n);
      prev = v;
    }
  }
}

TEST(Profiles, RejectsOutOfRangeExponents) {
  EXPECT_THROW(profile(ProfileName::theta, 1.0, 0.1), DomainError);
  EXPECT_THROW(profile(ProfileName::Theta, kInf, 0.1), DomainError);
  EXPECT_THROW(profile(ProfileName::rho, 2.0, 0.1), DomainError);
  EXPECT_THROW(profile(ProfileName::sigma, 2.0, 0.1), DomainError);
  EXPECT_THROW(profile(ProfileName::alpha, 2.0, 0.1), DomainError);
  EXPECT_THROW(profile(ProfileName::tau, 0.5, 0.1), DomainError);
  EXPECT_THROW(profile(ProfileName::theta, 2.0, 0.0), DomainError);
  EXPECT_THROW(profile_from_string("omega"), ConfigError);
  EXPECT_EQ(profile_from_string("Theta"), ProfileName::Theta);
}

TEST(Profiles, InteriorBlowup) {
  RateProfile r;
  r.name = ProfileName::h_d;
  r.delta = 1.0;
  r.d = 2;
  EXPECT_NEAR(rate_profile_eval(r, 1.0), 2.0 + std::sqrt(2.0), 1e-14);
  r.d = 1;
  EXPECT_NEAR(rate_profile_eval(r, 1.0), 2.0 + std::pow(2.0, 0.25), 1e-14);
  EXPECT_GT(rate_profile_eval(r, 0.01), rate_profile_eval(r, 0.1));
  r.delta = 0.0;
  EXPECT_THROW(rate_profile_eval(r, 1.0), DomainError);
}

TEST(Profiles, SectorConstant) {
  const Real pi = std::numbers::pi;
  RateProfile r;
  r.name = ProfileName::c_phi;
  EXPECT_DOUBLE_EQ(rate_profile_eval(r, pi), 1.0);
  EXPECT_DOUBLE_EQ(rate_profile_eval(r, 0.5 * pi), 1.0);
  EXPECT_NEAR(rate_profile_eval(r, pi / 6.0), 2.0, 1e-14);
  EXPECT_NEAR(rate_profile_eval(r, 2.0 * pi - pi / 6.0), 2.0, 1e-12);
  EXPECT_THROW(rate_profile_eval(r, 0.0), DomainError);
}

TEST(ConjugateExponent, Values) {
  EXPECT_EQ(conjugate_exponent(1.0), kInf);
  EXPECT_EQ(conjugate_exponent(kInf), 1.0);
  EXPECT_DOUBLE_EQ(conjugate_exponent(2.0), 2.0);
  EXPECT_DOUBLE_EQ(conjugate_exponent(4.0), 4.0 / 3.0);
  EXPECT_THROW(conjugate_exponent(0.5), DomainError);
}

TEST(TimeNorm, ClosedForms) {
  const std::vector<Real> t{0.0, 0.5, 1.0, 2.0};
  const std::vector<Real> c(4, 3.0);
  EXPECT_NEAR(time_norm(t, c, 1.0), 6.0, 1e-14);
  EXPECT_NEAR(time_norm(t, c, 2.0), 3.0 * std::sqrt(2.0), 1e-14);
  EXPECT_DOUBLE_EQ(time_norm(t, {1.0, -4.0, 2.0, 0.0}, kInf), 4.0);
  std::vector<Real> tt, v;
  for (int k = 0; k <= 40000; ++k) {
    tt.push_back(40.0 * k / 40000);
    v.push_back(std::exp(-tt.back()));
  }
  EXPECT_NEAR(time_norm(tt, v, 1.0), 1.0, 1e-6);
  EXPECT_NEAR(time_norm(tt, v, 2.0), std::sqrt(0.5), 1e-6);
  EXPECT_THROW(time_norm(t, {1.0}, 2.0), DomainError);
  EXPECT_THROW(time_norm(t, c, 0.5), DomainError);
}

TEST(TimeNorm, AlongTrajectory) {
  DomainSpec dom;
  const auto mesh = build_mesh(dom, 1.0 / 64);
  const auto op =
      assemble_operator(OperatorCoefficient::effective(Matrix::Identity(1, 1)), gradient_symbol(1), BoundaryKind::dirichlet, mesh);
  const Field phi = interpolate_scalar(mesh, [](const Point& x) { return std::sin(std::numbers::pi * x(0)); });
  const auto traj = duhamel_solve(op, phi, SourceTerm::zero(), TimeGrid::uniform(1.0, 2000));
  const Real lam = op.lambda_min();
  const Real n0 = norm(phi, NormKind::L2);
  EXPECT_NEAR(time_norm(traj, kInf, NormKind::L2), n0, 1e-14);
  EXPECT_NEAR(time_norm(traj, 1.0, NormKind::L2), n0 * (1.0 - std::exp(-lam)) / lam, 1e-5);
}
