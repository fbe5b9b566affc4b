#pragma once

#include <homog/semigroup.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace homog {

/// One measured error: metric value at (eps, t) for a tagged problem.
struct ErrorRecord {
  Real eps = 0.0;
  Real t = 0.0;
  std::string metric;
  Real value = 0.0;
  std::string problem_tag;
};

struct RateFit {
  Real slope = 0.0;
  Real intercept = 0.0;
  Real residual = 0.0;  ///< max |ln e - (intercept + slope ln eps)|
  std::vector<Real> eps;
  std::vector<Real> values;
};

/// Least-squares line through (ln eps, ln error). Non-positive errors are
/// dropped with a warning; needs >= 4 distinct eps spanning a factor >= 8.
inline RateFit fit_rate(const std::vector<ErrorRecord>& records) {
  RateFit fit;
  for (const auto& r : records) {
    if (!(r.value > 0.0) || !std::isfinite(r.value)) {
      warn("fit_rate: dropping non-positive error " + std::to_string(r.value) + " at eps = " + std::to_string(r.eps));
      continue;
    }
    if (!(r.eps > 0.0)) throw FitError("fit_rate: eps must be positive");
    for (Real e : fit.eps)
      if (std::abs(e - r.eps) <= 1e-14 * r.eps) throw FitError("fit_rate: duplicate eps " + std::to_string(r.eps));
    fit.eps.push_back(r.eps);
    fit.values.push_back(r.value);
  }
  if (fit.eps.size() < 4) throw FitError("fit_rate needs at least 4 positive records, got " + std::to_string(fit.eps.size()));
  const auto [lo, hi] = std::minmax_element(fit.eps.begin(), fit.eps.end());
  if (*hi / *lo < 8.0 - 1e-12) throw FitError("fit_rate: eps values must span a factor of at least 8");

  const std::size_t n = fit.eps.size();
  Real sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Real x = std::log(fit.eps[i]);
    const Real y = std::log(fit.values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const Real nn = static_cast<Real>(n);
  fit.slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / nn;
  for (std::size_t i = 0; i < n; ++i)
    fit.residual = std::max(fit.residual, std::abs(std::log(fit.values[i]) - fit.intercept - fit.slope * std::log(fit.eps[i])));
  return fit;
}

/// Records of one metric (and optionally one variant tag) in eps-descending order.
inline std::vector<ErrorRecord> select_metric(const std::vector<ErrorRecord>& records, const std::string& metric,
                                              const std::string& tag_contains = "") {
  std::vector<ErrorRecord> out;
  for (const auto& r : records)
    if (r.metric == metric && (tag_contains.empty() || r.problem_tag.find(tag_contains) != std::string::npos))
      out.push_back(r);
  std::stable_sort(out.begin(), out.end(), [](const ErrorRecord& a, const ErrorRecord& b) { return a.eps > b.eps; });
  return out;
}

enum class ProfileName { theta, Theta, rho, sigma, alpha, tau, h_d, c_phi };

inline const char* to_string(ProfileName p) {
  switch (p) {
    case ProfileName::theta: return "theta";
    case ProfileName::Theta: return "Theta";
    case ProfileName::rho: return "rho";
    case ProfileName::sigma: return "sigma";
    case ProfileName::alpha: return "alpha";
    case ProfileName::tau: return "tau";
    case ProfileName::h_d: return "h_d";
    case ProfileName::c_phi: return "c_phi";
  }
  return "?";
}

inline ProfileName profile_from_string(const std::string& s) {
  for (ProfileName p : {ProfileName::theta, ProfileName::Theta, ProfileName::rho, ProfileName::sigma,
                        ProfileName::alpha, ProfileName::tau, ProfileName::h_d, ProfileName::c_phi})
    if (s == to_string(p)) return p;
  throw ConfigError("unknown rate profile '" + s + "'");
}

/// Named rate profile with its parameters: p for the eps profiles, (delta, d)
/// for h_d (evaluated at time t), and the angle phi for c_phi.
struct RateProfile {
  ProfileName name = ProfileName::theta;
  Real p = std::numeric_limits<Real>::infinity();
  Real delta = 1.0;
  int d = 1;
};

namespace detail {
inline bool near(Real a, Real b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }
inline Real log_factor(Real eps, Real power) { return std::pow(std::abs(std::log(eps)) + 1.0, power); }
}  // namespace detail

/// Evaluates the profile at `x`: eps for the eps profiles, t for h_d, the
/// angle phi for c_phi.
inline Real rate_profile_eval(const RateProfile& prof, Real x) {
  const Real p = prof.p;
  const Real inf = std::numeric_limits<Real>::infinity();
  auto bad_p = [&](const char* range) {
    return DomainError(std::string(to_string(prof.name)) + " requires " + range + ", got p = " + std::to_string(p));
  };
  if (prof.name != ProfileName::h_d && prof.name != ProfileName::c_phi && !(x > 0.0))
    throw DomainError("eps must be positive");
  using detail::near;
  const Real eps = x;
  switch (prof.name) {
    case ProfileName::theta:
      if (!(p > 1.0)) throw bad_p("1 < p <= inf");
      if (near(p, 2.0)) return eps * detail::log_factor(eps, 0.5);
      if (p < 2.0) return std::pow(eps, 2.0 - 2.0 / p);
      return eps;
    case ProfileName::Theta:
      if (!(p >= 1.0) || p == inf) throw bad_p("1 <= p < inf");
      if (near(p, 2.0)) return eps * detail::log_factor(eps, 0.5);
      if (p < 2.0) return eps;
      return std::pow(eps, 2.0 / p);
    case ProfileName::rho:
      if (!(p > 2.0)) throw bad_p("2 < p <= inf");
      if (near(p, 4.0)) return std::sqrt(eps) * detail::log_factor(eps, 0.75);
      if (p < 4.0) return std::pow(eps, 1.0 - 2.0 / p);
      return std::sqrt(eps);
    case ProfileName::sigma:
      if (!(p > 2.0)) throw bad_p("2 < p <= inf");
      if (p == inf) return eps * detail::log_factor(eps, 1.0);
      return std::pow(eps, 1.0 - 2.0 / p);
    case ProfileName::alpha:
      if (!(p >= 1.0) || !(p < 2.0)) throw bad_p("1 <= p < 2");
      if (near(p, 4.0 / 3.0)) return std::sqrt(eps) * detail::log_factor(eps, 0.75);
      if (p < 4.0 / 3.0) return std::sqrt(eps);
      return std::pow(eps, 2.0 / p - 1.0);
    case ProfileName::tau:
      if (!(p >= 1.0) || !(p < 2.0)) throw bad_p("1 <= p < 2");
      if (near(p, 1.0)) return eps * detail::log_factor(eps, 1.0);
      return std::pow(eps, 2.0 / p - 1.0);
    case ProfileName::h_d: {
      const Real t = x;
      if (!(t > 0.0) || !(prof.delta > 0.0)) throw DomainError("h_d requires t > 0 and delta > 0");
      if (prof.d < 1) throw DomainError("h_d requires d >= 1");
      return (1.0 / prof.delta + 1.0) / t +
             std::pow(1.0 / (prof.delta * prof.delta) + 1.0 / t, prof.d / 4.0) / std::sqrt(t);
    }
    case ProfileName::c_phi: {
      const Real phi = x;
      const Real pi = std::numbers::pi;
      if (!(phi > 0.0) || !(phi < 2.0 * pi)) throw DomainError("c(phi) requires phi in (0, 2 pi)");
      if (phi >= 0.5 * pi && phi <= 1.5 * pi) return 1.0;
      return 1.0 / std::abs(std::sin(phi));
    }
  }
  throw DomainError("unknown profile");
}

/// Conjugate exponent p' with 1/p + 1/p' = 1.
inline Real conjugate_exponent(Real p) {
  if (!(p >= 1.0)) throw DomainError("exponent must be >= 1");
  if (p == 1.0) return std::numeric_limits<Real>::infinity();
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

/// L_p((0, T)) norm of sampled values by the composite trapezoid rule on
/// |v|^p; p = inf gives the max over the samples.
inline Real time_norm(const std::vector<Real>& times, const std::vector<Real>& values, Real p) {
  if (times.empty() || times.size() != values.size()) throw DomainError("time_norm needs matching, nonempty samples");
  if (!(p >= 1.0)) throw DomainError("time_norm requires p in [1, inf]");
  if (std::isinf(p)) {
    Real m = 0.0;
    for (Real v : values) m = std::max(m, std::abs(v));
    return m;
  }
  Real acc = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k)
    acc += 0.5 * (times[k] - times[k - 1]) * (std::pow(std::abs(values[k - 1]), p) + std::pow(std::abs(values[k]), p));
  return std::pow(acc, 1.0 / p);
}

/// L_p in time of the spatial L2 or H1 norm along a trajectory.
inline Real time_norm(const Trajectory& traj, Real p, NormKind kind) {
  std::vector<Real> values;
  values.reserve(traj.size());
  for (const auto& u : traj.states) values.push_back(norm(u, kind));
  return time_norm(traj.times, values, p);
}

}  // namespace homog
