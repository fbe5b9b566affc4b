#pragma once

#include <homog/types.hpp>

#include <cmath>
#include <numbers>
#include <vector>

namespace homog {

struct QuadratureRule {
  std::vector<Real> nodes;
  std::vector<Real> weights;
};

/// Gauss-Legendre rule with q points on (-1/2, 1/2); weights sum to 1.
inline QuadratureRule gauss_legendre_centered(int q) {
  if (q < 1) throw DomainError("quadrature order must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(q));
  rule.weights.resize(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) {
    // Newton on P_q starting from the Chebyshev-like guess.
    Real x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    Real dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      Real p0 = 1.0;
      Real p1 = x;
      for (int k = 2; k <= q; ++k) {
        const Real p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (q == 1) p0 = 1.0;
      const Real p = q == 1 ? x : p1;
      dp = q * (x * p - p0) / (x * x - 1.0);
      if (q == 1) dp = 1.0;
      const Real dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const Real w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = 0.5 * x;
    rule.weights[static_cast<std::size_t>(i)] = 0.5 * w;
  }
  return rule;
}

}  // namespace homog
