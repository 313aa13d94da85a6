#pragma once

#include "wavepalm/types.hpp"

#include <span>
#include <vector>

namespace wavepalm {

/// Nodes and weights of a quadrature rule, stored side by side.
struct QuadratureRule {
  Vec nodes;
  Vec weights;

  Index size() const { return nodes.size(); }
  template <typename F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (Index k = 0; k < nodes.size(); ++k) sum += weights[k] * f(nodes[k]);
    return sum;
  }
};

/// n-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Composite Gauss-Legendre: `points_per_panel` nodes on every panel between
/// consecutive entries of `breaks` (which must be increasing).
QuadratureRule composite_gauss_legendre(std::span<const double> breaks, int points_per_panel);

/// Gauss-Legendre rule for [a, inf) after the substitution x = a / y, y in (0, 1].
/// Valid for integrands decaying faster than 1/x.
QuadratureRule gauss_legendre_tail(int panels, int points_per_panel, double a);

}  // namespace wavepalm
