#include "wavepalm/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace wavepalm {

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  QuadratureRule rule{Vec(n), Vec(n)};
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

QuadratureRule composite_gauss_legendre(std::span<const double> breaks, int points_per_panel) {
  if (breaks.size() < 2) throw DomainError("composite_gauss_legendre: need at least two breaks");
  const auto panels = static_cast<Index>(breaks.size() - 1);
  QuadratureRule rule{Vec(panels * points_per_panel), Vec(panels * points_per_panel)};
  for (Index p = 0; p < panels; ++p) {
    if (!(breaks[p + 1] > breaks[p])) throw DomainError("composite_gauss_legendre: breaks must increase");
    const auto panel = gauss_legendre(points_per_panel, breaks[p], breaks[p + 1]);
    rule.nodes.segment(p * points_per_panel, points_per_panel) = panel.nodes;
    rule.weights.segment(p * points_per_panel, points_per_panel) = panel.weights;
  }
  return rule;
}

QuadratureRule gauss_legendre_tail(int panels, int points_per_panel, double a) {
  if (!(a > 0.0)) throw DomainError("gauss_legendre_tail: lower limit must be positive");
  std::vector<double> breaks(panels + 1);
  // panels graded toward y = 0 (x = inf), where the transformed integrand is flattest
  for (int p = 0; p <= panels; ++p) breaks[p] = std::pow(static_cast<double>(p) / panels, 2.0);
  auto rule = composite_gauss_legendre(breaks, points_per_panel);
  for (Index k = 0; k < rule.size(); ++k) {
    const double y = rule.nodes[k];
    rule.nodes[k] = a / y;
    rule.weights[k] *= a / (y * y);
  }
  return rule;
}

}  // namespace wavepalm
