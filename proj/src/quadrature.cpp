#include "glenn/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace glenn {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1;
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

QuadratureRule triangle_rule(int degree) {
  if (degree < 0) throw std::invalid_argument("triangle_rule: negative degree");
  // The collapse map adds one degree in the radial variable.
  const int n = (degree + 2 + 1) / 2;
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule rule;
  rule.degree = 2 * n - 2;
  for (int i = 0; i < n; ++i) {
    const double s = 0.5 * (x[i] + 1.0);
    for (int j = 0; j < n; ++j) {
      const double t = 0.5 * (x[j] + 1.0);
      // (s, t) in the unit square -> (xi, eta) = (s, t (1 - s)).
      const double xi = s;
      const double eta = t * (1.0 - s);
      rule.points.push_back({1.0 - xi - eta, xi, eta});
      rule.weights.push_back(0.25 * w[i] * w[j] * (1.0 - s));
    }
  }
  return rule;
}

}  // namespace glenn
