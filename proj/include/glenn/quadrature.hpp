#pragma once

#include <array>
#include <vector>

namespace glenn {

/// Quadrature on the reference triangle (area 1/2) in barycentric form.
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;  // barycentric (l0, l1, l2)
  std::vector<double> weights;                // sum to 1/2
  int degree = 0;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Collapsed (Duffy) tensor-product Gauss rule exact for polynomials of
/// total degree <= `degree`.
QuadratureRule triangle_rule(int degree);

/// Two-point Gauss rule on [0, 1] (used for edge tangential moments).
inline constexpr std::array<double, 2> kEdgeGaussPoints = {0.21132486540518711775,
                                                           0.78867513459481288225};

}  // namespace glenn
