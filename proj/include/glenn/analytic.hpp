#pragma once

#include <array>
#include <functional>
#include <utility>

#include <Eigen/Core>

#include "glenn/fem.hpp"

namespace glenn {

using Mat2 = Eigen::Matrix2d;

/// Complex field with its gradient.
struct AnalyticOrder {
  ComplexFunction value;
  std::function<std::array<Complex, 2>(const Vec2&)> gradient;
};

/// Vector field with its Jacobian J(i, j) = d A_i / d x_j.
struct AnalyticPotential {
  VectorFunction value;
  std::function<Mat2(const Vec2&)> jacobian;
};

/// Scalar gauge function with gradient and Hessian.
struct AnalyticScalar {
  ScalarFunction value;
  VectorFunction gradient;
  std::function<Mat2(const Vec2&)> hessian;
};

enum class Domain { UnitSquare, LShape };

/// Heuristic start phi_j = psi_j o chi, chi(x) = (2 x1 - 1, 2 x2 - 1), j in 1..5.
/// On the L-shape the same functions are used restricted to the domain.
AnalyticOrder initial_value(int j, Domain domain = Domain::UnitSquare);

/// h(x) = 2 sqrt(2) pi sin(pi x1) sin(pi x2).
ScalarFunction standard_h_ext();

/// A(x) = sqrt(2) (sin(pi x1) cos(pi x2), -cos(pi x1) sin(pi x2)); div A = 0, curl A = h.
AnalyticPotential standard_fixed_A();

/// (u, A) -> (exp(i kappa phi) u, A + grad phi).
std::pair<AnalyticOrder, AnalyticPotential> gauge_transform(const AnalyticOrder& u,
                                                            const AnalyticPotential& A,
                                                            const AnalyticScalar& phi,
                                                            double kappa);

/// Constant fields, handy for tests and the CLI.
AnalyticOrder constant_order(Complex value);
AnalyticPotential zero_potential();

}  // namespace glenn
