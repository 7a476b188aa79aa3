#include "glenn/analytic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace glenn {

namespace {

using std::numbers::pi;
const Complex kI(0.0, 1.0);
const Complex kAlpha = Complex(1.0, 1.0) / std::sqrt(2.0);

Vec2 chi(const Vec2& x) { return {2.0 * x.x() - 1.0, 2.0 * x.y() - 1.0}; }

// psi_j and its gradient with respect to y = chi(x).
struct Psi {
  Complex value;
  std::array<Complex, 2> grad;
};

Psi psi(int j, const Vec2& y) {
  const double r2 = y.squaredNorm();
  const Complex z(y.x(), y.y());
  switch (j) {
    case 1: {
      const Complex v = kAlpha * std::exp(-r2);
      return {v, {-2.0 * y.x() * v, -2.0 * y.y() * v}};
    }
    case 2: {
      const double g = std::exp(-r2) / std::sqrt(pi);
      const Complex p = 2.0 / 3.0 * z + 0.5;
      return {p * g, {(2.0 / 3.0 - 2.0 * y.x() * p) * g, (2.0 / 3.0 * kI - 2.0 * y.y() * p) * g}};
    }
    case 3: {
      const Complex v = kAlpha * std::exp(10.0 * kI * r2);
      return {v, {20.0 * kI * y.x() * v, 20.0 * kI * y.y() * v}};
    }
    case 4: {
      const Complex e = kAlpha * std::exp(10.0 * kI * r2);
      return {z * e, {e * (1.0 + z * 20.0 * kI * y.x()), e * (kI + z * 20.0 * kI * y.y())}};
    }
    case 5:
      return {kAlpha, {Complex(0.0), Complex(0.0)}};
    default:
      throw std::invalid_argument("initial_value: index " + std::to_string(j) + " not in 1..5");
  }
}

}  // namespace

AnalyticOrder initial_value(int j, Domain /*domain*/) {
  if (j < 1 || j > 5) {
    throw std::invalid_argument("initial_value: index " + std::to_string(j) + " not in 1..5");
  }
  AnalyticOrder f;
  f.value = [j](const Vec2& x) { return psi(j, chi(x)).value; };
  f.gradient = [j](const Vec2& x) {
    const auto g = psi(j, chi(x)).grad;
    return std::array<Complex, 2>{2.0 * g[0], 2.0 * g[1]};
  };
  return f;
}

ScalarFunction standard_h_ext() {
  return [](const Vec2& x) {
    return 2.0 * std::sqrt(2.0) * pi * std::sin(pi * x.x()) * std::sin(pi * x.y());
  };
}

AnalyticPotential standard_fixed_A() {
  AnalyticPotential A;
  A.value = [](const Vec2& x) {
    const double s = std::sqrt(2.0);
    return Vec2(s * std::sin(pi * x.x()) * std::cos(pi * x.y()),
                -s * std::cos(pi * x.x()) * std::sin(pi * x.y()));
  };
  A.jacobian = [](const Vec2& x) {
    const double s = std::sqrt(2.0) * pi;
    const double s1 = std::sin(pi * x.x());
    const double c1 = std::cos(pi * x.x());
    const double s2 = std::sin(pi * x.y());
    const double c2 = std::cos(pi * x.y());
    Mat2 J;
    J << s * c1 * c2, -s * s1 * s2, s * s1 * s2, -s * c1 * c2;
    return J;
  };
  return A;
}

std::pair<AnalyticOrder, AnalyticPotential> gauge_transform(const AnalyticOrder& u,
                                                            const AnalyticPotential& A,
                                                            const AnalyticScalar& phi,
                                                            double kappa) {
  AnalyticOrder u2;
  u2.value = [u, phi, kappa](const Vec2& x) { return std::exp(kI * kappa * phi.value(x)) * u.value(x); };
  u2.gradient = [u, phi, kappa](const Vec2& x) {
    const Complex phase = std::exp(kI * kappa * phi.value(x));
    const Complex v = u.value(x);
    const auto g = u.gradient(x);
    const Vec2 gp = phi.gradient(x);
    return std::array<Complex, 2>{phase * (g[0] + kI * kappa * gp.x() * v),
                                  phase * (g[1] + kI * kappa * gp.y() * v)};
  };
  AnalyticPotential A2;
  A2.value = [A, phi](const Vec2& x) { return Vec2(A.value(x) + phi.gradient(x)); };
  A2.jacobian = [A, phi](const Vec2& x) { return Mat2(A.jacobian(x) + phi.hessian(x)); };
  return {u2, A2};
}

AnalyticOrder constant_order(Complex value) {
  AnalyticOrder f;
  f.value = [value](const Vec2&) { return value; };
  f.gradient = [](const Vec2&) { return std::array<Complex, 2>{Complex(0.0), Complex(0.0)}; };
  return f;
}

AnalyticPotential zero_potential() {
  AnalyticPotential A;
  A.value = [](const Vec2&) { return Vec2(Vec2::Zero()); };
  A.jacobian = [](const Vec2&) { return Mat2(Mat2::Zero()); };
  return A;
}

}  // namespace glenn
