#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <random>

#include "glenn/analytic.hpp"
#include "glenn/fem.hpp"
#include "glenn/gl_core.hpp"
#include "glenn/mesh.hpp"

namespace glenn::test {

inline std::shared_ptr<const Mesh2D> square(int n) {
  return std::make_shared<const Mesh2D>(generate_unit_square(n));
}

inline std::shared_ptr<const Mesh2D> lshape(int n) {
  return std::make_shared<const Mesh2D>(generate_l_shape(n));
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

inline OrderField random_order(const Discretization& disc, std::mt19937_64& rng, double scale = 1.0) {
  return OrderField(random_vector(static_cast<Eigen::Index>(2 * disc.num_order_nodes()), rng, scale));
}

inline PotentialField random_potential(const Discretization& disc, std::mt19937_64& rng, double scale = 1.0) {
  return PotentialField(random_vector(static_cast<Eigen::Index>(disc.num_potential_dofs()), rng, scale));
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

/// Observed convergence order of two errors at steps h and h / 10.
inline double observed_order(double err_coarse, double err_fine) {
  return std::log10(err_coarse / err_fine);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// c0 + c1 sin(a . x) + c2 cos(b . x) with random complex c and real a, b.
inline AnalyticOrder random_smooth_order(std::mt19937_64& rng) {
  std::array<Complex, 3> c;
  for (auto& v : c) v = Complex(uniform(rng, -1, 1), uniform(rng, -1, 1));
  const Vec2 a(uniform(rng, -3, 3), uniform(rng, -3, 3));
  const Vec2 b(uniform(rng, -3, 3), uniform(rng, -3, 3));
  AnalyticOrder u;
  u.value = [=](const Vec2& x) { return c[0] + c[1] * std::sin(a.dot(x)) + c[2] * std::cos(b.dot(x)); };
  u.gradient = [=](const Vec2& x) {
    const Complex s = c[1] * std::cos(a.dot(x));
    const Complex t = -c[2] * std::sin(b.dot(x));
    return std::array<Complex, 2>{s * a.x() + t * b.x(), s * a.y() + t * b.y()};
  };
  return u;
}

/// (p0 + p1 sin(q x2), r0 + r1 cos(s . x)).
inline AnalyticPotential random_smooth_potential(std::mt19937_64& rng) {
  const double p0 = uniform(rng, -1, 1);
  const double p1 = uniform(rng, -1, 1);
  const double q = uniform(rng, -3, 3);
  const double r0 = uniform(rng, -1, 1);
  const double r1 = uniform(rng, -1, 1);
  const Vec2 s(uniform(rng, -3, 3), uniform(rng, -3, 3));
  AnalyticPotential A;
  A.value = [=](const Vec2& x) { return Vec2(p0 + p1 * std::sin(q * x.y()), r0 + r1 * std::cos(s.dot(x))); };
  A.jacobian = [=](const Vec2& x) {
    Eigen::Matrix2d J;
    const double d = -r1 * std::sin(s.dot(x));
    J << 0.0, p1 * q * std::cos(q * x.y()), d * s.x(), d * s.y();
    return J;
  };
  return A;
}

/// g1 x1 x2 + g2 sin(g3 x1) + g4 x2^2.
inline AnalyticScalar random_gauge(std::mt19937_64& rng) {
  const double g1 = uniform(rng, -1, 1);
  const double g2 = uniform(rng, -1, 1);
  const double g3 = uniform(rng, -3, 3);
  const double g4 = uniform(rng, -1, 1);
  AnalyticScalar phi;
  phi.value = [=](const Vec2& x) { return g1 * x.x() * x.y() + g2 * std::sin(g3 * x.x()) + g4 * x.y() * x.y(); };
  phi.gradient = [=](const Vec2& x) {
    return Vec2(g1 * x.y() + g2 * g3 * std::cos(g3 * x.x()), g1 * x.x() + 2.0 * g4 * x.y());
  };
  phi.hessian = [=](const Vec2& x) {
    Eigen::Matrix2d H;
    H << -g2 * g3 * g3 * std::sin(g3 * x.x()), g1, g1, 2.0 * g4;
    return H;
  };
  return phi;
}

/// Interpolated smooth random fields; the reduced model keeps its fixed potential.
inline GLState random_smooth_state(const Discretization& disc, const ProblemSpec& spec, std::mt19937_64& rng) {
  const OrderField u = interpolate_order(disc, random_smooth_order(rng).value);
  const PotentialField A = spec.model == Model::Full ? interpolate_potential(disc, random_smooth_potential(rng).value)
                                                     : reference_potential(disc, spec);
  return GLState(u, A, uniform(rng, 1.0, 20.0));
}

inline ProblemSpec no_field(Model model) {
  ProblemSpec spec = ProblemSpec::standard(model);
  spec.h_ext = [](const Vec2&) { return 0.0; };
  return spec;
}

inline GLState constant_state(const Discretization& disc, Complex value, double kappa) {
  OrderField u(disc.num_order_nodes());
  for (std::size_t i = 0; i < u.num_nodes(); ++i) u.set(i, value);
  return GLState(u, PotentialField(disc.num_potential_dofs()), kappa);
}

struct FdCheck {
  double analytic = 0.0;
  std::array<double, 2> errors{};  // at eps = 1e-3, 1e-4
  [[nodiscard]] double order() const { return observed_order(errors[0], errors[1]); }
};

/// Residual paired with (v, B) against central differences of the energy.
inline FdCheck fd_directional(const Discretization& disc, const GLState& state, const ProblemSpec& spec,
                              const OrderField& v, const PotentialField& B) {
  const Residual r = residual(disc, state, spec);
  FdCheck out;
  out.analytic = r.order.dot(v.coeffs);
  if (!spec.reduced()) out.analytic += r.potential.dot(B.coeffs);
  const std::array<double, 2> eps{1e-3, 1e-4};
  for (int k = 0; k < 2; ++k) {
    auto energy_at = [&](double t) {
      OrderField u(Eigen::VectorXd(state.u().coeffs + t * v.coeffs));
      PotentialField A = state.A();
      if (!spec.reduced()) A.coeffs += t * B.coeffs;
      return compute_energy(disc, GLState(u, A, state.kappa()), spec);
    };
    const double fd = (energy_at(eps[k]) - energy_at(-eps[k])) / (2.0 * eps[k]);
    out.errors[k] = std::abs(fd - out.analytic);
  }
  return out;
}

}  // namespace glenn::test
