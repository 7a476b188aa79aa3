#include "glenn/gl_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace glenn {

namespace {

const Complex kI(0.0, 1.0);

double eval_h(const ProblemSpec& spec, const Vec2& x) { return spec.h_ext ? spec.h_ext(x) : 0.0; }

void check_sizes(const Discretization& disc, const GLState& state, const char* who) {
  if (state.u().num_nodes() != disc.num_order_nodes() || state.A().size() != disc.num_potential_dofs()) {
    throw std::invalid_argument(std::string(who) + ": state does not match the discretization");
  }
}

// (i/kappa) grad u + A u
std::array<Complex, 2> covariant_gradient(const PointFields& f, double kappa) {
  return {kI / kappa * f.grad_u[0] + f.A.x() * f.u, kI / kappa * f.grad_u[1] + f.A.y() * f.u};
}

double pointwise_energy(const std::array<Complex, 2>& q, Complex u, double magnetic) {
  const double rho = std::norm(u);
  return 0.5 * (std::norm(q[0]) + std::norm(q[1])) + 0.25 * (1.0 - rho) * (1.0 - rho) +
         0.5 * magnetic * magnetic;
}

}  // namespace

ProblemSpec ProblemSpec::standard(Model model, Domain domain) {
  ProblemSpec spec;
  spec.model = model;
  spec.domain = domain;
  spec.h_ext = standard_h_ext();
  if (model == Model::Reduced) spec.fixed_A = standard_fixed_A();
  return spec;
}

void ProblemSpec::validate() const {
  if (model == Model::Reduced && !fixed_A) {
    throw std::invalid_argument("ProblemSpec: the reduced model requires a fixed potential");
  }
}

GLState::GLState(OrderField u, PotentialField A, double kappa)
    : u_(std::move(u)), A_(std::move(A)), kappa_(kappa) {
  if (!(kappa_ > 0.0)) throw std::invalid_argument("GLState: kappa must be positive");
}

void GLState::set_u(OrderField u) {
  u_ = std::move(u);
  energy_.reset();
}

void GLState::set_A(PotentialField A) {
  A_ = std::move(A);
  energy_.reset();
}

void GLState::set_kappa(double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("GLState: kappa must be positive");
  kappa_ = kappa;
  energy_.reset();
}

PotentialField reference_potential(const Discretization& disc, const ProblemSpec& spec) {
  spec.validate();
  if (spec.reduced()) return interpolate_potential(disc, spec.fixed_A->value);
  return PotentialField(disc.num_potential_dofs());
}

GLState make_state(const Discretization& disc, const ProblemSpec& spec, const AnalyticOrder& u0,
                   double kappa) {
  return GLState(interpolate_order(disc, u0.value), reference_potential(disc, spec), kappa);
}

double compute_energy(const Discretization& disc, const GLState& state, const ProblemSpec& spec) {
  spec.validate();
  check_sizes(disc, state, "compute_energy");
  const double kappa = state.kappa();
  const bool full = !spec.reduced();
  double energy = 0.0;
  for (std::size_t t = 0; t < disc.num_triangles(); ++t) {
    for (std::size_t q = 0; q < disc.rule().size(); ++q) {
      const PointBasis b = disc.basis(t, q);
      const PointFields f = disc.evaluate(b, t, state.u(), state.A());
      const double magnetic = full ? f.curl_A - eval_h(spec, b.x) : 0.0;
      energy += b.weight * pointwise_energy(covariant_gradient(f, kappa), f.u, magnetic);
    }
  }
  return energy;
}

double cached_energy(const Discretization& disc, GLState& state, const ProblemSpec& spec) {
  if (auto e = state.energy_cache()) return *e;
  const double e = compute_energy(disc, state, spec);
  state.set_energy_cache(e);
  return e;
}

double compute_energy_analytic(const AnalyticOrder& u, const AnalyticPotential& A, double kappa,
                               const ProblemSpec& spec, const Discretization& disc) {
  if (!(kappa > 0.0)) throw std::invalid_argument("compute_energy_analytic: kappa must be positive");
  const bool full = !spec.reduced();
  double energy = 0.0;
  for (std::size_t t = 0; t < disc.num_triangles(); ++t) {
    for (std::size_t q = 0; q < disc.rule().size(); ++q) {
      const PointBasis b = disc.basis(t, q);
      PointFields f;
      f.u = u.value(b.x);
      f.grad_u = u.gradient(b.x);
      f.A = A.value(b.x);
      double magnetic = 0.0;
      if (full) {
        const Mat2 J = A.jacobian(b.x);
        magnetic = J(1, 0) - J(0, 1) - eval_h(spec, b.x);
      }
      energy += b.weight * pointwise_energy(covariant_gradient(f, kappa), f.u, magnetic);
    }
  }
  return energy;
}

Residual residual(const Discretization& disc, const GLState& state, const ProblemSpec& spec) {
  spec.validate();
  check_sizes(disc, state, "residual");
  const double kappa = state.kappa();
  const bool full = !spec.reduced();
  Residual r;
  r.order = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * disc.num_order_nodes()));
  if (full) r.potential = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(disc.num_potential_dofs()));
  for (std::size_t t = 0; t < disc.num_triangles(); ++t) {
    const auto& nodes = disc.order_nodes(t);
    const auto& edges = disc.potential_dofs(t);
    for (std::size_t q = 0; q < disc.rule().size(); ++q) {
      const PointBasis b = disc.basis(t, q);
      const PointFields f = disc.evaluate(b, t, state.u(), state.A());
      const auto cg = covariant_gradient(f, kappa);
      const double well = std::norm(f.u) - 1.0;
      for (int i = 0; i < 6; ++i) {
        // z = (i/kappa) grad phi_i + A phi_i; directions phi_i and i phi_i.
        const Complex z0 = kI / kappa * b.grad_p2[i].x() + f.A.x() * b.p2[i];
        const Complex z1 = kI / kappa * b.grad_p2[i].y() + f.A.y() * b.p2[i];
        const Complex s = cg[0] * std::conj(z0) + cg[1] * std::conj(z1);
        r.order[2 * nodes[i]] += b.weight * (s.real() + well * f.u.real() * b.p2[i]);
        r.order[2 * nodes[i] + 1] += b.weight * (s.imag() + well * f.u.imag() * b.p2[i]);
      }
      if (full) {
        const double ur = f.u.real();
        const double ui = f.u.imag();
        // |u|^2 A + (1/kappa) Re(i conj(u) grad u), Re(i conj(u) grad u) = ui grad ur - ur grad ui
        const Vec2 current = std::norm(f.u) * f.A -
                             (ur * Vec2(f.grad_u[0].imag(), f.grad_u[1].imag()) -
                              ui * Vec2(f.grad_u[0].real(), f.grad_u[1].real())) /
                                 kappa;
        const double magnetic = f.curl_A - eval_h(spec, b.x);
        for (int l = 0; l < 3; ++l) {
          r.potential[edges[l]] += b.weight * (current.dot(b.nedelec[l]) + magnetic * b.curl_nedelec[l]);
        }
      }
    }
  }
  return r;
}

Quartic line_search_quartic(const Discretization& disc, const GLState& state,
                            const Direction& direction, const ProblemSpec& spec) {
  spec.validate();
  check_sizes(disc, state, "line_search_quartic");
  if (direction.d.num_nodes() != disc.num_order_nodes()) {
    throw std::invalid_argument("line_search_quartic: direction does not match the discretization");
  }
  const bool full = !spec.reduced();
  const bool moves_A = full && direction.D.size() != 0;
  if (moves_A && direction.D.size() != disc.num_potential_dofs()) {
    throw std::invalid_argument("line_search_quartic: potential direction has the wrong size");
  }
  const PotentialField none;
  const double kappa = state.kappa();
  Quartic p;
  for (std::size_t t = 0; t < disc.num_triangles(); ++t) {
    for (std::size_t q = 0; q < disc.rule().size(); ++q) {
      const PointBasis b = disc.basis(t, q);
      const PointFields f = disc.evaluate(b, t, state.u(), state.A());
      const PointFields g = disc.evaluate(b, t, direction.d, moves_A ? direction.D : none);
      // Covariant gradient along the ray: q0 + t q1 + t^2 q2.
      std::array<Complex, 2> q0 = covariant_gradient(f, kappa);
      std::array<Complex, 2> q1{};
      std::array<Complex, 2> q2{};
      for (int k = 0; k < 2; ++k) {
        q1[k] = kI / kappa * g.grad_u[k] + f.A[k] * g.u + g.A[k] * f.u;
        q2[k] = g.A[k] * g.u;
      }
      auto re_dot = [](const std::array<Complex, 2>& a, const std::array<Complex, 2>& c) {
        return (a[0] * std::conj(c[0]) + a[1] * std::conj(c[1])).real();
      };
      const double k0 = re_dot(q0, q0);
      const double k1 = 2.0 * re_dot(q0, q1);
      const double k2 = re_dot(q1, q1) + 2.0 * re_dot(q0, q2);
      const double k3 = 2.0 * re_dot(q1, q2);
      const double k4 = re_dot(q2, q2);

      // |u + t d|^2 = s0 + s1 t + s2 t^2.
      const double s0 = std::norm(f.u);
      const double s1 = 2.0 * (f.u * std::conj(g.u)).real();
      const double s2 = std::norm(g.u);
      const double w0 = 1.0 - s0;
      const double l0 = w0 * w0;
      const double l1 = -2.0 * w0 * s1;
      const double l2 = s1 * s1 - 2.0 * w0 * s2;
      const double l3 = 2.0 * s1 * s2;
      const double l4 = s2 * s2;

      double m0 = 0.0;
      double m1 = 0.0;
      if (full) {
        m0 = f.curl_A - eval_h(spec, b.x);
        m1 = g.curl_A;
      }
      const double w = b.weight;
      p.c[0] += w * (0.5 * k0 + 0.25 * l0 + 0.5 * m0 * m0);
      p.c[1] += w * (0.5 * k1 + 0.25 * l1 + m0 * m1);
      p.c[2] += w * (0.5 * k2 + 0.25 * l2 + 0.5 * m1 * m1);
      p.c[3] += w * (0.5 * k3 + 0.25 * l3);
      p.c[4] += w * (0.5 * k4 + 0.25 * l4);
    }
  }
  return p;
}

namespace {

// Real roots of a t^3 + b t^2 + c t + d with a != 0.
std::vector<double> cubic_roots(double a, double b, double c, double d) {
  const double A = b / a;
  const double B = c / a;
  const double C = d / a;
  const double Q = (A * A - 3.0 * B) / 9.0;
  const double R = (2.0 * A * A * A - 9.0 * A * B + 27.0 * C) / 54.0;
  std::vector<double> roots;
  if (R * R < Q * Q * Q) {
    const double theta = std::acos(std::clamp(R / std::sqrt(Q * Q * Q), -1.0, 1.0));
    const double s = -2.0 * std::sqrt(Q);
    constexpr double kTwoPi = 6.283185307179586476925;
    roots = {s * std::cos(theta / 3.0) - A / 3.0, s * std::cos((theta + kTwoPi) / 3.0) - A / 3.0,
             s * std::cos((theta - kTwoPi) / 3.0) - A / 3.0};
  } else {
    const double big = -std::copysign(std::cbrt(std::abs(R) + std::sqrt(R * R - Q * Q * Q)), R);
    const double small = big == 0.0 ? 0.0 : Q / big;
    roots = {big + small - A / 3.0};
  }
  return roots;
}

double golden_section(const Quartic& p, double lo, double hi) {
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = p(x1);
  double f2 = p(x2);
  while (hi - lo > 1e-12 * (1.0 + std::abs(hi))) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = p(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = p(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double minimize_quartic(const Quartic& q) {
  if (q.c[4] < 0.0) throw LineSearchError("minimize_quartic: negative leading coefficient");
  for (double c : q.c) {
    if (!std::isfinite(c)) throw LineSearchError("minimize_quartic: non-finite coefficient");
  }
  const double p0 = q(0.0);
  double best = -1.0;
  double best_value = p0;
  if (q.c[4] <= 1e-14) {
    const double t = golden_section(q, 0.0, kGoldenWindow);
    if (t > 0.0 && q(t) < p0) {
      best = t;
      best_value = q(t);
    }
  } else {
    for (double t : cubic_roots(4.0 * q.c[4], 3.0 * q.c[3], 2.0 * q.c[2], q.c[1])) {
      for (int it = 0; it < 8; ++it) {
        const double curvature = q.second_derivative(t);
        if (curvature == 0.0) break;
        const double step = q.derivative(t) / curvature;
        t -= step;
        if (std::abs(step) <= 1e-16 * std::abs(t)) break;
      }
      if (t > 0.0 && std::isfinite(t) && q(t) < best_value) {
        best = t;
        best_value = q(t);
      }
    }
  }
  if (best <= 0.0) throw LineSearchError("minimize_quartic: no positive minimizer");
  return best;
}

}  // namespace glenn
