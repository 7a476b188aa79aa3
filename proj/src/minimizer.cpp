#include "glenn/minimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace glenn {

namespace {

// Below this L2 norm of u the metric loses coercivity and beta = 1 is used.
constexpr double kDegenerateOrderNorm = 1e-8;

double order_norm(const Discretization& disc, const OrderField& u) {
  if (u.coeffs.size() == 0) return 0.0;
  if (u.coeffs.cwiseAbs().maxCoeff() >= 1e-6) return 1.0;  // far from degenerate
  return std::sqrt(std::max(0.0, order_l2_inner(disc, u, u)));
}

}  // namespace

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
  if (!(beta >= 0.0)) throw std::invalid_argument("SolverConfig: beta must be nonnegative");
}

SobolevDescent::SobolevDescent(const Discretization& disc, ProblemSpec spec, SolverConfig config)
    : disc_(disc), spec_(std::move(spec)), config_(std::move(config)) {
  spec_.validate();
  config_.validate();
  moves_potential_ = !spec_.reduced() && !config_.freeze_potential;
  if (moves_potential_) {
    const SparseOperator& c = disc_.constraint_matrix();
    reduced_constraint_ = c.rightCols(c.cols() - 1);
    reduced_constraint_.makeCompressed();
  }
}

SobolevGradient SobolevDescent::sobolev_gradient(const GLState& state) {
  const double kappa = state.kappa();
  SobolevGradient g;
  g.beta_used = config_.beta;
  if (g.beta_used == 0.0 && order_norm(disc_, state.u()) < kDegenerateOrderNorm) g.beta_used = 1.0;
  const double beta = g.beta_used;

  g.metric_order = assemble_a_k(disc_, state.u(), state.A(), kappa, beta);
  Eigen::VectorXd rhs_u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * disc_.num_order_nodes()));
  Eigen::VectorXd rhs_A;
  if (moves_potential_) rhs_A = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(disc_.num_potential_dofs()));

  for (std::size_t t = 0; t < disc_.num_triangles(); ++t) {
    const auto& nodes = disc_.order_nodes(t);
    const auto& edges = disc_.potential_dofs(t);
    for (std::size_t q = 0; q < disc_.rule().size(); ++q) {
      const PointBasis b = disc_.basis(t, q);
      const PointFields f = disc_.evaluate(b, t, state.u(), state.A());
      const double coef = 1.0 + beta + f.A.squaredNorm();
      for (int i = 0; i < 6; ++i) {
        rhs_u[2 * nodes[i]] += b.weight * coef * f.u.real() * b.p2[i];
        rhs_u[2 * nodes[i] + 1] += b.weight * coef * f.u.imag() * b.p2[i];
      }
      if (moves_potential_) {
        const double ur = f.u.real();
        const double ui = f.u.imag();
        // (1/kappa) Re(i conj(u) grad u)
        const Vec2 current = (ui * Vec2(f.grad_u[0].real(), f.grad_u[1].real()) -
                              ur * Vec2(f.grad_u[0].imag(), f.grad_u[1].imag())) /
                             kappa;
        const Vec2 load = beta * f.A - current;
        const double h = spec_.h_ext ? spec_.h_ext(b.x) : 0.0;
        for (int l = 0; l < 3; ++l) {
          rhs_A[edges[l]] += b.weight * (load.dot(b.nedelec[l]) + h * b.curl_nedelec[l]);
        }
      }
    }
  }

  order_solver_.factorize(g.metric_order);
  g.delta = OrderField(order_solver_.solve(rhs_u));

  if (moves_potential_) {
    g.metric_potential = assemble_b_k(disc_, state.u(), beta);
    potential_solver_.factorize(g.metric_potential, reduced_constraint_);
    g.Delta = PotentialField(potential_solver_.solve(rhs_A));
  }
  return g;
}

StepResult SobolevDescent::descent_step(const GLState& state, DescentMemory& memory) {
  SobolevGradient sg = sobolev_gradient(state);

  // Sobolev gradient g_k = (u - delta, A - Delta).
  Direction grad;
  grad.d = OrderField(Eigen::VectorXd(state.u().coeffs - sg.delta.coeffs));
  if (moves_potential_) grad.D = PotentialField(Eigen::VectorXd(state.A().coeffs - sg.Delta.coeffs));

  auto metric = [&](const Direction& x, const Direction& y) {
    double v = x.d.coeffs.dot(sg.metric_order * y.d.coeffs);
    if (moves_potential_) v += x.D.coeffs.dot(sg.metric_potential * y.D.coeffs);
    return v;
  };
  const double norm2 = metric(grad, grad);

  double gamma = 0.0;
  if (memory.has_previous && memory.gradient_norm2 > 0.0) {
    const double numerator = norm2 - metric(grad, memory.gradient);
    gamma = std::max(0.0, numerator / memory.gradient_norm2);
  }

  auto build_direction = [&](double g) {
    Direction dir;
    dir.d = OrderField(Eigen::VectorXd(-grad.d.coeffs));
    if (g > 0.0) dir.d.coeffs += g * memory.direction.d.coeffs;
    if (moves_potential_) {
      PotentialField D(Eigen::VectorXd(-grad.D.coeffs));
      if (g > 0.0) D.coeffs += g * memory.direction.D.coeffs;
      dir.D = disc_.project_div_free(D);
    }
    return dir;
  };

  Direction dir = build_direction(gamma);
  Quartic p = line_search_quartic(disc_, state, dir, spec_);
  bool restarted = false;
  if (p.c[1] >= 0.0 && gamma > 0.0) {
    gamma = 0.0;
    restarted = true;
    dir = build_direction(0.0);
    p = line_search_quartic(disc_, state, dir, spec_);
  }
  if (p.c[1] >= 0.0) throw DescentError("steepest Sobolev direction is not a descent direction", p.c[1]);

  double tau = 0.0;
  try {
    tau = minimize_quartic(p);
  } catch (const LineSearchError& e) {
    throw DescentError(e.what(), p.c[1]);
  }

  OrderField u_next(Eigen::VectorXd(state.u().coeffs + tau * dir.d.coeffs));
  PotentialField A_next = state.A();
  if (moves_potential_) A_next.coeffs += tau * dir.D.coeffs;
  GLState next(std::move(u_next), std::move(A_next), state.kappa());
  const double energy = compute_energy(disc_, next, spec_);
  next.set_energy_cache(energy);

  memory.has_previous = true;
  memory.gradient = std::move(grad);
  memory.gradient_norm2 = norm2;
  memory.direction = std::move(dir);

  StepResult result{std::move(next), gamma, tau, energy, p.c[1], restarted};
  return result;
}

SobolevGradient sobolev_gradient(const Discretization& disc, const GLState& state,
                                 const ProblemSpec& spec, double beta) {
  SolverConfig config;
  config.beta = beta;
  SobolevDescent descent(disc, spec, config);
  return descent.sobolev_gradient(state);
}

SolveReport solve(const Discretization& disc, GLState initial, const ProblemSpec& spec,
                  const SolverConfig& config) {
  spec.validate();
  config.validate();
  if (initial.u().num_nodes() != disc.num_order_nodes() ||
      initial.A().size() != disc.num_potential_dofs()) {
    throw std::invalid_argument("solve: initial state does not match the discretization");
  }
  if (initial.u().coeffs.cwiseAbs().maxCoeff() == 0.0) {
    throw std::invalid_argument("solve: the initial order parameter must not vanish");
  }
  SobolevDescent descent(disc, spec, config);
  if (descent.moves_potential() && disc.divergence_residual(initial.A()) > 1e-10) {
    initial.set_A(disc.project_div_free(initial.A()));
  }

  SolveReport report{initial, {}, {}, {}, {}, 0, false, {}};
  GLState state = std::move(initial);
  double energy = cached_energy(disc, state, spec);
  report.energies.push_back(energy);
  if (descent.moves_potential()) report.divergence_residuals.push_back(disc.divergence_residual(state.A()));

  DescentMemory memory;
  for (int k = 0; k < config.max_iter; ++k) {
    StepResult step{state, 0.0, 0.0, energy, 0.0, false};
    try {
      step = descent.descent_step(state, memory);
    } catch (const DescentError& e) {
      // A vanishing slope means the Sobolev gradient is zero to round-off.
      report.converged = std::abs(e.slope()) < config.tol;
      report.diagnostic = e.what();
      break;
    }
    if (step.energy > energy) {
      // Round-off level increase: the decrease is below any positive tol.
      report.converged = true;
      report.diagnostic = "energy increment below round-off";
      break;
    }
    const double decrease = energy - step.energy;
    state = std::move(step.state);
    energy = step.energy;
    ++report.iterations;
    if (config.record_history || k + 1 == config.max_iter || decrease < config.tol) {
      report.energies.push_back(energy);
      report.gammas.push_back(step.gamma);
      report.taus.push_back(step.tau);
      if (descent.moves_potential()) {
        report.divergence_residuals.push_back(disc.divergence_residual(state.A()));
      }
    }
    if (config.progress) config.progress(report.iterations, energy);
    if (decrease < config.tol) {
      report.converged = true;
      break;
    }
  }
  if (!report.converged && report.diagnostic.empty()) report.diagnostic = "max_iter reached";
  report.final_state = std::move(state);
  return report;
}

}  // namespace glenn
