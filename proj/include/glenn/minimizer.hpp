#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "glenn/fem.hpp"
#include "glenn/gl_core.hpp"
#include "glenn/linear_solve.hpp"

namespace glenn {

struct SolverConfig {
  double beta = 0.0;
  double tol = 1e-12;  // on the energy decrease of one iteration
  int max_iter = 100000;
  bool record_history = true;
  /// Keep A at its initial value in a full-model run (the u-update and every
  /// assembly path stay those of the full model).
  bool freeze_potential = false;
  /// Called after every accepted iteration (iteration, energy); may be empty.
  std::function<void(int, double)> progress;

  void validate() const;
};

struct SolveReport {
  GLState final_state;
  std::vector<double> energies;  // energies[0] is the initial energy
  std::vector<double> gammas;
  std::vector<double> taus;
  /// Discrete divergence residual of A at every iterate (full model only).
  std::vector<double> divergence_residuals;
  int iterations = 0;
  bool converged = false;
  std::string diagnostic;
};

/// Solutions of the two elliptic problems of one iteration together with the
/// metric operators they were computed with.
struct SobolevGradient {
  OrderField delta;
  PotentialField Delta;  // empty for the reduced model or a frozen potential
  SparseOperator metric_order;
  SparseOperator metric_potential;
  double beta_used = 0.0;
};

/// Previous gradient and direction kept between iterations.
struct DescentMemory {
  bool has_previous = false;
  Direction gradient;        // g_{k-1}
  double gradient_norm2 = 0.0;  // (g_{k-1}, g_{k-1}) in the metric of iterate k-1
  Direction direction;       // (d^{k-1}, D^{k-1})
};

struct StepResult {
  GLState state;
  double gamma = 0.0;
  double tau = 0.0;
  double energy = 0.0;
  double slope = 0.0;  // p'(0) of the accepted direction
  bool restarted = false;
};

class DescentError : public std::runtime_error {
 public:
  DescentError(const std::string& what, double slope) : std::runtime_error(what), slope_(slope) {}
  [[nodiscard]] double slope() const { return slope_; }

 private:
  double slope_;
};

/// Nonlinear conjugate Sobolev gradient descent over V_h x R_h^0.
///
/// The metric of iterate k is a_k + b_k. The potential problem is solved on
/// the discretely divergence-free subspace through the saddle-point system
/// with the P1 gradients as multipliers (one multiplier pinned).
class SobolevDescent {
 public:
  SobolevDescent(const Discretization& disc, ProblemSpec spec, SolverConfig config);

  SobolevGradient sobolev_gradient(const GLState& state);
  /// One iteration from `state`; updates `memory` for the next call.
  StepResult descent_step(const GLState& state, DescentMemory& memory);

  [[nodiscard]] bool moves_potential() const { return moves_potential_; }

 private:
  const Discretization& disc_;
  ProblemSpec spec_;
  SolverConfig config_;
  bool moves_potential_;
  SpdSolver order_solver_;
  SaddlePointSolver potential_solver_;
  SparseOperator reduced_constraint_;
};

/// Free-function forms used by tests and bindings.
SobolevGradient sobolev_gradient(const Discretization& disc, const GLState& state,
                                 const ProblemSpec& spec, double beta);

SolveReport solve(const Discretization& disc, GLState initial, const ProblemSpec& spec,
                  const SolverConfig& config);

}  // namespace glenn
