#pragma once

#include <array>
#include <optional>

#include <Eigen/Core>

#include "glenn/analytic.hpp"
#include "glenn/fem.hpp"
#include "glenn/fields.hpp"

namespace glenn {

enum class Model { Full, Reduced };

/// Which energy is minimized and with which data.
///
/// The reduced model keeps A fixed (the edge interpolant of `fixed_A` in all
/// discrete evaluations) and drops the magnetic term; the full model ignores
/// `fixed_A`.
struct ProblemSpec {
  Model model = Model::Full;
  Domain domain = Domain::UnitSquare;
  ScalarFunction h_ext;
  std::optional<AnalyticPotential> fixed_A;

  /// Field of the numerical experiments: h_ext from `standard_h_ext`, and for
  /// the reduced model the potential of `standard_fixed_A`.
  static ProblemSpec standard(Model model, Domain domain = Domain::UnitSquare);
  void validate() const;
  [[nodiscard]] bool reduced() const { return model == Model::Reduced; }
};

/// Iterate (u, A, kappa) with a cached energy that any mutation drops.
class GLState {
 public:
  GLState(OrderField u, PotentialField A, double kappa);

  [[nodiscard]] const OrderField& u() const { return u_; }
  [[nodiscard]] const PotentialField& A() const { return A_; }
  [[nodiscard]] double kappa() const { return kappa_; }
  [[nodiscard]] std::optional<double> energy_cache() const { return energy_; }

  void set_u(OrderField u);
  void set_A(PotentialField A);
  void set_kappa(double kappa);
  void set_energy_cache(double energy) { energy_ = energy; }

 private:
  OrderField u_;
  PotentialField A_;
  double kappa_;
  std::optional<double> energy_;
};

/// p(t) = c[0] + c[1] t + ... + c[4] t^4.
struct Quartic {
  std::array<double, 5> c{};

  [[nodiscard]] double operator()(double t) const {
    return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * c[4])));
  }
  [[nodiscard]] double derivative(double t) const {
    return c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * 4.0 * c[4]));
  }
  [[nodiscard]] double second_derivative(double t) const {
    return 2.0 * c[2] + t * (6.0 * c[3] + t * 12.0 * c[4]);
  }
};

/// Dual vectors of the first derivative; `potential` is empty for the reduced model.
struct Residual {
  Eigen::VectorXd order;      // interleaved (Re, Im) directions per P2 node
  Eigen::VectorXd potential;  // one entry per edge
};

struct Direction {
  OrderField d;
  PotentialField D;
};

/// Initial discrete state: interpolated u, A = 0 (full) or the interpolated
/// fixed potential (reduced).
GLState make_state(const Discretization& disc, const ProblemSpec& spec, const AnalyticOrder& u0,
                   double kappa);
/// The potential held fixed by the reduced model (or zero for the full model).
PotentialField reference_potential(const Discretization& disc, const ProblemSpec& spec);

double compute_energy(const Discretization& disc, const GLState& state, const ProblemSpec& spec);
/// compute_energy through the state's cache.
double cached_energy(const Discretization& disc, GLState& state, const ProblemSpec& spec);

/// Same integrand as `compute_energy` with fields given analytically,
/// integrated with the quadrature of `disc`.
double compute_energy_analytic(const AnalyticOrder& u, const AnalyticPotential& A, double kappa,
                               const ProblemSpec& spec, const Discretization& disc);

Residual residual(const Discretization& disc, const GLState& state, const ProblemSpec& spec);

/// Exact coefficients of t -> E(state + t direction).
Quartic line_search_quartic(const Discretization& disc, const GLState& state,
                            const Direction& direction, const ProblemSpec& spec);

class LineSearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Width of the golden-section window used when the quartic degenerates.
inline constexpr double kGoldenWindow = 10.0;

/// argmin over t > 0 of p. Real roots of p' in closed form (polished by
/// Newton), golden section on [0, kGoldenWindow] if c4 <= 1e-14.
/// Throws LineSearchError if no positive minimizer lowers p below p(0).
double minimize_quartic(const Quartic& q);

}  // namespace glenn
