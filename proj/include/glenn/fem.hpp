#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "glenn/fields.hpp"
#include "glenn/mesh.hpp"
#include "glenn/quadrature.hpp"

namespace glenn {

using SparseOperator = Eigen::SparseMatrix<double>;

using ScalarFunction = std::function<double(const Vec2&)>;
using VectorFunction = std::function<Vec2(const Vec2&)>;
using ComplexFunction = std::function<Complex(const Vec2&)>;

/// Values of every local basis function at one quadrature point.
///
/// Local P2 ordering: vertex nodes 0..2, then the midpoints of local edges
/// (0,1), (1,2), (2,0). Edge functions follow the global low->high
/// orientation of their edge.
struct PointBasis {
  Vec2 x;
  double weight = 0.0;  // physical quadrature weight
  std::array<double, 3> lambda{};
  std::array<double, 6> p2{};
  std::array<Vec2, 6> grad_p2;
  std::array<Vec2, 3> grad_p1;  // gradients of the vertex hat functions
  std::array<Vec2, 3> nedelec;
  std::array<double, 3> curl_nedelec{};
};

/// Discrete fields evaluated at one point.
struct PointFields {
  Complex u;
  std::array<Complex, 2> grad_u;
  Vec2 A = Vec2::Zero();
  double curl_A = 0.0;
};

/// Quadratic Lagrange space for u, lowest-order Nedelec space for A and
/// linear Lagrange space for the discrete divergence, on one mesh.
///
/// Holds the element geometry, the fixed sparsity patterns and the factored
/// Poisson operator used by the divergence projection.
class Discretization {
 public:
  explicit Discretization(std::shared_ptr<const Mesh2D> mesh, int quadrature_degree = 8);

  [[nodiscard]] const Mesh2D& mesh() const { return *mesh_; }
  [[nodiscard]] std::shared_ptr<const Mesh2D> mesh_ptr() const { return mesh_; }
  [[nodiscard]] const QuadratureRule& rule() const { return rule_; }

  [[nodiscard]] std::size_t num_order_nodes() const { return mesh_->num_vertices() + mesh_->num_edges(); }
  [[nodiscard]] std::size_t num_potential_dofs() const { return mesh_->num_edges(); }
  [[nodiscard]] std::size_t num_scalar_dofs() const { return mesh_->num_vertices(); }
  [[nodiscard]] std::size_t num_triangles() const { return mesh_->num_triangles(); }

  /// Global P2 node indices of triangle t in local order.
  [[nodiscard]] const std::array<int, 6>& order_nodes(std::size_t t) const { return order_nodes_[t]; }
  /// Global edge indices of triangle t (local edge order).
  [[nodiscard]] const std::array<int, 3>& potential_dofs(std::size_t t) const {
    return mesh_->triangle_edges()[t];
  }
  /// Coordinates of every P2 node (vertices, then edge midpoints).
  [[nodiscard]] std::vector<Vec2> order_node_coordinates() const;

  [[nodiscard]] PointBasis basis(std::size_t t, std::size_t q) const;
  [[nodiscard]] PointFields evaluate(const PointBasis& b, std::size_t t, const OrderField& u,
                                     const PotentialField& A) const;

  /// C(e, j) = (N_e, grad phi_j): Nedelec functions against P1 gradients.
  [[nodiscard]] const SparseOperator& constraint_matrix() const { return constraint_; }
  /// Edge coefficients of the gradient of every P1 hat function (+-1 entries).
  [[nodiscard]] const SparseOperator& gradient_matrix() const { return gradient_; }
  [[nodiscard]] const SparseOperator& p1_stiffness() const { return p1_stiffness_; }

  /// B - grad p with (grad p, grad q) = (B, grad q) for all P1 q.
  [[nodiscard]] PotentialField project_div_free(const PotentialField& B) const;
  /// max_j |(B, grad phi_j)| / (|B|_L2 |grad phi_j|_L2); 0 for B = 0.
  [[nodiscard]] double divergence_residual(const PotentialField& B) const;

  [[nodiscard]] const SparseOperator& order_pattern() const { return order_pattern_; }
  [[nodiscard]] const SparseOperator& potential_pattern() const { return potential_pattern_; }
  /// Position in the value array of `order_pattern()` for local real dofs (i, j).
  [[nodiscard]] const std::vector<int>& order_slots(std::size_t t) const { return order_slots_[t]; }
  [[nodiscard]] const std::vector<int>& potential_slots(std::size_t t) const {
    return potential_slots_[t];
  }

  /// Unweighted L2 mass matrices (real P2 pairs, Nedelec).
  [[nodiscard]] SparseOperator order_mass() const;
  [[nodiscard]] SparseOperator potential_mass() const;
  [[nodiscard]] SparseOperator order_stiffness() const;
  [[nodiscard]] SparseOperator potential_curl_curl() const;

 private:
  std::shared_ptr<const Mesh2D> mesh_;
  QuadratureRule rule_;
  std::vector<std::array<int, 6>> order_nodes_;
  std::vector<std::array<Vec2, 3>> grad_lambda_;
  std::vector<double> area_;
  // Local vertex pair (a, b) of each local edge, ordered low -> high globally.
  std::vector<std::array<std::array<int, 2>, 3>> edge_local_;

  SparseOperator constraint_;
  SparseOperator gradient_;
  SparseOperator p1_stiffness_;
  Eigen::SimplicialLDLT<SparseOperator> poisson_;  // pinned at vertex 0
  std::vector<double> grad_hat_norm_;

  SparseOperator order_pattern_;
  SparseOperator potential_pattern_;
  std::vector<std::vector<int>> order_slots_;
  std::vector<std::vector<int>> potential_slots_;
};

/// Index of entry (row, col) inside the value array of a compressed
/// column-major matrix; -1 if structurally absent.
int sparse_slot(const SparseOperator& m, int row, int col);

/// a_k(v, w) = (i/k grad v + A v, i/k grad w + A w) + ((beta + |u|^2 + |A|^2) v, w)
/// over interleaved real dof pairs.
SparseOperator assemble_a_k(const Discretization& disc, const OrderField& u,
                            const PotentialField& A, double kappa, double beta);

/// b_k(B, C) = (curl B, curl C) + ((beta + |u|^2) B, C).
SparseOperator assemble_b_k(const Discretization& disc, const OrderField& u, double beta);

/// Nodal P2 interpolation.
OrderField interpolate_order(const Discretization& disc, const ComplexFunction& f);
/// Edge tangential moments by two-point Gauss on every edge.
PotentialField interpolate_potential(const Discretization& disc, const VectorFunction& F);

/// Free-function form of `Discretization::project_div_free`.
inline PotentialField project_div_free(const Discretization& disc, const PotentialField& B) {
  return disc.project_div_free(B);
}

/// Real L2 inner product of two discrete order parameters.
double order_l2_inner(const Discretization& disc, const OrderField& v, const OrderField& w);
double potential_l2_inner(const Discretization& disc, const PotentialField& B,
                          const PotentialField& C);

}  // namespace glenn
