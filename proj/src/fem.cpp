#include "glenn/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace glenn {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseOperator from_triplets(Eigen::Index rows, Eigen::Index cols, const Triplets& t) {
  SparseOperator m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// Structural pattern for element blocks plus per-element slot tables.
template <std::size_t K>
void build_pattern(Eigen::Index n, const std::vector<std::array<int, K>>& element_dofs,
                   SparseOperator& pattern, std::vector<std::vector<int>>& slots) {
  Triplets t;
  t.reserve(element_dofs.size() * K * K);
  for (const auto& dofs : element_dofs) {
    for (int r : dofs) {
      for (int c : dofs) t.emplace_back(r, c, 0.0);
    }
  }
  pattern = from_triplets(n, n, t);
  slots.resize(element_dofs.size());
  for (std::size_t e = 0; e < element_dofs.size(); ++e) {
    auto& s = slots[e];
    s.resize(K * K);
    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t j = 0; j < K; ++j) {
        s[i * K + j] = sparse_slot(pattern, element_dofs[e][i], element_dofs[e][j]);
      }
    }
  }
}

}  // namespace

int sparse_slot(const SparseOperator& m, int row, int col) {
  const int* outer = m.outerIndexPtr();
  const int* inner = m.innerIndexPtr();
  const int* begin = inner + outer[col];
  const int* end = inner + outer[col + 1];
  const int* it = std::lower_bound(begin, end, row);
  if (it == end || *it != row) return -1;
  return static_cast<int>(it - inner);
}

Discretization::Discretization(std::shared_ptr<const Mesh2D> mesh, int quadrature_degree)
    : mesh_(std::move(mesh)), rule_(triangle_rule(quadrature_degree)) {
  if (!mesh_) throw std::invalid_argument("Discretization: null mesh");
  const Mesh2D& m = *mesh_;
  const std::size_t nt = m.num_triangles();
  const int nv = static_cast<int>(m.num_vertices());
  const int ne = static_cast<int>(m.num_edges());

  order_nodes_.resize(nt);
  grad_lambda_.resize(nt);
  area_.resize(nt);
  edge_local_.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = m.triangles()[t];
    const Vec2& p0 = m.vertices()[tri[0]];
    const Vec2& p1 = m.vertices()[tri[1]];
    const Vec2& p2 = m.vertices()[tri[2]];
    const double a = m.signed_area(t);
    area_[t] = a;
    const double s = 1.0 / (2.0 * a);
    grad_lambda_[t] = {Vec2(p1.y() - p2.y(), p2.x() - p1.x()) * s,
                       Vec2(p2.y() - p0.y(), p0.x() - p2.x()) * s,
                       Vec2(p0.y() - p1.y(), p1.x() - p0.x()) * s};
    const auto& te = m.triangle_edges()[t];
    order_nodes_[t] = {tri[0], tri[1], tri[2], nv + te[0], nv + te[1], nv + te[2]};
    for (int l = 0; l < 3; ++l) {
      const int i = l;
      const int j = (l + 1) % 3;
      edge_local_[t][l] = tri[i] < tri[j] ? std::array<int, 2>{i, j} : std::array<int, 2>{j, i};
    }
  }

  Triplets c, d, k;
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = m.triangles()[t];
    const auto& g = grad_lambda_[t];
    const auto& te = m.triangle_edges()[t];
    for (int l = 0; l < 3; ++l) {
      const auto [a, b] = edge_local_[t][l];
      for (int j = 0; j < 3; ++j) {
        // Integral of (lambda_a grad lambda_b - lambda_b grad lambda_a) . grad lambda_j.
        const double value = area_[t] / 3.0 * (g[b].dot(g[j]) - g[a].dot(g[j]));
        c.emplace_back(te[l], tri[j], value);
      }
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) k.emplace_back(tri[i], tri[j], area_[t] * g[i].dot(g[j]));
    }
  }
  for (int e = 0; e < ne; ++e) {
    d.emplace_back(e, m.edges()[e][1], 1.0);
    d.emplace_back(e, m.edges()[e][0], -1.0);
  }
  constraint_ = from_triplets(ne, nv, c);
  gradient_ = from_triplets(ne, nv, d);
  p1_stiffness_ = from_triplets(nv, nv, k);

  grad_hat_norm_.resize(nv);
  Triplets pinned;
  for (int col = 0; col < p1_stiffness_.outerSize(); ++col) {
    for (SparseOperator::InnerIterator it(p1_stiffness_, col); it; ++it) {
      if (it.row() == it.col()) grad_hat_norm_[col] = std::sqrt(it.value());
      if (it.row() != 0 && it.col() != 0) pinned.emplace_back(it.row(), it.col(), it.value());
    }
  }
  pinned.emplace_back(0, 0, 1.0);
  const SparseOperator pinned_stiffness = from_triplets(nv, nv, pinned);
  poisson_.compute(pinned_stiffness);
  if (poisson_.info() != Eigen::Success) {
    throw std::runtime_error("Discretization: factorization of the P1 Poisson operator failed");
  }

  std::vector<std::array<int, 12>> real_dofs(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    for (int i = 0; i < 6; ++i) {
      real_dofs[t][2 * i] = 2 * order_nodes_[t][i];
      real_dofs[t][2 * i + 1] = 2 * order_nodes_[t][i] + 1;
    }
  }
  build_pattern(static_cast<Eigen::Index>(2 * num_order_nodes()), real_dofs, order_pattern_,
                order_slots_);
  build_pattern(static_cast<Eigen::Index>(ne), m.triangle_edges(), potential_pattern_,
                potential_slots_);
}

std::vector<Vec2> Discretization::order_node_coordinates() const {
  std::vector<Vec2> nodes = mesh_->vertices();
  nodes.reserve(num_order_nodes());
  for (const auto& e : mesh_->edges()) {
    nodes.push_back(0.5 * (mesh_->vertices()[e[0]] + mesh_->vertices()[e[1]]));
  }
  return nodes;
}

PointBasis Discretization::basis(std::size_t t, std::size_t q) const {
  PointBasis b;
  const auto& lam = rule_.points[q];
  const auto& tri = mesh_->triangles()[t];
  const auto& g = grad_lambda_[t];
  b.lambda = lam;
  b.x = lam[0] * mesh_->vertices()[tri[0]] + lam[1] * mesh_->vertices()[tri[1]] +
        lam[2] * mesh_->vertices()[tri[2]];
  b.weight = rule_.weights[q] * 2.0 * area_[t];
  for (int i = 0; i < 3; ++i) {
    b.p2[i] = lam[i] * (2.0 * lam[i] - 1.0);
    b.grad_p2[i] = (4.0 * lam[i] - 1.0) * g[i];
    b.grad_p1[i] = g[i];
  }
  for (int l = 0; l < 3; ++l) {
    const int i = l;
    const int j = (l + 1) % 3;
    b.p2[3 + l] = 4.0 * lam[i] * lam[j];
    b.grad_p2[3 + l] = 4.0 * (lam[j] * g[i] + lam[i] * g[j]);
    const auto [ea, eb] = edge_local_[t][l];
    b.nedelec[l] = lam[ea] * g[eb] - lam[eb] * g[ea];
    b.curl_nedelec[l] = 2.0 * cross(g[ea], g[eb]);
  }
  return b;
}

PointFields Discretization::evaluate(const PointBasis& b, std::size_t t, const OrderField& u,
                                     const PotentialField& A) const {
  PointFields f;
  f.u = 0.0;
  f.grad_u = {Complex(0.0), Complex(0.0)};
  const auto& nodes = order_nodes_[t];
  for (int i = 0; i < 6; ++i) {
    const Complex c = u.at(nodes[i]);
    f.u += c * b.p2[i];
    f.grad_u[0] += c * b.grad_p2[i].x();
    f.grad_u[1] += c * b.grad_p2[i].y();
  }
  if (A.size() != 0) {
    const auto& edges = potential_dofs(t);
    for (int l = 0; l < 3; ++l) {
      const double c = A.coeffs[edges[l]];
      f.A += c * b.nedelec[l];
      f.curl_A += c * b.curl_nedelec[l];
    }
  }
  return f;
}

PotentialField Discretization::project_div_free(const PotentialField& B) const {
  if (B.size() != num_potential_dofs()) {
    throw std::invalid_argument("project_div_free: field size does not match the mesh");
  }
  Eigen::VectorXd rhs = constraint_.transpose() * B.coeffs;
  rhs[0] = 0.0;
  Eigen::VectorXd p = poisson_.solve(rhs);
  if (poisson_.info() != Eigen::Success || !p.allFinite()) {
    throw std::runtime_error("project_div_free: Poisson solve failed");
  }
  p.array() -= p.mean();
  return PotentialField(Eigen::VectorXd(B.coeffs - gradient_ * p));
}

double Discretization::divergence_residual(const PotentialField& B) const {
  const double norm = std::sqrt(std::max(0.0, potential_l2_inner(*this, B, B)));
  if (norm == 0.0) return 0.0;
  const Eigen::VectorXd r = constraint_.transpose() * B.coeffs;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    worst = std::max(worst, std::abs(r[j]) / (norm * grad_hat_norm_[j]));
  }
  return worst;
}

SparseOperator Discretization::order_mass() const {
  SparseOperator m = order_pattern_;
  double* values = m.valuePtr();
  for (std::size_t t = 0; t < num_triangles(); ++t) {
    const auto& slots = order_slots_[t];
    for (std::size_t q = 0; q < rule_.size(); ++q) {
      const PointBasis b = basis(t, q);
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
          const double v = b.weight * b.p2[i] * b.p2[j];
          values[slots[(2 * i) * 12 + 2 * j]] += v;
          values[slots[(2 * i + 1) * 12 + 2 * j + 1]] += v;
        }
      }
    }
  }
  return m;
}

SparseOperator Discretization::order_stiffness() const {
  SparseOperator m = order_pattern_;
  double* values = m.valuePtr();
  for (std::size_t t = 0; t < num_triangles(); ++t) {
    const auto& slots = order_slots_[t];
    for (std::size_t q = 0; q < rule_.size(); ++q) {
      const PointBasis b = basis(t, q);
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
          const double v = b.weight * b.grad_p2[i].dot(b.grad_p2[j]);
          values[slots[(2 * i) * 12 + 2 * j]] += v;
          values[slots[(2 * i + 1) * 12 + 2 * j + 1]] += v;
        }
      }
    }
  }
  return m;
}

SparseOperator Discretization::potential_mass() const {
  SparseOperator m = potential_pattern_;
  double* values = m.valuePtr();
  for (std::size_t t = 0; t < num_triangles(); ++t) {
    const auto& slots = potential_slots_[t];
    for (std::size_t q = 0; q < rule_.size(); ++q) {
      const PointBasis b = basis(t, q);
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) values[slots[i * 3 + j]] += b.weight * b.nedelec[i].dot(b.nedelec[j]);
      }
    }
  }
  return m;
}

SparseOperator Discretization::potential_curl_curl() const {
  SparseOperator m = potential_pattern_;
  double* values = m.valuePtr();
  for (std::size_t t = 0; t < num_triangles(); ++t) {
    const auto& slots = potential_slots_[t];
    const PointBasis b = basis(t, 0);
    const double area = area_[t];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) values[slots[i * 3 + j]] += area * b.curl_nedelec[i] * b.curl_nedelec[j];
    }
  }
  return m;
}

SparseOperator assemble_a_k(const Discretization& disc, const OrderField& u,
                            const PotentialField& A, double kappa, double beta) {
  if (!(kappa > 0.0)) throw std::invalid_argument("assemble_a_k: kappa must be positive");
  if (u.num_nodes() != disc.num_order_nodes() ||
      (A.size() != 0 && A.size() != disc.num_potential_dofs())) {
    throw std::invalid_argument("assemble_a_k: field sizes do not match the discretization");
  }
  const double inv_k = 1.0 / kappa;
  SparseOperator m = disc.order_pattern();
  double* values = m.valuePtr();
  for (std::size_t t = 0; t < disc.num_triangles(); ++t) {
    double s[6][6] = {};
    double g[6][6] = {};
    for (std::size_t q = 0; q < disc.rule().size(); ++q) {
      const PointBasis b = disc.basis(t, q);
      const PointFields f = disc.evaluate(b, t, u, A);
      const double a2 = f.A.squaredNorm();
      const double mass = a2 + beta + std::norm(f.u) + a2;
      double a_dot_grad[6];
      for (int i = 0; i < 6; ++i) a_dot_grad[i] = f.A.dot(b.grad_p2[i]);
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
          s[i][j] += b.weight * (inv_k * inv_k * b.grad_p2[i].dot(b.grad_p2[j]) + mass * b.p2[i] * b.p2[j]);
          g[i][j] += b.weight * inv_k * (b.p2[j] * a_dot_grad[i] - b.p2[i] * a_dot_grad[j]);
        }
      }
    }
    const auto& slots = disc.order_slots(t);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        values[slots[(2 * i) * 12 + 2 * j]] += s[i][j];
        values[slots[(2 * i + 1) * 12 + 2 * j + 1]] += s[i][j];
        values[slots[(2 * i) * 12 + 2 * j + 1]] += g[i][j];
        values[slots[(2 * i + 1) * 12 + 2 * j]] -= g[i][j];
      }
    }
  }
  return m;
}

SparseOperator assemble_b_k(const Discretization& disc, const OrderField& u, double beta) {
  if (u.num_nodes() != disc.num_order_nodes()) {
    throw std::invalid_argument("assemble_b_k: field size does not match the discretization");
  }
  const PotentialField none;
  SparseOperator m = disc.potential_pattern();
  double* values = m.valuePtr();
  for (std::size_t t = 0; t < disc.num_triangles(); ++t) {
    double k[3][3] = {};
    for (std::size_t q = 0; q < disc.rule().size(); ++q) {
      const PointBasis b = disc.basis(t, q);
      const PointFields f = disc.evaluate(b, t, u, none);
      const double coef = beta + std::norm(f.u);
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          k[i][j] += b.weight * (b.curl_nedelec[i] * b.curl_nedelec[j] + coef * b.nedelec[i].dot(b.nedelec[j]));
        }
      }
    }
    const auto& slots = disc.potential_slots(t);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) values[slots[i * 3 + j]] += k[i][j];
    }
  }
  return m;
}

OrderField interpolate_order(const Discretization& disc, const ComplexFunction& f) {
  const auto nodes = disc.order_node_coordinates();
  OrderField u(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) u.set(i, f(nodes[i]));
  return u;
}

PotentialField interpolate_potential(const Discretization& disc, const VectorFunction& F) {
  const Mesh2D& m = disc.mesh();
  PotentialField A(m.num_edges());
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    const Vec2& a = m.vertices()[m.edges()[e][0]];
    const Vec2& b = m.vertices()[m.edges()[e][1]];
    const Vec2 span = b - a;
    double moment = 0.0;
    for (double s : kEdgeGaussPoints) moment += 0.5 * F(a + s * span).dot(span);
    A.coeffs[static_cast<Eigen::Index>(e)] = moment;
  }
  return A;
}

double order_l2_inner(const Discretization& disc, const OrderField& v, const OrderField& w) {
  double sum = 0.0;
  const PotentialField none;
  for (std::size_t t = 0; t < disc.num_triangles(); ++t) {
    for (std::size_t q = 0; q < disc.rule().size(); ++q) {
      const PointBasis b = disc.basis(t, q);
      const Complex fv = disc.evaluate(b, t, v, none).u;
      const Complex fw = disc.evaluate(b, t, w, none).u;
      sum += b.weight * (fv * std::conj(fw)).real();
    }
  }
  return sum;
}

double potential_l2_inner(const Discretization& disc, const PotentialField& B,
                          const PotentialField& C) {
  double sum = 0.0;
  for (std::size_t t = 0; t < disc.num_triangles(); ++t) {
    const auto& edges = disc.potential_dofs(t);
    for (std::size_t q = 0; q < disc.rule().size(); ++q) {
      const PointBasis b = disc.basis(t, q);
      Vec2 fb = Vec2::Zero();
      Vec2 fc = Vec2::Zero();
      for (int l = 0; l < 3; ++l) {
        fb += B.coeffs[edges[l]] * b.nedelec[l];
        fc += C.coeffs[edges[l]] * b.nedelec[l];
      }
      sum += b.weight * fb.dot(fc);
    }
  }
  return sum;
}

}  // namespace glenn
