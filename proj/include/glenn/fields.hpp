#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Core>

namespace glenn {

using Complex = std::complex<double>;

/// Discrete order parameter: complex P2 coefficients (vertex nodes first,
/// then edge midpoints) stored as interleaved (Re, Im) pairs.
struct OrderField {
  Eigen::VectorXd coeffs;

  OrderField() = default;
  explicit OrderField(std::size_t num_nodes) : coeffs(Eigen::VectorXd::Zero(2 * num_nodes)) {}
  explicit OrderField(Eigen::VectorXd interleaved) : coeffs(std::move(interleaved)) {}

  [[nodiscard]] std::size_t num_nodes() const { return static_cast<std::size_t>(coeffs.size()) / 2; }
  [[nodiscard]] Complex at(std::size_t node) const { return {coeffs[2 * node], coeffs[2 * node + 1]}; }
  void set(std::size_t node, Complex value) {
    coeffs[2 * node] = value.real();
    coeffs[2 * node + 1] = value.imag();
  }
  [[nodiscard]] bool all_finite() const { return coeffs.allFinite(); }
};

/// Discrete vector potential: one tangential moment per mesh edge.
struct PotentialField {
  Eigen::VectorXd coeffs;

  PotentialField() = default;
  explicit PotentialField(std::size_t num_edges) : coeffs(Eigen::VectorXd::Zero(num_edges)) {}
  explicit PotentialField(Eigen::VectorXd moments) : coeffs(std::move(moments)) {}

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(coeffs.size()); }
  [[nodiscard]] bool all_finite() const { return coeffs.allFinite(); }
};

}  // namespace glenn
