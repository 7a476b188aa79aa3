#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace glenn {

using SparseOperator = Eigen::SparseMatrix<double>;

class LinearSolveError : public std::runtime_error {
 public:
  LinearSolveError(const std::string& what, int iterations)
      : std::runtime_error(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}
  [[nodiscard]] int iterations() const { return iterations_; }

 private:
  int iterations_;
};

/// Sparse LDL^T with conjugate-gradient refinement preconditioned by the
/// factorization. The symbolic analysis is reused while the pattern stays
/// the same, so repeated factorizations of an evolving operator are cheap.
class SpdSolver {
 public:
  static constexpr double kRelativeTolerance = 1e-10;

  void factorize(const SparseOperator& op);
  /// Throws LinearSolveError if ||op x - rhs|| > kRelativeTolerance ||rhs||.
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  [[nodiscard]] int last_iterations() const { return last_iterations_; }

 private:
  Eigen::SimplicialLDLT<SparseOperator> ldlt_;
  SparseOperator op_copy_;
  bool analyzed_ = false;
  Eigen::Index pattern_nnz_ = -1;
  Eigen::Index pattern_rows_ = -1;
  mutable int last_iterations_ = 0;
};

/// One-shot solve of a symmetric positive definite system.
Eigen::VectorXd solve_spd(const SparseOperator& op, const Eigen::VectorXd& rhs);

/// Symmetric indefinite system [K C; C^T 0] for the constrained potential
/// solve. Pattern analysis is done once; values are refreshed per call.
class SaddlePointSolver {
 public:
  static constexpr double kRelativeTolerance = 1e-10;

  /// `constraint` is E x m (columns already reduced to a full-rank set).
  void factorize(const SparseOperator& k_block, const SparseOperator& constraint);
  /// Returns the primal part of the solution for right-hand side (f, 0).
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& f) const;

 private:
  Eigen::SparseLU<SparseOperator, Eigen::COLAMDOrdering<int>> lu_;
  SparseOperator system_;
  std::vector<int> k_slots_;
  bool analyzed_ = false;
};

}  // namespace glenn
