#include "glenn/linear_solve.hpp"

#include <cmath>

#include "glenn/fem.hpp"

namespace glenn {

void SpdSolver::factorize(const SparseOperator& op) {
  if (op.rows() != op.cols()) throw std::invalid_argument("SpdSolver: operator must be square");
  op_copy_ = op;
  op_copy_.makeCompressed();
  if (!analyzed_ || op_copy_.nonZeros() != pattern_nnz_ || op_copy_.rows() != pattern_rows_) {
    ldlt_.analyzePattern(op_copy_);
    analyzed_ = true;
    pattern_nnz_ = op_copy_.nonZeros();
    pattern_rows_ = op_copy_.rows();
  }
  ldlt_.factorize(op_copy_);
  if (ldlt_.info() != Eigen::Success) throw LinearSolveError("SpdSolver: factorization failed", 0);
  if ((ldlt_.vectorD().array() <= 0.0).any()) {
    throw LinearSolveError("SpdSolver: operator is not positive definite", 0);
  }
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& rhs) const {
  if (!analyzed_) throw std::logic_error("SpdSolver::solve called before factorize");
  const double rhs_norm = rhs.norm();
  last_iterations_ = 0;
  if (rhs_norm == 0.0) return Eigen::VectorXd::Zero(rhs.size());
  const double target = kRelativeTolerance * rhs_norm;

  Eigen::VectorXd x = ldlt_.solve(rhs);
  Eigen::VectorXd r = rhs - op_copy_ * x;
  if (r.norm() <= target && x.allFinite()) return x;

  // Preconditioned CG from the direct solution.
  constexpr int kMaxIterations = 200;
  Eigen::VectorXd z = ldlt_.solve(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= kMaxIterations; ++it) {
    last_iterations_ = it;
    const Eigen::VectorXd ap = op_copy_ * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) throw LinearSolveError("SpdSolver: CG breakdown", it);
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    if (r.norm() <= target) return x;
    z = ldlt_.solve(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw LinearSolveError("SpdSolver: residual tolerance not reached", kMaxIterations);
}

Eigen::VectorXd solve_spd(const SparseOperator& op, const Eigen::VectorXd& rhs) {
  if (op.rows() != rhs.size()) throw std::invalid_argument("solve_spd: dimension mismatch");
  SpdSolver solver;
  solver.factorize(op);
  return solver.solve(rhs);
}

void SaddlePointSolver::factorize(const SparseOperator& k_block, const SparseOperator& constraint) {
  const Eigen::Index n = k_block.rows();
  const Eigen::Index m = constraint.cols();
  if (k_block.cols() != n || constraint.rows() != n) {
    throw std::invalid_argument("SaddlePointSolver: block dimensions do not match");
  }
  if (!analyzed_ || static_cast<Eigen::Index>(k_slots_.size()) != k_block.nonZeros()) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(k_block.nonZeros() + 2 * constraint.nonZeros());
    for (int col = 0; col < k_block.outerSize(); ++col) {
      for (SparseOperator::InnerIterator it(k_block, col); it; ++it) t.emplace_back(it.row(), it.col(), 0.0);
    }
    for (int col = 0; col < constraint.outerSize(); ++col) {
      for (SparseOperator::InnerIterator it(constraint, col); it; ++it) {
        t.emplace_back(it.row(), n + it.col(), it.value());
        t.emplace_back(n + it.col(), it.row(), it.value());
      }
    }
    system_.resize(n + m, n + m);
    system_.setFromTriplets(t.begin(), t.end());
    system_.makeCompressed();
    k_slots_.clear();
    k_slots_.reserve(k_block.nonZeros());
    for (int col = 0; col < k_block.outerSize(); ++col) {
      for (SparseOperator::InnerIterator it(k_block, col); it; ++it) {
        k_slots_.push_back(sparse_slot(system_, static_cast<int>(it.row()), static_cast<int>(it.col())));
      }
    }
    lu_.analyzePattern(system_);
    analyzed_ = true;
  }
  double* values = system_.valuePtr();
  std::size_t idx = 0;
  for (int col = 0; col < k_block.outerSize(); ++col) {
    for (SparseOperator::InnerIterator it(k_block, col); it; ++it) values[k_slots_[idx++]] = it.value();
  }
  lu_.factorize(system_);
  if (lu_.info() != Eigen::Success) {
    throw LinearSolveError("SaddlePointSolver: factorization failed: " + lu_.lastErrorMessage(), 0);
  }
}

Eigen::VectorXd SaddlePointSolver::solve(const Eigen::VectorXd& f) const {
  if (!analyzed_) throw std::logic_error("SaddlePointSolver::solve called before factorize");
  const Eigen::Index n = f.size();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(system_.rows());
  rhs.head(n) = f;
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return Eigen::VectorXd::Zero(n);
  Eigen::VectorXd x = lu_.solve(rhs);
  constexpr int kRefinementSteps = 5;
  for (int it = 0; it <= kRefinementSteps; ++it) {
    const Eigen::VectorXd r = rhs - system_ * x;
    if (r.norm() <= kRelativeTolerance * rhs_norm && x.allFinite()) return x.head(n);
    if (it == kRefinementSteps) break;
    x += lu_.solve(r);
  }
  throw LinearSolveError("SaddlePointSolver: residual tolerance not reached", kRefinementSteps);
}

}  // namespace glenn
