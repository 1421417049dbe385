#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include <Eigen/Sparse>

namespace homoglab {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class SolverKind { direct, cg };

std::string_view to_string(SolverKind kind);
SolverKind solver_kind_from_string(std::string_view tag);

struct SolverOptions {
  SolverKind kind = SolverKind::direct;
  /// Relative residual every solve must reach.
  double tol = 1e-10;
  /// Iteration cap for the iterative path; 0 picks 10·rows.
  int max_iterations = 0;
};

/// Factorization (or preconditioned iteration) of a fixed square matrix.
///
/// SPD matrices go to a supernodal Cholesky, falling back to the simplicial
/// variant if the supernodal path fails its residual check; non-symmetric
/// matrices go to sparse LU. solve() is serialized internally.
class LinearSolver {
 public:
  LinearSolver(SparseMatrix matrix, bool symmetric, SolverOptions options);
  ~LinearSolver();
  LinearSolver(const LinearSolver&) = delete;
  LinearSolver& operator=(const LinearSolver&) = delete;

  /// Throws SolverError when the relative residual exceeds options.tol.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  std::string_view backend() const;
  const SparseMatrix& matrix() const { return matrix_; }
  double factor_seconds() const { return factor_seconds_; }

 private:
  struct Impl;
  void factor();

  SparseMatrix matrix_;
  bool symmetric_;
  SolverOptions options_;
  std::unique_ptr<Impl> impl_;
  mutable std::mutex mutex_;
  double factor_seconds_ = 0.0;
};

}  // namespace homoglab
