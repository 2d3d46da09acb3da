#pragma once

#include "helmlod/common.hpp"

#include <memory>

namespace helmlod {

/// Sparse direct LU for complex systems. Owns a copy of the factorized
/// matrix so the caller's matrix may go out of scope.
class SparseDirectSolver {
 public:
  SparseDirectSolver();
  explicit SparseDirectSolver(const CSparse& matrix);
  ~SparseDirectSolver();
  SparseDirectSolver(SparseDirectSolver&&) noexcept;
  SparseDirectSolver& operator=(SparseDirectSolver&&) noexcept;

  /// Throws SolverError if the matrix is numerically singular.
  void factorize(const CSparse& matrix);

  CVector solve(const CVector& rhs) const;
  CMatrix solve(const CMatrix& rhs) const;

  /// Reciprocal condition estimate reported by the factorization (0 if the
  /// backend does not provide one).
  double rcond() const;
  Eigen::Index size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// ||A x - b|| / ||b||, or ||A x|| when b vanishes.
double relative_residual(const CSparse& a, const CVector& x, const CVector& b);

/// Solve the real SPD system with a complex right side (real and imaginary
/// parts separately).
CVector solve_spd(const RSparse& a, const CVector& rhs);

}  // namespace helmlod
