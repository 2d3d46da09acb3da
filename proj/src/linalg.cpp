#include "helmlod/linalg.hpp"

#include <Eigen/SparseCholesky>

#include <sstream>

#ifdef HELMLOD_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#else
#include <Eigen/SparseLU>
#endif

namespace helmlod {

namespace {

#ifdef HELMLOD_HAVE_UMFPACK
// Exposes the reciprocal condition estimate UMFPACK writes into its info
// array during the numeric factorization.
class UmfpackLU : public Eigen::UmfPackLU<CSparse> {
 public:
  double rcond_estimate() const { return m_umfpackInfo(UMFPACK_RCOND); }
};
using Backend = UmfpackLU;
#else
using Backend = Eigen::SparseLU<CSparse, Eigen::COLAMDOrdering<int>>;
#endif

}  // namespace

struct SparseDirectSolver::Impl {
  CSparse matrix;
  Backend lu;
};

SparseDirectSolver::SparseDirectSolver() = default;
SparseDirectSolver::SparseDirectSolver(const CSparse& matrix) { factorize(matrix); }
SparseDirectSolver::~SparseDirectSolver() = default;
SparseDirectSolver::SparseDirectSolver(SparseDirectSolver&&) noexcept = default;
SparseDirectSolver& SparseDirectSolver::operator=(SparseDirectSolver&&) noexcept = default;

void SparseDirectSolver::factorize(const CSparse& matrix) {
  if (matrix.rows() != matrix.cols())
    throw InvalidInput("SparseDirectSolver: matrix must be square");
  impl_ = std::make_unique<Impl>();
  impl_->matrix = matrix;
  impl_->matrix.makeCompressed();
  if (impl_->matrix.rows() == 0) return;
  impl_->lu.compute(impl_->matrix);
  const double rc = rcond();
  if (impl_->lu.info() != Eigen::Success || !(rc > 1e-15 || rc == 0.0)) {
    std::ostringstream msg;
    msg << "sparse LU failed (n = " << matrix.rows() << ", rcond estimate " << rc
        << ")";
    throw SolverError(msg.str(), rc);
  }
}

CVector SparseDirectSolver::solve(const CVector& rhs) const {
  if (!impl_) throw InvalidInput("SparseDirectSolver: not factorized");
  if (impl_->matrix.rows() == 0) return CVector(0);
  CVector x = impl_->lu.solve(rhs);
  return x;
}

CMatrix SparseDirectSolver::solve(const CMatrix& rhs) const {
  if (!impl_) throw InvalidInput("SparseDirectSolver: not factorized");
  if (impl_->matrix.rows() == 0) return CMatrix(0, rhs.cols());
  CMatrix x = impl_->lu.solve(rhs);
  return x;
}

double SparseDirectSolver::rcond() const {
#ifdef HELMLOD_HAVE_UMFPACK
  return impl_ ? impl_->lu.rcond_estimate() : 0.0;
#else
  return 0.0;
#endif
}

Eigen::Index SparseDirectSolver::size() const {
  return impl_ ? impl_->matrix.rows() : 0;
}

double relative_residual(const CSparse& a, const CVector& x, const CVector& b) {
  const double res = (a * x - b).norm();
  const double bn = b.norm();
  return bn > 0.0 ? res / bn : res;
}

CVector solve_spd(const RSparse& a, const CVector& rhs) {
  Eigen::SimplicialLDLT<RSparse> ldlt(a);
  if (ldlt.info() != Eigen::Success)
    throw SolverError("LDLT factorization failed", 0.0);
  const RVector re = ldlt.solve(RVector(rhs.real()));
  const RVector im = ldlt.solve(RVector(rhs.imag()));
  CVector out(rhs.size());
  out.real() = re;
  out.imag() = im;
  return out;
}

}  // namespace helmlod
