#include "helmlod/pgsolve.hpp"

#include "helmlod/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace helmlod {

namespace {

constexpr double kResidualTolerance = 1e-10;

}  // namespace

FineProblem::FineProblem(const GridLevel& fine, const CoefficientSet& coeffs)
    : forms(fine, coeffs),
      matrix(assemble_form(forms)),
      load(assemble_load(fine, coeffs)),
      norms(assemble_norms(forms)) {}

PGSystem assemble_pg_system(const FineProblem& fine, const MeshHierarchy& mesh,
                            const InterpolationOperator& op, const CorrectorBasis& basis) {
  if (fine.matrix.rows() != op.prolongation.rows())
    throw InvalidInput("fine problem does not match the mesh hierarchy");
  const CSparse p = op.prolongation.cast<Complex>();
  const CSparse test = p - basis.correctors;
  const CSparse mp = fine.matrix * p;
  PGSystem sys;
  sys.matrix = CSparse(test.adjoint()) * mp;
  sys.matrix.prune(Complex(0.0));
  sys.rhs = test.adjoint() * fine.load;
  sys.order_m = basis.order_m;
  sys.wavenumber = fine.forms.wavenumber();
  const GridLevel& coarse = mesh.coarse();
  sys.coarse_nodes.reserve(coarse.num_dofs());
  for (int d = 0; d < coarse.num_dofs(); ++d) sys.coarse_nodes.push_back(coarse.node_of_dof(d));
  return sys;
}

SolveResult solve_linear(const CSparse& matrix, const CVector& rhs) {
  SolveResult out;
  if (matrix.rows() == 0) {
    out.solution = CVector::Zero(0);
    return out;
  }
  SparseDirectSolver solver(matrix);
  out.rcond = solver.rcond();
  out.solution = solver.solve(rhs);
  out.residual = relative_residual(matrix, out.solution, rhs);
  if (!(out.residual <= kResidualTolerance)) {
    std::ostringstream msg;
    msg << "relative residual " << out.residual << " exceeds " << kResidualTolerance
        << " (rcond estimate " << out.rcond << ")";
    throw SolverError(msg.str(), out.rcond);
  }
  return out;
}

SolveResult solve_mspgfem(const PGSystem& system) {
  SolveResult out = solve_linear(system.matrix, system.rhs);
  if (system.wavenumber > 0.0 && system.order_m < std::log2(system.wavenumber) - 1.0) {
    std::ostringstream msg;
    msg << "oversampling m = " << system.order_m << " < log2(k) - 1 = "
        << std::log2(system.wavenumber) - 1.0 << "; quasi-optimality not expected";
    out.warnings.push_back(msg.str());
  }
  return out;
}

SolveResult solve_standard_fem(const MeshHierarchy& mesh, Level level, const CoefficientSet& coeffs) {
  return solve_linear(assemble_form(mesh, level, coeffs), assemble_load(mesh, level, coeffs));
}

SolveResult solve_standard_fem(const FineProblem& fine) { return solve_linear(fine.matrix, fine.load); }

BestApproximation best_approximation(const NormMatrices& norms, const InterpolationOperator& op,
                                     const CVector& u_h, bool compute_minimizer) {
  BestApproximation out;
  out.surrogate_V = norms.norm(u_h - op.embed(op.apply(u_h)), NormKind::V);
  if (compute_minimizer) {
    const RSparse gram = norms.v_gram();
    const RSparse pt = op.prolongation.transpose();
    const RSparse coarse_gram = pt * gram * op.prolongation;
    const CVector rhs = pt * (gram * u_h);
    out.minimizer = solve_spd(coarse_gram, rhs);
    out.minimizer_V = norms.norm(u_h - op.embed(out.minimizer), NormKind::V);
  }
  return out;
}

SolveReport diagnostics(const NormMatrices& norms, const InterpolationOperator& op,
                        const CVector& u_h, const CVector& u_H, bool compute_minimizer) {
  SolveReport rep;
  rep.u_H = u_H;
  const CVector diff = u_h - op.embed(u_H);
  rep.error_V = norms.norm(diff, NormKind::V);
  rep.error_L2 = norms.norm(diff, NormKind::L2);
  rep.reference_V = norms.norm(u_h, NormKind::V);
  const BestApproximation best = best_approximation(norms, op, u_h, compute_minimizer);
  rep.best_approx_V = best.surrogate_V;
  if (compute_minimizer) rep.best_approx_min_V = best.minimizer_V;
  rep.quasi_opt_ratio = best.surrogate_V > 0.0 ? rep.error_V / best.surrogate_V
                        : rep.error_V > 0.0   ? std::numeric_limits<double>::infinity()
                                              : 0.0;
  return rep;
}

}  // namespace helmlod
