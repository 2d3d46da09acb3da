#pragma once

#include "helmlod/assembly.hpp"
#include "helmlod/coefficients.hpp"
#include "helmlod/common.hpp"
#include "helmlod/corrector.hpp"
#include "helmlod/interpolation.hpp"
#include "helmlod/mesh.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace helmlod {

/// Fine-level system and norms, assembled once per (coefficients, h) and
/// shared by every coarse size built on the same fine grid.
struct FineProblem {
  ElementForms forms;
  CSparse matrix;
  CVector load;
  NormMatrices norms;

  FineProblem(const GridLevel& fine, const CoefficientSet& coeffs);
};

struct PGSystem {
  /// B(i, j) = a(Lambda_j, Lambda_i - lambda_i) over coarse free dofs.
  CSparse matrix;
  CVector rhs;
  /// Coarse node id of each row/column.
  std::vector<int> coarse_nodes;
  int order_m = 0;
  double wavenumber = 0.0;
};

PGSystem assemble_pg_system(const FineProblem& fine, const MeshHierarchy& mesh,
                            const InterpolationOperator& op, const CorrectorBasis& basis);

struct SolveResult {
  CVector solution;
  double residual = 0.0;
  double rcond = 0.0;
  std::vector<std::string> warnings;
};

/// Direct solve; throws SolverError (with the condition estimate) if the
/// factorization fails or the relative residual exceeds 1e-10.
SolveResult solve_linear(const CSparse& matrix, const CVector& rhs);

SolveResult solve_mspgfem(const PGSystem& system);

/// Galerkin solve on one level of the hierarchy.
SolveResult solve_standard_fem(const MeshHierarchy& mesh, Level level, const CoefficientSet& coeffs);
SolveResult solve_standard_fem(const FineProblem& fine);

struct BestApproximation {
  double surrogate_V = 0.0;  // ||(1 - I_H) u_h||_V
  double minimizer_V = 0.0;  // min over V_H of ||u_h - v_H||_V
  CVector minimizer;         // coarse coefficients of the V-orthogonal projection
};

BestApproximation best_approximation(const NormMatrices& norms, const InterpolationOperator& op,
                                     const CVector& u_h, bool compute_minimizer);

struct SolveReport {
  CVector u_H;  // coarse coefficients
  double error_V = 0.0;
  double error_L2 = 0.0;
  double reference_V = 0.0;  // ||u_h||_V
  double best_approx_V = 0.0;
  std::optional<double> best_approx_min_V;
  double quasi_opt_ratio = 0.0;
  double residual = 0.0;
  std::map<std::string, double> timings;
};

/// Errors of the coarse function P u_H against the reference u_h.
SolveReport diagnostics(const NormMatrices& norms, const InterpolationOperator& op,
                        const CVector& u_h, const CVector& u_H, bool compute_minimizer = false);

}  // namespace helmlod
