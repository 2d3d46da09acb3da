#pragma once

#include "helmlod/assembly.hpp"
#include "helmlod/coefficients.hpp"
#include "helmlod/common.hpp"
#include "helmlod/interpolation.hpp"
#include "helmlod/linalg.hpp"
#include "helmlod/mesh.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace helmlod {

/// Correctors lambda_{z,T} for the (up to four) free corners z of one coarse
/// element T, solved on the patch N^m(T).
struct ElementCorrector {
  int element = -1;
  int order_m = 1;
  std::vector<int> patch_dofs;        // global fine dofs of V_h(N^m(T)), sorted
  std::array<int, 4> coarse_dofs{};   // free coarse dof per corner, -1 if Dirichlet
  CMatrix values;                     // patch_dofs.size() x 4
  double residual = 0.0;              // relative residual of the saddle solve
  double rcond = 0.0;

  /// lambda_{z,T} for corner `corner`, zero-padded to all fine free dofs.
  CVector global(int corner, int num_fine_dofs) const;
};

/// Shared, immutable inputs for corrector solves on one hierarchy.
struct CorrectorContext {
  const MeshHierarchy& mesh;
  const ElementForms& fine_forms;
  const InterpolationOperator& op;
};

/// Solves a_{N^m(T)}(w, lambda) = a_T(w, Lambda_z) for all w in W_h(N^m(T))
/// and every free corner z of T. The unknown sits in the conjugated slot,
/// so the assembled system uses the adjoint of the patch form.
ElementCorrector solve_element_correctors(const CorrectorContext& ctx, int element, int m);

/// lambda_{z,T} as a global fine vector. Zero when z is not a free corner of T.
CVector solve_element_corrector(const CorrectorContext& ctx, int coarse_dof, int element, int m);

/// lambda_z = sum over elements T adjacent to z of lambda_{z,T}.
CVector node_corrector(const CorrectorContext& ctx, int coarse_dof, int m);

struct CorrectorBasis {
  int order_m = 1;
  /// Column z holds lambda_z: fine free dofs x coarse free dofs.
  CSparse correctors;
  /// Coarse cells of the union of patches contributing to lambda_z.
  std::vector<std::vector<int>> support;
  int solve_count = 0;
  double max_residual = 0.0;
  double min_rcond = 0.0;
  std::vector<std::string> warnings;
};

CorrectorBasis build_test_basis(const CorrectorContext& ctx, int m);

/// Correctors on the whole domain: a(w, C_z) = a(w, Lambda_z) for all w in
/// W_h. One factorization serves every node.
class IdealCorrectorSolver {
 public:
  explicit IdealCorrectorSolver(const CorrectorContext& ctx);

  CVector solve(int coarse_dof) const;
  double last_residual() const { return last_residual_; }

 private:
  const CorrectorContext& ctx_;
  CSparse form_adjoint_;
  CSparse saddle_;
  SparseDirectSolver solver_;
  mutable double last_residual_ = 0.0;
};

CVector solve_ideal_corrector(const CorrectorContext& ctx, int coarse_dof);

struct DecayProfile {
  int coarse_dof = -1;
  std::vector<int> m;
  std::vector<double> deviation;  // ||grad(lambda_z - lambda_z^(m))||
  double reference_norm = 0.0;    // ||grad lambda_z||
  double theta = 0.0;             // geometric mean of successive ratios
  bool monotone = true;
};

DecayProfile decay_profile(const CorrectorContext& ctx, int coarse_dof, std::vector<int> m_list);

/// Dump "dof x y re im" of a corrector for external plotting.
void write_corrector(const GridLevel& fine, const CVector& corrector, std::ostream& out);

}  // namespace helmlod
