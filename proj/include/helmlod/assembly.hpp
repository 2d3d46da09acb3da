#pragma once

#include "helmlod/coefficients.hpp"
#include "helmlod/common.hpp"
#include "helmlod/mesh.hpp"

#include <map>
#include <span>
#include <vector>

namespace helmlod {

using Matrix4c = Eigen::Matrix<Complex, 4, 4>;
using Matrix4r = Eigen::Matrix<double, 4, 4>;

/// Q1 basis on the reference square with counter-clockwise corners
/// (0,0), (1,0), (1,1), (0,1).
std::array<double, 4> q1_values(double xi, double eta);
std::array<Point, 4> q1_reference_gradients(double xi, double eta);

/// Element matrices of the sesquilinear form on every cell of one grid
/// level, evaluated once. Entry (a, b) of cell_form(c) is a(phi_b, phi_a)
/// restricted to cell c, including the Robin faces of c.
class ElementForms {
 public:
  ElementForms(const GridLevel& grid, const CoefficientSet& coeffs);

  const GridLevel& grid() const { return grid_; }
  double wavenumber() const { return k_; }

  const Matrix4c& cell_form(int cell) const { return form_[cell]; }
  /// (A grad phi_b, grad phi_a)_c.
  const Matrix4r& stiffness_A(int cell) const { return stiff_a_[cell]; }
  /// (V^2 phi_b, phi_a)_c.
  const Matrix4r& mass_V2(int cell) const { return mass_v2_[cell]; }
  /// Unweighted Q1 mass and stiffness, identical on every cell.
  const Matrix4r& mass() const { return mass_; }
  const Matrix4r& stiffness() const { return stiff_; }

 private:
  GridLevel grid_;
  double k_;
  std::vector<Matrix4c> form_;
  std::vector<Matrix4r> stiff_a_;
  std::vector<Matrix4r> mass_v2_;
  Matrix4r mass_;
  Matrix4r stiff_;
};

/// Global matrix M with M(i, j) = a(phi_j, phi_i) over the free dofs of the level.
CSparse assemble_form(const ElementForms& forms);
CSparse assemble_form(const MeshHierarchy& mesh, Level level, const CoefficientSet& coeffs);

/// b(i) = (f, phi_i) + (g, phi_i)_{Gamma_R}.
CVector assemble_load(const GridLevel& grid, const CoefficientSet& coeffs);
CVector assemble_load(const MeshHierarchy& mesh, Level level, const CoefficientSet& coeffs);

/// Sum of cell forms over `cells`, indexed by `local_of_node` (node id ->
/// local index, or -1 to drop). Square of size `n_local`.
CSparse assemble_cells(const ElementForms& forms, std::span<const int> cells,
                       const std::function<int(int)>& local_of_node, int n_local);

/// Fine free dofs belonging to V_h(patch): non-Dirichlet fine vertices all of
/// whose adjacent fine cells lie in the patch. Sorted by node id.
std::vector<int> patch_fine_dofs(const MeshHierarchy& mesh, const ElementPatch& patch);

struct LocalizedForms {
  std::vector<int> patch_dofs;               // global fine dof ids
  CSparse patch_form;                        // a_{Omega_T} on patch_dofs
  std::map<int, CSparse> element_forms;      // coarse T -> a_T on patch_dofs
};

LocalizedForms assemble_localized(const MeshHierarchy& mesh, const ElementForms& fine_forms,
                                  const ElementPatch& patch);
LocalizedForms assemble_localized(const MeshHierarchy& mesh, const CoefficientSet& coeffs,
                                  const ElementPatch& patch);

enum class NormKind { V, L2, H1semi };

/// Real symmetric matrices for the weighted norms over the free dofs of a level.
struct NormMatrices {
  double k = 1.0;
  RSparse mass_V2;      // (V^2 u, v)
  RSparse stiffness_A;  // (A grad u, grad v)
  RSparse mass;         // (u, v)
  RSparse stiffness;    // (grad u, grad v)

  /// Gram matrix of the V inner product: k^2 mass_V2 + stiffness_A.
  RSparse v_gram() const;
  double norm(const CVector& u, NormKind which) const;
};

NormMatrices assemble_norms(const ElementForms& forms);
double norm(const MeshHierarchy& mesh, Level level, const CoefficientSet& coeffs,
            const CVector& u, NormKind which);

/// a(u, v) = v^H M u for dof vectors on the level of M.
Complex apply_form(const CSparse& form, const CVector& u, const CVector& v);

/// Coordinate text dump "row col re im" of a sparse matrix.
void write_matrix_coo(const CSparse& m, std::ostream& out);

}  // namespace helmlod
