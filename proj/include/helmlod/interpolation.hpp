#pragma once

#include "helmlod/common.hpp"
#include "helmlod/mesh.hpp"

#include <span>
#include <vector>

namespace helmlod {

/// Quasi-interpolation I_H = E_H o Pi_H from the fine Q1 space onto the
/// coarse Q1 space. Pi_H is the cellwise L2 projection onto (discontinuous)
/// Q1 on each coarse cell; E_H assigns each free coarse vertex the
/// arithmetic mean of the adjacent cells' values. Dirichlet vertices carry
/// no row, so I_H v vanishes on Gamma_D.
struct InterpolationOperator {
  /// coarse free dofs x fine free dofs.
  RSparse matrix;
  /// Fine representation of the coarse nodal basis: fine free dofs x coarse free dofs.
  RSparse prolongation;

  CVector apply(const CVector& fine) const { return matrix * fine; }
  CVector embed(const CVector& coarse) const { return prolongation * coarse; }
};

/// Maps nodal values on the (r+1)^2 fine vertices of one coarse cell
/// (x-index fastest) to the four Q1 coefficients of its L2 projection
/// (counter-clockwise corners).
RMatrix local_l2_projection(int refinement_factor);

InterpolationOperator build_interpolation(const MeshHierarchy& mesh);

/// Constraint rows I_H v = 0 restricted to a set of fine dofs. The kernel of
/// `matrix` (within those dofs) is W_h of the patch.
struct ConstraintSet {
  RSparse matrix;                // rows x fine_dofs.size()
  std::vector<int> coarse_rows;  // coarse dof of each row
};

ConstraintSet constraint_set(const InterpolationOperator& op, std::span<const int> fine_dofs);

}  // namespace helmlod
