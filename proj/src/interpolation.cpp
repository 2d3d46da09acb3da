#include "helmlod/interpolation.hpp"

#include "helmlod/assembly.hpp"
#include "helmlod/coefficients.hpp"

#include <algorithm>
#include <cmath>

namespace helmlod {

RMatrix local_l2_projection(int r) {
  const int side = r + 1;
  const GaussRule rule = gauss_rule(kVolumeQuadrature);
  // Reference coarse cell [0,1]^2; the cell area cancels in M^-1 * moments.
  Matrix4r mass = Matrix4r::Zero();
  RMatrix moments = RMatrix::Zero(4, side * side);
  const double h = 1.0 / r;
  for (int fy = 0; fy < r; ++fy)
    for (int fx = 0; fx < r; ++fx) {
      const int fine_nodes[4] = {fx + side * fy, fx + 1 + side * fy, fx + 1 + side * (fy + 1),
                                 fx + side * (fy + 1)};
      for (std::size_t qy = 0; qy < rule.points.size(); ++qy)
        for (std::size_t qx = 0; qx < rule.points.size(); ++qx) {
          const double w = rule.weights[qx] * rule.weights[qy] * h * h;
          const auto fine_phi = q1_values(rule.points[qx], rule.points[qy]);
          const double x = (fx + rule.points[qx]) * h;
          const double y = (fy + rule.points[qy]) * h;
          const auto coarse_phi = q1_values(x, y);
          for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) mass(a, b) += w * coarse_phi[a] * coarse_phi[b];
            for (int j = 0; j < 4; ++j) moments(a, fine_nodes[j]) += w * coarse_phi[a] * fine_phi[j];
          }
        }
    }
  return mass.inverse() * moments;
}

InterpolationOperator build_interpolation(const MeshHierarchy& mesh) {
  const GridLevel& coarse = mesh.coarse();
  const GridLevel& fine = mesh.fine();
  const int r = mesh.refinement_factor();
  const int side = r + 1;
  const RMatrix proj = local_l2_projection(r);

  // Number of coarse cells sharing each coarse vertex.
  std::vector<int> valence(coarse.num_nodes(), 0);
  for (int c = 0; c < coarse.num_cells(); ++c)
    for (int n : coarse.cell_nodes(c)) ++valence[n];

  std::vector<Eigen::Triplet<double>> ih;
  std::vector<Eigen::Triplet<double>> pr;
  for (int c = 0; c < coarse.num_cells(); ++c) {
    const auto [cx, cy] = coarse.cell_index(c);
    const auto corners = coarse.cell_nodes(c);
    for (int a = 0; a < 4; ++a) {
      const int z = coarse.dof(corners[a]);
      if (z < 0) continue;
      const double weight = 1.0 / valence[corners[a]];
      for (int j = 0; j < side; ++j)
        for (int i = 0; i < side; ++i) {
          const int fd = fine.dof(fine.node_id(cx * r + i, cy * r + j));
          if (fd < 0) continue;
          const double v = proj(a, i + side * j);
          // Round-off in the 4x4 inverse would otherwise add spurious stencil entries.
          if (std::abs(v) > 1e-14) ih.emplace_back(z, fd, weight * v);
        }
    }
  }

  // Prolongation: coarse hat of vertex z sampled at fine vertices. Each fine
  // vertex is visited once, from the lowest-id coarse cell containing it.
  for (int fnode = 0; fnode < fine.num_nodes(); ++fnode) {
    const int fd = fine.dof(fnode);
    if (fd < 0) continue;
    const auto [ix, iy] = fine.node_index(fnode);
    const int cx = std::min(ix / r, coarse.nx() - 1);
    const int cy = std::min(iy / r, coarse.ny() - 1);
    const double xi = static_cast<double>(ix - cx * r) / r;
    const double eta = static_cast<double>(iy - cy * r) / r;
    const auto phi = q1_values(xi, eta);
    const auto corners = coarse.cell_nodes(coarse.cell_id(cx, cy));
    for (int a = 0; a < 4; ++a) {
      const int z = coarse.dof(corners[a]);
      if (z >= 0 && phi[a] != 0.0) pr.emplace_back(fd, z, phi[a]);
    }
  }

  InterpolationOperator op;
  op.matrix.resize(coarse.num_dofs(), fine.num_dofs());
  op.matrix.setFromTriplets(ih.begin(), ih.end());
  op.prolongation.resize(fine.num_dofs(), coarse.num_dofs());
  op.prolongation.setFromTriplets(pr.begin(), pr.end());
  return op;
}

ConstraintSet constraint_set(const InterpolationOperator& op, std::span<const int> fine_dofs) {
  const int n_rows = static_cast<int>(op.matrix.rows());
  std::vector<int> row_map(n_rows, -1);
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t col = 0; col < fine_dofs.size(); ++col)
    for (RSparse::InnerIterator it(op.matrix, fine_dofs[col]); it; ++it)
      if (it.value() != 0.0) {
        row_map[it.row()] = 1;
        triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(col), it.value());
      }
  ConstraintSet set;
  for (int z = 0; z < n_rows; ++z)
    if (row_map[z] > 0) {
      row_map[z] = static_cast<int>(set.coarse_rows.size());
      set.coarse_rows.push_back(z);
    }
  for (auto& t : triplets) t = Eigen::Triplet<double>(row_map[t.row()], t.col(), t.value());
  set.matrix.resize(static_cast<Eigen::Index>(set.coarse_rows.size()),
                    static_cast<Eigen::Index>(fine_dofs.size()));
  set.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return set;
}

}  // namespace helmlod
