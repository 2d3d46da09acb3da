#pragma once

#include "helmlod/assembly.hpp"
#include "helmlod/common.hpp"
#include "helmlod/corrector.hpp"
#include "helmlod/interpolation.hpp"
#include "helmlod/mesh.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <random>

namespace helmlod::testing {

inline CVector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex(d(rng), d(rng));
  return v;
}

inline RVector random_real(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  RVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

inline double rel_diff(const CVector& a, const CVector& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale > 0.0 ? (a - b).norm() / scale : 0.0;
}

/// Sum of a few random plane waves with wavelengths between `scale` and
/// 4 * `scale`, sampled at the free vertices of `grid`.
inline CVector smooth_field(const GridLevel& grid, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> len(1.0, 4.0);
  CVector v(grid.num_dofs());
  v.setZero();
  for (int wave = 0; wave < 6; ++wave) {
    double dx = u(rng), dy = u(rng);
    const double n = std::hypot(dx, dy) + 1e-3;
    const double kx = 2.0 * std::numbers::pi * dx / (n * len(rng) * scale);
    const double ky = 2.0 * std::numbers::pi * dy / (n * len(rng) * scale);
    const double amp = u(rng), phase = 3.0 * u(rng);
    for (int d = 0; d < grid.num_dofs(); ++d) {
      const Point p = grid.node_point(grid.node_of_dof(d));
      v[d] += amp * std::cos(kx * p.x + ky * p.y + phase);
    }
  }
  return v;
}

/// Largest per-cell ratio
///   (H^-1 ||v - I_H v||_{L2(T)} + ||grad I_H v||_{L2(T)}) / ||grad v||_{L2(N(T))}
/// over coarse cells T, evaluated cell by cell with exact Q1 mass and
/// stiffness on the fine grid.
inline double local_stability_ratio(const MeshHierarchy& mesh, const InterpolationOperator& op,
                                    const CVector& v) {
  const GridLevel& fine = mesh.fine();
  const GridLevel& coarse = mesh.coarse();
  CoefficientSet unit;
  unit.wavenumber_k = 0.0;
  const ElementForms forms(fine, unit);
  const CVector iv = op.embed(op.apply(v));
  const CVector e = v - iv;
  auto cell_vec = [&fine](const CVector& x, int cell) {
    Eigen::Matrix<Complex, 4, 1> out;
    const auto nodes = fine.cell_nodes(cell);
    for (int a = 0; a < 4; ++a) {
      const int d = fine.dof(nodes[a]);
      out[a] = d < 0 ? Complex(0.0) : x[d];
    }
    return out;
  };
  auto quad = [](const Matrix4r& m, const Eigen::Matrix<Complex, 4, 1>& x) {
    return std::max(0.0, x.dot(m.cast<Complex>() * x).real());
  };
  // Per-coarse-cell squared quantities.
  std::vector<double> err2(coarse.num_cells(), 0.0), grad_i2(coarse.num_cells(), 0.0),
      grad_v2(coarse.num_cells(), 0.0);
  for (int c = 0; c < fine.num_cells(); ++c) {
    const int t = mesh.coarse_cell_of_fine(c);
    err2[t] += quad(forms.mass(), cell_vec(e, c));
    grad_i2[t] += quad(forms.stiffness(), cell_vec(iv, c));
    grad_v2[t] += quad(forms.stiffness(), cell_vec(v, c));
  }
  const double H = coarse.dx();
  double worst = 0.0;
  for (int t = 0; t < coarse.num_cells(); ++t) {
    const auto [tx, ty] = coarse.cell_index(t);
    double neigh = 0.0;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int x = tx + dx, y = ty + dy;
        if (x < 0 || y < 0 || x >= coarse.nx() || y >= coarse.ny()) continue;
        neigh += grad_v2[coarse.cell_id(x, y)];
      }
    if (neigh <= 0.0) continue;
    worst = std::max(worst, (std::sqrt(err2[t]) / H + std::sqrt(grad_i2[t])) / std::sqrt(neigh));
  }
  return worst;
}

/// Measured interpolation constant: worst ratio over `samples` smooth
/// random fields with wavelengths tied to the coarse size.
inline double measured_interpolation_constant(const MeshHierarchy& mesh, int samples, std::uint64_t seed) {
  const InterpolationOperator op = build_interpolation(mesh);
  std::mt19937_64 rng(seed);
  double c = 0.0;
  for (int s = 0; s < samples; ++s)
    c = std::max(c, local_stability_ratio(mesh, op, smooth_field(mesh.fine(), 2.0 * mesh.coarse().dx(), rng)));
  return c;
}

/// Variational residual of the correctors of one element: the part of
/// r = M_patch^H lambda - M_T^H Lambda_z outside range(C^T), relative to
/// |M_T^H Lambda_z|. Zero iff a(w, lambda) = a_T(w, Lambda_z) for all w in W_h(patch).
inline double variational_residual(const CorrectorContext& ctx, const ElementCorrector& ec) {
  const ElementPatch p = patch(ctx.mesh, ec.element, ec.order_m);
  const LocalizedForms lf = assemble_localized(ctx.mesh, ctx.fine_forms, p);
  if (lf.patch_dofs != ec.patch_dofs) return std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(lf.patch_dofs.size());
  if (n == 0) return 0.0;
  const RSparse c = constraint_set(ctx.op, lf.patch_dofs).matrix;
  const CSparse cc = c.cast<Complex>();
  const RSparse gram = RSparse(c * RSparse(c.transpose()));
  const Eigen::SimplicialLDLT<RSparse> ldlt(gram);
  const CSparse& mt = lf.element_forms.at(ec.element);
  double worst = 0.0;
  for (int a = 0; a < 4; ++a) {
    const int z = ec.coarse_dofs[a];
    if (z < 0) continue;
    CVector hat(n);
    for (int j = 0; j < n; ++j) hat[j] = ctx.op.prolongation.coeff(lf.patch_dofs[j], z);
    const CVector load = mt.adjoint() * hat;
    const CVector r = lf.patch_form.adjoint() * ec.values.col(a) - load;
    CVector cr = cc * r;
    CVector mu(cr.size());
    if (cr.size() > 0) {
      mu.real() = ldlt.solve(RVector(cr.real()));
      mu.imag() = ldlt.solve(RVector(cr.imag()));
    }
    const CVector perp = r - cc.adjoint() * mu;
    if (load.norm() > 0.0) worst = std::max(worst, perp.norm() / load.norm());
  }
  return worst;
}

}  // namespace helmlod::testing
