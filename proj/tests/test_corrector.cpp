#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helmlod/corrector.hpp"
#include "support.hpp"

#include <Eigen/LU>

#include <cmath>
#include <sstream>

using namespace helmlod;
using helmlod::testing::random_vector;
using helmlod::testing::rel_diff;
using helmlod::testing::variational_residual;

namespace {

MeshHierarchy square(int cells, int levels, BoundaryTags tags = BoundaryTags::uniform(BoundaryKind::Robin)) {
  return MeshHierarchy::build({-1.0, -1.0}, {2.0, 2.0}, {cells, cells}, levels, tags);
}

BoundaryTags mixed_tags() {
  return BoundaryTags::uniform(BoundaryKind::Robin)
      .set(Side::Left, BoundaryKind::Dirichlet)
      .set(Side::Top, BoundaryKind::Neumann);
}

CoefficientSet constant_k(double k) {
  CoefficientSet c;
  c.wavenumber_k = k;
  return c;
}

CoefficientSet example(ExampleId id, double k) {
  ExampleParams p;
  p.k = k;
  return builtin_example(id, p);
}

// Everything a corrector solve needs, owned in one place.
struct Setup {
  MeshHierarchy mesh;
  ElementForms forms;
  InterpolationOperator op;
  CorrectorContext ctx{mesh, forms, op};

  Setup(MeshHierarchy m, const CoefficientSet& c)
      : mesh(std::move(m)), forms(mesh.fine(), c), op(build_interpolation(mesh)) {}
};

int coarse_dof_at(const MeshHierarchy& mesh, int ix, int iy) {
  return mesh.coarse().dof(mesh.coarse().node_id(ix, iy));
}

}  // namespace

TEST_CASE("without refinement every corrector vanishes") {
  const Setup s(square(4, 0), example(ExampleId::Example1, 4.0));
  const CorrectorBasis b = build_test_basis(s.ctx, 1);
  CHECK(b.correctors.nonZeros() == 0);
  CHECK(solve_ideal_corrector(s.ctx, coarse_dof_at(s.mesh, 2, 2)).norm() == 0.0);
}

TEST_CASE("corrector of a node that is not a vertex of the element is zero") {
  const Setup s(square(4, 2), constant_k(3.0));
  const int z = coarse_dof_at(s.mesh, 0, 0);
  const CVector lam = solve_element_corrector(s.ctx, z, s.mesh.coarse().cell_id(2, 2), 1);
  CHECK(lam.size() == s.mesh.fine().num_dofs());
  CHECK(lam.norm() == 0.0);
}

TEST_CASE("Laplace correctors satisfy the variational identity on random fine-scale functions") {
  const Setup s(square(6, 2), constant_k(0.0));
  const int t = s.mesh.coarse().cell_id(2, 3);
  const ElementPatch p = patch(s.mesh, t, 1);
  const LocalizedForms lf = assemble_localized(s.mesh, s.forms, p);
  const ConstraintSet cs = constraint_set(s.op, lf.patch_dofs);
  const Eigen::FullPivLU<RMatrix> lu{RMatrix(cs.matrix)};
  const RMatrix kernel = lu.kernel();
  REQUIRE(kernel.cols() == static_cast<Eigen::Index>(lf.patch_dofs.size()) - cs.matrix.rows());

  const ElementCorrector ec = solve_element_correctors(s.ctx, t, 1);
  REQUIRE(ec.patch_dofs == lf.patch_dofs);
  std::mt19937_64 rng(7);
  const CSparse& mt = lf.element_forms.at(t);
  for (int a = 0; a < 4; ++a) {
    const int z = ec.coarse_dofs[a];
    REQUIRE(z >= 0);
    CVector hat(lf.patch_dofs.size());
    for (std::size_t j = 0; j < lf.patch_dofs.size(); ++j) hat[j] = s.op.prolongation.coeff(lf.patch_dofs[j], z);
    const CVector lam = ec.values.col(a);
    for (int i = 0; i < 20; ++i) {
      const CVector w = kernel.cast<Complex>() * random_vector(kernel.cols(), rng);
      const Complex lhs = apply_form(lf.patch_form, w, lam);
      const Complex rhs = apply_form(mt, w, hat);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("variational residual is below tolerance for every element") {
  for (const auto& tags : {BoundaryTags::uniform(BoundaryKind::Robin), mixed_tags()}) {
    const Setup s(square(6, 2, tags), example(ExampleId::Example1, 6.0));
    for (int m : {1, 2}) {
      double worst = 0.0;
      for (int t = 0; t < s.mesh.coarse().num_cells(); ++t)
        worst = std::max(worst, variational_residual(s.ctx, solve_element_correctors(s.ctx, t, m)));
      CHECK(worst <= 1e-10);
      CHECK(build_test_basis(s.ctx, m).max_residual <= 1e-10);
    }
  }
}

TEST_CASE("solve count equals the number of (free node, adjacent element) pairs") {
  for (const auto& tags : {BoundaryTags::uniform(BoundaryKind::Robin), mixed_tags()}) {
    const Setup s(square(5, 1, tags), constant_k(2.0));
    const GridLevel& c = s.mesh.coarse();
    int expected = 0;
    for (int iy = 0; iy <= c.ny(); ++iy)
      for (int ix = 0; ix <= c.nx(); ++ix) {
        if (c.dof(c.node_id(ix, iy)) < 0) continue;
        const int nx = (ix > 0 && ix < c.nx()) ? 2 : 1;
        const int ny = (iy > 0 && iy < c.ny()) ? 2 : 1;
        expected += nx * ny;
      }
    const CorrectorBasis b = build_test_basis(s.ctx, 1);
    CHECK(b.solve_count == expected);
    CHECK(b.correctors.cols() == c.num_dofs());
  }
  // All-Robin n x n: four per element.
  const Setup s(square(5, 1), constant_k(2.0));
  CHECK(build_test_basis(s.ctx, 1).solve_count == 4 * 25);
}

TEST_CASE("patches covering the domain reproduce the ideal correctors") {
  for (const auto& tags : {BoundaryTags::uniform(BoundaryKind::Robin), mixed_tags()}) {
    const Setup s(square(4, 2, tags), example(ExampleId::Example1, 4.0));
    const CorrectorBasis b = build_test_basis(s.ctx, 4);
    const IdealCorrectorSolver ideal(s.ctx);
    for (int z = 0; z < s.mesh.coarse().num_dofs(); ++z) {
      const CVector local = CVector(b.correctors.col(z));
      CHECK(rel_diff(local, ideal.solve(z)) < 1e-9);
      CHECK(ideal.last_residual() < 1e-10);
    }
    const int z = coarse_dof_at(s.mesh, 2, 2);
    const DecayProfile prof = decay_profile(s.ctx, z, {4});
    CHECK(prof.deviation[0] <= 1e-9 * prof.reference_norm);
  }
}

TEST_CASE("correctors lie in the kernel of the interpolation") {
  const Setup s(square(6, 2, mixed_tags()), example(ExampleId::Example2, 6.0));
  for (int m : {1, 2}) {
    const CorrectorBasis b = build_test_basis(s.ctx, m);
    const CSparse ilam = s.op.matrix.cast<Complex>() * b.correctors;
    const double scale = CMatrix(b.correctors).norm();
    CHECK(CMatrix(ilam).norm() <= 1e-12 * scale);
  }
}

TEST_CASE("corrector support stays inside the union of element patches") {
  const Setup s(square(7, 2, mixed_tags()), example(ExampleId::Example1, 4.0));
  const GridLevel& c = s.mesh.coarse();
  const GridLevel& f = s.mesh.fine();
  for (int m : {1, 2}) {
    const CorrectorBasis b = build_test_basis(s.ctx, m);
    for (int z = 0; z < c.num_dofs(); ++z) {
      const auto [zx, zy] = c.node_index(c.node_of_dof(z));
      // Oracle: cells within m layers of the (up to) four cells around z.
      std::vector<int> oracle;
      for (int cy = zy - 1 - m; cy <= zy + m; ++cy)
        for (int cx = zx - 1 - m; cx <= zx + m; ++cx)
          if (cx >= 0 && cy >= 0 && cx < c.nx() && cy < c.ny()) oracle.push_back(c.cell_id(cx, cy));
      std::sort(oracle.begin(), oracle.end());
      CHECK(b.support[z] == oracle);
      const int r = s.mesh.refinement_factor();
      const int lo_x = std::max(0, zx - 1 - m) * r, hi_x = std::min(c.nx(), zx + 1 + m) * r;
      const int lo_y = std::max(0, zy - 1 - m) * r, hi_y = std::min(c.ny(), zy + 1 + m) * r;
      for (CSparse::InnerIterator it(b.correctors, z); it; ++it) {
        const auto [fx, fy] = f.node_index(f.node_of_dof(static_cast<int>(it.index())));
        // Patch boundary nodes are excluded unless they sit on the domain boundary.
        const bool in_x = (fx > lo_x || lo_x == 0) && (fx < hi_x || hi_x == f.nx());
        const bool in_y = (fy > lo_y || lo_y == 0) && (fy < hi_y || hi_y == f.ny());
        CHECK((in_x && in_y));
      }
    }
  }
}

TEST_CASE("correctors are translation invariant for cell-periodic coefficients") {
  ExampleParams p;
  p.k = 4.0;
  p.block_count = 8;
  const Setup s(square(8, 2), builtin_example(ExampleId::Example3, p));
  const int r = s.mesh.refinement_factor();
  const GridLevel& f = s.mesh.fine();
  const CVector a = node_corrector(s.ctx, coarse_dof_at(s.mesh, 3, 3), 1);
  for (auto [sx, sy] : {std::pair{2, 2}, std::pair{1, 0}, std::pair{0, 2}}) {
    const CVector b = node_corrector(s.ctx, coarse_dof_at(s.mesh, 3 + sx, 3 + sy), 1);
    CVector shifted = CVector::Zero(b.size());
    for (int d = 0; d < f.num_dofs(); ++d) {
      const auto [ix, iy] = f.node_index(f.node_of_dof(d));
      const int tx = ix + sx * r, ty = iy + sy * r;
      if (tx > f.nx() || ty > f.ny()) continue;
      shifted[f.dof(f.node_id(tx, ty))] = a[d];
    }
    CHECK(a.norm() > 0.0);
    CHECK(rel_diff(shifted, b) <= 1e-10);
  }
}

TEST_CASE("the form is coercive on the fine-scale space when kH <= 0.5") {
  // Cell width 0.25 and k = 2.
  const Setup s(square(8, 2), constant_k(2.0));
  const int nf = s.mesh.fine().num_dofs();
  std::vector<int> all(nf);
  for (int i = 0; i < nf; ++i) all[i] = i;
  const Eigen::FullPivLU<RMatrix> lu{RMatrix(constraint_set(s.op, all).matrix)};
  const RMatrix kernel = lu.kernel();
  const CSparse m = assemble_form(s.forms);
  std::mt19937_64 rng(19);
  for (int i = 0; i < 20; ++i) {
    const CVector w = kernel.cast<Complex>() * random_vector(kernel.cols(), rng);
    CHECK(apply_form(m, w, w).real() > 0.0);
  }
}

TEST_CASE("corrector deviation decays geometrically for constant coefficients") {
  // k = 16, H = 2^-4, h = 2^-6 on (-1,1)^2.
  const Setup s(square(16, 2), constant_k(16.0));
  const int z = coarse_dof_at(s.mesh, 8, 8);
  const DecayProfile prof = decay_profile(s.ctx, z, {1, 2, 3, 4});
  REQUIRE(prof.deviation.size() == 4);
  for (std::size_t i = 1; i < prof.deviation.size(); ++i) {
    CHECK(prof.deviation[i] >= 0.0);
    CHECK(prof.deviation[i] / prof.deviation[i - 1] <= 0.7);
  }
  CHECK(prof.monotone);
  CHECK(prof.theta < 1.0);
  CHECK(prof.reference_norm > 0.0);
}

TEST_CASE("decay profile sorts the requested orders") {
  const Setup s(square(4, 2), constant_k(2.0));
  const int z = coarse_dof_at(s.mesh, 2, 2);
  const DecayProfile prof = decay_profile(s.ctx, z, {3, 1, 2});
  CHECK(prof.m == std::vector<int>{1, 2, 3});
  CHECK(prof.deviation[2] <= 1e-9 * prof.reference_norm);
}

TEST_CASE("coarse wave number above the resolution limit is reported") {
  const Setup s(square(4, 1), constant_k(8.0));  // nominal k H = 2
  const CorrectorBasis b = build_test_basis(s.ctx, 1);
  REQUIRE(!b.warnings.empty());
  CHECK(b.warnings.front().find("k*H") != std::string::npos);
}

TEST_CASE("corrector dump has one line per fine dof") {
  const Setup s(square(2, 1), constant_k(1.0));
  std::ostringstream out;
  write_corrector(s.mesh.fine(), node_corrector(s.ctx, coarse_dof_at(s.mesh, 1, 1), 1), out);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == s.mesh.fine().num_dofs());
}
