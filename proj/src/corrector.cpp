#include "helmlod/corrector.hpp"

#include "helmlod/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <sstream>

namespace helmlod {

namespace {

// Saddle matrix [K^H, C^T; C, 0].
CSparse saddle_matrix(const CSparse& form, const RSparse& constraints) {
  const Eigen::Index n = form.rows();
  const Eigen::Index nc = constraints.rows();
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(form.nonZeros() + 2 * constraints.nonZeros());
  for (Eigen::Index col = 0; col < form.outerSize(); ++col)
    for (CSparse::InnerIterator it(form, col); it; ++it)
      triplets.emplace_back(it.col(), it.row(), std::conj(it.value()));
  for (Eigen::Index col = 0; col < constraints.outerSize(); ++col)
    for (RSparse::InnerIterator it(constraints, col); it; ++it) {
      triplets.emplace_back(n + it.row(), it.col(), it.value());
      triplets.emplace_back(it.col(), n + it.row(), it.value());
    }
  CSparse s(n + nc, n + nc);
  s.setFromTriplets(triplets.begin(), triplets.end());
  return s;
}

double column_residual(const CSparse& s, const CMatrix& x, const CMatrix& rhs) {
  double worst = 0.0;
  const CMatrix r = s * x - rhs;
  for (Eigen::Index j = 0; j < rhs.cols(); ++j) {
    const double b = rhs.col(j).norm();
    if (b > 0.0) worst = std::max(worst, r.col(j).norm() / b);
    else worst = std::max(worst, r.col(j).norm());
  }
  return worst;
}

double nominal_coarse_size(const MeshHierarchy& mesh) {
  return std::max(mesh.coarse().dx() / mesh.extent().x, mesh.coarse().dy() / mesh.extent().y);
}

}  // namespace

CVector ElementCorrector::global(int corner, int num_fine_dofs) const {
  CVector out = CVector::Zero(num_fine_dofs);
  if (values.cols() == 0) return out;
  for (std::size_t i = 0; i < patch_dofs.size(); ++i) out[patch_dofs[i]] = values(i, corner);
  return out;
}

ElementCorrector solve_element_correctors(const CorrectorContext& ctx, int element, int m) {
  const MeshHierarchy& mesh = ctx.mesh;
  const GridLevel& coarse = mesh.coarse();
  const GridLevel& fine = mesh.fine();
  const int r = mesh.refinement_factor();

  ElementCorrector out;
  out.element = element;
  out.order_m = m;
  const auto corners = coarse.cell_nodes(element);
  bool any_free = false;
  for (int a = 0; a < 4; ++a) {
    out.coarse_dofs[a] = coarse.dof(corners[a]);
    any_free = any_free || out.coarse_dofs[a] >= 0;
  }

  const ElementPatch p = patch(mesh, element, m);
  out.patch_dofs = patch_fine_dofs(mesh, p);
  const int n = static_cast<int>(out.patch_dofs.size());
  out.values = CMatrix::Zero(n, 4);
  if (!any_free || n == 0) return out;

  std::vector<int> local(fine.num_nodes(), -1);
  for (int i = 0; i < n; ++i) local[fine.node_of_dof(out.patch_dofs[i])] = i;
  const auto lookup = [&local](int node) { return local[node]; };

  std::vector<int> cells;
  for (int t : p.elements) {
    const auto fc = mesh.fine_cells_of_coarse(t);
    cells.insert(cells.end(), fc.begin(), fc.end());
  }
  const CSparse form = assemble_cells(ctx.fine_forms, cells, lookup, n);
  const ConstraintSet constraints = constraint_set(ctx.op, out.patch_dofs);
  const int nc = static_cast<int>(constraints.matrix.rows());
  const CSparse s = saddle_matrix(form, constraints.matrix);

  // Right side: (K_T^H Lambda_z) on the patch dofs.
  CMatrix rhs = CMatrix::Zero(n + nc, 4);
  const auto [cx, cy] = coarse.cell_index(element);
  for (int c : mesh.fine_cells_of_coarse(element)) {
    const auto nodes = fine.cell_nodes(c);
    const Matrix4c& ke = ctx.fine_forms.cell_form(c);
    std::array<std::array<double, 4>, 4> hat{};  // hat[b][corner]
    for (int b = 0; b < 4; ++b) {
      const auto [ix, iy] = fine.node_index(nodes[b]);
      hat[b] = q1_values(static_cast<double>(ix - cx * r) / r, static_cast<double>(iy - cy * r) / r);
    }
    for (int a = 0; a < 4; ++a) {
      const int i = local[nodes[a]];
      if (i < 0) continue;
      for (int corner = 0; corner < 4; ++corner) {
        if (out.coarse_dofs[corner] < 0) continue;
        Complex sum = 0.0;
        for (int b = 0; b < 4; ++b) sum += std::conj(ke(b, a)) * hat[b][corner];
        rhs(i, corner) += sum;
      }
    }
  }

  SparseDirectSolver solver;
  try {
    solver.factorize(s);
  } catch (const SolverError& e) {
    std::ostringstream msg;
    msg << "corrector system singular for element T=" << element << ", m=" << m << ", nodes z=";
    for (int a = 0; a < 4; ++a)
      if (out.coarse_dofs[a] >= 0) msg << out.coarse_dofs[a] << ' ';
    msg << "(" << e.what() << ")";
    throw SolverError(msg.str(), e.rcond);
  }
  const CMatrix x = solver.solve(rhs);
  out.values = x.topRows(n);
  out.residual = column_residual(s, x, rhs);
  out.rcond = solver.rcond();
  return out;
}

CVector solve_element_corrector(const CorrectorContext& ctx, int coarse_dof, int element, int m) {
  const int nf = ctx.mesh.fine().num_dofs();
  const auto corners = ctx.mesh.coarse().cell_nodes(element);
  int corner = -1;
  for (int a = 0; a < 4; ++a)
    if (ctx.mesh.coarse().dof(corners[a]) == coarse_dof) corner = a;
  if (corner < 0) return CVector::Zero(nf);
  return solve_element_correctors(ctx, element, m).global(corner, nf);
}

CVector node_corrector(const CorrectorContext& ctx, int coarse_dof, int m) {
  const GridLevel& coarse = ctx.mesh.coarse();
  const auto [ix, iy] = coarse.node_index(coarse.node_of_dof(coarse_dof));
  CVector sum = CVector::Zero(ctx.mesh.fine().num_dofs());
  for (int cy = iy - 1; cy <= iy; ++cy)
    for (int cx = ix - 1; cx <= ix; ++cx) {
      if (cx < 0 || cy < 0 || cx >= coarse.nx() || cy >= coarse.ny()) continue;
      sum += solve_element_corrector(ctx, coarse_dof, coarse.cell_id(cx, cy), m);
    }
  return sum;
}

CorrectorBasis build_test_basis(const CorrectorContext& ctx, int m) {
  const MeshHierarchy& mesh = ctx.mesh;
  const GridLevel& coarse = mesh.coarse();
  const int nf = mesh.fine().num_dofs();
  const int ncoarse = coarse.num_dofs();
  const double k = ctx.fine_forms.wavenumber();

  CorrectorBasis basis;
  basis.order_m = m;
  basis.support.resize(ncoarse);
  basis.min_rcond = 1.0;
  const double kh = k * nominal_coarse_size(mesh);
  if (kh > 1.0) {
    std::ostringstream msg;
    msg << "k*H = " << kh << " > 1: coarse mesh does not resolve the wave number";
    basis.warnings.push_back(msg.str());
  }

  std::vector<Eigen::Triplet<Complex>> triplets;
  const int num_cells = coarse.num_cells();
  constexpr int kChunk = 32;
  std::vector<ElementCorrector> block(kChunk);
  std::vector<std::exception_ptr> errors(kChunk);
  for (int start = 0; start < num_cells; start += kChunk) {
    const int count = std::min(kChunk, num_cells - start);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i) {
      try {
        block[i] = solve_element_correctors(ctx, start + i, m);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    // Deterministic reduction in element order.
    for (int i = 0; i < count; ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      const ElementCorrector& ec = block[i];
      const ElementPatch p = patch(mesh, ec.element, m);
      bool solved = false;
      for (int a = 0; a < 4; ++a) {
        const int z = ec.coarse_dofs[a];
        if (z < 0) continue;
        ++basis.solve_count;
        solved = true;
        auto& sup = basis.support[z];
        sup.insert(sup.end(), p.elements.begin(), p.elements.end());
        for (std::size_t j = 0; j < ec.patch_dofs.size(); ++j)
          if (ec.values(j, a) != Complex(0.0)) triplets.emplace_back(ec.patch_dofs[j], z, ec.values(j, a));
      }
      if (solved && ec.values.rows() > 0) {
        basis.max_residual = std::max(basis.max_residual, ec.residual);
        basis.min_rcond = std::min(basis.min_rcond, ec.rcond);
      }
      block[i] = ElementCorrector{};
    }
  }
  for (auto& sup : basis.support) {
    std::sort(sup.begin(), sup.end());
    sup.erase(std::unique(sup.begin(), sup.end()), sup.end());
  }
  basis.correctors.resize(nf, ncoarse);
  basis.correctors.setFromTriplets(triplets.begin(), triplets.end());
  if (basis.max_residual > 1e-10) {
    std::ostringstream msg;
    msg << "corrector residual " << basis.max_residual << " exceeds 1e-10";
    basis.warnings.push_back(msg.str());
  }
  return basis;
}

IdealCorrectorSolver::IdealCorrectorSolver(const CorrectorContext& ctx) : ctx_(ctx) {
  const CSparse form = assemble_form(ctx.fine_forms);
  form_adjoint_ = form.adjoint();
  saddle_ = saddle_matrix(form, ctx.op.matrix);
  try {
    solver_.factorize(saddle_);
  } catch (const SolverError& e) {
    throw SolverError(std::string("global corrector system singular (") + e.what() + ")", e.rcond);
  }
}

CVector IdealCorrectorSolver::solve(int coarse_dof) const {
  const Eigen::Index nf = ctx_.op.matrix.cols();
  const Eigen::Index n = saddle_.rows();
  const CVector hat = CVector(ctx_.op.prolongation.col(coarse_dof).cast<Complex>());
  CVector rhs = CVector::Zero(n);
  rhs.head(nf) = form_adjoint_ * hat;
  const CVector x = solver_.solve(rhs);
  last_residual_ = relative_residual(saddle_, x, rhs);
  return x.head(nf);
}

CVector solve_ideal_corrector(const CorrectorContext& ctx, int coarse_dof) {
  return IdealCorrectorSolver(ctx).solve(coarse_dof);
}

DecayProfile decay_profile(const CorrectorContext& ctx, int coarse_dof, std::vector<int> m_list) {
  std::sort(m_list.begin(), m_list.end());
  DecayProfile prof;
  prof.coarse_dof = coarse_dof;
  prof.m = m_list;
  const NormMatrices norms = assemble_norms(ctx.fine_forms);
  const CVector ideal = solve_ideal_corrector(ctx, coarse_dof);
  prof.reference_norm = norms.norm(ideal, NormKind::H1semi);
  for (int m : m_list) {
    const CVector local = node_corrector(ctx, coarse_dof, m);
    prof.deviation.push_back(norms.norm(ideal - local, NormKind::H1semi));
  }
  double log_sum = 0.0;
  int ratios = 0;
  for (std::size_t i = 1; i < prof.deviation.size(); ++i) {
    const double prev = prof.deviation[i - 1];
    const double cur = prof.deviation[i];
    if (cur > prev * (1.0 + 1e-12) + 1e-14 * prof.reference_norm) prof.monotone = false;
    if (prev > 0.0 && cur > 0.0) {
      log_sum += std::log(cur / prev);
      ++ratios;
    }
  }
  prof.theta = ratios > 0 ? std::exp(log_sum / ratios) : 0.0;
  return prof;
}

void write_corrector(const GridLevel& fine, const CVector& corrector, std::ostream& out) {
  out.precision(17);
  for (int d = 0; d < fine.num_dofs(); ++d) {
    const Point p = fine.node_point(fine.node_of_dof(d));
    out << d << ' ' << p.x << ' ' << p.y << ' ' << corrector[d].real() << ' ' << corrector[d].imag()
        << '\n';
  }
}

}  // namespace helmlod
