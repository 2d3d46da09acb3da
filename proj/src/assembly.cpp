#include "helmlod/assembly.hpp"

#include <algorithm>
#include <ostream>

namespace helmlod {

std::array<double, 4> q1_values(double xi, double eta) {
  return {(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta};
}

std::array<Point, 4> q1_reference_gradients(double xi, double eta) {
  return {Point{-(1 - eta), -(1 - xi)}, Point{1 - eta, -xi}, Point{eta, xi},
          Point{-eta, 1 - xi}};
}

namespace {

// Local corner pair of a boundary face, ordered as (node0, node1).
std::array<int, 2> face_corners(Side side) {
  switch (side) {
    case Side::Bottom: return {0, 1};
    case Side::Right: return {1, 2};
    case Side::Top: return {3, 2};
    case Side::Left: return {0, 3};
  }
  return {0, 1};
}

}  // namespace

ElementForms::ElementForms(const GridLevel& grid, const CoefficientSet& coeffs)
    : grid_(grid), k_(coeffs.wavenumber_k) {
  coeffs.validate();
  const GaussRule rule = gauss_rule(kVolumeQuadrature);
  const double dx = grid.dx();
  const double dy = grid.dy();
  const double jac = dx * dy;
  const int n_cells = grid.num_cells();
  form_.resize(n_cells);
  stiff_a_.resize(n_cells);
  mass_v2_.resize(n_cells);

  mass_.setZero();
  stiff_.setZero();
  for (std::size_t qy = 0; qy < rule.points.size(); ++qy)
    for (std::size_t qx = 0; qx < rule.points.size(); ++qx) {
      const double w = rule.weights[qx] * rule.weights[qy] * jac;
      const auto phi = q1_values(rule.points[qx], rule.points[qy]);
      const auto g = q1_reference_gradients(rule.points[qx], rule.points[qy]);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          mass_(a, b) += w * phi[a] * phi[b];
          stiff_(a, b) += w * (g[a].x * g[b].x / (dx * dx) + g[a].y * g[b].y / (dy * dy));
        }
    }

  for (int c = 0; c < n_cells; ++c) {
    const Point o = grid.cell_origin(c);
    Matrix4r ka = Matrix4r::Zero();
    Matrix4r mv = Matrix4r::Zero();
    for (std::size_t qy = 0; qy < rule.points.size(); ++qy)
      for (std::size_t qx = 0; qx < rule.points.size(); ++qx) {
        const double xi = rule.points[qx];
        const double eta = rule.points[qy];
        const Point p{o.x + xi * dx, o.y + eta * dy};
        const double a_val = coeffs.diffusion_A(p);
        const double v_val = coeffs.refraction_V2(p);
        check_bounds(coeffs.diffusion_A, a_val, p, "A");
        check_bounds(coeffs.refraction_V2, v_val, p, "V^2");
        const double w = rule.weights[qx] * rule.weights[qy] * jac;
        const auto phi = q1_values(xi, eta);
        const auto g = q1_reference_gradients(xi, eta);
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) {
            ka(a, b) += w * a_val *
                        (g[a].x * g[b].x / (dx * dx) + g[a].y * g[b].y / (dy * dy));
            mv(a, b) += w * v_val * phi[a] * phi[b];
          }
      }
    stiff_a_[c] = ka;
    mass_v2_[c] = mv;
    form_[c] = ka.cast<Complex>() - (k_ * k_) * mv.cast<Complex>();
  }

  const GaussRule edge = gauss_rule(kFaceQuadrature);
  const Complex ik(0.0, k_);
  for (const auto& face : grid.boundary_faces()) {
    if (face.kind != BoundaryKind::Robin) continue;
    const auto corners = face_corners(face.side);
    const Point p0 = grid.node_point(face.node0);
    const Point p1 = grid.node_point(face.node1);
    for (std::size_t q = 0; q < edge.points.size(); ++q) {
      const double s = edge.points[q];
      const Point p = p0 + s * (p1 - p0);
      const double beta = coeffs.impedance_beta(p);
      check_bounds(coeffs.impedance_beta, beta, p, "beta");
      const double w = edge.weights[q] * face.length;
      const double phi[2] = {1.0 - s, s};
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          form_[face.cell](corners[a], corners[b]) -= ik * (w * beta * phi[a] * phi[b]);
    }
  }
}

CSparse assemble_cells(const ElementForms& forms, std::span<const int> cells,
                       const std::function<int(int)>& local_of_node, int n_local) {
  const GridLevel& grid = forms.grid();
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(cells.size() * 16);
  for (int c : cells) {
    const auto nodes = grid.cell_nodes(c);
    const Matrix4c& ke = forms.cell_form(c);
    for (int a = 0; a < 4; ++a) {
      const int i = local_of_node(nodes[a]);
      if (i < 0) continue;
      for (int b = 0; b < 4; ++b) {
        const int j = local_of_node(nodes[b]);
        if (j < 0) continue;
        triplets.emplace_back(i, j, ke(a, b));
      }
    }
  }
  CSparse m(n_local, n_local);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

namespace {

std::vector<int> dof_map(const GridLevel& grid) {
  std::vector<int> map(grid.num_nodes());
  for (int n = 0; n < grid.num_nodes(); ++n) map[n] = grid.dof(n);
  return map;
}

RSparse assemble_real(const GridLevel& grid, const std::vector<int>& dofs,
                      const std::function<const Matrix4r&(int)>& cell_matrix) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(grid.num_cells()) * 16);
  for (int c = 0; c < grid.num_cells(); ++c) {
    const auto nodes = grid.cell_nodes(c);
    const Matrix4r& ke = cell_matrix(c);
    for (int a = 0; a < 4; ++a) {
      const int i = dofs[nodes[a]];
      if (i < 0) continue;
      for (int b = 0; b < 4; ++b) {
        const int j = dofs[nodes[b]];
        if (j >= 0) triplets.emplace_back(i, j, ke(a, b));
      }
    }
  }
  RSparse m(grid.num_dofs(), grid.num_dofs());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

}  // namespace

CSparse assemble_form(const ElementForms& forms) {
  const GridLevel& grid = forms.grid();
  std::vector<int> cells(grid.num_cells());
  for (int c = 0; c < grid.num_cells(); ++c) cells[c] = c;
  return assemble_cells(forms, cells, [&grid](int n) { return grid.dof(n); }, grid.num_dofs());
}

CSparse assemble_form(const MeshHierarchy& mesh, Level level, const CoefficientSet& coeffs) {
  const ElementForms forms(mesh.level(level), coeffs);
  return assemble_form(forms);
}

CVector assemble_load(const GridLevel& grid, const CoefficientSet& coeffs) {
  CVector b = CVector::Zero(grid.num_dofs());
  const GaussRule rule = gauss_rule(kVolumeQuadrature);
  const double jac = grid.dx() * grid.dy();
  for (int c = 0; c < grid.num_cells(); ++c) {
    const Point o = grid.cell_origin(c);
    const auto nodes = grid.cell_nodes(c);
    for (std::size_t qy = 0; qy < rule.points.size(); ++qy)
      for (std::size_t qx = 0; qx < rule.points.size(); ++qx) {
        const double xi = rule.points[qx];
        const double eta = rule.points[qy];
        const Complex fv = coeffs.volume_forcing_f({o.x + xi * grid.dx(), o.y + eta * grid.dy()});
        if (fv == Complex(0.0)) continue;
        const double w = rule.weights[qx] * rule.weights[qy] * jac;
        const auto phi = q1_values(xi, eta);
        for (int a = 0; a < 4; ++a) {
          const int i = grid.dof(nodes[a]);
          if (i >= 0) b[i] += w * phi[a] * fv;
        }
      }
  }
  const GaussRule edge = gauss_rule(kFaceQuadrature);
  for (const auto& face : grid.boundary_faces()) {
    if (face.kind != BoundaryKind::Robin) continue;
    const Point p0 = grid.node_point(face.node0);
    const Point p1 = grid.node_point(face.node1);
    for (std::size_t q = 0; q < edge.points.size(); ++q) {
      const double s = edge.points[q];
      const Complex gv = coeffs.robin_data_g(p0 + s * (p1 - p0));
      if (gv == Complex(0.0)) continue;
      const double w = edge.weights[q] * face.length;
      const int i0 = grid.dof(face.node0);
      const int i1 = grid.dof(face.node1);
      if (i0 >= 0) b[i0] += w * (1.0 - s) * gv;
      if (i1 >= 0) b[i1] += w * s * gv;
    }
  }
  return b;
}

CVector assemble_load(const MeshHierarchy& mesh, Level level, const CoefficientSet& coeffs) {
  return assemble_load(mesh.level(level), coeffs);
}

std::vector<int> patch_fine_dofs(const MeshHierarchy& mesh, const ElementPatch& patch) {
  const GridLevel& coarse = mesh.coarse();
  const GridLevel& fine = mesh.fine();
  const int r = mesh.refinement_factor();
  if (patch.elements.empty()) return {};
  int cx0 = coarse.nx(), cx1 = -1, cy0 = coarse.ny(), cy1 = -1;
  for (int c : patch.elements) {
    const auto [cx, cy] = coarse.cell_index(c);
    cx0 = std::min(cx0, cx);
    cx1 = std::max(cx1, cx);
    cy0 = std::min(cy0, cy);
    cy1 = std::max(cy1, cy);
  }
  auto fine_cell_in = [&](int fx, int fy) {
    if (fx < 0 || fy < 0 || fx >= fine.nx() || fy >= fine.ny()) return true;  // outside Omega
    return patch.contains(coarse.cell_id(fx / r, fy / r));
  };
  std::vector<int> dofs;
  for (int iy = cy0 * r; iy <= (cy1 + 1) * r; ++iy)
    for (int ix = cx0 * r; ix <= (cx1 + 1) * r; ++ix) {
      const int node = fine.node_id(ix, iy);
      if (fine.dof(node) < 0) continue;
      if (fine_cell_in(ix - 1, iy - 1) && fine_cell_in(ix, iy - 1) && fine_cell_in(ix - 1, iy) &&
          fine_cell_in(ix, iy))
        dofs.push_back(fine.dof(node));
    }
  return dofs;
}

LocalizedForms assemble_localized(const MeshHierarchy& mesh, const ElementForms& fine_forms,
                                  const ElementPatch& patch) {
  const GridLevel& fine = mesh.fine();
  LocalizedForms out;
  out.patch_dofs = patch_fine_dofs(mesh, patch);
  std::vector<int> local(fine.num_nodes(), -1);
  for (std::size_t i = 0; i < out.patch_dofs.size(); ++i)
    local[fine.node_of_dof(out.patch_dofs[i])] = static_cast<int>(i);
  const int n = static_cast<int>(out.patch_dofs.size());
  const auto lookup = [&local](int node) { return local[node]; };

  std::vector<int> all_cells;
  for (int t : patch.elements) {
    const auto cells = mesh.fine_cells_of_coarse(t);
    out.element_forms.emplace(t, assemble_cells(fine_forms, cells, lookup, n));
    all_cells.insert(all_cells.end(), cells.begin(), cells.end());
  }
  std::sort(all_cells.begin(), all_cells.end());
  out.patch_form = assemble_cells(fine_forms, all_cells, lookup, n);
  return out;
}

LocalizedForms assemble_localized(const MeshHierarchy& mesh, const CoefficientSet& coeffs,
                                  const ElementPatch& patch) {
  const ElementForms forms(mesh.fine(), coeffs);
  return assemble_localized(mesh, forms, patch);
}

RSparse NormMatrices::v_gram() const {
  RSparse g = (k * k) * mass_V2 + stiffness_A;
  return g;
}

double NormMatrices::norm(const CVector& u, NormKind which) const {
  auto quad = [&u](const RSparse& m) {
    const CVector mu = m * u;
    return std::max(0.0, u.dot(mu).real());  // u^H M u
  };
  switch (which) {
    case NormKind::L2: return std::sqrt(quad(mass));
    case NormKind::H1semi: return std::sqrt(quad(stiffness));
    case NormKind::V: return std::sqrt(k * k * quad(mass_V2) + quad(stiffness_A));
  }
  return 0.0;
}

NormMatrices assemble_norms(const ElementForms& forms) {
  const GridLevel& grid = forms.grid();
  const auto dofs = dof_map(grid);
  NormMatrices n;
  n.k = forms.wavenumber();
  n.mass_V2 = assemble_real(grid, dofs, [&](int c) -> const Matrix4r& { return forms.mass_V2(c); });
  n.stiffness_A =
      assemble_real(grid, dofs, [&](int c) -> const Matrix4r& { return forms.stiffness_A(c); });
  n.mass = assemble_real(grid, dofs, [&](int) -> const Matrix4r& { return forms.mass(); });
  n.stiffness = assemble_real(grid, dofs, [&](int) -> const Matrix4r& { return forms.stiffness(); });
  return n;
}

double norm(const MeshHierarchy& mesh, Level level, const CoefficientSet& coeffs,
            const CVector& u, NormKind which) {
  const ElementForms forms(mesh.level(level), coeffs);
  return assemble_norms(forms).norm(u, which);
}

Complex apply_form(const CSparse& form, const CVector& u, const CVector& v) {
  return v.dot(form * u);
}

void write_matrix_coo(const CSparse& m, std::ostream& out) {
  out.precision(17);
  for (int j = 0; j < m.outerSize(); ++j)
    for (CSparse::InnerIterator it(m, j); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag()
          << '\n';
}

}  // namespace helmlod
