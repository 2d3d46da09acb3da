#include "helmlod/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

namespace helmlod {

const char* to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::Dirichlet: return "dirichlet";
    case BoundaryKind::Neumann: return "neumann";
    case BoundaryKind::Robin: return "robin";
  }
  return "?";
}

const char* to_string(Side side) {
  switch (side) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::Bottom: return "bottom";
    case Side::Top: return "top";
  }
  return "?";
}

BoundaryKind BoundaryTags::kind_at(Side side, double t) const {
  BoundaryKind kind = default_kind;
  for (const auto& seg : segments)
    if (seg.side == side && t >= seg.begin && t <= seg.end) kind = seg.kind;
  return kind;
}

GridLevel::GridLevel(Point origin, Point extent, int nx, int ny)
    : origin_(origin), dx_(extent.x / nx), dy_(extent.y / ny), nx_(nx), ny_(ny) {
  build_faces();
  node_kind_.assign(num_nodes(), -1);
  rebuild_dofs();
}

Point GridLevel::node_point(int id) const {
  const auto [ix, iy] = node_index(id);
  return {origin_.x + ix * dx_, origin_.y + iy * dy_};
}

Point GridLevel::cell_origin(int cell) const {
  const auto [ix, iy] = cell_index(cell);
  return {origin_.x + ix * dx_, origin_.y + iy * dy_};
}

Point GridLevel::cell_center(int cell) const {
  const Point o = cell_origin(cell);
  return {o.x + 0.5 * dx_, o.y + 0.5 * dy_};
}

std::array<int, 4> GridLevel::cell_nodes(int cell) const {
  const auto [ix, iy] = cell_index(cell);
  return {node_id(ix, iy), node_id(ix + 1, iy), node_id(ix + 1, iy + 1), node_id(ix, iy + 1)};
}

int GridLevel::locate(Point p) const {
  const int ix = std::clamp(static_cast<int>(std::floor((p.x - origin_.x) / dx_)), 0, nx_ - 1);
  const int iy = std::clamp(static_cast<int>(std::floor((p.y - origin_.y) / dy_)), 0, ny_ - 1);
  return cell_id(ix, iy);
}

void GridLevel::build_faces() {
  faces_.clear();
  auto add = [&](int cell, int n0, int n1, Side side, Point normal, double length) {
    const Point a = node_point(n0);
    const Point b = node_point(n1);
    faces_.push_back({cell, n0, n1, side, BoundaryKind::Robin, normal,
                      {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}, length});
  };
  for (int ix = 0; ix < nx_; ++ix)
    add(cell_id(ix, 0), node_id(ix, 0), node_id(ix + 1, 0), Side::Bottom, {0, -1}, dx_);
  for (int iy = 0; iy < ny_; ++iy)
    add(cell_id(nx_ - 1, iy), node_id(nx_, iy), node_id(nx_, iy + 1), Side::Right, {1, 0}, dy_);
  for (int ix = 0; ix < nx_; ++ix)
    add(cell_id(ix, ny_ - 1), node_id(ix, ny_), node_id(ix + 1, ny_), Side::Top, {0, 1}, dx_);
  for (int iy = 0; iy < ny_; ++iy)
    add(cell_id(0, iy), node_id(0, iy), node_id(0, iy + 1), Side::Left, {-1, 0}, dy_);
}

void GridLevel::set_face_kinds(const std::vector<BoundaryKind>& kinds) {
  node_kind_.assign(num_nodes(), -1);
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    faces_[f].kind = kinds[f];
    for (int n : {faces_[f].node0, faces_[f].node1})
      node_kind_[n] = std::max(node_kind_[n], static_cast<int>(kinds[f]));
  }
  rebuild_dofs();
}

void GridLevel::rebuild_dofs() {
  dof_of_node_.assign(num_nodes(), -1);
  node_of_dof_.clear();
  for (int n = 0; n < num_nodes(); ++n) {
    if (node_kind_[n] == static_cast<int>(BoundaryKind::Dirichlet)) continue;
    dof_of_node_[n] = static_cast<int>(node_of_dof_.size());
    node_of_dof_.push_back(n);
  }
}

std::optional<BoundaryKind> GridLevel::node_kind(int node) const {
  if (node_kind_[node] < 0) return std::nullopt;
  return static_cast<BoundaryKind>(node_kind_[node]);
}

bool GridLevel::is_dirichlet(int node) const {
  return node_kind_[node] == static_cast<int>(BoundaryKind::Dirichlet);
}

namespace {

double face_parameter(const BoundaryFace& face, Point origin, Point extent) {
  switch (face.side) {
    case Side::Left:
    case Side::Right: return (face.midpoint.y - origin.y) / extent.y;
    case Side::Bottom:
    case Side::Top: return (face.midpoint.x - origin.x) / extent.x;
  }
  return 0.0;
}

}  // namespace

MeshHierarchy MeshHierarchy::build(Point origin, Point extent, std::array<int, 2> coarse_cells,
                                   int levels, const BoundaryTags& tags) {
  if (!(extent.x > 0.0) || !(extent.y > 0.0))
    throw InvalidInput("mesh extent must be positive in both directions");
  if (coarse_cells[0] < 1 || coarse_cells[1] < 1)
    throw InvalidInput("need at least one coarse cell per axis");
  if (levels < 0 || levels > 20) throw InvalidInput("refinement levels must lie in [0, 20]");
  for (const auto& seg : tags.segments)
    if (!(seg.begin <= seg.end)) throw InvalidInput("boundary segment with begin > end");

  MeshHierarchy mesh;
  mesh.origin_ = origin;
  mesh.extent_ = extent;
  mesh.levels_ = levels;
  mesh.tags_ = tags;
  mesh.coarse_ = GridLevel(origin, extent, coarse_cells[0], coarse_cells[1]);
  const int r = 1 << levels;
  mesh.fine_ = GridLevel(origin, extent, coarse_cells[0] * r, coarse_cells[1] * r);

  std::vector<BoundaryKind> coarse_kinds;
  bool any_robin = false;
  for (const auto& face : mesh.coarse_.boundary_faces()) {
    coarse_kinds.push_back(tags.kind_at(face.side, face_parameter(face, origin, extent)));
    any_robin = any_robin || coarse_kinds.back() == BoundaryKind::Robin;
  }
  if (!any_robin) throw InvalidInput("the Robin boundary part must have positive measure");
  mesh.coarse_.set_face_kinds(coarse_kinds);

  // Fine faces inherit the kind of the coarse face that contains them.
  std::vector<BoundaryKind> fine_kinds;
  for (const auto& face : mesh.fine_.boundary_faces()) {
    const int coarse_cell = mesh.coarse_cell_of_fine(face.cell);
    BoundaryKind kind = BoundaryKind::Robin;
    for (std::size_t f = 0; f < mesh.coarse_.boundary_faces().size(); ++f) {
      const auto& cf = mesh.coarse_.boundary_faces()[f];
      if (cf.cell == coarse_cell && cf.side == face.side) {
        kind = coarse_kinds[f];
        break;
      }
    }
    fine_kinds.push_back(kind);
  }
  mesh.fine_.set_face_kinds(fine_kinds);
  return mesh;
}

int MeshHierarchy::coarse_cell_of_fine(int fine_cell) const {
  const auto [ix, iy] = fine_.cell_index(fine_cell);
  const int r = refinement_factor();
  return coarse_.cell_id(ix / r, iy / r);
}

std::vector<int> MeshHierarchy::fine_cells_of_coarse(int coarse_cell) const {
  const auto [cx, cy] = coarse_.cell_index(coarse_cell);
  const int r = refinement_factor();
  std::vector<int> cells;
  cells.reserve(static_cast<std::size_t>(r) * r);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < r; ++i) cells.push_back(fine_.cell_id(cx * r + i, cy * r + j));
  return cells;
}

bool ElementPatch::contains(int cell) const {
  return std::binary_search(elements.begin(), elements.end(), cell);
}

ElementPatch patch(const MeshHierarchy& mesh, int seed, int m) {
  const int s[1] = {seed};
  return patch(mesh, std::span<const int>(s), m);
}

ElementPatch patch(const MeshHierarchy& mesh, std::span<const int> seed, int m) {
  if (m < 1) throw InvalidInput("patch order m must be at least 1");
  const GridLevel& grid = mesh.coarse();
  // On a tensor grid N^m(S) is the set of cells within Chebyshev index
  // distance m of S.
  std::vector<char> in(grid.num_cells(), 0);
  for (int c : seed) {
    if (c < 0 || c >= grid.num_cells()) throw InvalidInput("patch seed is not a coarse cell");
    const auto [cx, cy] = grid.cell_index(c);
    for (int iy = std::max(0, cy - m); iy <= std::min(grid.ny() - 1, cy + m); ++iy)
      for (int ix = std::max(0, cx - m); ix <= std::min(grid.nx() - 1, cx + m); ++ix)
        in[grid.cell_id(ix, iy)] = 1;
  }
  ElementPatch p;
  p.seed.assign(seed.begin(), seed.end());
  p.order_m = m;
  for (int c = 0; c < grid.num_cells(); ++c)
    if (in[c]) p.elements.push_back(c);
  return p;
}

int NodeSet::count_free() const {
  return static_cast<int>(std::count(free.begin(), free.end(), true));
}

NodeSet free_nodes(const MeshHierarchy& mesh, Level level) {
  const GridLevel& grid = mesh.level(level);
  NodeSet set;
  for (int n = 0; n < grid.num_nodes(); ++n) {
    set.nodes.push_back(n);
    set.coordinates.push_back(grid.node_point(n));
    set.free.push_back(!grid.is_dirichlet(n));
  }
  return set;
}

void write_mesh_csv(const GridLevel& grid, std::ostream& nodes, std::ostream& cells) {
  nodes << "id,x,y,kind\n";
  for (int n = 0; n < grid.num_nodes(); ++n) {
    const Point p = grid.node_point(n);
    const auto kind = grid.node_kind(n);
    nodes << n << ',' << p.x << ',' << p.y << ',' << (kind ? to_string(*kind) : "interior")
          << '\n';
  }
  cells << "id,n0,n1,n2,n3\n";
  for (int c = 0; c < grid.num_cells(); ++c) {
    const auto v = grid.cell_nodes(c);
    cells << c << ',' << v[0] << ',' << v[1] << ',' << v[2] << ',' << v[3] << '\n';
  }
}

}  // namespace helmlod
