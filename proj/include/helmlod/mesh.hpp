#pragma once

#include "helmlod/common.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace helmlod {

/// Boundary condition kinds. The numeric order is the precedence used at
/// vertices shared by differently tagged faces (Dirichlet wins).
enum class BoundaryKind : int { Neumann = 0, Robin = 1, Dirichlet = 2 };

/// Sides of the axis-aligned rectangle.
enum class Side : int { Left = 0, Right = 1, Bottom = 2, Top = 3 };

enum class Level { Coarse, Fine };

const char* to_string(BoundaryKind kind);
const char* to_string(Side side);

/// Sub-segment of one side, parameterized by t in [0, 1] running in the
/// direction of increasing coordinate.
struct BoundarySegment {
  Side side = Side::Left;
  double begin = 0.0;
  double end = 1.0;
  BoundaryKind kind = BoundaryKind::Robin;
};

/// Boundary tag map. Faces not covered by any segment take `default_kind`;
/// later segments override earlier ones.
struct BoundaryTags {
  BoundaryKind default_kind = BoundaryKind::Robin;
  std::vector<BoundarySegment> segments;

  static BoundaryTags uniform(BoundaryKind kind) { return {kind, {}}; }
  BoundaryTags& set(Side side, BoundaryKind kind, double begin = 0.0, double end = 1.0) {
    segments.push_back({side, begin, end, kind});
    return *this;
  }
  BoundaryKind kind_at(Side side, double t) const;
};

struct BoundaryFace {
  int cell = -1;
  int node0 = -1;
  int node1 = -1;
  Side side = Side::Left;
  BoundaryKind kind = BoundaryKind::Robin;
  Point normal;    // outward unit normal
  Point midpoint;
  double length = 0.0;
};

/// One uniform level of the hierarchy: an nx-by-ny grid of congruent
/// rectangles. Node and cell ids run with the x-index fastest. Cell corners
/// are listed counter-clockwise starting at the lower-left vertex.
class GridLevel {
 public:
  GridLevel() = default;
  GridLevel(Point origin, Point extent, int nx, int ny);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  Point origin() const { return origin_; }
  double cell_diameter() const { return std::hypot(dx_, dy_); }

  int num_nodes() const { return (nx_ + 1) * (ny_ + 1); }
  int num_cells() const { return nx_ * ny_; }
  int node_id(int ix, int iy) const { return ix + (nx_ + 1) * iy; }
  int cell_id(int ix, int iy) const { return ix + nx_ * iy; }
  std::array<int, 2> node_index(int id) const { return {id % (nx_ + 1), id / (nx_ + 1)}; }
  std::array<int, 2> cell_index(int id) const { return {id % nx_, id / nx_}; }

  Point node_point(int id) const;
  Point cell_origin(int cell) const;
  Point cell_center(int cell) const;
  std::array<int, 4> cell_nodes(int cell) const;

  /// Cell containing p by index arithmetic (points on shared edges go to
  /// the upper/right cell, except on the outer boundary).
  int locate(Point p) const;

  const std::vector<BoundaryFace>& boundary_faces() const { return faces_; }
  /// Boundary kind of a vertex, or nullopt for interior vertices.
  std::optional<BoundaryKind> node_kind(int node) const;
  bool is_dirichlet(int node) const;

  /// Degree-of-freedom numbering over free (non-Dirichlet) vertices in
  /// node-id order. Returns -1 for Dirichlet vertices.
  int dof(int node) const { return dof_of_node_[node]; }
  int num_dofs() const { return static_cast<int>(node_of_dof_.size()); }
  int node_of_dof(int d) const { return node_of_dof_[d]; }

  /// Assigns face kinds; called by MeshHierarchy.
  void set_face_kinds(const std::vector<BoundaryKind>& kinds);

 private:
  void build_faces();
  void rebuild_dofs();

  Point origin_;
  double dx_ = 0.0;
  double dy_ = 0.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<BoundaryFace> faces_;
  std::vector<int> node_kind_;  // -1 interior, else BoundaryKind value
  std::vector<int> dof_of_node_;
  std::vector<int> node_of_dof_;
};

/// Nested coarse/fine pair of structured quadrilateral meshes. The fine mesh
/// is the coarse mesh refined `levels` times, halving edges each time.
/// Immutable after construction.
class MeshHierarchy {
 public:
  static MeshHierarchy build(Point origin, Point extent, std::array<int, 2> coarse_cells,
                             int levels, const BoundaryTags& tags);

  const GridLevel& coarse() const { return coarse_; }
  const GridLevel& fine() const { return fine_; }
  const GridLevel& level(Level l) const { return l == Level::Coarse ? coarse_ : fine_; }

  Point origin() const { return origin_; }
  Point extent() const { return extent_; }
  int levels() const { return levels_; }
  /// Fine cells per coarse cell along each axis (2^levels).
  int refinement_factor() const { return 1 << levels_; }
  /// H: coarse cell diameter.
  double coarse_size() const { return coarse_.cell_diameter(); }
  /// h: fine cell diameter.
  double fine_size() const { return fine_.cell_diameter(); }
  double diameter() const { return std::hypot(extent_.x, extent_.y); }
  const BoundaryTags& tags() const { return tags_; }

  int coarse_cell_of_fine(int fine_cell) const;
  std::vector<int> fine_cells_of_coarse(int coarse_cell) const;

 private:
  Point origin_;
  Point extent_;
  int levels_ = 0;
  BoundaryTags tags_;
  GridLevel coarse_;
  GridLevel fine_;
};

/// m-th order element neighbourhood N^m(seed) on the coarse grid.
struct ElementPatch {
  std::vector<int> seed;
  int order_m = 1;
  std::vector<int> elements;  // sorted coarse cell ids

  bool contains(int cell) const;
  int center_element() const { return seed.empty() ? -1 : seed.front(); }
};

ElementPatch patch(const MeshHierarchy& mesh, int seed, int m);
ElementPatch patch(const MeshHierarchy& mesh, std::span<const int> seed, int m);

struct NodeSet {
  std::vector<int> nodes;
  std::vector<Point> coordinates;
  std::vector<bool> free;

  int count_free() const;
};

NodeSet free_nodes(const MeshHierarchy& mesh, Level level);

/// Debug dump: "id,x,y,kind" per node and "id,n0,n1,n2,n3" per cell.
void write_mesh_csv(const GridLevel& grid, std::ostream& nodes, std::ostream& cells);

}  // namespace helmlod
