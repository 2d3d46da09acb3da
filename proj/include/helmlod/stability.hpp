#pragma once

#include "helmlod/assembly.hpp"
#include "helmlod/coefficients.hpp"
#include "helmlod/common.hpp"
#include "helmlod/mesh.hpp"

#include <optional>
#include <string>
#include <vector>

namespace helmlod {

/// Sample grid for the coefficient conditions.
struct SamplingSpec {
  Point origin{-1.0, -1.0};
  Point extent{2.0, 2.0};
  int samples_per_axis = 401;
  /// Keep only samples inside the disk inscribed in the box.
  bool inscribed_disk = false;

  std::vector<Point> points() const;
  double spacing() const;
  double diameter() const { return std::hypot(extent.x, extent.y); }
};

/// S(x) = div((V^2/A)(x - x0)) = d V^2/A + grad(V^2/A).(x - x0). Uses the
/// analytic gradients when both coefficients provide them, else central
/// differences with step 1e-6 * fd_diameter. Throws UnsupportedFamily for
/// piecewise-constant coefficients.
std::vector<double> s_function(const CoefficientSet& coeffs, Point x0,
                               const std::vector<Point>& points, double fd_diameter = 2.0 * std::sqrt(2.0));

struct StabilityReport {
  double s_min = 0.0;
  bool condition1_ok = false;
  double condition2_lhs = 0.0;
  bool condition2_ok = false;
  double c_g_used = 0.0;
  double grad_log_A_sup = 0.0;
  int sample_count = 0;
  bool geometry_ok = false;
  double eta = 0.0;
  /// Fewer than 10 samples per declared oscillation length.
  bool under_resolved = false;
  /// Set when S cannot be evaluated for the family; conditions then fail.
  std::optional<std::string> unsupported;

  bool pass() const { return condition1_ok && condition2_ok && geometry_ok; }
};

/// Default C_G: 2 for the radial built-in families, otherwise the bound
/// 2 max |x - x0| over the sampling box.
double default_c_g(const CoefficientSet& coeffs, Point x0, const SamplingSpec& sampling);

/// Evaluates both coefficient conditions on the sample grid. Geometry
/// fields are left unset (see audit()).
StabilityReport check_conditions(const CoefficientSet& coeffs, Point x0, const SamplingSpec& sampling,
                                 std::optional<double> c_g = std::nullopt);

struct GeomReport {
  /// Largest (x - x0).nu over Dirichlet face midpoints (must be <= 0).
  std::optional<double> max_dot_dirichlet;
  /// Largest |(x - x0).nu| over Neumann face midpoints (must vanish).
  std::optional<double> max_abs_dot_neumann;
  /// Smallest (x - x0).nu over Robin face midpoints; this is eta.
  std::optional<double> min_dot_robin;
  Point x0;
  bool ok = false;
};

GeomReport check_geometry(const MeshHierarchy& mesh, Point x0, double tolerance = 1e-12);

/// check_conditions plus check_geometry; unsupported families still get a
/// geometry verdict.
StabilityReport audit(const CoefficientSet& coeffs, const MeshHierarchy& mesh, Point x0,
                      const SamplingSpec& sampling, std::optional<double> c_g = std::nullopt);

/// ||f||_{L2(Omega)} and ||g||_{L2(Gamma_R)} by quadrature on the fine grid.
struct DataNorms {
  double f = 0.0;
  double g = 0.0;
};
DataNorms data_norms(const GridLevel& grid, const CoefficientSet& coeffs);

struct SweepPoint {
  double k = 0.0;
  double solution_V = 0.0;
  double data_norm = 0.0;
  std::optional<double> ratio;  // undefined for zero data
};

/// Fine FEM solve per k; ratio ||u_h||_V / (||f|| + ||g||).
std::vector<SweepPoint> empirical_stability_sweep(const CoefficientSet& problem,
                                                  const std::vector<double>& k_list,
                                                  const MeshHierarchy& mesh);

struct InfSupEstimate {
  double inf_sup = 0.0;     // smallest singular value in the V-norm
  double continuity = 0.0;  // largest singular value (C_a)
};

/// Dense singular values of L^-1 M L^-H with L L^H the V-norm Gram matrix.
/// Intended for small grids only.
InfSupEstimate discrete_inf_sup(const MeshHierarchy& mesh, Level level, const CoefficientSet& coeffs);

/// Largest V-norm singular value of the form (C_a) by power iteration on
/// G^-1 M^H G^-1 M with sparse Cholesky solves; usable on large grids.
double continuity_constant(const ElementForms& forms, int iterations = 300);

}  // namespace helmlod
