#include "helmlod/stability.hpp"

#include "helmlod/assembly.hpp"
#include "helmlod/pgsolve.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace helmlod {

namespace {

constexpr int kDimension = 2;

bool radial_family(const CoefficientSet& coeffs) {
  return coeffs.family == "example1" || coeffs.family == "example2" || coeffs.family == "constant";
}

double central_difference(const ScalarField& f, Point x, Point dir, double step) {
  return (f(x + step * dir) - f(x - step * dir)) / (2.0 * step);
}

Point gradient_of(const ScalarField& f, Point x, double step) {
  if (f.has_gradient()) return f.gradient(x);
  return {central_difference(f, x, {1.0, 0.0}, step), central_difference(f, x, {0.0, 1.0}, step)};
}

void require_smooth(const CoefficientSet& coeffs) {
  if (coeffs.diffusion_A.smoothness == Smoothness::PiecewiseConstant ||
      coeffs.refraction_V2.smoothness == Smoothness::PiecewiseConstant)
    throw UnsupportedFamily("S-function needs differentiable coefficients; family '" + coeffs.family +
                            "' is piecewise constant");
}

}  // namespace

std::vector<Point> SamplingSpec::points() const {
  if (samples_per_axis < 2) throw InvalidInput("sampling needs at least 2 points per axis");
  std::vector<Point> out;
  const Point c = origin + 0.5 * extent;
  const double radius = 0.5 * std::min(extent.x, extent.y);
  const int n = samples_per_axis;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Point p{origin.x + extent.x * i / (n - 1), origin.y + extent.y * j / (n - 1)};
      if (inscribed_disk && norm(p - c) > radius * (1.0 + 1e-14)) continue;
      out.push_back(p);
    }
  return out;
}

double SamplingSpec::spacing() const {
  return std::max(extent.x, extent.y) / (samples_per_axis - 1);
}

std::vector<double> s_function(const CoefficientSet& coeffs, Point x0,
                               const std::vector<Point>& points, double fd_diameter) {
  require_smooth(coeffs);
  const double step = 1e-6 * fd_diameter;
  const ScalarField& a = coeffs.diffusion_A;
  const ScalarField& v2 = coeffs.refraction_V2;
  std::vector<double> out;
  out.reserve(points.size());
  for (const Point& x : points) {
    const double av = a(x);
    const double vv = v2(x);
    const Point ga = gradient_of(a, x, step);
    const Point gv = gradient_of(v2, x, step);
    // grad(V^2/A) = (A grad V^2 - V^2 grad A) / A^2
    const Point gq = (1.0 / (av * av)) * (av * gv - vv * ga);
    out.push_back(kDimension * vv / av + dot(gq, x - x0));
  }
  return out;
}

double default_c_g(const CoefficientSet& coeffs, Point x0, const SamplingSpec& sampling) {
  if (radial_family(coeffs)) return 2.0;
  double r = 0.0;
  for (double sx : {0.0, 1.0})
    for (double sy : {0.0, 1.0}) {
      const Point corner{sampling.origin.x + sx * sampling.extent.x,
                         sampling.origin.y + sy * sampling.extent.y};
      r = std::max(r, norm(corner - x0));
    }
  return 2.0 * r;
}

StabilityReport check_conditions(const CoefficientSet& coeffs, Point x0, const SamplingSpec& sampling,
                                 std::optional<double> c_g) {
  StabilityReport rep;
  rep.c_g_used = c_g.value_or(default_c_g(coeffs, x0, sampling));
  const std::vector<Point> pts = sampling.points();
  rep.sample_count = static_cast<int>(pts.size());
  for (const ScalarField* f : {&coeffs.diffusion_A, &coeffs.refraction_V2})
    if (f->oscillation_length && sampling.spacing() > *f->oscillation_length / 10.0)
      rep.under_resolved = true;

  try {
    const std::vector<double> s = s_function(coeffs, x0, pts, sampling.diameter());
    rep.s_min = *std::min_element(s.begin(), s.end());
  } catch (const UnsupportedFamily& e) {
    rep.unsupported = e.what();
    rep.s_min = std::numeric_limits<double>::quiet_NaN();
    rep.condition2_lhs = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }

  const double step = 1e-6 * sampling.diameter();
  double sup = 0.0;
  for (const Point& x : pts) {
    const Point g = gradient_of(coeffs.diffusion_A, x, step);
    sup = std::max(sup, norm(g) / coeffs.diffusion_A(x));
  }
  rep.grad_log_A_sup = sup;
  rep.condition1_ok = rep.s_min > 0.0;
  const double contrast = coeffs.refraction_V2.declared_max / coeffs.diffusion_A.declared_min;
  rep.condition2_lhs = rep.s_min - ((kDimension - 2) + rep.c_g_used * sup) * contrast;
  rep.condition2_ok = rep.condition2_lhs > 0.0;
  return rep;
}

GeomReport check_geometry(const MeshHierarchy& mesh, Point x0, double tolerance) {
  GeomReport rep;
  rep.x0 = x0;
  const double tol = tolerance * mesh.diameter();
  auto update_max = [](std::optional<double>& slot, double v) { slot = slot ? std::max(*slot, v) : v; };
  for (const BoundaryFace& f : mesh.fine().boundary_faces()) {
    const double d = dot(f.midpoint - x0, f.normal);
    switch (f.kind) {
      case BoundaryKind::Dirichlet: update_max(rep.max_dot_dirichlet, d); break;
      case BoundaryKind::Neumann: update_max(rep.max_abs_dot_neumann, std::abs(d)); break;
      case BoundaryKind::Robin:
        rep.min_dot_robin = rep.min_dot_robin ? std::min(*rep.min_dot_robin, d) : d;
        break;
    }
  }
  rep.ok = (!rep.max_dot_dirichlet || *rep.max_dot_dirichlet <= tol) &&
           (!rep.max_abs_dot_neumann || *rep.max_abs_dot_neumann <= tol) && rep.min_dot_robin &&
           *rep.min_dot_robin > 0.0;
  return rep;
}

StabilityReport audit(const CoefficientSet& coeffs, const MeshHierarchy& mesh, Point x0,
                      const SamplingSpec& sampling, std::optional<double> c_g) {
  StabilityReport rep = check_conditions(coeffs, x0, sampling, c_g);
  const GeomReport geom = check_geometry(mesh, x0);
  rep.geometry_ok = geom.ok;
  rep.eta = geom.min_dot_robin.value_or(0.0);
  return rep;
}

DataNorms data_norms(const GridLevel& grid, const CoefficientSet& coeffs) {
  const GaussRule vol = gauss_rule(kVolumeQuadrature);
  const GaussRule face = gauss_rule(kFaceQuadrature);
  double f2 = 0.0;
  for (int c = 0; c < grid.num_cells(); ++c) {
    const Point o = grid.cell_origin(c);
    for (std::size_t j = 0; j < vol.points.size(); ++j)
      for (std::size_t i = 0; i < vol.points.size(); ++i) {
        const Point p{o.x + vol.points[i] * grid.dx(), o.y + vol.points[j] * grid.dy()};
        f2 += vol.weights[i] * vol.weights[j] * grid.dx() * grid.dy() *
              std::norm(coeffs.volume_forcing_f(p));
      }
  }
  double g2 = 0.0;
  for (const BoundaryFace& f : grid.boundary_faces()) {
    if (f.kind != BoundaryKind::Robin) continue;
    const Point a = grid.node_point(f.node0);
    const Point b = grid.node_point(f.node1);
    for (std::size_t q = 0; q < face.points.size(); ++q)
      g2 += face.weights[q] * f.length * std::norm(coeffs.robin_data_g(a + face.points[q] * (b - a)));
  }
  return {std::sqrt(f2), std::sqrt(g2)};
}

std::vector<SweepPoint> empirical_stability_sweep(const CoefficientSet& problem,
                                                  const std::vector<double>& k_list,
                                                  const MeshHierarchy& mesh) {
  std::vector<SweepPoint> out;
  const DataNorms data = data_norms(mesh.fine(), problem);
  for (double k : k_list) {
    CoefficientSet coeffs = problem;
    coeffs.wavenumber_k = k;
    coeffs.validate();
    const FineProblem fine(mesh.fine(), coeffs);
    const SolveResult sol = solve_standard_fem(fine);
    SweepPoint pt;
    pt.k = k;
    pt.solution_V = fine.norms.norm(sol.solution, NormKind::V);
    pt.data_norm = data.f + data.g;
    if (pt.data_norm > 0.0) pt.ratio = pt.solution_V / pt.data_norm;
    out.push_back(pt);
  }
  return out;
}

InfSupEstimate discrete_inf_sup(const MeshHierarchy& mesh, Level level, const CoefficientSet& coeffs) {
  const ElementForms forms(mesh.level(level), coeffs);
  const CMatrix m = CMatrix(assemble_form(forms));
  const RMatrix gram = RMatrix(assemble_norms(forms).v_gram());
  const Eigen::LLT<RMatrix> llt(gram);
  if (llt.info() != Eigen::Success) throw SolverError("V-norm Gram matrix is not positive definite", 0.0);
  const CMatrix l = llt.matrixL().toDenseMatrix().cast<Complex>();
  // L^-1 M L^-H
  CMatrix t = l.triangularView<Eigen::Lower>().solve(m);
  t = l.triangularView<Eigen::Lower>().solve(CMatrix(t.adjoint())).adjoint();
  const Eigen::BDCSVD<CMatrix> svd(t);
  const auto& s = svd.singularValues();
  return {s.minCoeff(), s.maxCoeff()};
}

double continuity_constant(const ElementForms& forms, int iterations) {
  const CSparse m = assemble_form(forms);
  const CSparse mh = m.adjoint();
  const RSparse gram = assemble_norms(forms).v_gram();
  const Eigen::SimplicialLDLT<RSparse> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw SolverError("V-norm Gram matrix is not positive definite", 0.0);
  auto solve = [&ldlt](const CVector& b) {
    CVector x(b.size());
    x.real() = ldlt.solve(RVector(b.real()));
    x.imag() = ldlt.solve(RVector(b.imag()));
    return x;
  };
  auto g_norm = [&gram](const CVector& x) { return std::sqrt(std::max(0.0, x.dot(gram * x).real())); };
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  CVector x(m.rows());
  for (auto& v : x) v = Complex(normal(rng), normal(rng));
  x /= g_norm(x);
  double sigma = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const CVector y = solve(mh * solve(m * x));
    // ||y||_G / ||x||_G tends to sigma_max^2.
    sigma = std::sqrt(x.dot(gram * y).real());
    x = y / g_norm(y);
  }
  return sigma;
}

}  // namespace helmlod
