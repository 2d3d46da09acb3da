#include "helmlod/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace helmlod {

ScalarField ScalarField::constant(double c) {
  ScalarField f;
  f.value = [c](Point) { return c; };
  f.gradient = [](Point) { return Point{0.0, 0.0}; };
  f.declared_min = c;
  f.declared_max = c;
  return f;
}

void CoefficientSet::validate() const {
  for (const auto* f : {&diffusion_A, &refraction_V2, &impedance_beta}) {
    if (!(f->declared_min > 0.0) || !(f->declared_max >= f->declared_min))
      throw InvalidInput("coefficient bounds must satisfy 0 < min <= max");
  }
  if (!(wavenumber_k >= 0.0)) throw InvalidInput("wave number k must be non-negative");
}

std::optional<ExampleId> parse_example_id(const std::string& name) {
  if (name == "example1") return ExampleId::Example1;
  if (name == "example2") return ExampleId::Example2;
  if (name == "example3") return ExampleId::Example3;
  if (name == "constant") return ExampleId::Constant;
  return std::nullopt;
}

const char* to_string(ExampleId id) {
  switch (id) {
    case ExampleId::Example1: return "example1";
    case ExampleId::Example2: return "example2";
    case ExampleId::Example3: return "example3";
    case ExampleId::Constant: return "constant";
  }
  return "?";
}

namespace {

// Radial field v(r) with derivative dv/dr; gradient is dv/dr (x - c) / r.
ScalarField radial_field(Point c, std::function<double(double)> v,
                         std::function<double(double)> dv) {
  ScalarField f;
  f.value = [c, v](Point p) { return v(norm(p - c)); };
  f.gradient = [c, dv](Point p) {
    const Point d = p - c;
    const double r = norm(d);
    if (r == 0.0) return Point{0.0, 0.0};
    return (dv(r) / r) * d;
  };
  return f;
}

}  // namespace

CoefficientSet builtin_example(ExampleId id, const ExampleParams& params) {
  if (!(params.k > 0.0)) throw InvalidInput("wave number k must be positive");
  CoefficientSet set;
  set.family = to_string(id);
  set.wavenumber_k = params.k;
  const Point c = params.center.value_or(params.domain_origin + 0.5 * params.domain_extent);
  set.center = c;
  set.volume_forcing_f = bump_forcing(params.forcing_center, params.forcing_radius);

  switch (id) {
    case ExampleId::Constant: break;
    case ExampleId::Example1: {
      const double eps = params.epsilon;
      if (!(eps > 0.0)) throw InvalidInput("example1 needs epsilon > 0");
      const double w = 2.0 * std::numbers::pi / eps;
      set.refraction_V2 = radial_field(
          c, [w](double r) { return 0.5 * std::sin(w * r) + 5.0; },
          [w](double r) { return 0.5 * w * std::cos(w * r); });
      set.refraction_V2.declared_min = 4.5;
      set.refraction_V2.declared_max = 5.5;
      set.refraction_V2.oscillation_length = eps;
      break;
    }
    case ExampleId::Example2: {
      const double eps = params.epsilon;
      const double alpha = params.alpha;
      const double delta = params.delta;
      if (!(eps > 0.0) || !(alpha > 0.0) || !(delta > 0.0))
        throw InvalidInput("example2 needs epsilon, alpha, delta > 0");
      ScalarField a = radial_field(
          c, [=](double r) { return std::exp(alpha * (std::sin(r / eps) + delta)); },
          [=](double r) {
            return std::exp(alpha * (std::sin(r / eps) + delta)) * alpha / eps *
                   std::cos(r / eps);
          });
      a.declared_min = std::exp(alpha * (delta - 1.0));
      a.declared_max = std::exp(alpha * (delta + 1.0));
      // One period of sin(r / eps) is 2 pi eps long.
      a.oscillation_length = 2.0 * std::numbers::pi * eps;
      set.diffusion_A = a;
      set.refraction_V2 = a;
      break;
    }
    case ExampleId::Example3: {
      const int p = params.block_count;
      const double frac = params.block_area_fraction;
      if (p < 1 || !(frac > 0.0) || !(frac < 1.0))
        throw InvalidInput("example3 needs block_count >= 1 and area fraction in (0, 1)");
      const Point o = params.domain_origin;
      const Point e = params.domain_extent;
      const double sx = e.x / p;
      const double sy = e.y / p;
      const double half = 0.5 * std::sqrt(frac);
      ScalarField v2;
      v2.value = [=](Point x) {
        const double u = (x.x - o.x) / sx;
        const double v = (x.y - o.y) / sy;
        const double fu = u - std::floor(u) - 0.5;
        const double fv = v - std::floor(v) - 0.5;
        const bool inside = u >= 0.0 && v >= 0.0 && u <= p && v <= p && std::abs(fu) < half &&
                            std::abs(fv) < half;
        return inside ? 1.0 : 2.0;
      };
      v2.declared_min = 1.0;
      v2.declared_max = 2.0;
      v2.smoothness = Smoothness::PiecewiseConstant;
      set.refraction_V2 = v2;
      break;
    }
  }
  return set;
}

ComplexField bump_forcing(Point center, double radius) {
  if (!(radius > 0.0)) throw InvalidInput("bump radius must be positive");
  return [center, radius](Point x) {
    const double s = norm(x - center) / radius;
    if (s >= 1.0) return Complex(0.0);
    return Complex(std::exp(-1.0 / (1.0 - s * s)));
  };
}

GaussRule gauss_rule(int order) {
  if (order < 1 || order > 10) throw InvalidInput("Gauss order must lie in [1, 10]");
  GaussRule rule;
  // Newton iteration on the Legendre polynomial, then map [-1, 1] -> [0, 1].
  for (int i = 0; i < order; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int n = 2; n <= order; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      const double p = order == 1 ? x : p1;
      const double pm1 = order == 1 ? 1.0 : p0;
      dp = order * (x * p - pm1) / (x * x - 1.0);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.points.push_back(0.5 * (1.0 - x));
    rule.weights.push_back(1.0 / ((1.0 - x * x) * dp * dp));
  }
  std::vector<std::size_t> idx(order);
  for (int i = 0; i < order; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return rule.points[a] < rule.points[b]; });
  GaussRule sorted;
  for (auto i : idx) {
    sorted.points.push_back(rule.points[i]);
    sorted.weights.push_back(rule.weights[i]);
  }
  return sorted;
}

void check_bounds(const ScalarField& field, double value, Point where, const char* name) {
  const double tol = kBoundTolerance * std::abs(field.declared_max);
  if (value < field.declared_min - tol || value > field.declared_max + tol || !std::isfinite(value)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << name << " = " << value << " at (" << where.x << ", " << where.y
        << ") lies outside declared bounds [" << field.declared_min << ", "
        << field.declared_max << "]";
    throw BoundViolation(msg.str(), where);
  }
}

FieldRange field_bounds(const ScalarField& field, const MeshHierarchy& mesh,
                        int quadrature_order) {
  const GridLevel& grid = mesh.fine();
  const GaussRule rule = gauss_rule(quadrature_order);
  FieldRange range{std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()};
  for (int c = 0; c < grid.num_cells(); ++c) {
    const Point o = grid.cell_origin(c);
    for (double qy : rule.points)
      for (double qx : rule.points) {
        const Point p{o.x + qx * grid.dx(), o.y + qy * grid.dy()};
        const double v = field(p);
        check_bounds(field, v, p, "field");
        range.min = std::min(range.min, v);
        range.max = std::max(range.max, v);
      }
  }
  return range;
}

}  // namespace helmlod
