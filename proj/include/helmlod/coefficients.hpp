#pragma once

#include "helmlod/common.hpp"
#include "helmlod/mesh.hpp"

#include <functional>
#include <optional>
#include <string>

namespace helmlod {

enum class Smoothness { Smooth, PiecewiseConstant };

/// Real scalar coefficient with declared bounds. `gradient` is optional;
/// when absent, derivative-based audits fall back to finite differences
/// (smooth fields) or refuse (piecewise-constant fields).
struct ScalarField {
  std::function<double(Point)> value;
  std::function<Point(Point)> gradient;
  double declared_min = 1.0;
  double declared_max = 1.0;
  Smoothness smoothness = Smoothness::Smooth;
  /// Characteristic oscillation length, used for sampling-resolution checks.
  std::optional<double> oscillation_length;

  double operator()(Point p) const { return value(p); }
  bool has_gradient() const { return static_cast<bool>(gradient); }

  static ScalarField constant(double c);
};

using ComplexField = std::function<Complex(Point)>;

/// Problem data of -div(A grad u) - k^2 V^2 u = f with A grad u . n - i k beta u = g
/// on the Robin part of the boundary.
struct CoefficientSet {
  std::string family = "constant";
  ScalarField diffusion_A = ScalarField::constant(1.0);
  ScalarField refraction_V2 = ScalarField::constant(1.0);
  ScalarField impedance_beta = ScalarField::constant(1.0);
  ComplexField volume_forcing_f = [](Point) { return Complex(0.0); };
  ComplexField robin_data_g = [](Point) { return Complex(0.0); };
  double wavenumber_k = 1.0;
  /// Centre of radial coefficient families.
  Point center;

  /// Throws InvalidInput unless all declared bounds are positive and k >= 0.
  void validate() const;
};

enum class ExampleId { Example1, Example2, Example3, Constant };

std::optional<ExampleId> parse_example_id(const std::string& name);
const char* to_string(ExampleId id);

struct ExampleParams {
  double k = 16.0;
  double epsilon = 1.0;  // example 1: V^2 period; example 2: oscillation scale
  double alpha = 0.08;   // example 2 amplitude
  double delta = 1.0;    // example 2 offset
  /// Example 3: blocks per axis and fraction of the area the blocks occupy.
  int block_count = 8;
  double block_area_fraction = 0.25;
  Point domain_origin{-1.0, -1.0};
  Point domain_extent{2.0, 2.0};
  /// Radial centre; defaults to the domain centre.
  std::optional<Point> center;
  Point forcing_center{0.0, 0.0};
  double forcing_radius = 1.0 / 20.0;
};

/// Builds one of the built-in coefficient families together with the
/// smooth bump forcing and g = 0, beta = 1.
///   example1: A = 1, V^2 = sin(2 pi r / eps) / 2 + 5
///   example2: A = V^2 = exp(alpha (sin(r / eps) + delta))
///   example3: A = 1, V^2 = 2 except on a periodic array of square blocks where V^2 = 1
///   constant: A = V^2 = beta = 1
CoefficientSet builtin_example(ExampleId id, const ExampleParams& params);

/// f(x) = exp(-1 / (1 - (|x - c| / radius)^2)) inside the ball, 0 outside.
ComplexField bump_forcing(Point center, double radius);

struct FieldRange {
  double min = 0.0;
  double max = 0.0;
};

/// Gauss points per axis used by all volume integrals.
inline constexpr int kVolumeQuadrature = 3;
/// Gauss points used by boundary face integrals.
inline constexpr int kFaceQuadrature = 2;

/// 1D Gauss-Legendre rule on [0, 1] (orders 1..6).
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;
};
GaussRule gauss_rule(int order);

/// Relative tolerance for declared-bound checks.
inline constexpr double kBoundTolerance = 1e-12;

/// Throws BoundViolation if value lies outside the declared range.
void check_bounds(const ScalarField& field, double value, Point where, const char* name);

/// Min/max of a field over all fine-level tensor Gauss points.
FieldRange field_bounds(const ScalarField& field, const MeshHierarchy& mesh,
                        int quadrature_order = kVolumeQuadrature);

}  // namespace helmlod
