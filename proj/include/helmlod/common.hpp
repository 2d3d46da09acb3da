#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace helmlod {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using CSparse = Eigen::SparseMatrix<Complex>;
using RSparse = Eigen::SparseMatrix<double>;

/// Spatial dimension. Everything in this library is planar.
inline constexpr int kDim = 2;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::sqrt(dot(a, a)); }

/// Raised for malformed configuration or arguments (bad extents, empty Robin
/// boundary, non-positive parameters, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A coefficient evaluated outside its declared [min, max] range.
class BoundViolation : public std::runtime_error {
 public:
  BoundViolation(const std::string& what, Point where)
      : std::runtime_error(what), point(where) {}
  Point point;
};

/// Singular or badly conditioned linear system.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double rcond_estimate)
      : std::runtime_error(what), rcond(rcond_estimate) {}
  double rcond;
};

/// Requested operation is not available for this coefficient family.
class UnsupportedFamily : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace helmlod
