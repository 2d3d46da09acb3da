#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helmlod/coefficients.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace helmlod;

TEST_CASE("example2 contrast is exp(2 alpha)") {
  ExampleParams p;
  p.alpha = 0.08;
  p.delta = 1.0;
  p.epsilon = 0.1;
  const auto c = builtin_example(ExampleId::Example2, p);
  CHECK(c.diffusion_A.declared_max / c.diffusion_A.declared_min == doctest::Approx(std::exp(0.16)).epsilon(1e-14));
  CHECK(c.refraction_V2.declared_max == c.diffusion_A.declared_max);
}

TEST_CASE("constant family evaluates to one") {
  const auto c = builtin_example(ExampleId::Constant, {});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Point x{u(rng), u(rng)};
    CHECK(c.diffusion_A(x) == 1.0);
    CHECK(c.refraction_V2(x) == 1.0);
    CHECK(c.impedance_beta(x) == 1.0);
  }
}

TEST_CASE("example1 closed form") {
  ExampleParams p;
  p.epsilon = 1.0;
  const auto c = builtin_example(ExampleId::Example1, p);
  CHECK(c.refraction_V2({0.25, 0.0}) == doctest::Approx(5.5).epsilon(1e-14));
  CHECK(c.refraction_V2({0.0, -0.75}) == doctest::Approx(4.5).epsilon(1e-14));
  CHECK(c.diffusion_A({0.3, 0.2}) == 1.0);
  CHECK(c.refraction_V2.declared_min == 4.5);
  CHECK(c.refraction_V2.declared_max == 5.5);
}

TEST_CASE("invalid example parameters are rejected") {
  ExampleParams p;
  p.epsilon = 0.0;
  CHECK_THROWS_AS(builtin_example(ExampleId::Example1, p), InvalidInput);
  CHECK_THROWS_AS(builtin_example(ExampleId::Example2, p), InvalidInput);
  p = {};
  p.alpha = -0.1;
  CHECK_THROWS_AS(builtin_example(ExampleId::Example2, p), InvalidInput);
  p = {};
  p.delta = 0.0;
  CHECK_THROWS_AS(builtin_example(ExampleId::Example2, p), InvalidInput);
  p = {};
  p.k = 0.0;
  CHECK_THROWS_AS(builtin_example(ExampleId::Constant, p), InvalidInput);
  CHECK_FALSE(parse_example_id("example4").has_value());
}

TEST_CASE("bump forcing") {
  const auto f = bump_forcing({0.0, 0.0}, 1.0 / 20.0);
  CHECK(f({0.0, 0.0}).real() == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(f({0.0, 0.0}).imag() == 0.0);
  CHECK(f({1.0 / 20.0, 0.0}) == Complex(0.0));
  CHECK(f({0.3, 0.3}) == Complex(0.0));
  const double r = 1.0 / 40.0;
  CHECK(f({r / std::sqrt(2.0), r / std::sqrt(2.0)}).real() ==
        doctest::Approx(std::exp(-1.0 / (1.0 - 0.25))).epsilon(1e-13));
  CHECK_THROWS_AS(bump_forcing({0, 0}, 0.0), InvalidInput);
}

TEST_CASE("radial families are symmetric and have consistent gradients") {
  ExampleParams p;
  p.epsilon = 0.3;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.3);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (ExampleId id : {ExampleId::Example1, ExampleId::Example2}) {
    const auto c = builtin_example(id, p);
    for (int i = 0; i < 50; ++i) {
      const double r = u(rng);
      const double a = angle(rng), b = angle(rng);
      const double v1 = c.refraction_V2({r * std::cos(a), r * std::sin(a)});
      const double v2 = c.refraction_V2({r * std::cos(b), r * std::sin(b)});
      CHECK(std::abs(v1 - v2) <= 1e-14 * std::abs(v1));
      // Central differences against the analytic gradient.
      const Point x{r * std::cos(a) + 1e-3, r * std::sin(a)};
      const double s = 1e-6;
      const Point g = c.refraction_V2.gradient(x);
      const double gx = (c.refraction_V2({x.x + s, x.y}) - c.refraction_V2({x.x - s, x.y})) / (2 * s);
      const double gy = (c.refraction_V2({x.x, x.y + s}) - c.refraction_V2({x.x, x.y - s})) / (2 * s);
      CHECK(g.x == doctest::Approx(gx).epsilon(1e-6).scale(1.0));
      CHECK(g.y == doctest::Approx(gy).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("field bounds") {
  const auto mesh = MeshHierarchy::build({-1, -1}, {2, 2}, {8, 8}, 3, BoundaryTags{});
  const auto constant = builtin_example(ExampleId::Constant, {});
  const auto cr = field_bounds(constant.refraction_V2, mesh, kVolumeQuadrature);
  CHECK(cr.min == 1.0);
  CHECK(cr.max == 1.0);

  ExampleParams p;
  p.epsilon = 1.0;
  const auto e1 = builtin_example(ExampleId::Example1, p);
  const auto r1 = field_bounds(e1.refraction_V2, mesh, kVolumeQuadrature);
  // Dense sampling oracle on a 1000 x 1000 grid.
  double lo = 1e300, hi = -1e300;
  for (int j = 0; j < 1000; ++j)
    for (int i = 0; i < 1000; ++i) {
      const double v = e1.refraction_V2({-1.0 + 2.0 * (i + 0.5) / 1000, -1.0 + 2.0 * (j + 0.5) / 1000});
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  CHECK(r1.min == doctest::Approx(lo).epsilon(1e-3));
  CHECK(r1.max == doctest::Approx(hi).epsilon(1e-3));
  CHECK(r1.min >= 4.5);
  CHECK(r1.max <= 5.5);

  const auto e3 = builtin_example(ExampleId::Example3, {});
  const auto r3 = field_bounds(e3.refraction_V2, mesh, kVolumeQuadrature);
  CHECK(r3.min == 1.0);
  CHECK(r3.max == 2.0);
}

TEST_CASE("bound violations name the point") {
  const auto mesh = MeshHierarchy::build({0, 0}, {1, 1}, {2, 2}, 1, BoundaryTags{});
  ScalarField f;
  f.value = [](Point x) { return 1.0 + x.x; };
  f.declared_min = 1.0;
  f.declared_max = 1.5;
  try {
    field_bounds(f, mesh, 3);
    FAIL("expected a bound violation");
  } catch (const BoundViolation& e) {
    CHECK(e.point.x > 0.5);
  }
}

TEST_CASE("example3 block layout") {
  ExampleParams p;
  p.block_count = 8;
  p.block_area_fraction = 0.25;
  const auto c = builtin_example(ExampleId::Example3, p);
  // Lattice spacing 1/4, blocks of side 1/8 centred in each lattice cell.
  CHECK(c.refraction_V2({-1.0 + 0.125, -1.0 + 0.125}) == 1.0);
  CHECK(c.refraction_V2({-1.0 + 0.01, -1.0 + 0.125}) == 2.0);
  CHECK(c.refraction_V2({0.125, 0.625}) == 1.0);
  // Area fraction by midpoint sampling.
  int inside = 0;
  const int n = 800;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      inside += c.refraction_V2({-1.0 + 2.0 * (i + 0.5) / n, -1.0 + 2.0 * (j + 0.5) / n}) == 1.0;
  CHECK(inside / double(n * n) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("gauss rules integrate polynomials exactly") {
  for (int order = 1; order <= 6; ++order) {
    const auto rule = gauss_rule(order);
    for (int p = 0; p < 2 * order; ++p) {
      double s = 0.0;
      for (std::size_t q = 0; q < rule.points.size(); ++q) s += rule.weights[q] * std::pow(rule.points[q], p);
      CHECK(s == doctest::Approx(1.0 / (p + 1)).epsilon(1e-14));
    }
  }
}
