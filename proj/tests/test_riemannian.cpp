#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "tgeom/numeric.hpp"
#include "tgeom/riemannian.hpp"
#include "tgeom/sigma_calculus.hpp"

using namespace tgeom;

namespace {

constexpr double kPi = std::numbers::pi;
// The (theta, phi) chart is singular at the pole; "pole" points sit just off it.
constexpr double kPoleTheta = 1e-7;

Matrix minkowski_g() { return Matrix(Vector((Vector(4) << 1, -1, -1, -1).finished()).asDiagonal()); }

std::vector<Point> chart_segment(const Point& a, const Point& b, int pieces) {
  std::vector<Point> out;
  for (int i = 0; i <= pieces; ++i) {
    const double t = static_cast<double>(i) / pieces;
    out.emplace_back(Vector((1 - t) * a.coords() + t * b.coords()));
  }
  return out;
}

std::vector<Point> concat(std::vector<Point> a, const std::vector<Point>& b) {
  a.insert(a.end(), b.begin() + 1, b.end());
  return a;
}

}  // namespace

TEST_CASE("christoffel symbols of a constant metric vanish") {
  const auto m = MetricField::constant(minkowski_g());
  const auto gamma = christoffel(m, Point{0.3, -1, 2, 0.5});
  for (int k = 0; k < 4; ++k) CHECK(gamma.upper(k).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("christoffel symbols of the unit sphere") {
  const auto m = MetricField::sphere(1.0);
  const auto gamma = christoffel(m, Point{kPi / 3, 0});
  CHECK(gamma(0, 1, 1) == doctest::Approx(-std::sqrt(3.0) / 4).epsilon(1e-8));
  CHECK(gamma(1, 0, 1) == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-8));
  CHECK(gamma(1, 1, 0) == gamma(1, 0, 1));
  CHECK(gamma(0, 0, 0) == doctest::Approx(0.0));
  std::mt19937_64 rng(31);
  for (int i = 0; i < 50; ++i) {
    const auto g = christoffel(m, Point(oracle::uniform_vector(rng, 2, 0.2, 2.9)));
    for (int k = 0; k < 2; ++k) CHECK(g.upper(k) == g.upper(k).transpose());
  }
}

TEST_CASE("singular metric is rejected with a condition number") {
  const auto m = MetricField::sphere(1.0);
  try {
    christoffel(m, Point{0.0, 0.0});
    FAIL("expected rejection");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("condition number") != std::string::npos);
  }
  CHECK_THROWS_AS(MetricField::constant(Matrix::Zero(2, 2)), InvalidArgument);
  Matrix two_time(2, 2);
  two_time << 1, 0, 0, 1;
  Matrix bad(3, 3);
  bad << 1, 0, 0, 0, 1, 0, 0, 0, -1;
  CHECK(MetricField::constant(two_time).signature() == Signature::riemannian_positive);
  CHECK_THROWS_AS(MetricField::constant(bad), InvalidArgument);
}

TEST_CASE("geodesic integration examples") {
  const auto flat = MetricField::flat(2);
  auto sol = geodesic_integrate(flat, Point{0, 0}, (Vector(2) << 1, 0).finished(), 1.0, 16);
  CHECK(sol.converged);
  CHECK(sol.path.back().x[0] == doctest::Approx(1.0));
  CHECK(sol.path.back().x[1] == doctest::Approx(0.0));
  CHECK(sol.length == doctest::Approx(1.0));

  const auto sphere = MetricField::sphere(1.0);
  sol = geodesic_integrate(sphere, Point{kPi / 2, 0}, (Vector(2) << 0, 1).finished(), kPi / 2, 200);
  CHECK(sol.path.back().x[0] == doctest::Approx(kPi / 2).epsilon(1e-10));
  CHECK(sol.path.back().x[1] == doctest::Approx(kPi / 2).epsilon(1e-10));
  CHECK(sol.length == doctest::Approx(kPi / 2).epsilon(1e-10));

  sol = geodesic_integrate(sphere, Point{1.0, 0.5}, Vector::Zero(2), 1.0, 10);
  CHECK(sol.length == 0.0);
  CHECK(sol.path.back().x == sol.path.front().x);
}

TEST_CASE("geodesic speed is conserved") {
  const auto sphere = MetricField::sphere(1.0);
  const auto sol = geodesic_integrate(sphere, Point{1.0, 0.2}, (Vector(2) << 0.6, 0.9).finished(), 2.0, 400);
  REQUIRE(sol.converged);
  const auto speed = [&](const GeodesicNode& n) { return n.velocity.dot(sphere.at(n.x) * n.velocity); };
  const double s0 = speed(sol.path.front());
  for (const auto& node : sol.path) CHECK(std::abs(speed(node) - s0) <= 1e-6 * s0);
}

TEST_CASE("geodesic integration stops at a singular metric") {
  const auto sphere = MetricField::sphere(1.0);
  // Heads straight for the pole.
  const auto sol = geodesic_integrate(sphere, Point{0.5, 0.0}, (Vector(2) << -1, 0).finished(), 2.0, 1000);
  CHECK_FALSE(sol.converged);
  CHECK(sol.path.size() < 1001);
  CHECK_FALSE(sol.message.empty());
}

TEST_CASE("geodesic boundary value examples") {
  auto sol = geodesic_bvp(MetricField::flat(2), Point{0, 0}, Point{3, 4});
  CHECK(sol.converged);
  CHECK(sol.length == doctest::Approx(5.0).epsilon(1e-12));

  const auto sphere = MetricField::sphere(1.0);
  const Point pole{kPoleTheta, 0}, equator{kPi / 2, 0};
  sol = geodesic_bvp(sphere, pole, equator);
  CHECK(sol.converged);
  CHECK(std::abs(sol.length - oracle::central_angle(kPoleTheta, 0, kPi / 2, 0)) < 1e-6);
  CHECK(std::abs(sol.length - kPi / 2) < 1e-6);

  sol = geodesic_bvp(sphere, Point{kPi / 2, 0}, Point{kPi / 2, kPi - 1e-3});
  CHECK(sol.converged);
  CHECK(std::abs(sol.length - (kPi - 1e-3)) < 1e-6);
  const auto& end = sol.path.back().x;
  CHECK(std::abs(end[0] - kPi / 2) < 1e-8);
  CHECK(std::abs(end[1] - (kPi - 1e-3)) < 1e-8);
}

TEST_CASE("boundary value solver reports non-convergence") {
  BvpOptions opts;
  opts.max_iterations = 1;
  const auto sol = geodesic_bvp(MetricField::sphere(1.0), Point{0.3, 0}, Point{2.5, 2.0}, opts);
  CHECK_FALSE(sol.converged);
  CHECK(sol.residual > opts.tolerance);
  const auto sigma = world_function_from_metric(MetricField::sphere(1.0), opts);
  try {
    sigma(Point{0.3, 0}, Point{2.5, 2.0});
    FAIL("expected an evaluation error");
  } catch (const EvaluationError& e) {
    CHECK(e.residual() > opts.tolerance);
  }
}

TEST_CASE("world function from a metric examples") {
  const auto flat = world_function_from_metric(MetricField::flat(2));
  CHECK(flat(Point{0, 0}, Point{3, 4}) == doctest::Approx(12.5).epsilon(1e-12));
  CHECK(flat.kind() == GeometryKind::numeric_riemannian);

  const auto sphere = world_function_from_metric(MetricField::sphere(1.0));
  const Point pole{kPoleTheta, 0}, equator{kPi / 2, 0};
  CHECK(std::abs(sphere(pole, equator) - kPi * kPi / 8) < 1e-6);
  CHECK(std::abs(sphere(pole, equator) - oracle::sphere_sigma(1.0, kPoleTheta, 0, kPi / 2, 0)) < 1e-9);
  CHECK(sphere(equator, equator) == 0.0);
  CHECK(sphere(pole, equator) == sphere(equator, pole));
}

TEST_CASE("lorentzian world function keeps the interval sign") {
  const auto s = world_function_from_metric(MetricField::constant(minkowski_g()));
  const Point o{0, 0, 0, 0};
  CHECK(s(o, Point{1, 0, 0, 0}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s(o, Point{0, 1, 0, 0}) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(std::abs(s(o, Point{1, 1, 0, 0})) < 1e-12);
  CHECK(s(o, Point{2, 0.5, -0.3, 0.1}) == doctest::Approx(make_minkowski()(o, Point{2, 0.5, -0.3, 0.1})).epsilon(1e-12));
}

TEST_CASE("numeric world function is deterministic under concurrent use") {
  const auto sigma = world_function_from_metric(MetricField::sphere(1.0));
  std::mt19937_64 rng(41);
  std::vector<std::pair<Point, Point>> pairs;
  for (int i = 0; i < 48; ++i)
    pairs.emplace_back(Point(oracle::uniform_vector(rng, 2, 0.5, 2.5)), Point(oracle::uniform_vector(rng, 2, 0.5, 2.5)));
  // Duplicate the work so threads race on the same cache entries.
  std::vector<double> parallel(pairs.size() * 2);
  numeric::parallel_for(parallel.size(), [&](std::size_t i) {
    const auto& [p, q] = pairs[i % pairs.size()];
    parallel[i] = sigma(p, q);
  });
  const auto fresh = world_function_from_metric(MetricField::sphere(1.0));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double serial = fresh(pairs[i].first, pairs[i].second);
    CHECK(parallel[i] == serial);
    CHECK(parallel[i + pairs.size()] == serial);
  }
}

TEST_CASE("sigma gradient examples") {
  const Vector g = sigma_gradient(make_euclidean(2), Point{0, 0}, Point{1, 0});
  CHECK(g[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(std::abs(g[1]) < 1e-9);
  const Vector gm = sigma_gradient(make_minkowski(), Point{0, 0, 0, 0}, Point{1, 0, 0, 0});
  CHECK(gm[0] == doctest::Approx(-1.0).epsilon(1e-9));
  for (int i = 1; i < 4; ++i) CHECK(std::abs(gm[i]) < 1e-9);

  const auto sphere = make_sphere(1.0);
  const auto metric = MetricField::sphere(1.0);
  for (double big_theta : {0.3, 1.0, 2.0}) {
    const Point xp{0.5, 0.7}, x{0.5 + big_theta, 0.7};
    const Vector s = sigma_gradient(sphere, x, xp);
    CHECK(s.dot(metric.at(x).inverse() * s) == doctest::Approx(big_theta * big_theta).epsilon(1e-7));
  }
}

TEST_CASE("riemannian scalar product examples") {
  const auto flat_metric = MetricField::flat(2);
  const auto flat = world_function_from_metric(flat_metric);
  CHECK(std::abs(riemannian_scalar_product(flat_metric, flat, Point{0, 0}, Point{1, 0}, Point{0, 1})) < 1e-9);

  const auto metric = MetricField::sphere(1.0);
  const auto sphere = world_function_from_metric(metric);
  const Point x{1.0, 0.2}, xp{1.8, 1.0};
  CHECK(std::abs(riemannian_scalar_product(metric, sphere, x, xp, xp) - 2 * sphere(x, xp)) < 1e-6);

  std::mt19937_64 rng(43);
  for (int i = 0; i < 20; ++i) {
    const Point o(oracle::uniform_vector(rng, 2, -3, 3));
    const Point a(oracle::uniform_vector(rng, 2, -3, 3));
    const Point b(oracle::uniform_vector(rng, 2, -3, 3));
    const double sp = scalar_product(flat, PointPairVector(o, a), PointPairVector(o, b));
    CHECK(std::abs(riemannian_scalar_product(flat_metric, flat, o, a, b) - sp) < 1e-9);
  }
}

TEST_CASE("flat transport leaves components unchanged") {
  const auto flat = MetricField::flat(3);
  const Vector u0 = (Vector(3) << 0.3, -1.2, 2.0).finished();
  const std::vector<Point> loop{Point{0, 0, 0}, Point{1, 2, 0}, Point{-1, 0.5, 3}, Point{0, 0, 0}};
  const auto r = parallel_transport(flat, u0, loop, 8);
  CHECK((r.components - u0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.path_used.size() == loop.size());
}

TEST_CASE("sphere octant loop rotates by a right angle") {
  const auto sphere = MetricField::sphere(1.0);
  // Octant of a rotated frame: no vertex near a pole, no pole inside.
  const Point a{0.9272952180016122, -0.4866949550747733};
  const Point b{2.214297435588181, 0.4866949550747733};
  const Point c{1.01319750009536, kPi / 2};
  for (const auto& p : {a, b, c}) CHECK(std::abs(std::cos(p[0])) < 0.61);
  CHECK(central_angle(a, b) == doctest::Approx(kPi / 2).epsilon(1e-12));
  CHECK(central_angle(b, c) == doctest::Approx(kPi / 2).epsilon(1e-12));
  const auto loop = concat(concat(great_circle_polyline(a, b, 256), great_circle_polyline(b, c, 256)),
                           great_circle_polyline(c, a, 256));
  const Vector u0 = (Vector(2) << 1.0, 0.0).finished();
  const auto r = parallel_transport(sphere, u0, loop, 4);
  CHECK(std::abs(covector_angle(sphere, a, u0, r.components) - kPi / 2) < 1e-4);
  CHECK(r.norm_drift < 1e-8);
}

TEST_CASE("out-and-back transport restores the components") {
  const auto sphere = MetricField::sphere(1.0);
  const auto out = chart_segment(Point{0.6, 0.3}, Point{2.2, 0.3}, 100);
  const auto back = chart_segment(Point{2.2, 0.3}, Point{0.6, 0.3}, 100);
  const Vector u0 = (Vector(2) << 0.4, 0.7).finished();
  const auto r = parallel_transport(sphere, u0, concat(out, back), 8);
  CHECK((r.components - u0).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("transport preserves the norm and depends on the route") {
  const auto sphere = MetricField::sphere(1.0);
  const Point start{kPi / 4, 0}, corner_a{kPi / 2, 0}, corner_b{kPi / 4, kPi / 2}, end{kPi / 2, kPi / 2};
  const auto route_a = concat(chart_segment(start, corner_a, 256), chart_segment(corner_a, end, 256));
  const auto route_b = concat(chart_segment(start, corner_b, 256), chart_segment(corner_b, end, 256));
  const Vector u0 = (Vector(2) << 0.0, 0.5).finished();
  const auto ra = parallel_transport(sphere, u0, route_a, 4);
  const auto rb = parallel_transport(sphere, u0, route_b, 4);
  CHECK(ra.norm_drift < 1e-8);
  CHECK(rb.norm_drift < 1e-8);
  // Holonomy of the enclosed cap sector: (pi/2) cos(pi/4).
  CHECK(std::abs(covector_angle(sphere, end, ra.components, rb.components) - kPi / 2 * std::cos(kPi / 4)) < 1e-4);

  // The sigma-immanent verdict takes no path at all.
  const auto sigma = make_sphere(1.0);
  const PointPairVector v1(start, Point{0.9, 0.1}), v2(end, Point{1.4, 1.7});
  const bool verdict = is_collinear(sigma, v1, v2);
  for (int i = 0; i < 3; ++i) CHECK(is_collinear(sigma, v1, v2) == verdict);
}

TEST_CASE("transport through a singular point names the segment") {
  const auto sphere = MetricField::sphere(1.0);
  const std::vector<Point> path{Point{0.5, 0}, Point{0.2, 0}, Point{-0.2, 0}};
  try {
    parallel_transport(sphere, (Vector(2) << 1, 0).finished(), path, 2);
    FAIL("expected rejection");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("segment 1") != std::string::npos);
  }
}

TEST_CASE("great circle polyline follows the sphere") {
  const Point a{1.0, 0.2}, b{2.0, 1.5};
  const auto line = great_circle_polyline(a, b, 64);
  REQUIRE(line.size() == 65);
  CHECK(line.front() == a);
  CHECK(line.back()[0] == b[0]);
  const double total = central_angle(a, b);
  for (std::size_t i = 1; i < line.size(); ++i) CHECK(central_angle(line[i - 1], line[i]) == doctest::Approx(total / 64).epsilon(1e-9));
  CHECK_THROWS_AS(great_circle_polyline(Point{kPi / 2, 0}, Point{kPi / 2, kPi}, 4), InvalidArgument);
}
