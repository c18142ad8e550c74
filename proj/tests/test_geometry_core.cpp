#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "tgeom/errors.hpp"
#include "tgeom/riemannian.hpp"
#include "tgeom/world_function.hpp"

using namespace tgeom;

TEST_CASE("point rejects non-finite and empty coordinates") {
  CHECK_THROWS_AS(Point{Vector()}, InvalidArgument);
  CHECK_THROWS_AS((Point{1.0, std::numeric_limits<double>::quiet_NaN()}), InvalidArgument);
  CHECK_THROWS_AS((Point{std::numeric_limits<double>::infinity()}), InvalidArgument);
  const Point p{1.0, 2.0, 3.0};
  CHECK(p.dim() == 3);
  CHECK(p[2] == 3.0);
}

TEST_CASE("euclidean world function examples") {
  const auto s = make_euclidean(2);
  CHECK(s(Point{0, 0}, Point{3, 4}) == doctest::Approx(12.5).epsilon(1e-15));
  CHECK(s(Point{1.5, -2}, Point{1.5, -2}) == 0.0);
  Matrix g(2, 2);
  g << 2, 0, 0, 1;
  CHECK(make_euclidean(2, g)(Point{0, 0}, Point{1, 1}) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(s.kind() == GeometryKind::euclidean);
  CHECK(s.dim() == 2);
}

TEST_CASE("euclidean metric validation names the bad eigenvalue") {
  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(make_euclidean(2, asym), InvalidArgument);
  Matrix indefinite(2, 2);
  indefinite << 1, 0, 0, -3;
  try {
    make_euclidean(2, indefinite);
    FAIL("expected rejection");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("-3") != std::string::npos);
  }
  CHECK_THROWS_AS(make_euclidean(3, Matrix::Identity(2, 2)), InvalidArgument);
}

TEST_CASE("dimension mismatch is rejected") {
  const auto s = make_euclidean(2);
  CHECK_THROWS_AS(s(Point{0, 0}, Point{1, 2, 3}), InvalidArgument);
  CHECK_THROWS_AS(make_minkowski()(Point{0, 0}, Point{0, 0}), InvalidArgument);
}

TEST_CASE("minkowski world function examples") {
  const auto s = make_minkowski();
  const Point o{0, 0, 0, 0};
  CHECK(s(o, Point{1, 0, 0, 0}) == 0.5);
  CHECK(s(o, Point{0, 1, 0, 0}) == -0.5);
  CHECK(s(o, Point{1, 1, 0, 0}) == 0.0);
}

TEST_CASE("distorted minkowski examples") {
  const auto s = make_distorted_minkowski(0.01, 0.005);
  const Point o{0, 0, 0, 0};
  CHECK(s(o, Point{1, 0, 0, 0}) == doctest::Approx(0.51).epsilon(1e-15));
  CHECK(s(o, Point{0, 1, 0, 0}) == -0.5);
  CHECK(s(o, o) == 0.0);
  CHECK_THROWS_AS(make_distorted_minkowski(-0.1, 0.0), InvalidArgument);
  CHECK_THROWS_AS(make_distorted_minkowski(0.1, -1.0), InvalidArgument);
}

TEST_CASE("zero distortion agrees bitwise with minkowski") {
  std::mt19937_64 rng(7);
  const auto m = make_minkowski();
  const auto d0 = make_distorted_minkowski(0.0, 0.3);
  for (int i = 0; i < 1000; ++i) {
    const Point p(oracle::uniform_vector(rng, 4, -3, 3));
    const Point q(oracle::uniform_vector(rng, 4, -3, 3));
    CHECK(m(p, q) == d0(p, q));
  }
}

TEST_CASE("sphere world function examples") {
  const auto s = make_sphere(1.0);
  const double half_pi = std::numbers::pi / 2;
  CHECK(s(Point{0, 0}, Point{half_pi, 0}) == doctest::Approx(std::numbers::pi * std::numbers::pi / 8).epsilon(1e-14));
  CHECK(s(Point{0.7, 1.1}, Point{0.7, 1.1}) == 0.0);
  const auto s2 = make_sphere(2.0);
  CHECK(s2(Point{half_pi, 0}, Point{half_pi, std::numbers::pi}) ==
        doctest::Approx(0.5 * std::pow(2 * std::numbers::pi, 2)).epsilon(1e-14));
  CHECK_THROWS_AS(make_sphere(0.0), InvalidArgument);
  CHECK_THROWS_AS(make_sphere(-1.0), InvalidArgument);
}

TEST_CASE("sphere pole ignores longitude") {
  const auto s = make_sphere(1.0);
  const Point q{1.0, 0.4};
  CHECK(s(Point{0, 0}, q) == doctest::Approx(s(Point{0, 2.5}, q)).epsilon(1e-15));
  CHECK(s(Point{std::numbers::pi, 1}, Point{std::numbers::pi, -2}) == 0.0);
}

TEST_CASE("sphere agrees with the haversine oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> th(0.0, std::numbers::pi), ph(0.0, 2 * std::numbers::pi);
  const auto s = make_sphere(1.7);
  for (int i = 0; i < 500; ++i) {
    const double t1 = th(rng), p1 = ph(rng), t2 = th(rng), p2 = ph(rng);
    CHECK(s(Point{t1, p1}, Point{t2, p2}) ==
          doctest::Approx(oracle::sphere_sigma(1.7, t1, p1, t2, p2)).epsilon(1e-9));
  }
  // Nearly coincident points keep relative accuracy.
  const double tiny = 1e-9;
  CHECK(s(Point{1.0, 0.0}, Point{1.0 + tiny, 0.0}) == doctest::Approx(0.5 * std::pow(1.7 * tiny, 2)).epsilon(1e-6));
}

TEST_CASE("built-ins are symmetric and vanish on the diagonal exactly") {
  std::mt19937_64 rng(3);
  Matrix g(3, 3);
  g << 2, 0.3, 0.1, 0.3, 1, -0.2, 0.1, -0.2, 1.5;
  struct Case {
    WorldFunction sigma;
    double lo, hi;
  };
  const std::vector<Case> cases{{make_euclidean(3, g), -10, 10},
                                {make_minkowski(), -5, 5},
                                {make_distorted_minkowski(0.01, 0.005), -5, 5},
                                {make_sphere(1.0), 0.0, 3.0}};
  for (const auto& c : cases) {
    for (int i = 0; i < 1000; ++i) {
      const Point p(oracle::uniform_vector(rng, c.sigma.dim(), c.lo, c.hi));
      const Point q(oracle::uniform_vector(rng, c.sigma.dim(), c.lo, c.hi));
      CHECK(c.sigma(p, q) == c.sigma(q, p));
      CHECK(c.sigma(p, p) == 0.0);
      CHECK(c.sigma(p, q) == c.sigma(p, q));
    }
  }
}

TEST_CASE("identity euclidean sigma is within 4 ulp of half the squared distance") {
  std::mt19937_64 rng(5);
  for (int n = 1; n <= 4; ++n) {
    const auto s = make_euclidean(n);
    for (int i = 0; i < 1000; ++i) {
      const Vector p = oracle::uniform_vector(rng, n, -10, 10);
      const Vector q = oracle::uniform_vector(rng, n, -10, 10);
      CHECK(oracle::ulp_distance(s(Point(p), Point(q)), oracle::half_sq_dist(p, q)) <= 4.0);
    }
  }
}

TEST_CASE("sphere satisfies the eikonal identity under finite differences") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> th(0.4, 2.7), ph(-1.0, 1.0);
  const auto s = make_sphere(1.0);
  const auto metric = MetricField::sphere(1.0);
  for (int i = 0; i < 100; ++i) {
    const Point x{th(rng), ph(rng)};
    const Point y{th(rng), ph(rng)};
    if (central_angle(x, y) < 0.1) continue;
    const Vector grad = sigma_gradient(s, x, y);
    const double lhs = grad.dot(metric.at(x).inverse() * grad);
    CHECK(lhs == doctest::Approx(2.0 * s(x, y)).epsilon(1e-6));
  }
}

TEST_CASE("geometry kind names round-trip") {
  for (auto k : {GeometryKind::euclidean, GeometryKind::minkowski, GeometryKind::distorted_minkowski,
                 GeometryKind::sphere, GeometryKind::numeric_riemannian})
    CHECK(parse_geometry_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_geometry_kind("hyperbolic"), InvalidArgument);
}
