#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "tgeom/numeric.hpp"
#include "tgeom/report.hpp"
#include "tgeom/sigma_calculus.hpp"
#include "tgeom/tube.hpp"

using namespace tgeom;

namespace {

const Point kO{0, 0, 0, 0};
const Point kT{1, 0, 0, 0};
const Point kX{0, 1, 0, 0};

SearchRegion box(int n, double lo, double hi) { return {Vector::Constant(n, lo), Vector::Constant(n, hi)}; }

double distance_to_line(const Vector& x, const Vector& a, const Vector& b) {
  const Vector d = (b - a).normalized();
  const Vector r = x - a;
  return (r - r.dot(d) * d).norm();
}

double directed_hausdorff(const TubeSampleSet& from, const TubeSampleSet& to) {
  double worst = 0.0;
  for (const auto& s : from.samples) {
    double best = INFINITY;
    for (const auto& t : to.samples) best = std::min(best, (s.point.coords() - t.point.coords()).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

class ZeroSigma final : public SigmaEvaluator {
 public:
  double operator()(const Point&, const Point&) const override { return 0.0; }
};

}  // namespace

TEST_CASE("tube residual examples") {
  const auto m = make_minkowski();
  const double s3 = std::sqrt(3.0) / 2;
  const auto spacelike = TubeSpec::through_origin(m, kO, kX);
  CHECK(std::abs(tube_residual(spacelike, Point{1, 2, 0.5, s3})) < 1e-12);
  const auto timelike = TubeSpec::through_origin(m, kO, kT);
  CHECK(tube_residual(timelike, Point{2, 0.1, 0, 0}) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(tube_residual(timelike, kO) == 0.0);
  const auto remote = TubeSpec::remote(m, kO, kT, Point{0.5, 1, 0, 0});
  CHECK(tube_residual(remote, Point{0.5, 1, 0, 0}) == 0.0);
  CHECK_THROWS_AS(tube_residual(timelike, Point{1, 2}), InvalidArgument);
}

TEST_CASE("residual is even in the axis vector") {
  std::mt19937_64 rng(81);
  const auto sigmas = {make_minkowski(), make_distorted_minkowski(0.01, 0.005)};
  for (const auto& sigma : sigmas) {
    for (int i = 0; i < 300; ++i) {
      const Point p0(oracle::uniform_vector(rng, 4, -2, 2)), p1(oracle::uniform_vector(rng, 4, -2, 2));
      const Point r(oracle::uniform_vector(rng, 4, -2, 2));
      const PointPairVector e(p0, p1), x(p0, r);
      const double ex = scalar_product(sigma, e, x);
      const double rex = scalar_product(sigma, e.reversed(), x);
      const double f = ex * ex - squared_norm(sigma, e) * squared_norm(sigma, x);
      const double f_neg = rex * rex - squared_norm(sigma, e.reversed()) * squared_norm(sigma, x);
      CHECK(f == f_neg);
      CHECK(tube_residual(TubeSpec::through_origin(sigma, p0, p1), r) == f);
    }
  }
}

TEST_CASE("remote tube anchored at p0 matches the origin tube bitwise") {
  std::mt19937_64 rng(82);
  const auto sigma = make_distorted_minkowski(0.02, 0.1);
  for (int i = 0; i < 200; ++i) {
    const Point p0(oracle::uniform_vector(rng, 4, -2, 2)), p1(oracle::uniform_vector(rng, 4, -2, 2));
    const auto a = TubeSpec::through_origin(sigma, p0, p1);
    const auto b = TubeSpec::remote(sigma, p0, p1, p0);
    const Point r(oracle::uniform_vector(rng, 4, -2, 2));
    CHECK(tube_residual(a, r) == tube_residual(b, r));
  }
}

TEST_CASE("surface intersection line validates its aux frame") {
  const auto e3 = make_euclidean(3);
  CHECK_THROWS_AS(TubeSpec::surface_intersection_line(e3, Point{0, 0, 0}, Point{1, 0, 0}, {Point{0, 1, 0}}),
                  InvalidArgument);
  CHECK_THROWS_AS(
      TubeSpec::surface_intersection_line(e3, Point{0, 0, 0}, Point{1, 0, 0}, {Point{2, 0, 0}, Point{0, 1, 0}}),
      InvalidArgument);
  const auto line =
      TubeSpec::surface_intersection_line(e3, Point{0, 0, 0}, Point{1, 0, 0}, {Point{0, 1, 0}, Point{0, 0, 1}});
  CHECK(line.residuals(Vector::Unit(3, 0) * 5).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK(std::abs(tube_residual(line, Point{1, 1, 0})) > 0.5);
}

TEST_CASE("classify dimension examples") {
  const auto m = make_minkowski();
  auto est = classify_dimension(TubeSpec::through_origin(m, kO, kT), kT);
  CHECK(est.dimension == 1);
  CHECK(est.method == DimensionMethod::hessian_nullity);
  auto ev = est.hessian_eigenvalues;
  std::sort(ev.begin(), ev.end());
  CHECK(std::abs(ev[0]) < 1e-5);
  for (int i = 1; i < 4; ++i) CHECK(ev[static_cast<std::size_t>(i)] == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(est.band_consistent);

  const double s3 = std::sqrt(3.0) / 2;
  const auto spacelike = TubeSpec::through_origin(m, kO, kX);
  const Point member{1, 2, 0.5, s3};
  est = classify_dimension(spacelike, member);
  CHECK(est.dimension == 3);
  CHECK(est.method == DimensionMethod::gradient_rank);
  const Vector grad = numeric::gradient([&](const Vector& y) { return spacelike.residual(y); }, member.coords());
  const Vector expected = (Vector(4) << 2, 0, -1, -std::sqrt(3.0)).finished();
  CHECK((grad - expected).cwiseAbs().maxCoeff() < 1e-7);

  est = classify_dimension(TubeSpec::through_origin(make_euclidean(2), Point{0, 0}, Point{1, 1}), Point{2, 2});
  CHECK(est.dimension == 1);
  CHECK(est.method == DimensionMethod::hessian_nullity);
}

TEST_CASE("spacelike cone vertex falls back to local PCA") {
  const auto spacelike = TubeSpec::through_origin(make_minkowski(), kO, kX);
  const auto est = classify_dimension(spacelike, Point{0, 1.5, 0, 0});
  CHECK(est.method == DimensionMethod::local_pca);
  CHECK(est.dimension == 3);
  CHECK_FALSE(est.pca_spectrum.empty());
}

TEST_CASE("ambiguous local PCA reports an unresolved dimension") {
  const WorldFunction zero(GeometryKind::euclidean, 3, {}, std::make_shared<ZeroSigma>());
  const auto spec = TubeSpec::through_origin(zero, Point{0, 0, 0}, Point{1, 0, 0});
  try {
    classify_dimension(spec, Point{0.3, 0.2, 0.1});
    FAIL("expected DimensionUnresolved");
  } catch (const DimensionUnresolved& e) {
    CHECK(std::string(e.what()).find("dimension unresolved") != std::string::npos);
    CHECK(e.spectrum().size() == 3);
  }
}

TEST_CASE("classify rejects points off the tube") {
  const auto spec = TubeSpec::through_origin(make_minkowski(), kO, kT);
  CHECK_THROWS_AS(classify_dimension(spec, Point{1, 1, 0, 0}), InvalidArgument);
}

TEST_CASE("timelike minkowski samples lie on the axis") {
  SampleOptions opts;
  opts.budget = 400;
  const auto set = sample_tube(TubeSpec::through_origin(make_minkowski(), kO, kT), box(4, -2, 2), opts);
  REQUIRE(set.samples.size() > 300);
  CHECK(set.local_dimension == 1);
  CHECK(set.method == DimensionMethod::hessian_nullity);
  for (const auto& s : set.samples) {
    CHECK(distance_to_line(s.point.coords(), kO.coords(), kT.coords()) < 1e-6);
    CHECK(s.residual <= opts.tol);
  }
}

TEST_CASE("spacelike minkowski samples match the analytic family both ways") {
  SampleOptions opts;
  opts.budget = 400;
  const auto spec = TubeSpec::through_origin(make_minkowski(), kO, kX);
  const auto set = sample_tube(spec, box(4, -2, 2), opts);
  REQUIRE(set.samples.size() > 300);
  CHECK(set.local_dimension == 3);
  CHECK(set.method == DimensionMethod::gradient_rank);
  for (const auto& s : set.samples) CHECK(fit_spacelike_family(kO, s.point).residual < 1e-6);

  std::mt19937_64 rng(83);
  std::uniform_real_distribution<double> a(-2, 2), tau(-2, 2), psi(0, 2 * std::numbers::pi);
  for (int i = 0; i < 300; ++i) {
    const Point member = spacelike_family_point(kO, a(rng), tau(rng), psi(rng));
    CHECK(std::abs(tube_residual(spec, member)) <= opts.tol * spec.scale(member.coords()));
  }
}

TEST_CASE("spacelike family fit recovers parameters") {
  const Point p0{0.5, -1, 0.25, 2};
  const auto fit = fit_spacelike_family(p0, spacelike_family_point(p0, 1.3, -0.7, 2.1));
  CHECK(fit.a == doctest::Approx(1.3));
  CHECK(fit.tau == doctest::Approx(-0.7));
  CHECK(fit.psi == doctest::Approx(2.1));
  CHECK(fit.residual < 1e-12);
  CHECK(fit_spacelike_family(p0, Point{1, 1, 1, 1}).residual > 0.1);
}

TEST_CASE("euclidean tube samples lie on the straight line") {
  SampleOptions opts;
  opts.budget = 200;
  const Point p0{0.2, -0.1, 0.3}, p1{1, 0.5, -0.2};
  const auto set = sample_tube(TubeSpec::through_origin(make_euclidean(3), p0, p1), box(3, -2, 2), opts);
  REQUIRE_FALSE(set.samples.empty());
  CHECK(set.local_dimension == 1);
  for (const auto& s : set.samples) CHECK(distance_to_line(s.point.coords(), p0.coords(), p1.coords()) < 1e-6);
}

TEST_CASE("euclidean intersection line does not depend on the aux points") {
  const auto e3 = make_euclidean(3);
  const Point p0{0, 0, 0}, p1{1, 0.5, 0.25};
  std::mt19937_64 rng(84);
  SampleOptions opts;
  opts.budget = 150;
  std::vector<TubeSampleSet> sets;
  for (int frame = 0; frame < 2; ++frame) {
    std::vector<Point> aux{Point(oracle::uniform_vector(rng, 3, -2, 2)), Point(oracle::uniform_vector(rng, 3, -2, 2))};
    sets.push_back(sample_tube(TubeSpec::surface_intersection_line(e3, p0, p1, aux), box(3, -2, 2), opts));
  }
  REQUIRE_FALSE(sets[0].samples.empty());
  REQUIRE_FALSE(sets[1].samples.empty());
  CHECK(std::max(directed_hausdorff(sets[0], sets[1]), directed_hausdorff(sets[1], sets[0])) < 1e-6);
}

TEST_CASE("reloaded sample files reproduce membership") {
  SampleOptions opts;
  opts.budget = 100;
  const auto spec = TubeSpec::through_origin(make_minkowski(), kO, kX);
  const auto set = sample_tube(spec, box(4, -2, 2), opts);
  std::istringstream csv(samples_csv(set));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "x0,x1,x2,x3,residual,gradient_norm,class");
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    std::istringstream fields(line);
    Vector x(4);
    std::string cell;
    for (int i = 0; i < 4; ++i) {
      std::getline(fields, cell, ',');
      x[i] = std::strtod(cell.c_str(), nullptr);
    }
    CHECK(x == set.samples[rows].point.coords());
    CHECK(std::abs(spec.residual(x)) <= opts.tol * spec.scale(x));
    ++rows;
  }
  CHECK(rows == set.samples.size());
}

TEST_CASE("sample_tube validates its inputs") {
  const auto spec = TubeSpec::through_origin(make_minkowski(), Point{3, 3, 3, 3}, Point{4, 3, 3, 3});
  CHECK_THROWS_AS(sample_tube(spec, box(4, -2, 2)), InvalidArgument);
  SampleOptions zero;
  zero.budget = 0;
  CHECK_THROWS_AS(sample_tube(TubeSpec::through_origin(make_minkowski(), kO, kT), box(4, -2, 2), zero), InvalidArgument);
  CHECK_THROWS_AS(sample_tube(TubeSpec::through_origin(make_minkowski(), kO, kT), box(3, -2, 2)), InvalidArgument);
}

TEST_CASE("thickness vanishes without distortion") {
  const auto spec = TubeSpec::through_origin(make_distorted_minkowski(0.0, 0.005), kO, kT);
  for (double t : {2.0, 4.0}) CHECK(tube_cross_section_thickness(spec, Point{t, 0, 0, 0}) < 1e-6);
}

TEST_CASE("distorted tube thickness follows the closed form") {
  const double d = 0.01;
  const auto spec = TubeSpec::through_origin(make_distorted_minkowski(d, 0.005), kO, kT);
  for (double t : {2.0, 4.0}) {
    const double rho = tube_cross_section_thickness(spec, Point{t, 0, 0, 0});
    CHECK(rho == doctest::Approx(oracle::distorted_tube_radius(d, t)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(tube_cross_section_thickness(spec, Point{2, 0.5, 0, 0}), InvalidArgument);
}

TEST_CASE("definition comparison verdicts") {
  const Point p0{0, 0, 0}, p1{1, 0.5, 0};
  const std::vector<Point> aux{Point{0, 1, 0}, Point{0.2, 0, 1}};
  const auto same = compare_definitions(make_euclidean(3), p0, p1, aux, box(3, -2, 2), 120);
  CHECK(same.same);
  CHECK(same.tube_to_line < 1e-6);
  CHECK(same.line_to_tube < 1e-6);

  const std::vector<Point> aux4{Point{0, 1, 0, 0}, Point{0, 0, 1, 0}, Point{0, 0, 0, 1}};
  const auto diff = compare_definitions(make_distorted_minkowski(0.01, 0.005), kO, kT, aux4, box(4, -2, 2), 120);
  CHECK_FALSE(diff.same);
  CHECK(diff.tube.local_dimension == 3);
  CHECK(diff.line.local_dimension == 1);
}

TEST_CASE("tube kind names round-trip") {
  for (auto k : {TubeKind::through_origin, TubeKind::remote, TubeKind::surface_intersection_line})
    CHECK(parse_tube_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_tube_kind("cylinder"), InvalidArgument);
}
