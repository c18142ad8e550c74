#include "tgeom/world_function.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "tgeom/errors.hpp"

namespace tgeom {

std::string_view to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::euclidean: return "euclidean";
    case GeometryKind::minkowski: return "minkowski";
    case GeometryKind::distorted_minkowski: return "distorted-minkowski";
    case GeometryKind::sphere: return "sphere";
    case GeometryKind::numeric_riemannian: return "numeric-riemannian";
  }
  return "unknown";
}

GeometryKind parse_geometry_kind(std::string_view name) {
  for (auto k : {GeometryKind::euclidean, GeometryKind::minkowski, GeometryKind::distorted_minkowski,
                 GeometryKind::sphere, GeometryKind::numeric_riemannian}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown geometry kind '" + std::string(name) + "'");
}

WorldFunction::WorldFunction(GeometryKind kind, int dim, GeometryParams params,
                             std::shared_ptr<const SigmaEvaluator> evaluator)
    : kind_(kind), dim_(dim), params_(std::move(params)), evaluator_(std::move(evaluator)) {
  if (dim_ <= 0) throw InvalidArgument("world function dimension must be positive");
  if (!evaluator_) throw InvalidArgument("world function needs an evaluator");
}

double WorldFunction::operator()(const Point& p, const Point& q) const {
  require_dim(dim_, {&p, &q});
  return (*evaluator_)(p, q);
}

namespace {

class QuadraticSigma final : public SigmaEvaluator {
 public:
  explicit QuadraticSigma(Matrix metric) : metric_(std::move(metric)) {}
  double operator()(const Point& p, const Point& q) const override {
    const Vector d = p.coords() - q.coords();
    return 0.5 * d.dot(metric_ * d);
  }

 private:
  Matrix metric_;
};

class DistortedSigma final : public SigmaEvaluator {
 public:
  DistortedSigma(double distortion, double sigma0)
      : flat_(minkowski_metric()), distortion_(distortion), sigma0_(sigma0) {}
  double operator()(const Point& p, const Point& q) const override {
    const double s = flat_(p, q);
    if (distortion_ == 0.0) return s;
    return s > sigma0_ ? s + distortion_ : s;
  }

 private:
  QuadraticSigma flat_;
  double distortion_;
  double sigma0_;
};

class SphereSigma final : public SigmaEvaluator {
 public:
  explicit SphereSigma(double radius) : radius_(radius) {}
  double operator()(const Point& p, const Point& q) const override {
    const double arc = radius_ * central_angle(p, q);
    return 0.5 * arc * arc;
  }

 private:
  double radius_;
};

Eigen::Vector3d unit_vector(const Point& p) {
  // sin(pi) is not exactly zero; keep the poles exact.
  if (p[0] == 0.0) return {0.0, 0.0, 1.0};
  if (p[0] == std::numbers::pi) return {0.0, 0.0, -1.0};
  const double st = std::sin(p[0]);
  return {st * std::cos(p[1]), st * std::sin(p[1]), std::cos(p[0])};
}

}  // namespace

Matrix minkowski_metric() {
  Matrix g = Matrix::Zero(4, 4);
  g.diagonal() << 1.0, -1.0, -1.0, -1.0;
  return g;
}

double central_angle(const Point& p, const Point& q) {
  if (p == q) return 0.0;
  const Eigen::Vector3d a = unit_vector(p);
  const Eigen::Vector3d b = unit_vector(q);
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

WorldFunction make_euclidean(int dim, const Matrix& metric) {
  if (dim <= 0) throw InvalidArgument("dimension must be positive");
  if (metric.rows() != dim || metric.cols() != dim)
    throw InvalidArgument("metric must be " + std::to_string(dim) + "x" + std::to_string(dim));
  if (!metric.allFinite()) throw InvalidArgument("metric has non-finite entries");
  const double scale = std::max(1.0, metric.cwiseAbs().maxCoeff());
  if ((metric - metric.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidArgument("metric is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(metric);
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    if (!(eig.eigenvalues()[i] > 0.0)) {
      std::ostringstream msg;
      msg << "metric is not positive definite: eigenvalue " << i << " = " << eig.eigenvalues()[i];
      throw InvalidArgument(msg.str());
    }
  }
  GeometryParams params;
  params.metric = metric;
  return WorldFunction(GeometryKind::euclidean, dim, params, std::make_shared<QuadraticSigma>(metric));
}

WorldFunction make_minkowski() {
  GeometryParams params;
  params.metric = minkowski_metric();
  return WorldFunction(GeometryKind::minkowski, 4, params,
                       std::make_shared<QuadraticSigma>(params.metric));
}

WorldFunction make_distorted_minkowski(double distortion, double sigma0) {
  if (!(distortion >= 0.0) || !std::isfinite(distortion))
    throw InvalidArgument("distortion D must be a finite nonnegative number");
  if (!(sigma0 >= 0.0) || !std::isfinite(sigma0))
    throw InvalidArgument("threshold sigma0 must be a finite nonnegative number");
  GeometryParams params;
  params.metric = minkowski_metric();
  params.distortion = distortion;
  params.sigma0 = sigma0;
  return WorldFunction(GeometryKind::distorted_minkowski, 4, params,
                       std::make_shared<DistortedSigma>(distortion, sigma0));
}

WorldFunction make_sphere(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw InvalidArgument("sphere radius must be positive");
  GeometryParams params;
  params.radius = radius;
  return WorldFunction(GeometryKind::sphere, 2, params, std::make_shared<SphereSigma>(radius));
}

}  // namespace tgeom
