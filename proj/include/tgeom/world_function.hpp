#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "tgeom/point.hpp"

namespace tgeom {

enum class GeometryKind { euclidean, minkowski, distorted_minkowski, sphere, numeric_riemannian };

std::string_view to_string(GeometryKind kind);
GeometryKind parse_geometry_kind(std::string_view name);

/// Kind-specific parameters. Fields not used by a kind are left at defaults.
struct GeometryParams {
  Matrix metric;            // euclidean / minkowski: constant metric
  double radius = 0.0;      // sphere
  double distortion = 0.0;  // distorted-minkowski: additive shift D
  double sigma0 = 0.0;      // distorted-minkowski: threshold
};

/// Evaluates sigma on raw chart coordinates. Dimensions are already checked.
class SigmaEvaluator {
 public:
  virtual ~SigmaEvaluator() = default;
  virtual double operator()(const Point& p, const Point& q) const = 0;
};

/// The world function sigma(P, Q) of a geometry: half the squared interval.
///
/// Values are immutable and cheap to copy; evaluation is thread-safe.
/// Every built-in satisfies sigma(P, P) == 0 and sigma(P, Q) == sigma(Q, P)
/// exactly.
class WorldFunction {
 public:
  WorldFunction(GeometryKind kind, int dim, GeometryParams params,
                std::shared_ptr<const SigmaEvaluator> evaluator);

  double operator()(const Point& p, const Point& q) const;
  double evaluate(const Point& p, const Point& q) const { return (*this)(p, q); }

  GeometryKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  const GeometryParams& params() const noexcept { return params_; }

 private:
  GeometryKind kind_;
  int dim_;
  GeometryParams params_;
  std::shared_ptr<const SigmaEvaluator> evaluator_;
};

/// sigma(x, x') = 1/2 g_ik (x^i - x'^i)(x^k - x'^k) for a constant SPD metric.
WorldFunction make_euclidean(int dim, const Matrix& metric);
inline WorldFunction make_euclidean(int dim) { return make_euclidean(dim, Matrix::Identity(dim, dim)); }

/// Flat 4D space-time with signature (+, -, -, -).
WorldFunction make_minkowski();

/// Minkowski sigma shifted by D wherever sigma_M > sigma0 (sharp step).
WorldFunction make_distorted_minkowski(double distortion, double sigma0);

/// Sphere of the given radius in colatitude/longitude chart (theta, phi).
WorldFunction make_sphere(double radius);

/// Minkowski metric diag(1, -1, -1, -1).
Matrix minkowski_metric();

/// Central great-circle angle between two (theta, phi) chart points.
double central_angle(const Point& p, const Point& q);

}  // namespace tgeom
