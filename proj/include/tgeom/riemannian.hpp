#pragma once

#include <span>
#include <vector>

#include "tgeom/metric_field.hpp"
#include "tgeom/world_function.hpp"

namespace tgeom {

/// Christoffel symbols of the second kind, Gamma^k_il, stored as one dim x dim
/// matrix per upper index k. Symmetric in (i, l) exactly.
class ChristoffelSymbols {
 public:
  explicit ChristoffelSymbols(int dim) : upper_(static_cast<std::size_t>(dim), Matrix::Zero(dim, dim)) {}

  double operator()(int k, int i, int l) const { return upper_[static_cast<std::size_t>(k)](i, l); }
  double& operator()(int k, int i, int l) { return upper_[static_cast<std::size_t>(k)](i, l); }
  const Matrix& upper(int k) const { return upper_[static_cast<std::size_t>(k)]; }
  int dim() const noexcept { return static_cast<int>(upper_.size()); }

  /// Gamma^k_il a^i b^l for each k.
  Vector contract(const Vector& a, const Vector& b) const;
  /// Gamma^k_il u_k b^l for each i.
  Vector transport_rate(const Vector& u, const Vector& b) const;

 private:
  std::vector<Matrix> upper_;
};

/// Gamma^k_il = 1/2 g^kj (g_ij,l + g_lj,i - g_il,j), metric partials by central
/// differences. Throws InvalidArgument when g(x) is singular (reports the
/// condition number).
ChristoffelSymbols christoffel(const MetricField& metric, const Point& x);

struct GeodesicNode {
  double tau;
  Vector x;
  Vector velocity;
};

struct GeodesicSolution {
  std::vector<GeodesicNode> path;
  double length = 0.0;
  /// +1 for positive g(v, v) along the path, -1 for negative, 0 for null.
  int interval_sign = 1;
  bool converged = false;
  double residual = 0.0;
  int iterations = 0;
  std::string message;
};

/// Fixed-step RK4 integration of the geodesic equation from (x0, v0) over
/// [0, tau_max]. A metric singularity stops integration and returns the
/// partial path with converged = false.
GeodesicSolution geodesic_integrate(const MetricField& metric, const Point& x0, const Vector& v0,
                                    double tau_max, int steps);

struct BvpOptions {
  int steps = 256;
  int max_iterations = 60;
  /// Chart distance at which the terminal point counts as matched.
  double tolerance = 1e-8;
};

/// Shooting for the geodesic segment from x to xprime over tau in [0, 1],
/// damped Newton on the initial velocity starting from the chart secant.
/// When that fails, or (positive metrics) lands on a segment longer than the
/// secant itself, the target is approached by continuation along the secant.
GeodesicSolution geodesic_bvp(const MetricField& metric, const Point& x, const Point& xprime,
                              const BvpOptions& options = {});

/// sigma_R(x, x') = 1/2 (length of the geodesic segment)^2, signed by the
/// interval character for Lorentzian metrics. Results are memoized on a
/// 1e-12 coordinate grid. Evaluation throws EvaluationError if the boundary
/// value problem fails.
WorldFunction world_function_from_metric(const MetricField& metric, const BvpOptions& options = {});

/// sigma_i = d sigma(x, x') / d x^i by a five-point central stencil. The
/// Riemannian vector from x to x' has components -sigma_i.
Vector sigma_gradient(const WorldFunction& sigma, const Point& x, const Point& xprime);

/// g^ik(x) sigma_i(x, x') sigma_k(x, x'').
double riemannian_scalar_product(const MetricField& metric, const WorldFunction& sigma, const Point& x,
                                 const Point& xprime, const Point& xsecond);

struct TransportResult {
  Vector components;
  std::vector<Point> path_used;
  /// max |N(s) - N(0)| / |N(0)| with N = g^ik u_i u_k along the path.
  double norm_drift = 0.0;
};

/// Parallel transport of covariant components along a chart polyline,
/// du_i = Gamma^k_il u_k dx^l, RK4 with `steps_per_segment` substeps.
TransportResult parallel_transport(const MetricField& metric, const Vector& u0, std::span<const Point> path,
                                   int steps_per_segment);

/// Polyline along the shorter great circle from a to b in (theta, phi) chart
/// coordinates, `segments` + 1 vertices, phi unwrapped continuously from a.
/// Throws InvalidArgument for antipodal endpoints.
std::vector<Point> great_circle_polyline(const Point& a, const Point& b, int segments);

/// g^ik u_i u_k at x.
double covector_norm2(const MetricField& metric, const Point& x, const Vector& u);

/// Angle in [0, pi] between two covectors at x under g^ik (positive metrics).
double covector_angle(const MetricField& metric, const Point& x, const Vector& u, const Vector& v);

}  // namespace tgeom
