#pragma once

#include <functional>
#include <string>

#include "tgeom/point.hpp"

namespace tgeom {

enum class Signature { riemannian_positive, lorentzian };

/// A position-dependent metric tensor g_ik(x) on a chart.
///
/// Built-ins are a constant matrix (flat) and the round sphere in
/// (theta, phi). Chart coordinates may be periodic; `wrap` maps a coordinate
/// difference to its minimal image.
class MetricField {
 public:
  using Evaluator = std::function<Matrix(const Vector&)>;

  /// Constant metric; the signature is inferred from the eigenvalues and must
  /// be all-positive or exactly one positive.
  static MetricField constant(const Matrix& g);
  static MetricField flat(int dim) { return constant(Matrix::Identity(dim, dim)); }
  /// g = diag(R^2, R^2 sin^2 theta), phi periodic with period 2 pi.
  static MetricField sphere(double radius);

  /// Metric at x. Throws InvalidArgument if x has the wrong dimension or the
  /// matrix is not symmetric.
  Matrix at(const Point& x) const;
  Matrix at(const Vector& x) const;

  int dim() const noexcept { return dim_; }
  Signature signature() const noexcept { return signature_; }
  const std::string& name() const noexcept { return name_; }
  double radius() const noexcept { return radius_; }
  const Matrix& constant_value() const noexcept { return constant_; }

  Vector wrap(const Vector& delta) const;

  /// Closed-form Gamma^k_il v^i v^l for the built-ins, written into a sized
  /// `out`; empty for fields that only know g. Throws InvalidArgument where g
  /// is singular.
  using Quadratic = std::function<void(const Vector& x, const Vector& v, Vector& out)>;
  const Quadratic& connection_quadratic() const noexcept { return gamma_vv_; }

 private:
  MetricField(std::string name, int dim, Signature signature, Evaluator g, Vector periods);

  std::string name_;
  int dim_;
  Signature signature_;
  Evaluator g_;
  Vector periods_;
  double radius_ = 0.0;
  Matrix constant_;
  Quadratic gamma_vv_;
};

}  // namespace tgeom
