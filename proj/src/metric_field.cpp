#include "tgeom/metric_field.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "tgeom/errors.hpp"

namespace tgeom {

MetricField::MetricField(std::string name, int dim, Signature signature, Evaluator g, Vector periods)
    : name_(std::move(name)), dim_(dim), signature_(signature), g_(std::move(g)), periods_(std::move(periods)) {}

MetricField MetricField::constant(const Matrix& g) {
  if (g.rows() == 0 || g.rows() != g.cols()) throw InvalidArgument("metric must be a non-empty square matrix");
  if (!g.allFinite()) throw InvalidArgument("metric has non-finite entries");
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InvalidArgument("metric is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
  int positive = 0, negative = 0;
  for (double l : eig.eigenvalues()) {
    if (l > 0.0) ++positive;
    else if (l < 0.0) ++negative;
    else throw InvalidArgument("metric is singular");
  }
  Signature sig;
  if (negative == 0) sig = Signature::riemannian_positive;
  else if (positive == 1) sig = Signature::lorentzian;
  else throw InvalidArgument("metric signature is neither positive nor Lorentzian");
  const auto n = static_cast<int>(g.rows());
  MetricField field("constant", n, sig, [g](const Vector&) { return g; }, Vector::Zero(n));
  field.constant_ = g;
  field.gamma_vv_ = [](const Vector&, const Vector&, Vector& out) { out.setZero(); };
  return field;
}

MetricField MetricField::sphere(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("sphere radius must be positive");
  const double r2 = radius * radius;
  Vector periods(2);
  periods << 0.0, 2.0 * std::numbers::pi;
  MetricField field(
      "sphere", 2, Signature::riemannian_positive,
      [r2](const Vector& x) {
        const double s = std::sin(x[0]);
        Matrix g = Matrix::Zero(2, 2);
        g(0, 0) = r2;
        g(1, 1) = r2 * s * s;
        return g;
      },
      periods);
  field.radius_ = radius;
  field.gamma_vv_ = [](const Vector& x, const Vector& v, Vector& out) {
    const double s = std::sin(x[0]), c = std::cos(x[0]);
    if (!(s * s * 1e15 >= 1.0)) {
      std::ostringstream msg;
      msg << "metric is singular (condition number " << 1.0 / (s * s) << ")";
      throw InvalidArgument(msg.str());
    }
    out[0] = -s * c * v[1] * v[1];
    out[1] = 2.0 * (c / s) * v[0] * v[1];
  };
  return field;
}

Matrix MetricField::at(const Vector& x) const {
  if (x.size() != dim_) throw InvalidArgument("metric evaluated at a point of wrong dimension");
  Matrix g = g_(x);
  if (g.rows() != dim_ || g.cols() != dim_) throw InvalidArgument("metric evaluator returned wrong shape");
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InvalidArgument("metric is not symmetric");
  return g;
}

Matrix MetricField::at(const Point& x) const { return at(x.coords()); }

Vector MetricField::wrap(const Vector& delta) const {
  Vector out = delta;
  for (int i = 0; i < dim_; ++i) {
    const double p = periods_[i];
    if (p > 0.0) out[i] = delta[i] - p * std::round(delta[i] / p);
  }
  return out;
}

}  // namespace tgeom
