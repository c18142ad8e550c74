#include "tgeom/sigma_calculus.hpp"

#include <algorithm>
#include <cmath>

namespace tgeom {

PointPairVector::PointPairVector(Point o, Point h) : origin(std::move(o)), head(std::move(h)) {
  require_dim(origin.dim(), {&head});
}

double scalar_product(const WorldFunction& sigma, const PointPairVector& a, const PointPairVector& b) {
  // Grouped so that symmetry and antisymmetry hold bit-for-bit.
  const double cross = sigma(a.origin, b.head) + sigma(a.head, b.origin);
  const double direct = sigma(a.origin, b.origin) + sigma(a.head, b.head);
  return cross - direct;
}

double squared_norm(const WorldFunction& sigma, const PointPairVector& a) {
  return scalar_product(sigma, a, a);
}

bool is_parallel(const WorldFunction& sigma, const PointPairVector& a, const PointPairVector& b,
                 double tol) {
  const double aa = squared_norm(sigma, a);
  const double bb = squared_norm(sigma, b);
  if (aa < 0.0 || bb < 0.0) throw IndefiniteNorm();
  const double ab = scalar_product(sigma, a, b);
  const double norms = std::sqrt(aa) * std::sqrt(bb);
  const double scale = std::max(std::abs(ab), norms);
  if (scale == 0.0) return true;
  return std::abs(ab - norms) <= tol * scale;
}

double collinearity_defect(const WorldFunction& sigma, const PointPairVector& a,
                           const PointPairVector& b) {
  const double ab = scalar_product(sigma, a, b);
  return ab * ab - squared_norm(sigma, a) * squared_norm(sigma, b);
}

bool is_collinear(const WorldFunction& sigma, const PointPairVector& a, const PointPairVector& b,
                  double tol) {
  const double ab = scalar_product(sigma, a, b);
  const double aabb = squared_norm(sigma, a) * squared_norm(sigma, b);
  const double scale = std::max({std::abs(aabb), ab * ab, 1.0});
  return std::abs(ab * ab - aabb) <= tol * scale;
}

double collinearity_surface_residual(const WorldFunction& sigma, const Point& p0, const Point& p1,
                                     const Point& pk, const Point& r) {
  const PointPairVector e(p0, p1);
  const PointPairVector k(p0, pk);
  const PointPairVector x(p0, r);
  return scalar_product(sigma, e, x) * scalar_product(sigma, k, e) -
         scalar_product(sigma, k, x) * scalar_product(sigma, e, e);
}

Matrix gram_matrix(const WorldFunction& sigma, const Point& p0, std::span<const Point> heads) {
  const auto n = static_cast<Eigen::Index>(heads.size());
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const PointPairVector vi(p0, heads[i]);
    for (Eigen::Index l = 0; l <= i; ++l) {
      const double v = scalar_product(sigma, vi, PointPairVector(p0, heads[l]));
      g(i, l) = v;
      g(l, i) = v;
    }
  }
  return g;
}

double normalized_gram_determinant(const Matrix& gram) {
  if (gram.rows() == 0) return 1.0;
  double bound = 1.0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i) bound *= gram.row(i).norm();
  if (bound == 0.0) return 0.0;
  return std::abs(gram.determinant()) / bound;
}

ProportionalityFit proportional_components_check(const WorldFunction& sigma, const Point& p0,
                                                 std::span<const Point> basis, const Point& r,
                                                 double tol) {
  if (basis.empty()) throw InvalidArgument("degenerate basis: no basis points");
  const Matrix gram = gram_matrix(sigma, p0, basis);
  if (normalized_gram_determinant(gram) <= 1e-12) throw InvalidArgument("degenerate basis");

  const PointPairVector x(p0, r);
  const PointPairVector e(p0, basis[0]);
  const auto n = static_cast<Eigen::Index>(basis.size());
  Vector lhs(n), rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const PointPairVector vi(p0, basis[i]);
    lhs[i] = scalar_product(sigma, vi, x);
    rhs[i] = scalar_product(sigma, vi, e);
  }
  ProportionalityFit fit;
  const double denom = rhs.squaredNorm();
  fit.coefficient = denom > 0.0 ? rhs.dot(lhs) / denom : 0.0;
  const Vector resid = lhs - fit.coefficient * rhs;
  const double scale = std::max(lhs.cwiseAbs().maxCoeff(), (fit.coefficient * rhs).cwiseAbs().maxCoeff());
  if (scale == 0.0) {
    fit.proportional = true;
    return fit;
  }
  fit.max_residual = resid.cwiseAbs().maxCoeff() / scale;
  fit.proportional = fit.max_residual <= tol;
  return fit;
}

}  // namespace tgeom
