#pragma once

#include <initializer_list>

#include <Eigen/Dense>

namespace tgeom {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point of the geometry, given by its chart coordinates.
///
/// Coordinates are always finite; construction rejects NaN and infinity.
class Point {
 public:
  explicit Point(Vector coords);
  Point(std::initializer_list<double> coords);

  const Vector& coords() const noexcept { return coords_; }
  int dim() const noexcept { return static_cast<int>(coords_.size()); }
  double operator[](int i) const { return coords_[i]; }

  friend bool operator==(const Point& a, const Point& b) {
    return a.coords_.size() == b.coords_.size() && a.coords_ == b.coords_;
  }

 private:
  Vector coords_;
};

/// Throws InvalidArgument unless every point has dimension `dim`.
void require_dim(int dim, std::initializer_list<const Point*> points);

}  // namespace tgeom
