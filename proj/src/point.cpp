#include "tgeom/point.hpp"

#include <cmath>
#include <string>

#include "tgeom/errors.hpp"

namespace tgeom {

Point::Point(Vector coords) : coords_(std::move(coords)) {
  if (coords_.size() == 0) throw InvalidArgument("point must have at least one coordinate");
  for (Eigen::Index i = 0; i < coords_.size(); ++i) {
    if (!std::isfinite(coords_[i]))
      throw InvalidArgument("point coordinate " + std::to_string(i) + " is not finite");
  }
}

Point::Point(std::initializer_list<double> coords)
    : Point(Eigen::Map<const Vector>(coords.begin(), static_cast<Eigen::Index>(coords.size()))) {}

void require_dim(int dim, std::initializer_list<const Point*> points) {
  for (const Point* p : points) {
    if (p->dim() != dim)
      throw InvalidArgument("dimension mismatch: expected " + std::to_string(dim) + ", got " +
                            std::to_string(p->dim()));
  }
}

}  // namespace tgeom
