#pragma once

#include <span>
#include <vector>

#include "tgeom/errors.hpp"
#include "tgeom/world_function.hpp"

namespace tgeom {

/// The ordered point pair P0P1. Origin and head may coincide.
struct PointPairVector {
  Point origin;
  Point head;

  PointPairVector(Point o, Point h);
  PointPairVector reversed() const { return {head, origin}; }
};

inline constexpr double kDefaultRelativeTolerance = 1e-9;

/// Raised by is_parallel when a squared norm is negative.
class IndefiniteNorm : public InvalidArgument {
 public:
  IndefiniteNorm() : InvalidArgument("indefinite-norm vector; use is_collinear") {}
};

/// (P0P1 . Q0Q1) = sigma(P0,Q1) + sigma(P1,Q0) - sigma(P0,Q0) - sigma(P1,Q1).
double scalar_product(const WorldFunction& sigma, const PointPairVector& a, const PointPairVector& b);

/// (a . a), identically 2 sigma(origin, head).
double squared_norm(const WorldFunction& sigma, const PointPairVector& a);

/// Absolute parallelism: (a . b) == |a| |b|. Antiparallel pairs are not
/// parallel. A zero vector is parallel to everything.
/// Throws IndefiniteNorm when either squared norm is negative.
bool is_parallel(const WorldFunction& sigma, const PointPairVector& a, const PointPairVector& b,
                 double tol = kDefaultRelativeTolerance);

/// (a . b)^2 - (a . a)(b . b); zero for collinear vectors in any signature.
double collinearity_defect(const WorldFunction& sigma, const PointPairVector& a,
                           const PointPairVector& b);

/// Determinant form of collinearity: (a.b)^2 == (a.a)(b.b), relative to
/// max(|(a.a)(b.b)|, (a.b)^2, 1).
bool is_collinear(const WorldFunction& sigma, const PointPairVector& a, const PointPairVector& b,
                  double tol = kDefaultRelativeTolerance);

/// 2x2 determinant f(P0, P1, Pk, R) =
///   (P0P1.P0R)(P0Pk.P0P1) - (P0Pk.P0R)(P0P1.P0P1).
double collinearity_surface_residual(const WorldFunction& sigma, const Point& p0, const Point& p1,
                                     const Point& pk, const Point& r);

/// Gram matrix g_il = (P0Pi . P0Pl) of the vectors from p0 to each head.
Matrix gram_matrix(const WorldFunction& sigma, const Point& p0, std::span<const Point> heads);

/// |det G| divided by the product of the Euclidean row norms of G (Hadamard
/// bound), in [0, 1]. Zero rows give 0.
double normalized_gram_determinant(const Matrix& gram);

struct ProportionalityFit {
  bool proportional = false;
  double coefficient = 0.0;   // least-squares a
  double max_residual = 0.0;  // max_i |(P0Pi.P0R) - a (P0Pi.P0P1)|, relative
};

/// Checks the n relations (P0Pi . P0R) = a (P0Pi . P0P1) for one common a,
/// with `basis` = {P1, ..., Pn}. The fit for a is an independent least-squares
/// route, not the determinant residuals. R == P0 fits with a = 0.
/// Throws InvalidArgument("degenerate basis") for a singular Gram matrix.
ProportionalityFit proportional_components_check(const WorldFunction& sigma, const Point& p0,
                                                 std::span<const Point> basis, const Point& r,
                                                 double tol = kDefaultRelativeTolerance);

}  // namespace tgeom
