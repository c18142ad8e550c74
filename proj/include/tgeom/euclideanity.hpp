#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tgeom/world_function.hpp"

namespace tgeom {

/// Origin P0 and heads P1..Pn with the Gram matrix g_il = (P0Pi . P0Pl).
class BasisFrame {
 public:
  /// Builds the frame. A singular Gram matrix is allowed here; operations that
  /// need the inverse reject it.
  static BasisFrame build(const WorldFunction& sigma, Point p0, std::vector<Point> heads);

  const Point& origin() const noexcept { return p0_; }
  const std::vector<Point>& heads() const noexcept { return heads_; }
  int size() const noexcept { return static_cast<int>(heads_.size()); }
  const Matrix& gram() const noexcept { return gram_; }
  bool regular() const noexcept { return inverse_.has_value(); }
  /// Throws InvalidArgument("degenerate basis") when the frame is singular.
  const Matrix& gram_inverse() const;

 private:
  BasisFrame(Point p0, std::vector<Point> heads, Matrix gram);

  Point p0_;
  std::vector<Point> heads_;
  Matrix gram_;
  std::optional<Matrix> inverse_;
};

enum class Condition { I, II, III, IV };
std::string_view to_string(Condition c);

struct ConditionWitness {
  std::vector<Point> points;
  std::vector<double> residuals;
  std::vector<double> eigenvalues;
  std::string note;
};

struct ConditionReport {
  Condition condition;
  bool passed = false;
  ConditionWitness witness;
};

/// F_n = det ||(P0Pi . P0Pk)||.
double gram_determinant(const WorldFunction& sigma, const Point& p0, std::span<const Point> heads);

struct ConditionIOptions {
  int trials = 200;
  double tol = 1e-8;
  std::uint64_t seed = 1;
};

/// Dimension condition: some sampled (n+1)-subset has F_n != 0 and every
/// sampled (n+2)-subset has F_{n+1} == 0, both relative to the Hadamard bound
/// of the Gram matrix. A pass means no counterexample was found.
ConditionReport check_condition_I(const WorldFunction& sigma, int n, std::span<const Point> cloud,
                                  const ConditionIOptions& options = {});

/// Best-conditioned (n+1)-subset found among `trials` random draws.
BasisFrame select_frame(const WorldFunction& sigma, int n, std::span<const Point> cloud,
                        const ConditionIOptions& options = {});

/// Covariant sigma-coordinates x_i(P) = (P0Pi . P0P).
Vector sigma_coordinates(const WorldFunction& sigma, const BasisFrame& frame, const Point& p);

/// Reconstruction sigma(P,Q) == 1/2 g^ik dx_i dx_k on every supplied pair,
/// error relative to max(|sigma|, 1).
ConditionReport check_condition_II(const WorldFunction& sigma, const BasisFrame& frame,
                                   std::span<const std::pair<Point, Point>> pairs, double tol = 1e-9);

/// All Gram eigenvalues strictly positive.
ConditionReport check_condition_III(const BasisFrame& frame);

struct SearchRegion {
  Vector lo;
  Vector hi;
  bool contains(const Vector& x, double slack = 0.0) const;
};

struct ConditionIVOptions {
  int starts = 24;
  int max_iterations = 60;
  double tol = 1e-10;
  double cluster_radius = 1e-6;
};

/// Solves (P0Pi . P0P) = y_i for P by multi-start Newton inside the region;
/// passes iff each target has exactly one solution cluster there.
ConditionReport check_condition_IV(const WorldFunction& sigma, const BasisFrame& frame,
                                   std::span<const Vector> targets, const SearchRegion& region,
                                   const ConditionIVOptions& options = {});

/// Solution clusters of (P0Pi . P0P) = y inside the region.
std::vector<Point> solve_sigma_coordinates(const WorldFunction& sigma, const BasisFrame& frame, const Vector& y,
                                           const SearchRegion& region, const ConditionIVOptions& options = {});

}  // namespace tgeom
