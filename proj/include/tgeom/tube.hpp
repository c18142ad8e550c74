#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tgeom/euclideanity.hpp"
#include "tgeom/world_function.hpp"

namespace tgeom {

enum class TubeKind { through_origin, remote, surface_intersection_line };
std::string_view to_string(TubeKind kind);
TubeKind parse_tube_kind(std::string_view name);

/// A collinearity object defined by sigma alone.
///
///  - through_origin: R with (P0P1.P0R)^2 = (P0P1.P0P1)(P0R.P0R)
///  - remote:         the same with the running vector Q0R
///  - surface_intersection_line: every f(P0, P1, Pk, R) = 0, k over aux points
///
/// Residual sign convention F = (e.x)^2 - (e.e)(x.x).
class TubeSpec {
 public:
  static TubeSpec through_origin(WorldFunction sigma, Point p0, Point p1);
  static TubeSpec remote(WorldFunction sigma, Point p0, Point p1, Point q0);
  /// Requires dim - 1 aux points forming a nonsingular frame with P1 at P0.
  static TubeSpec surface_intersection_line(WorldFunction sigma, Point p0, Point p1, std::vector<Point> aux);

  TubeKind kind() const noexcept { return kind_; }
  const WorldFunction& sigma() const noexcept { return sigma_; }
  const Point& p0() const noexcept { return p0_; }
  const Point& p1() const noexcept { return p1_; }
  const std::optional<Point>& q0() const noexcept { return q0_; }
  const std::vector<Point>& aux() const noexcept { return aux_; }
  int dim() const noexcept { return sigma_.dim(); }
  /// Origin of the running vector: q0 for remote tubes, p0 otherwise.
  const Point& anchor() const noexcept { return q0_ ? *q0_ : p0_; }

  /// One residual for tubes, one per aux point for the intersection line.
  Vector residuals(const Vector& r) const;
  /// The residual of largest magnitude (signed).
  double residual(const Vector& r) const;
  /// Magnitude normalizer (length^4) for residuals at r.
  double scale(const Vector& r) const;

 private:
  TubeSpec(TubeKind kind, WorldFunction sigma, Point p0, Point p1);

  TubeKind kind_;
  WorldFunction sigma_;
  Point p0_;
  Point p1_;
  std::optional<Point> q0_;
  std::vector<Point> aux_;
  double ee_ = 0.0;
  std::vector<double> aux_dot_e_;
  double aux_norm_max_ = 0.0;
};

/// Scalar residual of the spec at r; zero exactly on the object.
double tube_residual(const TubeSpec& spec, const Point& r);

enum class DimensionMethod { gradient_rank, hessian_nullity, local_pca };
std::string_view to_string(DimensionMethod m);

enum class SampleClass { regular, critical };
std::string_view to_string(SampleClass c);

struct DimensionEstimate {
  int dimension = 0;
  DimensionMethod method = DimensionMethod::gradient_rank;
  double gradient_norm = 0.0;  // relative to the gradient scale
  std::vector<double> hessian_eigenvalues;
  /// Band width ratio w(eps) / w(eps / 100): ~100 for a regular zero set,
  /// ~10 for a quadratic (degenerate) one. NaN when not measured.
  double band_ratio = 0.0;
  bool band_consistent = true;
  std::vector<double> pca_spectrum;
};

struct ClassifyOptions {
  /// Relative gradient norm below which a point counts as critical.
  double critical_tol = 1e-6;
  /// Relative Hessian eigenvalue below which it counts as zero.
  double hessian_zero_tol = 1e-5;
  /// Minimum singular value gap accepted by local PCA.
  double pca_gap = 10.0;
};

/// Local dimension of the zero set at an on-tube point: gradient rank for
/// regular points, Hessian nullity for semi-definite critical points, local
/// PCA on tangent spaces near a cone vertex. Throws DimensionUnresolved when
/// local PCA shows no gap.
DimensionEstimate classify_dimension(const TubeSpec& spec, const Point& on_tube_point,
                                     const ClassifyOptions& options = {});

struct TubeSample {
  Point point;
  double residual;       // relative |F| / scale
  double gradient_norm;  // relative
  SampleClass cls;
};

struct TubeSampleSet {
  std::vector<TubeSample> samples;
  int local_dimension = 0;
  DimensionMethod method = DimensionMethod::gradient_rank;
  std::size_t seeds = 0;
  std::size_t regular_count = 0;
  std::size_t critical_count = 0;
  std::size_t band_inconsistent = 0;
  std::size_t unresolved = 0;
  double membership_tol = 0.0;
  std::string diagnostic;
};

struct SampleOptions {
  std::size_t budget = 1000;
  /// Relative membership tolerance on |F| / scale.
  double tol = 1e-12;
  int max_iterations = 80;
  bool classify = true;
  ClassifyOptions classify_options;
};

/// Quasi-random seeds over the region refined onto the zero set by
/// minimum-norm Newton steps, with a Hessian step on degenerate minima.
TubeSampleSet sample_tube(const TubeSpec& spec, const SearchRegion& region, const SampleOptions& options = {});

/// Refines x onto the zero set. Returns nullopt when membership is not reached.
std::optional<Vector> project_onto_tube(const TubeSpec& spec, const Vector& x, double tol = 1e-12,
                                        int max_iterations = 80);

struct ThicknessOptions {
  int directions = 96;
  int radial_steps = 400;
  /// Transverse search radius; 0 means the chart length of P0P1.
  double max_radius = 0.0;
  double tol = 1e-9;
};

/// Largest transverse chart distance from the axis P0P1 to a zero of the
/// residual, within the hyperplane through `station` orthogonal to the axis.
double tube_cross_section_thickness(const TubeSpec& spec, const Point& station, const ThicknessOptions& options = {});

struct DefinitionComparison {
  TubeSampleSet tube;  // two-point tube
  TubeSampleSet line;  // surface-intersection line
  double tube_to_line = 0.0;
  double line_to_tube = 0.0;
  bool same = false;
  double tolerance = 0.0;
};

/// Samples both collinearity objects with matched seeds and compares them by
/// directed distances (each sample projected onto the other object). An empty
/// sample set yields infinite distances and same == false.
DefinitionComparison compare_definitions(const WorldFunction& sigma, const Point& p0, const Point& p1,
                                         std::span<const Point> aux, const SearchRegion& region,
                                         std::size_t budget, double tol = 1e-6);

/// Parameters of the spacelike Minkowski family x = p0 + (a, tau, a cos psi, a sin psi).
struct SpacelikeFamilyFit {
  double a = 0.0;
  double tau = 0.0;
  double psi = 0.0;
  double residual = 0.0;  // chart distance between the point and the fitted model
};
Point spacelike_family_point(const Point& p0, double a, double tau, double psi);
SpacelikeFamilyFit fit_spacelike_family(const Point& p0, const Point& x);

}  // namespace tgeom
