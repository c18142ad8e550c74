#include "tgeom/tube.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "tgeom/errors.hpp"
#include "tgeom/numeric.hpp"
#include "tgeom/sigma_calculus.hpp"

namespace tgeom {

std::string_view to_string(TubeKind kind) {
  switch (kind) {
    case TubeKind::through_origin: return "tube-through-origin";
    case TubeKind::remote: return "remote-tube";
    case TubeKind::surface_intersection_line: return "surface-intersection-line";
  }
  return "?";
}

TubeKind parse_tube_kind(std::string_view name) {
  for (auto k : {TubeKind::through_origin, TubeKind::remote, TubeKind::surface_intersection_line}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown tube kind '" + std::string(name) + "'");
}

std::string_view to_string(DimensionMethod m) {
  switch (m) {
    case DimensionMethod::gradient_rank: return "gradient-rank";
    case DimensionMethod::hessian_nullity: return "hessian-nullity";
    case DimensionMethod::local_pca: return "local-pca";
  }
  return "?";
}

std::string_view to_string(SampleClass c) { return c == SampleClass::regular ? "regular" : "critical"; }

// ---------------------------------------------------------------------------
// TubeSpec

TubeSpec::TubeSpec(TubeKind kind, WorldFunction sigma, Point p0, Point p1)
    : kind_(kind), sigma_(std::move(sigma)), p0_(std::move(p0)), p1_(std::move(p1)) {
  require_dim(sigma_.dim(), {&p0_, &p1_});
  ee_ = squared_norm(sigma_, PointPairVector(p0_, p1_));
}

TubeSpec TubeSpec::through_origin(WorldFunction sigma, Point p0, Point p1) {
  return TubeSpec(TubeKind::through_origin, std::move(sigma), std::move(p0), std::move(p1));
}

TubeSpec TubeSpec::remote(WorldFunction sigma, Point p0, Point p1, Point q0) {
  TubeSpec spec(TubeKind::remote, std::move(sigma), std::move(p0), std::move(p1));
  require_dim(spec.dim(), {&q0});
  spec.q0_ = std::move(q0);
  return spec;
}

TubeSpec TubeSpec::surface_intersection_line(WorldFunction sigma, Point p0, Point p1, std::vector<Point> aux) {
  TubeSpec spec(TubeKind::surface_intersection_line, std::move(sigma), std::move(p0), std::move(p1));
  if (static_cast<int>(aux.size()) != spec.dim() - 1)
    throw InvalidArgument("surface-intersection-line needs dim - 1 aux points");
  std::vector<Point> heads{spec.p1_};
  heads.insert(heads.end(), aux.begin(), aux.end());
  if (!BasisFrame::build(spec.sigma_, spec.p0_, heads).regular())
    throw InvalidArgument("surface-intersection-line aux points form a degenerate basis");
  const PointPairVector e(spec.p0_, spec.p1_);
  for (const Point& k : aux) {
    const PointPairVector kv(spec.p0_, k);
    spec.aux_dot_e_.push_back(scalar_product(spec.sigma_, kv, e));
    spec.aux_norm_max_ = std::max(spec.aux_norm_max_, std::abs(squared_norm(spec.sigma_, kv)));
  }
  spec.aux_ = std::move(aux);
  return spec;
}

Vector TubeSpec::residuals(const Vector& r) const {
  const Point rp(r);
  const PointPairVector e(p0_, p1_);
  if (kind_ != TubeKind::surface_intersection_line) {
    const PointPairVector x(anchor(), rp);
    const double ex = scalar_product(sigma_, e, x);
    Vector out(1);
    out[0] = ex * ex - ee_ * squared_norm(sigma_, x);
    return out;
  }
  const PointPairVector x(p0_, rp);
  const double ex = scalar_product(sigma_, e, x);
  Vector out(static_cast<Eigen::Index>(aux_.size()));
  for (std::size_t k = 0; k < aux_.size(); ++k) {
    const double kx = scalar_product(sigma_, PointPairVector(p0_, aux_[k]), x);
    out[static_cast<Eigen::Index>(k)] = ex * aux_dot_e_[k] - kx * ee_;
  }
  return out;
}

double TubeSpec::residual(const Vector& r) const {
  const Vector f = residuals(r);
  Eigen::Index at = 0;
  f.cwiseAbs().maxCoeff(&at);
  return f[at];
}

double TubeSpec::scale(const Vector& r) const {
  const PointPairVector x(anchor(), Point(r));
  const double xx = std::abs(squared_norm(sigma_, x));
  const double l2 = std::max({std::abs(ee_), xx, aux_norm_max_});
  return std::max(l2 * l2, std::numeric_limits<double>::min());
}

double tube_residual(const TubeSpec& spec, const Point& r) {
  require_dim(spec.dim(), {&r});
  return spec.residual(r.coords());
}

// ---------------------------------------------------------------------------
// Zero-set projection

namespace {

Matrix residual_jacobian(const TubeSpec& spec, const Vector& x) {
  const Eigen::Index n = x.size();
  Matrix jac;
  Vector y = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = numeric::first_derivative_step(x[j]);
    y[j] = x[j] + h;
    const Vector fp = spec.residuals(y);
    y[j] = x[j] - h;
    const Vector fm = spec.residuals(y);
    y[j] = x[j];
    if (j == 0) jac.resize(fp.size(), n);
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double residual_or_inf(const TubeSpec& spec, const Vector& x) {
  const Vector f = spec.residuals(x);
  const double m = max_abs(f);
  return std::isfinite(m) ? m : std::numeric_limits<double>::infinity();
}

}  // namespace

std::optional<Vector> project_onto_tube(const TubeSpec& spec, const Vector& start, double tol, int max_iterations) {
  Vector x = start;
  double fn = residual_or_inf(spec, x);
  int slow = 0;
  for (int it = 0; it < max_iterations; ++it) {
    if (fn <= 1e-15 * spec.scale(x)) break;
    const Vector f = spec.residuals(x);
    const Matrix jac = residual_jacobian(spec, x);
    const Vector newton = numeric::pinv_solve(jac, f, 1e-10);
    Vector cand = x - newton;
    double fc = residual_or_inf(spec, cand);
    // Newton on a quadratic minimum of |F| shrinks F by ~1/4 per step.
    slow = (fc > 0.15 * fn && fc < 0.4 * fn) ? slow + 1 : 0;
    if (f.size() == 1 && slow >= 1) {
      // Near an extremum of F, jump to its critical manifold instead. Saddle
      // cones are left to Newton so samples do not collapse onto the vertex.
      const auto field = [&](const Vector& y) { return spec.residuals(y)[0]; };
      const Matrix hess = numeric::hessian(field, x);
      const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(hess, Eigen::EigenvaluesOnly).eigenvalues();
      const double big = ev.cwiseAbs().maxCoeff();
      if (ev.minCoeff() * ev.maxCoeff() >= -1e-12 * big * big) {
        const Vector jump = x - numeric::pinv_solve(hess, jac.row(0).transpose(), 1e-6);
        const double fj = residual_or_inf(spec, jump);
        if (fj < fc) {
          cand = jump;
          fc = fj;
        }
      }
    }
    for (double lambda = 0.5; !(fc < fn) && lambda > 1e-12; lambda *= 0.5) {
      cand = x - lambda * newton;
      fc = residual_or_inf(spec, cand);
    }
    if (!(fc < fn)) break;
    x = cand;
    fn = fc;
  }
  if (fn <= tol * spec.scale(x)) return x;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Dimension classification

namespace {

double band_width(const TubeSpec& spec, const Vector& x, const Vector& dir, double level) {
  auto over = [&](double s) { return std::abs(spec.residual(x + s * dir)) >= level; };
  double hi = 1e-14 * std::max(1.0, x.norm());
  int guard = 0;
  while (!over(hi) && guard++ < 200) hi *= 2.0;
  if (guard > 200) return std::numeric_limits<double>::quiet_NaN();
  double lo = 0.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (over(mid) ? hi : lo) = mid;
  }
  return hi;
}

double band_ratio(const TubeSpec& spec, const Vector& x, const Vector& dir) {
  const double s = spec.scale(x);
  const double wide = band_width(spec, x, dir, 1e-8 * s);
  const double narrow = band_width(spec, x, dir, 1e-10 * s);
  return wide / narrow;
}

int pca_dimension(const std::vector<Vector>& pts, double gap, std::vector<double>& spectrum) {
  const Eigen::Index n = pts.front().size();
  Matrix m(static_cast<Eigen::Index>(pts.size()), n);
  Vector mean = Vector::Zero(n);
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = (pts[i] - mean).transpose();
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  spectrum.assign(sv.data(), sv.data() + sv.size());
  int best = -1;
  double best_gap = 0.0;
  for (Eigen::Index k = 1; k < sv.size(); ++k) {
    const double g = sv[k] > 0.0 ? sv[k - 1] / sv[k] : std::numeric_limits<double>::infinity();
    if (sv[k - 1] > 0.0 && g > best_gap) {
      best_gap = g;
      best = static_cast<int>(k);
    }
  }
  return best_gap >= gap ? best : -1;
}

std::vector<Vector> projected_neighbourhood(const TubeSpec& spec, const Vector& centre, double radius, std::size_t count,
                                            double keep_radius) {
  const Vector half = Vector::Constant(centre.size(), radius);
  std::vector<Vector> out;
  for (const Vector& seed : numeric::sobol_box(centre - half, centre + half, count)) {
    if (auto p = project_onto_tube(spec, seed, 1e-10, 40); p && (*p - centre).norm() <= keep_radius) out.push_back(*p);
  }
  return out;
}

/// Dimension from tangent-space PCA at zero-set points in a small ball around x.
int local_pca(const TubeSpec& spec, const Vector& x, const ClassifyOptions& options, std::vector<double>& spectrum) {
  const double length = std::max(1.0, std::pow(spec.scale(x), 0.25));
  const double radius = 1e-2 * length;
  const auto ring = projected_neighbourhood(spec, x, radius, 24, 3.0 * radius);
  std::map<int, int> votes;
  std::vector<double> last;
  for (const Vector& y : ring) {
    const double d = (y - x).norm();
    if (d < 1e-3 * radius) continue;
    const double r = 1e-3 * d;
    const auto nb = projected_neighbourhood(spec, y, r, 32, 3.0 * r);
    if (nb.size() < static_cast<std::size_t>(x.size()) + 1) continue;
    std::vector<double> spec_values;
    const int dim = pca_dimension(nb, options.pca_gap, spec_values);
    last = spec_values;
    if (dim > 0) {
      ++votes[dim];
      if (spectrum.empty()) spectrum = spec_values;
    }
  }
  if (votes.empty()) {
    throw DimensionUnresolved("dimension unresolved: no singular value gap in local PCA", last);
  }
  return std::max_element(votes.begin(), votes.end(), [](auto& a, auto& b) { return a.second < b.second; })->first;
}

}  // namespace

DimensionEstimate classify_dimension(const TubeSpec& spec, const Point& on_tube_point, const ClassifyOptions& options) {
  require_dim(spec.dim(), {&on_tube_point});
  const Vector& x = on_tube_point.coords();
  const double scale = spec.scale(x);
  const double length = std::pow(scale, 0.25);
  const double grad_scale = scale / length;
  const int n = spec.dim();

  if (std::abs(spec.residual(x)) > 1e-8 * scale)
    throw InvalidArgument("classify_dimension: point is not on the tube");

  DimensionEstimate est;
  const Matrix jac = residual_jacobian(spec, x);
  if (jac.rows() > 1) {
    Eigen::JacobiSVD<Matrix> svd(jac);
    const Vector& sv = svd.singularValues();
    est.gradient_norm = sv[sv.size() - 1] / grad_scale;
    if (est.gradient_norm > options.critical_tol) {
      est.dimension = n - static_cast<int>(jac.rows());
      est.method = DimensionMethod::gradient_rank;
      return est;
    }
    est.dimension = local_pca(spec, x, options, est.pca_spectrum);
    est.method = DimensionMethod::local_pca;
    return est;
  }

  const Vector grad = jac.row(0).transpose();
  est.gradient_norm = grad.norm() / grad_scale;
  if (est.gradient_norm > options.critical_tol) {
    est.dimension = n - 1;
    est.method = DimensionMethod::gradient_rank;
    est.band_ratio = band_ratio(spec, x, grad.normalized());
    est.band_consistent = est.band_ratio >= 30.0 && est.band_ratio <= 300.0;
    return est;
  }

  const auto field = [&](const Vector& y) { return spec.residuals(y)[0]; };
  Eigen::SelfAdjointEigenSolver<Matrix> eig(numeric::hessian(field, x));
  const Vector& ev = eig.eigenvalues();
  est.hessian_eigenvalues.assign(ev.data(), ev.data() + ev.size());
  const double largest = ev.cwiseAbs().maxCoeff();
  int positive = 0, negative = 0;
  Eigen::Index steepest = 0;
  ev.cwiseAbs().maxCoeff(&steepest);
  for (double l : ev) {
    if (std::abs(l) <= options.hessian_zero_tol * largest) continue;
    (l > 0.0 ? positive : negative)++;
  }
  if (largest > 0.0 && (positive == 0 || negative == 0)) {
    est.dimension = n - positive - negative;
    est.method = DimensionMethod::hessian_nullity;
    est.band_ratio = band_ratio(spec, x, eig.eigenvectors().col(steepest));
    est.band_consistent = est.band_ratio >= 3.0 && est.band_ratio <= 30.0;
    return est;
  }
  est.dimension = local_pca(spec, x, options, est.pca_spectrum);
  est.method = DimensionMethod::local_pca;
  return est;
}

// ---------------------------------------------------------------------------
// Sampling

TubeSampleSet sample_tube(const TubeSpec& spec, const SearchRegion& region, const SampleOptions& options) {
  const int n = spec.dim();
  if (region.lo.size() != n || region.hi.size() != n) throw InvalidArgument("sample region dimension mismatch");
  for (int i = 0; i < n; ++i)
    if (!(region.lo[i] < region.hi[i])) throw InvalidArgument("sample region needs min < max on every axis");
  if (options.budget < 1) throw InvalidArgument("sample budget must be >= 1");
  if (!(options.tol > 0.0)) throw InvalidArgument("membership tolerance must be positive");
  if (!region.contains(spec.anchor().coords())) throw InvalidArgument("sample region must contain the tube origin");

  const auto seeds = numeric::sobol_box(region.lo, region.hi, options.budget);
  struct Slot {
    std::optional<TubeSample> sample;
    std::optional<DimensionEstimate> estimate;
    bool unresolved = false;
  };
  std::vector<Slot> slots(seeds.size());
  numeric::parallel_for(seeds.size(), [&](std::size_t i) {
    auto p = project_onto_tube(spec, seeds[i], options.tol, options.max_iterations);
    if (!p || !region.contains(*p, 1e-12)) return;
    const double scale = spec.scale(*p);
    const Matrix jac = residual_jacobian(spec, *p);
    const double grad_scale = scale / std::pow(scale, 0.25);
    const double gnorm = jac.rows() > 1 ? Eigen::JacobiSVD<Matrix>(jac).singularValues().minCoeff() / grad_scale
                                        : jac.norm() / grad_scale;
    const SampleClass cls =
        gnorm > options.classify_options.critical_tol ? SampleClass::regular : SampleClass::critical;
    slots[i].sample = TubeSample{Point(*p), std::abs(spec.residual(*p)) / scale, gnorm, cls};
    if (options.classify) {
      try {
        slots[i].estimate = classify_dimension(spec, Point(*p), options.classify_options);
      } catch (const DimensionUnresolved&) {
        slots[i].unresolved = true;
      }
    }
  });

  TubeSampleSet out;
  out.seeds = seeds.size();
  out.membership_tol = options.tol;
  std::map<std::pair<int, int>, std::size_t> votes;
  for (auto& slot : slots) {
    if (!slot.sample) continue;
    (slot.sample->cls == SampleClass::regular ? out.regular_count : out.critical_count)++;
    out.samples.push_back(std::move(*slot.sample));
    if (slot.unresolved) ++out.unresolved;
    if (slot.estimate) {
      ++votes[{slot.estimate->dimension, static_cast<int>(slot.estimate->method)}];
      if (!slot.estimate->band_consistent) ++out.band_inconsistent;
    }
  }
  if (out.samples.empty()) {
    out.diagnostic = "no membership points found; the object may not intersect the region";
    return out;
  }
  if (!votes.empty()) {
    const auto best = std::max_element(votes.begin(), votes.end(),
                                       [](const auto& a, const auto& b) { return a.second < b.second; });
    out.local_dimension = best->first.first;
    out.method = static_cast<DimensionMethod>(best->first.second);
  }
  std::ostringstream msg;
  msg << out.samples.size() << " samples from " << out.seeds << " seeds";
  out.diagnostic = msg.str();
  return out;
}

// ---------------------------------------------------------------------------
// Cross-section thickness

double tube_cross_section_thickness(const TubeSpec& spec, const Point& station, const ThicknessOptions& options) {
  require_dim(spec.dim(), {&station});
  const int n = spec.dim();
  const Vector axis_vec = spec.p1().coords() - spec.p0().coords();
  const double axis_len = axis_vec.norm();
  if (axis_len == 0.0) throw InvalidArgument("thickness needs distinct p0 and p1");
  const Vector axis = axis_vec / axis_len;
  const Vector rel = station.coords() - spec.p0().coords();
  const Vector off_axis = rel - rel.dot(axis) * axis;
  if (off_axis.norm() > 1e-9 * std::max(1.0, rel.norm())) throw InvalidArgument("station is not on the axis");

  const Matrix axis_col = axis;
  Eigen::HouseholderQR<Matrix> qr(axis_col);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix transverse = q.rightCols(n - 1);

  std::vector<Vector> directions;
  for (int i = 0; i < n - 1; ++i) {
    directions.push_back(transverse.col(i));
    directions.push_back(-transverse.col(i));
  }
  numeric::SobolSequence seq(n - 1);
  seq.next();
  while (static_cast<int>(directions.size()) < options.directions) {
    const Vector u = 2.0 * seq.next() - Vector::Ones(n - 1);
    if (u.norm() < 0.1) continue;
    directions.push_back(transverse * u.normalized());
  }

  const double max_radius = options.max_radius > 0.0 ? options.max_radius : axis_len;
  const Vector& c = station.coords();
  auto member = [&](const Vector& y, double f) { return std::abs(f) <= options.tol * spec.scale(y); };

  std::vector<double> per_direction(directions.size(), 0.0);
  numeric::parallel_for(directions.size(), [&](std::size_t d) {
    const Vector& u = directions[d];
    double best = 0.0;
    double prev_s = 0.0;
    double prev_f = spec.residual(c);
    if (member(c, prev_f)) best = 0.0;
    for (int j = 1; j <= options.radial_steps; ++j) {
      const double s = max_radius * j / options.radial_steps;
      const double f = spec.residual(c + s * u);
      if (member(c + s * u, f)) best = std::max(best, s);
      if ((prev_f < 0.0) != (f < 0.0)) {
        double lo = prev_s, hi = s, flo = prev_f;
        for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          const double fm = spec.residual(c + mid * u);
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        const double root = std::abs(spec.residual(c + lo * u)) <= std::abs(spec.residual(c + hi * u)) ? lo : hi;
        if (member(c + root * u, spec.residual(c + root * u))) best = std::max(best, root);
      }
      prev_s = s;
      prev_f = f;
    }
    per_direction[d] = best;
  });
  return *std::max_element(per_direction.begin(), per_direction.end());
}

// ---------------------------------------------------------------------------
// Definition comparison

namespace {

double directed_distance(const TubeSampleSet& from, const TubeSpec& onto, const TubeSampleSet& onto_samples,
                          const SearchRegion& region) {
  std::vector<double> dist(from.samples.size(), 0.0);
  numeric::parallel_for(from.samples.size(), [&](std::size_t i) {
    const Vector& x = from.samples[i].point.coords();
    if (auto p = project_onto_tube(onto, x, 1e-12, 80); p && region.contains(*p, 1e-12)) {
      dist[i] = (*p - x).norm();
      return;
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : onto_samples.samples) best = std::min(best, (s.point.coords() - x).norm());
    dist[i] = best;
  });
  return dist.empty() ? 0.0 : *std::max_element(dist.begin(), dist.end());
}

}  // namespace

DefinitionComparison compare_definitions(const WorldFunction& sigma, const Point& p0, const Point& p1,
                                         std::span<const Point> aux, const SearchRegion& region, std::size_t budget,
                                         double tol) {
  const TubeSpec tube = TubeSpec::through_origin(sigma, p0, p1);
  const TubeSpec line =
      TubeSpec::surface_intersection_line(sigma, p0, p1, std::vector<Point>(aux.begin(), aux.end()));
  SampleOptions opts;
  opts.budget = budget;
  DefinitionComparison out;
  out.tolerance = tol;
  out.tube = sample_tube(tube, region, opts);
  out.line = sample_tube(line, region, opts);
  if (out.tube.samples.empty() || out.line.samples.empty()) {
    out.tube_to_line = out.line_to_tube = std::numeric_limits<double>::infinity();
    return out;
  }
  out.tube_to_line = directed_distance(out.tube, line, out.line, region);
  out.line_to_tube = directed_distance(out.line, tube, out.tube, region);
  out.same = out.tube_to_line <= tol && out.line_to_tube <= tol;
  return out;
}

// ---------------------------------------------------------------------------
// Spacelike family

Point spacelike_family_point(const Point& p0, double a, double tau, double psi) {
  if (p0.dim() != 4) throw InvalidArgument("spacelike family lives in 4D");
  Vector v(4);
  v << a, tau, a * std::cos(psi), a * std::sin(psi);
  return Point(Vector(p0.coords() + v));
}

SpacelikeFamilyFit fit_spacelike_family(const Point& p0, const Point& x) {
  require_dim(4, {&p0, &x});
  const Vector d = x.coords() - p0.coords();
  SpacelikeFamilyFit fit;
  fit.a = d[0];
  fit.tau = d[1];
  fit.psi = fit.a != 0.0 ? std::atan2(d[3] / fit.a, d[2] / fit.a) : 0.0;
  auto model = [](double a, double tau, double psi) {
    Vector m(4);
    m << a, tau, a * std::cos(psi), a * std::sin(psi);
    return m;
  };
  Vector r = d - model(fit.a, fit.tau, fit.psi);
  for (int it = 0; it < 50 && r.norm() > 1e-15 * std::max(1.0, d.norm()); ++it) {
    Matrix j(4, 3);
    j << 1.0, 0.0, 0.0,  //
        0.0, 1.0, 0.0,   //
        std::cos(fit.psi), 0.0, -fit.a * std::sin(fit.psi), std::sin(fit.psi), 0.0, fit.a * std::cos(fit.psi);
    const Vector step = numeric::pinv_solve(j, r, 1e-12);
    const Vector trial = d - model(fit.a + step[0], fit.tau + step[1], fit.psi + step[2]);
    if (!(trial.norm() < r.norm())) break;
    fit.a += step[0];
    fit.tau += step[1];
    fit.psi += step[2];
    r = trial;
  }
  fit.residual = r.norm();
  return fit;
}

}  // namespace tgeom
