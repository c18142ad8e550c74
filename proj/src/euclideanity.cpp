#include "tgeom/euclideanity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "tgeom/errors.hpp"
#include "tgeom/numeric.hpp"
#include "tgeom/sigma_calculus.hpp"

namespace tgeom {

namespace {

constexpr double kSingularFrame = 1e-12;

std::vector<std::size_t> random_subset(std::size_t universe, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(universe);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, universe - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

std::vector<Point> gather(std::span<const Point> cloud, const std::vector<std::size_t>& idx) {
  std::vector<Point> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(cloud[i]);
  return out;
}

double subset_gram_measure(const WorldFunction& sigma, const std::vector<Point>& pts) {
  return normalized_gram_determinant(gram_matrix(sigma, pts.front(), std::span(pts).subspan(1)));
}

}  // namespace

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::I: return "I";
    case Condition::II: return "II";
    case Condition::III: return "III";
    case Condition::IV: return "IV";
  }
  return "?";
}

BasisFrame::BasisFrame(Point p0, std::vector<Point> heads, Matrix gram)
    : p0_(std::move(p0)), heads_(std::move(heads)), gram_(std::move(gram)) {
  if (normalized_gram_determinant(gram_) <= kSingularFrame) return;
  Matrix inv = gram_.fullPivLu().inverse();
  const auto n = gram_.rows();
  if ((gram_ * inv - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10) inverse_ = std::move(inv);
}

BasisFrame BasisFrame::build(const WorldFunction& sigma, Point p0, std::vector<Point> heads) {
  if (heads.empty()) throw InvalidArgument("basis frame needs at least one head");
  for (const Point& h : heads) require_dim(sigma.dim(), {&p0, &h});
  Matrix g = gram_matrix(sigma, p0, heads);
  return BasisFrame(std::move(p0), std::move(heads), std::move(g));
}

const Matrix& BasisFrame::gram_inverse() const {
  if (!inverse_) throw InvalidArgument("degenerate basis");
  return *inverse_;
}

double gram_determinant(const WorldFunction& sigma, const Point& p0, std::span<const Point> heads) {
  return gram_matrix(sigma, p0, heads).determinant();
}

ConditionReport check_condition_I(const WorldFunction& sigma, int n, std::span<const Point> cloud,
                                  const ConditionIOptions& options) {
  if (n < 1) throw InvalidArgument("candidate dimension must be >= 1");
  if (cloud.size() < static_cast<std::size_t>(n) + 2)
    throw InvalidArgument("condition I needs at least n+2 points");
  if (options.trials < 1) throw InvalidArgument("condition I needs at least one trial");

  std::mt19937_64 rng(options.seed);
  double best_rank_n = -1.0;
  std::vector<Point> best_subset;
  for (int t = 0; t < options.trials; ++t) {
    auto pts = gather(cloud, random_subset(cloud.size(), static_cast<std::size_t>(n) + 1, rng));
    const double m = subset_gram_measure(sigma, pts);
    if (m > best_rank_n) {
      best_rank_n = m;
      best_subset = std::move(pts);
    }
  }
  double worst_excess = -1.0;
  std::vector<Point> worst_subset;
  for (int t = 0; t < options.trials; ++t) {
    auto pts = gather(cloud, random_subset(cloud.size(), static_cast<std::size_t>(n) + 2, rng));
    const double m = subset_gram_measure(sigma, pts);
    if (m > worst_excess) {
      worst_excess = m;
      worst_subset = std::move(pts);
    }
  }

  ConditionReport report{Condition::I, false, {}};
  const bool spans = best_rank_n > options.tol;
  const bool bounded = worst_excess < options.tol;
  report.passed = spans && bounded;
  report.witness.residuals = {best_rank_n, worst_excess};
  std::ostringstream note;
  if (!spans) {
    note << "no sampled " << n + 1 << "-point subset has F_" << n << " != 0";
    report.witness.points = best_subset;
  } else if (!bounded) {
    note << "sampled " << n + 2 << "-point subset has F_" << n + 1 << " != 0";
    report.witness.points = worst_subset;
  } else {
    note << "no counterexample among " << options.trials << " sampled subsets of each size";
    report.witness.points = best_subset;
  }
  report.witness.note = note.str();
  return report;
}

BasisFrame select_frame(const WorldFunction& sigma, int n, std::span<const Point> cloud,
                        const ConditionIOptions& options) {
  if (n < 1 || cloud.size() < static_cast<std::size_t>(n) + 1)
    throw InvalidArgument("select_frame needs at least n+1 points");
  std::mt19937_64 rng(options.seed);
  double best = -1.0;
  std::vector<Point> best_subset;
  for (int t = 0; t < options.trials; ++t) {
    auto pts = gather(cloud, random_subset(cloud.size(), static_cast<std::size_t>(n) + 1, rng));
    const double m = subset_gram_measure(sigma, pts);
    if (m > best) {
      best = m;
      best_subset = std::move(pts);
    }
  }
  Point p0 = best_subset.front();
  best_subset.erase(best_subset.begin());
  return BasisFrame::build(sigma, std::move(p0), std::move(best_subset));
}

Vector sigma_coordinates(const WorldFunction& sigma, const BasisFrame& frame, const Point& p) {
  frame.gram_inverse();
  const PointPairVector x(frame.origin(), p);
  Vector out(frame.size());
  for (int i = 0; i < frame.size(); ++i)
    out[i] = scalar_product(sigma, PointPairVector(frame.origin(), frame.heads()[static_cast<std::size_t>(i)]), x);
  return out;
}

ConditionReport check_condition_II(const WorldFunction& sigma, const BasisFrame& frame,
                                   std::span<const std::pair<Point, Point>> pairs, double tol) {
  const Matrix& ginv = frame.gram_inverse();
  ConditionReport report{Condition::II, true, {}};
  double worst = 0.0;
  const std::pair<Point, Point>* worst_pair = nullptr;
  for (const auto& pq : pairs) {
    const Vector dx = sigma_coordinates(sigma, frame, pq.first) - sigma_coordinates(sigma, frame, pq.second);
    const double s = sigma(pq.first, pq.second);
    const double err = std::abs(s - 0.5 * dx.dot(ginv * dx)) / std::max(std::abs(s), 1.0);
    if (err > worst || worst_pair == nullptr) {
      worst = std::max(worst, err);
      worst_pair = &pq;
    }
  }
  report.passed = worst <= tol;
  report.witness.residuals = {worst};
  if (worst_pair) report.witness.points = {worst_pair->first, worst_pair->second};
  std::ostringstream note;
  note << "max relative reconstruction error " << worst << " over " << pairs.size() << " pairs";
  report.witness.note = note.str();
  return report;
}

ConditionReport check_condition_III(const BasisFrame& frame) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(frame.gram());
  const Vector& ev = eig.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  ConditionReport report{Condition::III, true, {}};
  report.witness.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  int bad = 0;
  for (double l : ev) {
    if (!(l > 1e-12 * scale)) ++bad;
  }
  report.passed = scale > 0.0 && bad == 0;
  report.witness.points.push_back(frame.origin());
  for (const Point& h : frame.heads()) report.witness.points.push_back(h);
  std::ostringstream note;
  note << bad << " of " << ev.size() << " Gram eigenvalues are not positive";
  report.witness.note = note.str();
  return report;
}

bool SearchRegion::contains(const Vector& x, double slack) const {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double pad = slack * std::max(1.0, hi[i] - lo[i]);
    if (x[i] < lo[i] - pad || x[i] > hi[i] + pad) return false;
  }
  return true;
}

std::vector<Point> solve_sigma_coordinates(const WorldFunction& sigma, const BasisFrame& frame, const Vector& y,
                                           const SearchRegion& region, const ConditionIVOptions& options) {
  frame.gram_inverse();
  if (y.size() != frame.size()) throw InvalidArgument("target tuple length must equal frame size");
  if (region.lo.size() != sigma.dim() || region.hi.size() != sigma.dim())
    throw InvalidArgument("search region dimension mismatch");

  const int n = frame.size();
  auto residual = [&](const Vector& x) { return Vector(sigma_coordinates(sigma, frame, Point(x)) - y); };
  const double stop = options.tol * std::max(1.0, y.cwiseAbs().maxCoeff());

  std::vector<Vector> found;
  for (const Vector& start : numeric::sobol_box(region.lo, region.hi, static_cast<std::size_t>(options.starts))) {
    Vector x = start;
    Vector r = residual(x);
    double rn = r.norm();
    for (int it = 0; it < options.max_iterations && rn > stop; ++it) {
      Matrix jac(n, x.size());
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = numeric::first_derivative_step(x[j]);
        Vector xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        jac.col(j) = (residual(xp) - residual(xm)) / (2.0 * h);
      }
      const Vector step = numeric::pinv_solve(jac, r, 1e-12);
      double lambda = 1.0;
      bool improved = false;
      while (lambda > 1e-8) {
        const Vector trial = x - lambda * step;
        const Vector rt = residual(trial);
        if (rt.norm() < rn) {
          x = trial;
          r = rt;
          rn = rt.norm();
          improved = true;
          break;
        }
        lambda *= 0.5;
      }
      if (!improved) break;
    }
    if (rn <= stop * 1e3 && region.contains(x, 1e-9)) found.push_back(x);
  }

  std::vector<Point> clusters;
  for (const Vector& x : found) {
    const bool known = std::any_of(clusters.begin(), clusters.end(), [&](const Point& c) {
      return (c.coords() - x).norm() <= options.cluster_radius;
    });
    if (!known) clusters.emplace_back(x);
  }
  std::sort(clusters.begin(), clusters.end(), [](const Point& a, const Point& b) {
    return std::lexicographical_compare(a.coords().begin(), a.coords().end(), b.coords().begin(), b.coords().end());
  });
  return clusters;
}

ConditionReport check_condition_IV(const WorldFunction& sigma, const BasisFrame& frame,
                                   std::span<const Vector> targets, const SearchRegion& region,
                                   const ConditionIVOptions& options) {
  ConditionReport report{Condition::IV, true, {}};
  std::vector<std::vector<Point>> solutions(targets.size());
  numeric::parallel_for(targets.size(), [&](std::size_t i) {
    solutions[i] = solve_sigma_coordinates(sigma, frame, targets[i], region, options);
  });
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (solutions[i].size() != 1) {
      report.passed = false;
      report.witness.points = solutions[i];
      report.witness.residuals.assign(targets[i].data(), targets[i].data() + targets[i].size());
      std::ostringstream note;
      note << "target " << i << " has " << solutions[i].size() << " solution clusters in the search region";
      report.witness.note = note.str();
      return report;
    }
  }
  std::ostringstream note;
  note << "each of " << targets.size() << " targets has exactly one solution in the search region";
  report.witness.note = note.str();
  return report;
}

}  // namespace tgeom
