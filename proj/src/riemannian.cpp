#include "tgeom/riemannian.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <sstream>

#include "tgeom/errors.hpp"
#include "tgeom/numeric.hpp"

namespace tgeom {

namespace {

constexpr double kMaxCondition = 1e15;

Matrix checked_inverse(const Matrix& g) {
  // LU with a 1-norm condition estimate; the eigen-decomposition runs only to
  // word the error.
  const Eigen::PartialPivLU<Matrix> lu(g);
  const Matrix inv = lu.inverse();
  const double cond = g.cwiseAbs().colwise().sum().maxCoeff() * inv.cwiseAbs().colwise().sum().maxCoeff();
  if (!inv.allFinite() || !(cond <= kMaxCondition)) {
    const Vector mags = Eigen::SelfAdjointEigenSolver<Matrix>(g).eigenvalues().cwiseAbs();
    const double smallest = mags.minCoeff();
    std::ostringstream msg;
    msg << "metric is singular (condition number " << (smallest > 0.0 ? mags.maxCoeff() / smallest : INFINITY) << ")";
    throw InvalidArgument(msg.str());
  }
  return inv;
}

// Writes the geodesic acceleration -Gamma^k_il v^i v^l into `out`.
void geodesic_acceleration(const MetricField& metric, const Vector& x, const Vector& v, Vector& out) {
  if (const auto& closed = metric.connection_quadratic()) {
    closed(x, v, out);
  } else {
    out = christoffel(metric, Point(x)).contract(v, v);
  }
  out = -out;
}

struct PhaseState {
  Vector x;
  Vector v;
};

// Classical RK4 on (x, v), advancing `s` in place without heap traffic.
class Rk4Stepper {
 public:
  explicit Rk4Stepper(const MetricField& metric) : metric_(metric) {
    const int n = metric.dim();
    for (Vector* w : {&xs_, &a1_, &a2_, &a3_, &a4_, &v2_, &v3_, &v4_}) w->resize(n);
  }

  void step(PhaseState& s, double dt) {
    geodesic_acceleration(metric_, s.x, s.v, a1_);
    v2_ = s.v + 0.5 * dt * a1_;
    xs_ = s.x + 0.5 * dt * s.v;
    geodesic_acceleration(metric_, xs_, v2_, a2_);
    v3_ = s.v + 0.5 * dt * a2_;
    xs_ = s.x + 0.5 * dt * v2_;
    geodesic_acceleration(metric_, xs_, v3_, a3_);
    v4_ = s.v + dt * a3_;
    xs_ = s.x + dt * v3_;
    geodesic_acceleration(metric_, xs_, v4_, a4_);
    s.x += dt / 6.0 * (s.v + 2.0 * v2_ + 2.0 * v3_ + v4_);
    s.v += dt / 6.0 * (a1_ + 2.0 * a2_ + 2.0 * a3_ + a4_);
  }

 private:
  const MetricField& metric_;
  Vector xs_, a1_, a2_, a3_, a4_, v2_, v3_, v4_;
};

Vector shoot(const MetricField& metric, const Vector& x0, const Vector& v0, int steps) {
  PhaseState s{x0, v0};
  Rk4Stepper rk(metric);
  const double dt = 1.0 / steps;
  for (int i = 0; i < steps; ++i) rk.step(s, dt);
  return s.x;
}

double interval(const MetricField& metric, const Vector& x, const Vector& v) {
  return v.dot(metric.at(x) * v);
}

int interval_sign_of(const MetricField& metric, const Vector& x, const Vector& v) {
  const double q = interval(metric, x, v);
  const double scale = metric.at(x).cwiseAbs().maxCoeff() * v.squaredNorm();
  if (std::abs(q) <= 1e-12 * scale) return 0;
  return q > 0.0 ? 1 : -1;
}

void finish_length(const MetricField& metric, GeodesicSolution& sol) {
  const std::size_t n = sol.path.size();
  if (n < 2) {
    sol.length = 0.0;
    return;
  }
  std::vector<double> speed(n);
  for (std::size_t i = 0; i < n; ++i)
    speed[i] = std::sqrt(std::abs(interval(metric, sol.path[i].x, sol.path[i].velocity)));
  const std::size_t segments = n - 1;
  // Compensated summation keeps the length noise at a few ulp, which matters
  // for finite-difference gradients of sigma.
  double total = 0.0, carry = 0.0;
  auto add = [&](double term) {
    const double y = term - carry;
    const double t = total + y;
    carry = (t - total) - y;
    total = t;
  };
  if (segments % 2 == 0) {
    for (std::size_t i = 0; i + 2 < n; i += 2)
      add((sol.path[i + 2].tau - sol.path[i].tau) / 6.0 * (speed[i] + 4.0 * speed[i + 1] + speed[i + 2]));
  } else {
    for (std::size_t i = 0; i + 1 < n; ++i)
      add(0.5 * (sol.path[i + 1].tau - sol.path[i].tau) * (speed[i] + speed[i + 1]));
  }
  sol.length = total;
}

}  // namespace

Vector ChristoffelSymbols::contract(const Vector& a, const Vector& b) const {
  Vector out(dim());
  for (int k = 0; k < dim(); ++k) out[k] = a.dot(upper_[static_cast<std::size_t>(k)] * b);
  return out;
}

Vector ChristoffelSymbols::transport_rate(const Vector& u, const Vector& b) const {
  Vector out = Vector::Zero(dim());
  for (int k = 0; k < dim(); ++k) out += u[k] * (upper_[static_cast<std::size_t>(k)] * b);
  return out;
}

ChristoffelSymbols christoffel(const MetricField& metric, const Point& p) {
  const int n = metric.dim();
  if (p.dim() != n) throw InvalidArgument("christoffel: point dimension does not match metric");
  const Vector& x = p.coords();
  const Matrix ginv = checked_inverse(metric.at(x));
  std::vector<Matrix> dg(static_cast<std::size_t>(n));
  Vector y = x;
  for (int l = 0; l < n; ++l) {
    const double h = numeric::first_derivative_step(x[l]);
    y[l] = x[l] + h;
    const Matrix gp = metric.at(y);
    y[l] = x[l] - h;
    const Matrix gm = metric.at(y);
    y[l] = x[l];
    dg[static_cast<std::size_t>(l)] = (gp - gm) / (2.0 * h);
  }
  auto d = [&](int l, int i, int j) { return dg[static_cast<std::size_t>(l)](i, j); };
  ChristoffelSymbols gamma(n);
  Vector lower(n);
  for (int i = 0; i < n; ++i) {
    for (int l = i; l < n; ++l) {
      for (int j = 0; j < n; ++j) lower[j] = 0.5 * (d(l, i, j) + d(i, l, j) - d(j, i, l));
      for (int k = 0; k < n; ++k) {
        const double v = ginv.row(k).dot(lower);
        gamma(k, i, l) = v;
        gamma(k, l, i) = v;
      }
    }
  }
  return gamma;
}

GeodesicSolution geodesic_integrate(const MetricField& metric, const Point& x0, const Vector& v0, double tau_max,
                                    int steps) {
  if (x0.dim() != metric.dim() || v0.size() != metric.dim())
    throw InvalidArgument("geodesic_integrate: dimension mismatch");
  if (steps < 1) throw InvalidArgument("geodesic_integrate: steps must be >= 1");
  if (!(tau_max >= 0.0) || !std::isfinite(tau_max)) throw InvalidArgument("geodesic_integrate: tau_max must be >= 0");

  GeodesicSolution sol;
  sol.path.reserve(static_cast<std::size_t>(steps) + 1);
  sol.path.push_back({0.0, x0.coords(), v0});
  sol.interval_sign = interval_sign_of(metric, x0.coords(), v0);
  const double dt = tau_max / steps;
  PhaseState s{x0.coords(), v0};
  Rk4Stepper rk(metric);
  sol.converged = true;
  for (int i = 0; i < steps; ++i) {
    try {
      rk.step(s, dt);
    } catch (const InvalidArgument& e) {
      sol.converged = false;
      sol.message = e.what();
      break;
    }
    sol.path.push_back({dt * (i + 1), s.x, s.v});
  }
  finish_length(metric, sol);
  return sol;
}

namespace {

struct ShootingResult {
  Vector v;
  double rnorm = INFINITY;
  int iterations = 0;
  bool started = false;
};

// Damped Newton on the initial velocity so that the geodesic from x hits
// `target` at tau = 1 (coordinate differences taken modulo chart periods).
ShootingResult newton_shoot(const MetricField& metric, const Vector& x, const Vector& target, Vector v,
                            const BvpOptions& options) {
  const int n = metric.dim();
  const double size = std::max(1.0, target.cwiseAbs().maxCoeff());
  const double stop = 1e-14 * size;
  auto residual_of = [&](const Vector& vel, Vector& r) {
    try {
      r = metric.wrap(shoot(metric, x, vel, options.steps) - target);
      return r.allFinite();
    } catch (const InvalidArgument&) {
      return false;
    }
  };

  ShootingResult out;
  Vector r;
  if (!residual_of(v, r)) return out;
  out.started = true;
  double rnorm = r.norm();
  Matrix jac(n, n);
  Eigen::ColPivHouseholderQR<Matrix> qr(n, n);
  bool have_jac = false;
  int it = 0;
  for (; it < options.max_iterations && rnorm > stop; ++it) {
    // Forward differences: the Jacobian only steers Newton, the residual
    // decides convergence. Near the solution it is kept (chord steps).
    const bool refresh = !have_jac || rnorm > 1e-6 * size;
    bool ok = true;
    for (int j = 0; j < n && ok && refresh; ++j) {
      const double h = numeric::first_derivative_step(v[j]);
      Vector vp = v, rp;
      vp[j] += h;
      ok = residual_of(vp, rp);
      if (ok) jac.col(j) = metric.wrap(rp - r) / h;
    }
    if (!ok) break;
    if (refresh) qr.compute(jac);
    have_jac = true;
    const Vector dv = qr.solve(r);
    double lambda = 1.0;
    bool improved = false;
    // Once within tolerance only the full step is tried.
    const double min_lambda = rnorm <= options.tolerance ? 1.0 : 1e-6;
    while (lambda >= min_lambda) {
      Vector trial = v - lambda * dv, rt;
      if (residual_of(trial, rt) && rt.norm() < rnorm) {
        v = trial;
        r = rt;
        rnorm = rt.norm();
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) break;
  }
  out.v = v;
  out.rnorm = rnorm;
  out.iterations = it;
  return out;
}

// Metric length of the chart segment x -> x + d (Simpson, 64 panels).
double secant_length(const MetricField& metric, const Vector& x, const Vector& d) {
  constexpr int kPanels = 64;
  double total = 0.0;
  for (int i = 0; i <= kPanels; ++i) {
    const double s = static_cast<double>(i) / kPanels;
    const double w = (i == 0 || i == kPanels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    total += w * std::sqrt(std::abs(d.dot(metric.at(Vector(x + s * d)) * d)));
  }
  return total / (3.0 * kPanels);
}

}  // namespace

GeodesicSolution geodesic_bvp(const MetricField& metric, const Point& x, const Point& xprime,
                              const BvpOptions& options) {
  require_dim(metric.dim(), {&x, &xprime});
  if (options.steps < 2) throw InvalidArgument("geodesic_bvp: steps must be >= 2");
  const Vector& x0 = x.coords();
  const Vector d = metric.wrap(xprime.coords() - x0);
  const Vector target = x0 + d;

  // Direct shooting from the chart secant. For a positive metric a solution
  // longer than the secant itself is not the shortest segment (it winds), so
  // it is redone by continuation along the secant.
  ShootingResult best = newton_shoot(metric, x0, target, d, options);
  int iterations = best.iterations;
  bool usable = best.rnorm <= options.tolerance;
  if (usable && metric.signature() == Signature::riemannian_positive) {
    try {
      const double len = std::sqrt(std::abs(best.v.dot(metric.at(x0) * best.v)));
      usable = len <= secant_length(metric, x0, d) * (1.0 + 1e-9);
    } catch (const InvalidArgument&) {
      usable = false;
    }
  }

  if (!usable) {
    // Continuation: targets x + s d with s from 0 to 1, warm-started by
    // rescaling the previous initial velocity; the step halves on failure.
    double s = 0.0, ds = 0.125;
    Vector v = d;
    bool ok = true;
    while (s < 1.0 && ok) {
      const double next = std::min(1.0, s + ds);
      const Vector guess = s > 0.0 ? Vector(v * (next / s)) : Vector(d * next);
      const ShootingResult step = newton_shoot(metric, x0, Vector(x0 + next * d), guess, options);
      iterations += step.iterations;
      if (step.rnorm <= options.tolerance) {
        s = next;
        v = step.v;
        ds = std::min(0.25, 2.0 * ds);
      } else {
        ds *= 0.5;
        ok = ds >= 1.0 / 1024;
      }
    }
    if (ok) {
      const ShootingResult last = newton_shoot(metric, x0, target, v, options);
      iterations += last.iterations;
      best = last;
    } else if (!best.started) {
      GeodesicSolution sol;
      sol.converged = false;
      sol.residual = INFINITY;
      sol.iterations = iterations;
      sol.message = "metric singular along the secant guess";
      return sol;
    }
  }

  GeodesicSolution sol = geodesic_integrate(metric, x, best.v, 1.0, options.steps);
  sol.iterations = iterations;
  sol.residual = best.rnorm;
  sol.converged = sol.converged && best.rnorm <= options.tolerance;
  if (!sol.converged && sol.message.empty()) {
    std::ostringstream msg;
    msg << "shooting did not converge: terminal residual " << best.rnorm;
    sol.message = msg.str();
  }
  return sol;
}

namespace {

class NumericSigma final : public SigmaEvaluator {
 public:
  NumericSigma(MetricField metric, BvpOptions options) : metric_(std::move(metric)), options_(options) {}

  double operator()(const Point& p, const Point& q) const override {
    if (p == q) return 0.0;
    const bool swap = std::lexicographical_compare(q.coords().begin(), q.coords().end(), p.coords().begin(),
                                                   p.coords().end());
    const Point& a = swap ? q : p;
    const Point& b = swap ? p : q;
    const Key key = make_key(a, b);
    {
      std::shared_lock lock(mutex_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    const double value = solve(a, b);
    std::unique_lock lock(mutex_);
    cache_[key] = value;
    return value;
  }

 private:
  using Key = std::vector<long long>;

  static Key make_key(const Point& a, const Point& b) {
    Key key;
    key.reserve(static_cast<std::size_t>(a.dim() + b.dim()));
    for (double c : a.coords()) key.push_back(std::llround(c * 1e12));
    for (double c : b.coords()) key.push_back(std::llround(c * 1e12));
    return key;
  }

  double solve(const Point& a, const Point& b) const {
    const GeodesicSolution sol = geodesic_bvp(metric_, a, b, options_);
    if (!sol.converged) throw EvaluationError("world function evaluation failed: " + sol.message, sol.residual);
    int sign = sol.interval_sign;
    if (metric_.signature() == Signature::lorentzian) {
      for (const auto& node : sol.path) {
        const int s = interval_sign_of(metric_, node.x, node.velocity);
        if (s != sign) throw EvaluationError("mixed-character geodesic", sol.residual);
      }
    } else {
      sign = 1;
    }
    return 0.5 * sign * sol.length * sol.length;
  }

  MetricField metric_;
  BvpOptions options_;
  mutable std::shared_mutex mutex_;
  mutable std::map<Key, double> cache_;
};

}  // namespace

WorldFunction world_function_from_metric(const MetricField& metric, const BvpOptions& options) {
  GeometryParams params;
  params.radius = metric.radius();
  params.metric = metric.constant_value();
  return WorldFunction(GeometryKind::numeric_riemannian, metric.dim(), params,
                       std::make_shared<NumericSigma>(metric, options));
}

Vector sigma_gradient(const WorldFunction& sigma, const Point& x, const Point& xprime) {
  require_dim(sigma.dim(), {&x, &xprime});
  return numeric::gradient_fourth_order([&](const Vector& y) { return sigma(Point(y), xprime); }, x.coords());
}

double riemannian_scalar_product(const MetricField& metric, const WorldFunction& sigma, const Point& x,
                                 const Point& xprime, const Point& xsecond) {
  require_dim(metric.dim(), {&x, &xprime, &xsecond});
  if (sigma.dim() != metric.dim()) throw InvalidArgument("world function and metric dimensions differ");
  const Matrix ginv = checked_inverse(metric.at(x));
  return sigma_gradient(sigma, x, xprime).dot(ginv * sigma_gradient(sigma, x, xsecond));
}

double covector_norm2(const MetricField& metric, const Point& x, const Vector& u) {
  return u.dot(checked_inverse(metric.at(x)) * u);
}

double covector_angle(const MetricField& metric, const Point& x, const Vector& u, const Vector& v) {
  const Matrix ginv = checked_inverse(metric.at(x));
  const double c = u.dot(ginv * v) / std::sqrt(u.dot(ginv * u) * v.dot(ginv * v));
  return std::acos(std::clamp(c, -1.0, 1.0));
}

TransportResult parallel_transport(const MetricField& metric, const Vector& u0, std::span<const Point> path,
                                   int steps_per_segment) {
  if (u0.size() != metric.dim()) throw InvalidArgument("parallel_transport: component count != dimension");
  if (path.empty()) throw InvalidArgument("parallel_transport: empty path");
  if (steps_per_segment < 1) throw InvalidArgument("parallel_transport: steps_per_segment must be >= 1");
  for (const Point& p : path) require_dim(metric.dim(), {&p});

  TransportResult result;
  result.path_used.assign(path.begin(), path.end());
  Vector u = u0;
  const double n0 = covector_norm2(metric, path.front(), u0);
  auto track = [&](const Vector& x) {
    if (n0 == 0.0) return;
    const double n = covector_norm2(metric, Point(x), u);
    result.norm_drift = std::max(result.norm_drift, std::abs(n - n0) / std::abs(n0));
  };

  for (std::size_t seg = 0; seg + 1 < path.size(); ++seg) {
    const Vector a = path[seg].coords();
    const Vector dx = path[seg + 1].coords() - a;
    auto rate = [&](double s, const Vector& w) -> Vector {
      try {
        return christoffel(metric, Point(Vector(a + s * dx))).transport_rate(w, dx);
      } catch (const InvalidArgument& e) {
        throw InvalidArgument("parallel_transport: segment " + std::to_string(seg) + ": " + e.what());
      }
    };
    const double ds = 1.0 / steps_per_segment;
    for (int i = 0; i < steps_per_segment; ++i) {
      const double s = i * ds;
      const Vector k1 = rate(s, u);
      const Vector k2 = rate(s + 0.5 * ds, u + 0.5 * ds * k1);
      const Vector k3 = rate(s + 0.5 * ds, u + 0.5 * ds * k2);
      const Vector k4 = rate(s + ds, u + ds * k3);
      u += ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      track(a + (s + ds) * dx);
    }
  }
  result.components = u;
  return result;
}

}  // namespace tgeom

namespace tgeom {

std::vector<Point> great_circle_polyline(const Point& a, const Point& b, int segments) {
  require_dim(2, {&a, &b});
  if (segments < 1) throw InvalidArgument("great_circle_polyline needs at least one segment");
  auto unit = [](const Point& p) {
    Eigen::Vector3d v(std::sin(p[0]) * std::cos(p[1]), std::sin(p[0]) * std::sin(p[1]), std::cos(p[0]));
    return v;
  };
  const Eigen::Vector3d u = unit(a);
  const Eigen::Vector3d w = unit(b);
  const double angle = std::atan2(u.cross(w).norm(), u.dot(w));
  if (std::abs(angle - std::numbers::pi) < 1e-12) throw InvalidArgument("antipodal endpoints have no unique great circle");
  std::vector<Point> out;
  double prev_phi = a[1];
  for (int i = 0; i <= segments; ++i) {
    const double t = static_cast<double>(i) / segments;
    Eigen::Vector3d v = angle > 0.0 ? Eigen::Vector3d((std::sin((1 - t) * angle) * u + std::sin(t * angle) * w) / std::sin(angle)) : u;
    v.normalize();
    const double theta = std::atan2(std::hypot(v.x(), v.y()), v.z());
    double phi = std::atan2(v.y(), v.x());
    phi += 2.0 * std::numbers::pi * std::round((prev_phi - phi) / (2.0 * std::numbers::pi));
    if (i == 0) {
      out.push_back(a);
      continue;
    }
    if (i == segments) {
      const double end_phi = b[1] + 2.0 * std::numbers::pi * std::round((prev_phi - b[1]) / (2.0 * std::numbers::pi));
      out.push_back(Point{b[0], end_phi});
      break;
    }
    prev_phi = phi;
    out.push_back(Point{theta, phi});
  }
  return out;
}

}  // namespace tgeom
