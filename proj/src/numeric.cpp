#include "tgeom/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include <boost/random/sobol.hpp>

namespace tgeom::numeric {

namespace {
const double kEps = std::numeric_limits<double>::epsilon();
}

double first_derivative_step(double x) { return std::cbrt(kEps) * std::max(1.0, std::abs(x)); }

double second_derivative_step(double x) { return std::pow(kEps, 0.25) * std::max(1.0, std::abs(x)); }

Vector gradient(const ScalarField& f, const Vector& x) {
  Vector g(x.size());
  Vector y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = first_derivative_step(x[i]);
    y[i] = x[i] + h;
    const double fp = f(y);
    y[i] = x[i] - h;
    const double fm = f(y);
    y[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Vector gradient_fourth_order(const ScalarField& f, const Vector& x) {
  Vector g(x.size());
  Vector y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = std::pow(kEps, 0.2) * std::max(1.0, std::abs(x[i]));
    auto at = [&](double s) {
      y[i] = x[i] + s * h;
      const double v = f(y);
      y[i] = x[i];
      return v;
    };
    g[i] = (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * h);
  }
  return g;
}

Matrix hessian(const ScalarField& f, const Vector& x) {
  const Eigen::Index n = x.size();
  Matrix h(n, n);
  Vector y = x;
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hi = second_derivative_step(x[i]);
    y[i] = x[i] + hi;
    const double fp = f(y);
    y[i] = x[i] - hi;
    const double fm = f(y);
    y[i] = x[i];
    h(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double hj = second_derivative_step(x[j]);
      auto at = [&](double si, double sj) {
        y[i] = x[i] + si * hi;
        y[j] = x[j] + sj * hj;
        const double v = f(y);
        y[i] = x[i];
        y[j] = x[j];
        return v;
      };
      const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hi * hj);
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

Vector pinv_solve(const Matrix& a, const Vector& b, double relative_cutoff) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cut = s.size() > 0 ? s[0] * relative_cutoff : 0.0;
  Vector ub = svd.matrixU().transpose() * b;
  for (Eigen::Index i = 0; i < s.size(); ++i) ub[i] = s[i] > cut && s[i] > 0.0 ? ub[i] / s[i] : 0.0;
  return svd.matrixV() * ub;
}

struct SobolSequence::Engine {
  explicit Engine(int dim) : qrng(static_cast<std::size_t>(dim)) {}
  boost::random::sobol qrng;
};

SobolSequence::SobolSequence(int dim) : dim_(dim), engine_(std::make_unique<Engine>(dim)) {}

SobolSequence::~SobolSequence() = default;

Vector SobolSequence::next() {
  using E = boost::random::sobol;
  const double range = static_cast<double>(E::max() - E::min()) + 1.0;
  Vector v(dim_);
  for (int i = 0; i < dim_; ++i) v[i] = static_cast<double>(engine_->qrng() - E::min()) / range;
  return v;
}

std::vector<Vector> sobol_box(const Vector& lo, const Vector& hi, std::size_t count) {
  SobolSequence seq(static_cast<int>(lo.size()));
  seq.next();
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Vector u = seq.next();
    out.push_back(lo + (hi - lo).cwiseProduct(u));
  }
  return out;
}

unsigned thread_count() {
  if (const char* env = std::getenv("TGEOM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace tgeom::numeric
