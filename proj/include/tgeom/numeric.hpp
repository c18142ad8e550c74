#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "tgeom/point.hpp"

namespace tgeom::numeric {

using ScalarField = std::function<double(const Vector&)>;

/// Central-difference step for first derivatives: eps^(1/3) * max(1, |x|).
double first_derivative_step(double x);
/// Central-difference step for second derivatives: eps^(1/4) * max(1, |x|).
double second_derivative_step(double x);

Vector gradient(const ScalarField& f, const Vector& x);
/// Five-point stencil with step eps^(1/5) * max(1, |x|). Tolerates noisier f.
Vector gradient_fourth_order(const ScalarField& f, const Vector& x);
Matrix hessian(const ScalarField& f, const Vector& x);

/// Minimum-norm solution of A x = b, discarding singular values below
/// `relative_cutoff` times the largest one.
Vector pinv_solve(const Matrix& a, const Vector& b, double relative_cutoff = 1e-8);

/// Scrambling-free Sobol points in [0,1)^dim, deterministic in (dim, index).
class SobolSequence {
 public:
  explicit SobolSequence(int dim);
  ~SobolSequence();
  SobolSequence(const SobolSequence&) = delete;
  SobolSequence& operator=(const SobolSequence&) = delete;

  Vector next();
  int dim() const noexcept { return dim_; }

 private:
  struct Engine;
  int dim_;
  std::unique_ptr<Engine> engine_;
};

/// Points of the box [lo, hi] drawn from a Sobol sequence, skipping the origin.
std::vector<Vector> sobol_box(const Vector& lo, const Vector& hi, std::size_t count);

/// Number of worker threads: TGEOM_THREADS when set, else hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n) on thread_count() workers. Results must be
/// written to per-index slots so aggregation stays deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace tgeom::numeric
