#pragma once

#include <array>
#include <cstdint>

#include "locrom/numerics.hpp"

namespace locrom {

/// Squared-exponential kernel parameters
///   k(z, z') = signal_var exp(-|z - z'|^2 / (2 l^2)) + noise_var [z == z'].
struct GpHyper {
  double length_scale = 1.0;
  double signal_var = 1.0;
  double noise_var = 1e-2;

  void validate() const;
  /// (log l, log signal_var, log noise_var), the coordinates the optimizer uses.
  std::array<double, 3> to_log() const;
  static GpHyper from_log(const std::array<double, 3>& t);
};

struct GpSettings {
  int restarts = 5;
  int max_iters = 150;
  double initial_step = 0.5;
  double grad_tol = 1e-5;
  // Hyperparameters are tuned on a random subset; the posterior is then
  // conditioned on at most max_training_points samples.
  int optimization_subset = 500;
  int max_training_points = 10000;
  // The subset optimum overestimates the length scale once the full data
  // resolves short-range structure, so the result is polished by a compass
  // search on a larger nested subset using this many likelihood evaluations.
  int refine_subset = 6000;
  int refine_evaluations = 12;
  double min_noise_var = 1e-8;
  double max_jitter = 1e-6;
};

struct GpModel {
  GpHyper hyper;
  Matrix train_x;  // n x d, one sample per row
  Vector train_y;
  double prior_mean = 0.0;
  double jitter = 0.0;  // added to the diagonal on top of noise_var
  Matrix chol_l;        // lower Cholesky factor of K + (noise_var + jitter) I
  Vector alpha;         // (K + ...)^{-1} (y - m)

  int size() const { return static_cast<int>(train_x.rows()); }
};

struct GpPrediction {
  double mean = 0.0;
  double latent_variance = 0.0;  // variance of f(z*)
  double variance = 0.0;         // latent_variance + noise_var, variance of y*
};

/// Gram matrix of the noise-free SE kernel between the rows of a and b.
Matrix se_kernel(const Matrix& a, const Matrix& b, double length_scale, double signal_var);

/// Negative log marginal likelihood
///   1/2 log|K| + 1/2 (y-m)^T K^{-1} (y-m) + n/2 log(2 pi)
/// with K including the noise. When grad is non-null it receives dL/d(log
/// theta) in the order of GpHyper::to_log. Throws if K is not positive
/// definite.
double gp_nll(const Matrix& x, const Vector& y, double prior_mean, const GpHyper& hyper,
              std::array<double, 3>* grad = nullptr);

/// Factorizes the kernel for fixed hyperparameters, escalating diagonal
/// jitter from 1e-12 up to max_jitter before giving up.
GpModel gp_condition(const Matrix& x, const Vector& y, double prior_mean, const GpHyper& hyper,
                     double max_jitter = 1e-6);

/// Multi-start gradient descent on the log hyperparameters followed by
/// gp_condition. The first start is `init`; the rest are seeded
/// perturbations of it.
GpModel gp_fit(const Matrix& x, const Vector& y, const GpHyper& init, const GpSettings& settings,
               std::uint64_t seed, double prior_mean = 0.0);

GpPrediction gp_predict(const GpModel& model, const Vector& query);

/// Posterior means for every row of queries (variance skipped).
Vector gp_predict_mean(const GpModel& model, const Matrix& queries);

}  // namespace locrom
