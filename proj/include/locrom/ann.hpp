#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "locrom/numerics.hpp"

namespace locrom {

/// One affine map; hidden layers are followed by tanh, the last is linear.
struct AnnLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
};

struct AnnModel {
  std::vector<int> layer_sizes;  // input, hidden..., 1
  std::vector<AnnLayer> layers;

  int input_dim() const { return layer_sizes.front(); }
  int parameter_count() const;
  void validate() const;
};

/// Uniform weights in [-a, a] with a = sqrt(3 / fan_in), zero biases.
AnnModel ann_init(std::span<const int> layer_sizes, std::uint64_t seed);

double ann_forward(const AnnModel& model, const Vector& query);

/// Outputs for every row of x (samples in rows).
Vector ann_forward(const AnnModel& model, const Matrix& x);

/// Mean squared error over the rows of x and, when grad is non-null, its
/// gradient by backpropagation (same layout as the model's layers).
double ann_loss(const AnnModel& model, const Matrix& x, const Vector& y,
                std::vector<AnnLayer>* grad = nullptr);

// lbfgs ignores the learning rate except as the fallback step when its line
// search fails; an epoch is then one quasi-Newton iteration.
enum class AnnOptimizer { gradient_descent, adam, lbfgs };

AnnOptimizer parse_optimizer(const std::string& name);
std::string to_string(AnnOptimizer opt);

struct AnnTrainSettings {
  int epochs = 4000;
  double learning_rate = 2e-3;
  AnnOptimizer optimizer = AnnOptimizer::adam;
  // Share of the training rows held out for early stopping; 0 disables it.
  double validation_fraction = 0.1;
  int patience = 400;
  int lbfgs_memory = 10;
};

struct AnnTrainReport {
  int epochs_run = 0;
  int best_epoch = 0;
  double train_mse = 0.0;
  double validation_mse = 0.0;
  std::vector<double> loss_history;  // training MSE before each update
};

/// Full-batch training. With early stopping the returned parameters are the
/// ones with the lowest validation MSE. Throws if the loss becomes NaN.
AnnModel ann_train(AnnModel model, const Matrix& x, const Vector& y,
                   const AnnTrainSettings& settings, std::uint64_t seed,
                   AnnTrainReport* report = nullptr);

}  // namespace locrom
