#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "locrom/ann.hpp"
#include "locrom/gp.hpp"

namespace locrom {

/// Per-column affine map z_scaled = (z - shift) / scale.
struct AffineScaling {
  std::vector<double> shift;
  std::vector<double> scale;

  bool empty() const { return shift.empty(); }
  Matrix apply(const Matrix& z) const;
  Matrix invert(const Matrix& z_scaled) const;
  Vector apply(const Vector& z) const;
};

/// Zero-mean, unit-variance scaling of every column (population std). A
/// constant column gets scale 1 so the map stays invertible.
AffineScaling fit_standardization(const Matrix& z);

/// Regression samples, one per row. feature_scaling is empty while the
/// features are in raw units and records the applied map otherwise.
struct Dataset {
  Matrix features;
  Vector targets;
  AffineScaling feature_scaling;
  std::vector<std::string> feature_names;

  int size() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
  bool scaled() const { return !feature_scaling.empty(); }
  void validate() const;
};

/// Standardizes the features and records the transform.
Dataset scale_features(const Dataset& raw);
/// Undoes scale_features.
Dataset unscale(const Dataset& scaled);

enum class ModelKind { gp, ann };

ModelKind parse_model_kind(const std::string& name);
std::string to_string(ModelKind kind);

struct AnnSettings {
  int hidden_layers = 6;
  int hidden_width = 20;
  AnnTrainSettings train;
};

struct SurrogateSettings {
  ModelKind kind = ModelKind::ann;
  GpHyper gp_init;
  GpSettings gp;
  AnnSettings ann;
};

/// A trained regressor in raw units. Features and targets are both
/// standardized before fitting; predictions are mapped back.
class Surrogate {
public:
  static Surrogate fit(const Dataset& raw, const SurrogateSettings& settings, std::uint64_t seed);

  ModelKind kind() const { return kind_; }
  int input_dim() const;

  double predict(const Vector& z) const;
  Vector predict(const Matrix& z) const;
  /// GP only: predictive mean and variance in target units.
  GpPrediction predict_distribution(const Vector& z) const;

  const AffineScaling& feature_scaling() const { return features_; }
  double target_shift() const { return target_shift_; }
  double target_scale() const { return target_scale_; }
  const std::optional<GpModel>& gp() const { return gp_; }
  const std::optional<AnnModel>& ann() const { return ann_; }
  const AnnTrainReport& train_report() const { return report_; }

  /// Rebuilds a model from stored parts (checkpoint loading).
  static Surrogate from_parts(ModelKind kind, AffineScaling features, double target_shift,
                              double target_scale, std::optional<GpModel> gp,
                              std::optional<AnnModel> ann);

private:
  ModelKind kind_ = ModelKind::ann;
  AffineScaling features_;
  double target_shift_ = 0.0;
  double target_scale_ = 1.0;
  std::optional<GpModel> gp_;
  std::optional<AnnModel> ann_;
  AnnTrainReport report_;
};

struct FoldReport {
  std::vector<double> fold_error;     // mean |yhat - y| on each held-out fold
  std::vector<double> fold_variance;  // mean (|yhat - y| - E_fold)^2
  double error = 0.0;                 // mean of fold_error
  double variance = 0.0;              // mean (E_fold - error)^2
  Vector predictions;                 // out-of-fold prediction for every sample
};

/// Seeded shuffle, then sample order[i] goes to fold i mod k.
std::vector<std::vector<int>> kfold_partition(int n, int k, std::uint64_t seed);

using FitPredict =
    std::function<Vector(const Matrix& x_train, const Vector& y_train, const Matrix& x_test)>;

/// K-fold cross validation with any fit-and-predict callback.
/// Requires 2 <= k <= n.
FoldReport kfold_validate(const Matrix& x, const Vector& y, int k, std::uint64_t seed,
                          const FitPredict& fit_predict);

/// K-fold cross validation of a surrogate kind; 3 <= k <= 10.
FoldReport kfold_validate(const Dataset& raw, const SurrogateSettings& settings, int k,
                          std::uint64_t seed);

}  // namespace locrom
