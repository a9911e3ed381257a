#include "locrom/surrogate.hpp"

#include <cmath>
#include <sstream>

namespace locrom {

Matrix AffineScaling::apply(const Matrix& z) const {
  if (static_cast<std::size_t>(z.cols()) != shift.size()) {
    throw Error("AffineScaling: column count does not match the recorded transform");
  }
  Matrix out = z;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    out.col(j) = (z.col(j).array() - shift[j]) / scale[j];
  }
  return out;
}

Matrix AffineScaling::invert(const Matrix& z_scaled) const {
  if (static_cast<std::size_t>(z_scaled.cols()) != shift.size()) {
    throw Error("AffineScaling: column count does not match the recorded transform");
  }
  Matrix out = z_scaled;
  for (Eigen::Index j = 0; j < z_scaled.cols(); ++j) {
    out.col(j) = z_scaled.col(j).array() * scale[j] + shift[j];
  }
  return out;
}

Vector AffineScaling::apply(const Vector& z) const {
  return apply(Matrix(z.transpose())).row(0).transpose();
}

AffineScaling fit_standardization(const Matrix& z) {
  if (z.rows() == 0) {
    throw Error("fit_standardization: no samples");
  }
  AffineScaling s;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double mean = z.col(j).mean();
    const double sd = std::sqrt((z.col(j).array() - mean).square().mean());
    s.shift.push_back(mean);
    s.scale.push_back(sd > 0.0 ? sd : 1.0);
  }
  return s;
}

void Dataset::validate() const {
  if (features.rows() < 1) {
    throw Error("dataset: no samples");
  }
  if (targets.size() != features.rows()) {
    std::ostringstream msg;
    msg << "dataset: " << features.rows() << " feature rows but " << targets.size() << " targets";
    throw Error(msg.str());
  }
  if (!targets.allFinite()) {
    throw Error("dataset: non-finite target");
  }
  if (!feature_scaling.empty()) {
    if (feature_scaling.shift.size() != static_cast<std::size_t>(features.cols()) ||
        feature_scaling.scale.size() != feature_scaling.shift.size()) {
      throw Error("dataset: scaling record does not match the feature count");
    }
    for (double s : feature_scaling.scale) {
      if (s == 0.0 || !std::isfinite(s)) throw Error("dataset: scaling is not invertible");
    }
  }
}

Dataset scale_features(const Dataset& raw) {
  raw.validate();
  if (raw.scaled()) {
    throw Error("scale_features: dataset is already scaled");
  }
  Dataset out = raw;
  out.feature_scaling = fit_standardization(raw.features);
  out.features = out.feature_scaling.apply(raw.features);
  return out;
}

Dataset unscale(const Dataset& scaled) {
  scaled.validate();
  if (!scaled.scaled()) {
    throw Error("unscale: dataset carries no scaling record");
  }
  Dataset out = scaled;
  out.features = scaled.feature_scaling.invert(scaled.features);
  out.feature_scaling = {};
  return out;
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "gp") return ModelKind::gp;
  if (name == "ann") return ModelKind::ann;
  throw Error("unknown model kind '" + name + "' (expected gp or ann)");
}

std::string to_string(ModelKind kind) { return kind == ModelKind::gp ? "gp" : "ann"; }

Surrogate Surrogate::fit(const Dataset& raw, const SurrogateSettings& settings,
                         std::uint64_t seed) {
  raw.validate();
  if (raw.scaled()) {
    throw Error("Surrogate::fit: expects raw features");
  }
  Surrogate s;
  s.kind_ = settings.kind;
  s.features_ = fit_standardization(raw.features);
  const Matrix x = s.features_.apply(raw.features);

  const double mean = raw.targets.mean();
  const double sd = std::sqrt((raw.targets.array() - mean).square().mean());
  s.target_shift_ = mean;
  s.target_scale_ = sd > 0.0 ? sd : 1.0;
  const Vector y = (raw.targets.array() - s.target_shift_) / s.target_scale_;

  if (settings.kind == ModelKind::gp) {
    s.gp_ = gp_fit(x, y, settings.gp_init, settings.gp, seed, 0.0);
  } else {
    if (settings.ann.hidden_layers < 1 || settings.ann.hidden_width < 1) {
      throw Error("Surrogate::fit: ANN needs at least one hidden layer of positive width");
    }
    std::vector<int> sizes{raw.dim()};
    for (int l = 0; l < settings.ann.hidden_layers; ++l) sizes.push_back(settings.ann.hidden_width);
    sizes.push_back(1);
    s.ann_ = ann_train(ann_init(sizes, seed), x, y, settings.ann.train, seed + 1, &s.report_);
  }
  return s;
}

Surrogate Surrogate::from_parts(ModelKind kind, AffineScaling features, double target_shift,
                                double target_scale, std::optional<GpModel> gp,
                                std::optional<AnnModel> ann) {
  if ((kind == ModelKind::gp && !gp) || (kind == ModelKind::ann && !ann)) {
    throw Error("Surrogate::from_parts: parameters for the declared model kind are missing");
  }
  if (!(target_scale != 0.0) || !std::isfinite(target_scale)) {
    throw Error("Surrogate::from_parts: target scale must be finite and nonzero");
  }
  Surrogate s;
  s.kind_ = kind;
  s.features_ = std::move(features);
  s.target_shift_ = target_shift;
  s.target_scale_ = target_scale;
  s.gp_ = std::move(gp);
  s.ann_ = std::move(ann);
  if (s.ann_) s.ann_->validate();
  return s;
}

int Surrogate::input_dim() const { return static_cast<int>(features_.shift.size()); }

Vector Surrogate::predict(const Matrix& z) const {
  const Matrix x = features_.apply(z);
  const Vector y = kind_ == ModelKind::gp ? gp_predict_mean(*gp_, x) : ann_forward(*ann_, x);
  return y.array() * target_scale_ + target_shift_;
}

double Surrogate::predict(const Vector& z) const {
  return predict(Matrix(z.transpose()))(0);
}

GpPrediction Surrogate::predict_distribution(const Vector& z) const {
  if (kind_ != ModelKind::gp) {
    throw Error("predict_distribution: only Gaussian process surrogates carry a variance");
  }
  GpPrediction p = gp_predict(*gp_, features_.apply(z));
  const double s2 = target_scale_ * target_scale_;
  p.mean = p.mean * target_scale_ + target_shift_;
  p.latent_variance *= s2;
  p.variance *= s2;
  return p;
}

}  // namespace locrom
