#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "locrom/surrogate.hpp"

namespace locrom {

/// phi(mu0, mu, k): log of the ROM error at parameter mu0 when the basis and
/// reduced operators come from the trajectory at mu with k modes.
class ErrorModel {
public:
  virtual ~ErrorModel() = default;
  virtual double log_error(double mu0, double mu, int k) const = 0;
};

class FunctionErrorModel : public ErrorModel {
public:
  explicit FunctionErrorModel(std::function<double(double, double, int)> f) : f_(std::move(f)) {}
  double log_error(double mu0, double mu, int k) const override { return f_(mu0, mu, k); }

private:
  std::function<double(double, double, int)> f_;
};

/// Surrogate trained on features (mu0, mu, k).
class SurrogateErrorModel : public ErrorModel {
public:
  explicit SurrogateErrorModel(const Surrogate& s);
  double log_error(double mu0, double mu, int k) const override;

private:
  const Surrogate& s_;
};

struct FeasibleInterval {
  double center_mu = 0.0;
  double d_left = 0.0;
  double d_right = 0.0;
  double threshold = 0.0;
  int basis_dim = 0;
};

/// Raised when the model already violates the threshold at the center.
class InfeasibleCenter : public Error {
public:
  using Error::Error;
};

/// A probe violates when log_error >= log(threshold). Probes at mu0 <= 0 are
/// outside the physical range and always violate.
bool violates(const ErrorModel& model, double mu0, double mu, int k, double log_threshold);

/// Walks outward from mu in steps of probe_step up to floor(max_radius /
/// probe_step) probes per side (at least one) and stops each side at its
/// first violation. Edges are the last satisfying probes, or mu +- max
/// probes when nothing violates.
FeasibleInterval find_feasible_interval(const ErrorModel& model, double mu, int dim,
                                        double threshold, double probe_step, double max_radius);

struct MapConfig {
  double A = 0.01;
  double B = 1.0;
  double eps0 = 1e-2;
  double delta_s = 5e-3;
  double r0 = 0.5;
  int dim = 9;
  double beta1 = 1.2;
  double beta2 = 0.9;
  double beta3 = 1.4;
  double mu_start = 0.87;
  int max_iterations = 500;
  int max_repairs = 50;
  int max_bisections = 50;

  void validate() const;
};

struct ParametricMap {
  std::vector<FeasibleInterval> intervals;  // right to left
  MapConfig config;
};

/// build_map gave up (iteration or repair cap); partial holds the intervals
/// built so far.
class MapIncomplete : public Error {
public:
  MapIncomplete(const std::string& what, ParametricMap partial)
      : Error(what), partial_(std::move(partial)) {}
  const ParametricMap& partial() const { return partial_; }

private:
  ParametricMap partial_;
};

/// Greedy right-to-left covering of [A, B] with feasible intervals whose
/// thresholds grow as the dynamics become harder to reduce.
ParametricMap build_map(const ErrorModel& model, const MapConfig& config);

struct RankedBasis {
  double mu = 0.0;
  double predicted_log_error = 0.0;
};

/// Candidates sorted by predicted log error, ties broken by distance to
/// query_mu and then by the smaller mu.
std::vector<RankedBasis> rank_bases(const ErrorModel& model, double query_mu,
                                    std::span<const double> candidate_mus, int dim);

inline constexpr int kMinBasisDim = 4;
inline constexpr int kMaxBasisDim = 15;

/// (mu, target log eps) -> real-valued basis size.
using DimensionModel = std::function<double(double mu, double target_log_eps)>;

DimensionModel dimension_model(const Surrogate& s);

/// Model output rounded to the nearest integer and clamped to [4, 15].
int predict_dimension(const DimensionModel& model, double mu, double target_log_eps);

struct SpectrumEstimate {
  int k = 0;
  bool saturated = false;  // no k below the full rank reaches the target
};

/// How the spectrum vouches for a truncation at k modes.
///   largest_removed: sigma_{k+1} <= target, the first discarded singular value
///   tail: sum_{i>k} sigma_i <= target, or sqrt(sum_{i>k} sigma_i^2) with on_squares
enum class SpectrumRule { largest_removed, tail };
SpectrumRule parse_spectrum_rule(const std::string& name);
std::string to_string(SpectrumRule rule);

/// Smallest k whose truncation meets target_eps under the rule.
SpectrumEstimate spectrum_dimension_baseline(const Vector& sigma, double target_eps,
                                             SpectrumRule rule = SpectrumRule::largest_removed,
                                             bool on_squares = false);

}  // namespace locrom
