#pragma once

#include <string>
#include <vector>

#include "locrom/config.hpp"
#include "locrom/io.hpp"
#include "locrom/oracle.hpp"

namespace locrom {

/// Oracle for the grid, initial condition, advection and solver of a config.
RomOracle make_oracle(const ExperimentConfig& c);

struct ErrorSample {
  double mu0 = 0.0;
  double mu = 0.0;
  int k = 0;
  double log_eps = 0.0;
  bool diverged = false;
};

/// One sample per (mu, k, mu0) in that loop order.
std::vector<ErrorSample> generate_error_dataset(RomOracle& oracle, const ErrorDatasetConfig& c);

/// Columns mu0,mu,k,log_eps,diverged (1 when either Newton iteration failed).
Table error_table(const std::vector<ErrorSample>& samples);
std::vector<ErrorSample> error_samples_from_table(const Table& t);

/// Features (mu0, mu, k). Targets are log eps, or eps itself when
/// log_targets is false. Diverged samples are dropped.
Dataset error_training_set(const std::vector<ErrorSample>& samples, bool log_targets);

struct DimensionSample {
  double mu = 0.0;
  double log_eps = 0.0;  // error of the k-mode ROM run at its own parameter
  int k = 0;
  bool diverged = false;
};

std::vector<double> dimension_mus(const DimensionDatasetConfig& c);
std::vector<DimensionSample> generate_dimension_dataset(RomOracle& oracle,
                                                        const DimensionDatasetConfig& c);

/// Columns mu,log_eps_target,k,diverged.
Table dimension_table(const std::vector<DimensionSample>& samples);
std::vector<DimensionSample> dimension_samples_from_table(const Table& t);

/// Features (mu, log eps), target k. Diverged samples are dropped.
Dataset dimension_training_set(const std::vector<DimensionSample>& samples);

/// ROM Frobenius errors at query_mu for every way of obtaining a basis.
struct CombinationErrors {
  double basis1 = 0.0;     // U(mu1) alone
  double basis2 = 0.0;     // U(mu2) alone
  double matrix = 0.0;     // Lagrange interpolation of the basis matrices
  double grassmann = 0.0;  // interpolation in the Grassmann tangent space
  double concatenation = 0.0;
  double solution = 0.0;   // POD of interpolated trajectories
  int concatenation_dim = 0;
};

CombinationErrors combination_errors(const Grid& grid, const Vector& u0, double nu, int k,
                                     double query_mu, double mu1, double mu2,
                                     const SolverSettings& solver, const EnergyFraction& energy);

struct CombinationRow {
  std::string sweep;  // "nu" or "dim"
  double final_time = 0.0;
  double nu = 0.0;
  int k = 0;
  CombinationErrors errors;
};

std::vector<CombinationRow> run_combination_study(const ExperimentConfig& c);
Table combination_table(const std::vector<CombinationRow>& rows);

struct DimensionStudy {
  FoldReport folds;                  // k-fold on (mu, log eps) -> k
  std::vector<int> predicted;        // rounded out-of-fold predictions
  std::vector<int> truth;
  double exact_rate = 0.0;
  double within_one_rate = 0.0;
  std::vector<double> discrepancy_share;  // |k_hat - k| = 0, 1, 2, 3, 4, > 4
  double discrepancy_variance = 0.0;

  // Fixed-accuracy comparison against the spectrum rule on held-out mu.
  std::vector<double> test_mus;
  std::vector<int> test_true_k;      // smallest k meeting the target, 0 if none
  std::vector<double> test_model_k;  // averaged over repeats
  std::vector<int> test_spectrum_k;
  double spectrum_not_above_rate = 0.0;  // share of cases with spectrum k <= true k
};

DimensionStudy run_dimension_study(const std::vector<DimensionSample>& samples,
                                   RomOracle& oracle, const ExperimentConfig& c);

}  // namespace locrom
