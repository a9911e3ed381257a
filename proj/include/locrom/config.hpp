#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "locrom/atlas.hpp"
#include "locrom/burgers.hpp"
#include "locrom/surrogate.hpp"

namespace locrom {

using Json = nlohmann::json;

/// Error-model sample grid: every (mu0, mu, k) triple.
struct ErrorDatasetConfig {
  std::vector<double> basis_mus;  // mu, trajectory that generates the basis
  std::vector<double> query_mus;  // mu0, where the ROM is run
  std::vector<int> dims;
};

/// Dimension-selection samples (mu, log eps(mu, mu, k), k) on an equispaced mu grid.
struct DimensionDatasetConfig {
  double mu_min = 0.01;
  double mu_max = 1.0;
  int mu_count = 750;
  std::vector<int> dims;
};

struct IntervalConfig {
  double center_mu = 0.7;
  int dim = 9;
  double threshold = 1e-2;
  double probe_step = 1e-3;
  double max_radius = 0.5;
};

struct SelectBasisConfig {
  double query_mu = 0.35;
  std::vector<double> candidate_mus;
  int dim = 12;
};

struct CombineConfig {
  double query_mu = 0.35;
  double mu1 = 0.3;
  double mu2 = 0.4;
  std::vector<double> final_times{0.01, 1.0};
  std::vector<double> nu_sweep{0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
  int dim_for_nu_sweep = 14;
  std::vector<int> dim_sweep;
  double nu_for_dim_sweep = 1.0;
};

struct DimensionStudyConfig {
  double target_eps = 1e-3;
  double test_fraction = 0.2;
  int repeats = 5;
  SpectrumRule spectrum_rule = SpectrumRule::largest_removed;
};

struct ExperimentConfig {
  Grid grid;
  ModelParams model;
  SolverSettings solver;
  Polynomial initial_condition = default_initial_polynomial();
  std::vector<double> simulate_mus{0.8};
  double energy_gamma = 0.99;
  bool energy_on_squares = false;

  ErrorDatasetConfig error_dataset;
  DimensionDatasetConfig dimension_dataset;
  bool log_targets = true;
  SurrogateSettings error_model;
  SurrogateSettings dimension_model;
  int folds = 5;

  IntervalConfig interval;
  MapConfig map;
  SelectBasisConfig select_basis;
  CombineConfig combine;
  DimensionStudyConfig dimension_study;

  std::uint64_t seed = 1;

  /// Settings of the full Burgers viscosity study.
  static ExperimentConfig defaults();
  void validate() const;
};

Json to_json(const ExperimentConfig& c);

/// Parses a config document. Omitted keys keep their defaults; unknown keys
/// are rejected so that typos do not silently fall back to defaults.
ExperimentConfig config_from_json(const Json& j);

ExperimentConfig load_config(const std::string& path);

/// 64-bit FNV-1a of the canonical JSON text, as 16 hex digits.
std::string fingerprint(const ExperimentConfig& c);
std::string fnv1a_hex(const std::string& bytes);

/// Equispaced values lo, lo + step, ... with n entries, rounded to 12
/// decimals so that grids such as 0.01..1.00 hold the literal decimals.
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace locrom
