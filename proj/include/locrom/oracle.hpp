#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <memory>

#include "locrom/atlas.hpp"
#include "locrom/rom.hpp"

namespace locrom {

/// Ground-truth ROM errors: full-order trajectories and POD bases are
/// computed on demand and memoized per parameter value. Not thread-safe.
class RomOracle {
public:
  RomOracle(Grid grid, Vector u0, double nu, SolverSettings settings,
            std::size_t max_cached_trajectories = 512);

  /// Full-order trajectory at viscosity mu. Throws NewtonFailure.
  std::shared_ptr<const SnapshotMatrix> trajectory(double mu);

  /// POD basis holding every left singular vector of the trajectory at mu.
  std::shared_ptr<const PodBasis> full_basis(double mu);

  /// Frobenius error of the k-mode ROM built at mu and run at mu0.
  /// Returns kDivergedError when either Newton iteration fails.
  double error(double mu0, double mu, int k);

  const Grid& grid() const { return grid_; }
  const Vector& initial_state() const { return u0_; }
  double nu() const { return nu_; }
  const SolverSettings& solver() const { return settings_; }
  int full_solves() const { return full_solves_; }
  int reduced_solves() const { return reduced_solves_; }

private:
  Grid grid_;
  Vector u0_;
  double nu_;
  SolverSettings settings_;
  std::size_t capacity_;
  std::map<double, std::shared_ptr<const SnapshotMatrix>> trajectories_;
  std::deque<double> trajectory_order_;
  std::map<double, std::shared_ptr<const PodBasis>> bases_;
  std::deque<double> basis_order_;
  int full_solves_ = 0;
  int reduced_solves_ = 0;
};

/// log of RomOracle::error.
class OracleErrorModel : public ErrorModel {
public:
  explicit OracleErrorModel(RomOracle& oracle) : oracle_(oracle) {}
  double log_error(double mu0, double mu, int k) const override;

private:
  RomOracle& oracle_;
};

}  // namespace locrom
