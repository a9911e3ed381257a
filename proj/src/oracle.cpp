#include "locrom/oracle.hpp"

#include <cmath>
#include <sstream>

namespace locrom {

RomOracle::RomOracle(Grid grid, Vector u0, double nu, SolverSettings settings,
                     std::size_t max_cached_trajectories)
    : grid_(grid),
      u0_(std::move(u0)),
      nu_(nu),
      settings_(settings),
      capacity_(std::max<std::size_t>(1, max_cached_trajectories)) {
  grid_.validate();
  if (u0_.size() != grid_.interior()) {
    throw Error("RomOracle: initial state does not match the grid");
  }
}

std::shared_ptr<const SnapshotMatrix> RomOracle::trajectory(double mu) {
  if (auto it = trajectories_.find(mu); it != trajectories_.end()) return it->second;
  auto snap =
      std::make_shared<const SnapshotMatrix>(solve(grid_, ModelParams{mu, nu_}, settings_, u0_));
  ++full_solves_;
  if (trajectories_.size() >= capacity_) {
    trajectories_.erase(trajectory_order_.front());
    trajectory_order_.pop_front();
  }
  trajectories_.emplace(mu, snap);
  trajectory_order_.push_back(mu);
  return snap;
}

std::shared_ptr<const PodBasis> RomOracle::full_basis(double mu) {
  if (auto it = bases_.find(mu); it != bases_.end()) return it->second;
  const auto snap = trajectory(mu);
  const int rank = static_cast<int>(std::min(snap->states.rows(), snap->states.cols()));
  auto basis = std::make_shared<const PodBasis>(build_basis(*snap, FixedDimension{rank}));
  if (bases_.size() >= capacity_) {
    bases_.erase(basis_order_.front());
    basis_order_.pop_front();
  }
  bases_.emplace(mu, basis);
  basis_order_.push_back(mu);
  return basis;
}

double RomOracle::error(double mu0, double mu, int k) {
  std::shared_ptr<const SnapshotMatrix> reference;
  std::shared_ptr<const PodBasis> basis;
  try {
    reference = trajectory(mu0);
    basis = full_basis(mu);
  } catch (const NewtonFailure&) {
    return kDivergedError;
  }
  if (k < 1 || k > basis->dim()) {
    std::ostringstream msg;
    msg << "RomOracle::error: k=" << k << " outside [1, " << basis->dim() << "]";
    throw Error(msg.str());
  }
  const RomOperators ops = assemble(truncate(*basis, k), grid_, u0_);
  ++reduced_solves_;
  try {
    const RomSolution rom = integrate(ops, ModelParams{mu0, nu_}, grid_, settings_);
    const double e = rom_error_frobenius(*reference, rom);
    return std::isfinite(e) ? e : kDivergedError;
  } catch (const NewtonFailure&) {
    return kDivergedError;
  }
}

double OracleErrorModel::log_error(double mu0, double mu, int k) const {
  if (!(mu0 > 0.0)) return std::log(kDivergedError);
  return std::log(oracle_.error(mu0, mu, k));
}

}  // namespace locrom
