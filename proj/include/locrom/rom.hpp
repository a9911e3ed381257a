#pragma once

#include <limits>
#include <variant>
#include <vector>

#include "locrom/burgers.hpp"
#include "locrom/numerics.hpp"

namespace locrom {

/// Error value recorded for a reduced run whose Newton iteration failed.
/// Rows carrying it are excluded from surrogate training by default.
inline constexpr double kDivergedError = 1e100;

struct PodBasis {
  Matrix modes;         // N x k, orthonormal columns
  Vector sigma;         // full spectrum of the source snapshots
  double source_mu = 0.0;
  double gamma = std::numeric_limits<double>::quiet_NaN();  // NaN when k was explicit

  int dim() const { return static_cast<int>(modes.cols()); }
};

/// Explicit basis dimension.
struct FixedDimension {
  int k;
};

/// k = min{ m : I(m) >= gamma } with I(m) the cumulative singular-value
/// fraction. With on_squares the fraction is taken over sigma_i^2 instead.
struct EnergyFraction {
  double gamma = 0.99;
  bool on_squares = false;
};

using BasisSize = std::variant<FixedDimension, EnergyFraction>;

int energy_dimension(const Vector& sigma, double gamma, bool on_squares = false);

PodBasis build_basis(const SnapshotMatrix& snaps, const BasisSize& size);
PodBasis build_basis(const Matrix& states, double source_mu, const BasisSize& size);

/// Leading k columns of an existing basis.
PodBasis truncate(const PodBasis& basis, int k);

/// Precomputed Galerkin operators. The diffusion block is stored without
/// the viscosity so one assembly serves every query parameter.
struct RomOperators {
  PodBasis basis;
  Matrix diffusion;                // U^T A_xx U
  std::vector<double> advection;   // k^3, T[i][j][l] at (i*k + j)*k + l
  Vector reduced_ic;               // U^T x(0)

  int dim() const { return basis.dim(); }
  double tensor(int i, int j, int l) const {
    const int k = dim();
    return advection[(static_cast<std::size_t>(i) * k + j) * k + l];
  }
};

RomOperators assemble(const PodBasis& basis, const Grid& grid, const Vector& u0);

/// Reduced right-hand side -nu T:aa + mu D a.
Vector reduced_rhs(const RomOperators& ops, const ModelParams& query, const Vector& a);

/// U^T F(U a) evaluated through the full-order operators.
Vector lifted_rhs(const PodBasis& basis, const DerivativeOperators& full, const ModelParams& query,
                  const Vector& a);

struct RomSolution {
  Matrix reduced_states;  // k x N_t
  Matrix modes;           // basis used for lifting
  double query_mu = 0.0;
  double basis_mu = 0.0;

  Matrix lift() const { return modes * reduced_states; }
};

/// Backward Euler + Newton in the reduced space. Throws NewtonFailure when a
/// step fails to converge.
RomSolution integrate(const RomOperators& ops, const ModelParams& query, const Grid& grid,
                      const SolverSettings& settings);

/// || X - U Xr ||_F
double rom_error_frobenius(const SnapshotMatrix& hf, const RomSolution& rom);

/// max_i || x(t_i) - U xr(t_i) ||_2
double rom_error_max_over_time(const SnapshotMatrix& hf, const RomSolution& rom);

/// || X - U U^T X ||_F
double projection_error(const Matrix& states, const Matrix& modes);

}  // namespace locrom
