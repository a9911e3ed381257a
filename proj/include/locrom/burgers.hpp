#pragma once

#include <vector>

#include "locrom/numerics.hpp"

namespace locrom {

/// Uniform space-time grid on [0, length] x [0, final_time]. Boundary nodes
/// are counted in n_space_points but carry no unknowns.
struct Grid {
  double length = 1.0;
  double final_time = 1.0;
  int n_space_points = 201;
  int n_time_points = 301;

  double dx() const { return length / (n_space_points - 1); }
  double dt() const { return final_time / (n_time_points - 1); }
  int interior() const { return n_space_points - 2; }
  /// Coordinate of interior unknown i (0-based).
  double x(int i) const { return (i + 1) * dx(); }

  void validate() const;
  bool operator==(const Grid&) const = default;
};

struct ModelParams {
  double mu = 0.8;  // viscosity
  double nu = 1.0;  // advection scaling

  void validate() const;
};

struct SolverSettings {
  int max_newton_iters = 50;
  double newton_tol = 1e-10;
};

/// Interior-node velocities, one column per time level (column 0 = initial
/// condition).
struct SnapshotMatrix {
  Matrix states;
  Grid grid;
  ModelParams params;
};

/// Centered first and second derivative matrices on the interior nodes with
/// homogeneous Dirichlet values folded in.
struct DerivativeOperators {
  Matrix first;   // A_x
  Matrix second;  // A_xx
};

DerivativeOperators build_operators(const Grid& grid);

/// Polynomial in the scaled coordinate s = x / L, coefficients ascending.
struct Polynomial {
  std::vector<double> coefficients;

  double operator()(double s) const;  // Horner
  int degree() const { return static_cast<int>(coefficients.size()) - 1; }
};

/// Degree-7 single-hump profile vanishing at both ends of the domain.
Polynomial default_initial_polynomial();

/// Samples p(x/L) on the interior nodes.
Vector sample_initial_condition(const Grid& grid, const Polynomial& p);
Vector default_initial_condition(const Grid& grid);

/// F(u) = -nu u .* (A_x u) + mu A_xx u
Vector burgers_rhs(const DerivativeOperators& ops, const ModelParams& params, const Vector& u);

/// Backward Euler residual G(v) = v - u_prev - dt F(v).
Vector step_residual(const DerivativeOperators& ops, const ModelParams& params, double dt,
                     const Vector& u_prev, const Vector& v);

/// dG/dv as a dense matrix. The solver itself uses the tridiagonal structure.
Matrix step_jacobian(const DerivativeOperators& ops, const ModelParams& params, double dt,
                     const Vector& v);

/// Backward Euler in time, plain Newton per step starting from the previous
/// state. Throws NewtonFailure naming the step and final residual.
SnapshotMatrix solve(const Grid& grid, const ModelParams& params, const SolverSettings& settings,
                     const Vector& u0);

}  // namespace locrom
