#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "locrom/error.hpp"

namespace locrom {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thin SVD m = U diag(sigma) Vt with sigma non-increasing.
///
/// Signs are fixed so that the entry of largest magnitude in every left
/// singular vector is positive (lowest row index wins a tie); the matching
/// row of Vt is flipped with it. Bases built from the same snapshots are
/// therefore bit-reproducible across runs.
struct SvdResult {
  Matrix U;
  Vector sigma;
  Matrix Vt;
};

SvdResult svd(const Matrix& m);

/// Modified Gram-Schmidt with one reorthogonalization pass. Columns whose
/// norm after projection falls below drop_tol are discarded; the surviving
/// columns keep their input order.
Matrix orthonormalize(const Matrix& cols, double drop_tol = 1e-10);

/// Solves a x = b by LU with partial pivoting. Throws when a pivot falls
/// below 1e-14 relative to the largest entry of a.
Vector solve_linear(const Matrix& a, const Vector& b);

/// Lagrange basis polynomials L_j evaluated at a query parameter.
struct InterpolationStencil {
  std::vector<double> nodes;
  std::vector<double> weights;
};

InterpolationStencil lagrange_weights(std::span<const double> nodes, double query);

/// ||P_a - P_b||_F for the orthogonal projectors onto span(a) and span(b).
/// Both inputs must have orthonormal columns.
double projector_distance(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& m);

}  // namespace locrom
