#pragma once

#include <span>
#include <vector>

#include "locrom/rom.hpp"

namespace locrom {

/// Point of the tangent space at the subspace spanned by an origin basis.
struct TangentMatrix {
  Matrix gamma;          // N x k
  int origin_index = 0;  // which basis of the family anchors the tangent space
};

/// Entrywise Lagrange interpolation of the basis matrices followed by
/// re-orthonormalization. Columns of every basis are sign-aligned with the
/// first basis before mixing.
PodBasis interpolate_bases_matrix(std::span<const PodBasis> bases, double query_mu);

/// Logarithm map at span(origin): Gamma = R atan(Lambda) Q^T where
/// R Lambda Q^T = (I - U0 U0^T) U (U0^T U)^{-1}.
TangentMatrix grassmann_log(const PodBasis& origin, const PodBasis& other);

/// Exponential map: U0 Q cos(Lambda) + R sin(Lambda) for Gamma = R Lambda Q^T.
PodBasis grassmann_exp(const PodBasis& origin, const TangentMatrix& tangent);

/// Interpolates the log-mapped bases in the tangent space at
/// bases[origin_index] and maps the result back.
PodBasis interpolate_bases_grassmann(std::span<const PodBasis> bases, int origin_index,
                                     double query_mu);

/// Orthonormalized [U1(:, 1:k1)  U2(:, 1:k2)]; dependent columns are dropped.
PodBasis concatenate_bases(const PodBasis& b1, int k1, const PodBasis& b2, int k2);

/// POD of the Lagrange interpolant sum_j L_j(query) X_j of full trajectories.
PodBasis interpolate_solutions(std::span<const SnapshotMatrix> snaps, double query_mu,
                               const BasisSize& size);

/// Flips columns of `basis` whose dot product with the matching column of
/// `reference` is negative.
Matrix align_signs(const Matrix& basis, const Matrix& reference);

}  // namespace locrom
