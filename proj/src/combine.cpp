#include "locrom/combine.hpp"

#include <cmath>
#include <sstream>

namespace locrom {

namespace {

std::vector<double> source_params(std::span<const PodBasis> bases) {
  std::vector<double> mus;
  mus.reserve(bases.size());
  for (const auto& b : bases) mus.push_back(b.source_mu);
  return mus;
}

void require_same_shape(std::span<const PodBasis> bases, const char* who) {
  if (bases.empty()) {
    throw Error(std::string(who) + ": no bases given");
  }
  for (const auto& b : bases) {
    if (b.modes.rows() != bases[0].modes.rows() || b.dim() != bases[0].dim()) {
      throw Error(std::string(who) + ": bases differ in shape");
    }
  }
}

}  // namespace

Matrix align_signs(const Matrix& basis, const Matrix& reference) {
  Matrix out = basis;
  const Eigen::Index n = std::min(basis.cols(), reference.cols());
  for (Eigen::Index j = 0; j < n; ++j) {
    if (out.col(j).dot(reference.col(j)) < 0.0) out.col(j) *= -1.0;
  }
  return out;
}

PodBasis interpolate_bases_matrix(std::span<const PodBasis> bases, double query_mu) {
  require_same_shape(bases, "interpolate_bases_matrix");
  const auto mus = source_params(bases);
  const InterpolationStencil st = lagrange_weights(mus, query_mu);

  Matrix mix = Matrix::Zero(bases[0].modes.rows(), bases[0].dim());
  for (std::size_t j = 0; j < bases.size(); ++j) {
    mix += st.weights[j] * align_signs(bases[j].modes, bases[0].modes);
  }
  Matrix q = orthonormalize(mix);
  if (q.cols() < bases[0].dim()) {
    std::ostringstream msg;
    msg << "interpolate_bases_matrix: rank collapse, retained " << q.cols() << " of "
        << bases[0].dim() << " columns";
    throw Error(msg.str());
  }
  PodBasis out;
  out.modes = std::move(q);
  out.source_mu = query_mu;
  return out;
}

TangentMatrix grassmann_log(const PodBasis& origin, const PodBasis& other) {
  const Matrix& u0 = origin.modes;
  const Matrix& u = other.modes;
  if (u0.rows() != u.rows() || u0.cols() != u.cols()) {
    throw Error("grassmann_log: bases differ in shape");
  }
  const Matrix overlap = u0.transpose() * u;
  // rows of (U0^T U)^{-1} via k solves against the identity
  const Eigen::Index k = u0.cols();
  Matrix inv(k, k);
  try {
    for (Eigen::Index c = 0; c < k; ++c) {
      inv.col(c) = solve_linear(overlap, Vector::Unit(k, c));
    }
  } catch (const Error&) {
    throw Error("grassmann_log: U0^T U is singular, subspaces are too far apart");
  }
  const Matrix m = (u - u0 * overlap) * inv;
  const SvdResult dec = svd(m);
  Vector angles = dec.sigma.array().atan();
  return TangentMatrix{dec.U * angles.asDiagonal() * dec.Vt, 0};
}

PodBasis grassmann_exp(const PodBasis& origin, const TangentMatrix& tangent) {
  if (tangent.gamma.rows() != origin.modes.rows() || tangent.gamma.cols() != origin.modes.cols()) {
    throw Error("grassmann_exp: tangent shape does not match the origin basis");
  }
  const SvdResult dec = svd(tangent.gamma);
  const Vector c = dec.sigma.array().cos();
  const Vector s = dec.sigma.array().sin();
  PodBasis out;
  out.modes = origin.modes * dec.Vt.transpose() * c.asDiagonal() + dec.U * s.asDiagonal();
  out.source_mu = origin.source_mu;
  return out;
}

PodBasis interpolate_bases_grassmann(std::span<const PodBasis> bases, int origin_index,
                                     double query_mu) {
  require_same_shape(bases, "interpolate_bases_grassmann");
  if (origin_index < 0 || origin_index >= static_cast<int>(bases.size())) {
    throw Error("interpolate_bases_grassmann: origin index out of range");
  }
  const auto mus = source_params(bases);
  const InterpolationStencil st = lagrange_weights(mus, query_mu);
  const PodBasis& origin = bases[origin_index];

  TangentMatrix acc{Matrix::Zero(origin.modes.rows(), origin.dim()), origin_index};
  for (std::size_t j = 0; j < bases.size(); ++j) {
    if (static_cast<int>(j) == origin_index || st.weights[j] == 0.0) continue;
    acc.gamma += st.weights[j] * grassmann_log(origin, bases[j]).gamma;
  }
  PodBasis out = grassmann_exp(origin, acc);
  out.source_mu = query_mu;
  return out;
}

PodBasis concatenate_bases(const PodBasis& b1, int k1, const PodBasis& b2, int k2) {
  if (b1.modes.rows() != b2.modes.rows()) {
    throw Error("concatenate_bases: bases have different row dimension");
  }
  if (k1 < 1 || k1 > b1.dim() || k2 < 1 || k2 > b2.dim()) {
    std::ostringstream msg;
    msg << "concatenate_bases: k1=" << k1 << ", k2=" << k2 << " exceed available columns ("
        << b1.dim() << ", " << b2.dim() << ")";
    throw Error(msg.str());
  }
  Matrix stacked(b1.modes.rows(), k1 + k2);
  stacked << b1.modes.leftCols(k1), b2.modes.leftCols(k2);
  PodBasis out;
  out.modes = orthonormalize(stacked);
  out.source_mu = b1.source_mu;
  return out;
}

PodBasis interpolate_solutions(std::span<const SnapshotMatrix> snaps, double query_mu,
                               const BasisSize& size) {
  if (snaps.empty()) {
    throw Error("interpolate_solutions: no trajectories given");
  }
  std::vector<double> mus;
  for (const auto& s : snaps) {
    if (!(s.grid == snaps[0].grid) || s.states.rows() != snaps[0].states.rows() ||
        s.states.cols() != snaps[0].states.cols()) {
      throw Error("interpolate_solutions: trajectories live on different grids");
    }
    mus.push_back(s.params.mu);
  }
  const InterpolationStencil st = lagrange_weights(mus, query_mu);
  Matrix mix = Matrix::Zero(snaps[0].states.rows(), snaps[0].states.cols());
  for (std::size_t j = 0; j < snaps.size(); ++j) {
    mix += st.weights[j] * snaps[j].states;
  }
  return build_basis(mix, query_mu, size);
}

}  // namespace locrom
