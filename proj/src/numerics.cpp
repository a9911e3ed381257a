#include "locrom/numerics.hpp"

#include <cmath>
#include <sstream>

namespace locrom {

bool all_finite(const Matrix& m) {
  return m.allFinite();
}

SvdResult svd(const Matrix& m) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw Error("svd: empty matrix");
  }
  if (!m.allFinite()) {
    throw Error("svd: matrix has non-finite entries");
  }
  // One-sided Jacobi behind a pivoted QR: small singular values of the
  // snapshot matrices (tails near 1e-10 sigma_1) come out markedly more
  // accurate than with divide and conquer, and it is faster at these sizes.
  Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> dec(
      m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "svd: did not converge for " << m.rows() << "x" << m.cols() << " matrix";
    throw Error(msg.str());
  }

  SvdResult out{dec.matrixU(), dec.singularValues(), dec.matrixV().transpose()};
  for (Eigen::Index j = 0; j < out.U.cols(); ++j) {
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < out.U.rows(); ++i) {
      // strict comparison keeps the lowest index on ties
      const double mag = std::abs(out.U(i, j));
      if (mag > best) {
        best = mag;
        pivot = i;
      }
    }
    if (out.U(pivot, j) < 0.0) {
      out.U.col(j) *= -1.0;
      out.Vt.row(j) *= -1.0;
    }
  }
  return out;
}

Matrix orthonormalize(const Matrix& cols, double drop_tol) {
  if (cols.cols() < 1 || cols.rows() < 1) {
    throw Error("orthonormalize: no columns");
  }
  Matrix q(cols.rows(), cols.cols());
  Eigen::Index kept = 0;
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    Vector v = cols.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < kept; ++i) {
        v -= q.col(i).dot(v) * q.col(i);
      }
    }
    const double norm = v.norm();
    if (norm < drop_tol) {
      continue;
    }
    q.col(kept++) = v / norm;
  }
  if (kept == 0) {
    throw Error("orthonormalize: every column fell below the drop tolerance");
  }
  return q.leftCols(kept);
}

Vector solve_linear(const Matrix& a, const Vector& b) {
  const Eigen::Index n = a.rows();
  if (n != a.cols()) {
    throw Error("solve_linear: matrix is not square");
  }
  if (b.size() != n) {
    throw Error("solve_linear: right-hand side has wrong length");
  }
  Matrix lu = a;
  Vector x = b;
  const double scale = a.cwiseAbs().maxCoeff();
  const double tol = 1e-14 * (scale > 0.0 ? scale : 1.0);

  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index p;
    const double pivot = lu.col(k).tail(n - k).cwiseAbs().maxCoeff(&p);
    p += k;
    if (pivot < tol) {
      std::ostringstream msg;
      msg << "solve_linear: matrix is singular (pivot " << pivot << " at column " << k << ")";
      throw Error(msg.str());
    }
    if (p != k) {
      lu.row(k).swap(lu.row(p));
      std::swap(x(k), x(p));
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double f = lu(i, k) / lu(k, k);
      if (f == 0.0) continue;
      lu.row(i).tail(n - k - 1) -= f * lu.row(k).tail(n - k - 1);
      x(i) -= f * x(k);
    }
  }
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    double s = x(k);
    for (Eigen::Index j = k + 1; j < n; ++j) {
      s -= lu(k, j) * x(j);
    }
    x(k) = s / lu(k, k);
  }
  return x;
}

InterpolationStencil lagrange_weights(std::span<const double> nodes, double query) {
  if (nodes.empty()) {
    throw Error("lagrange_weights: no nodes");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (nodes[i] == nodes[j]) {
        std::ostringstream msg;
        msg << "lagrange_weights: duplicate node " << nodes[i];
        throw Error(msg.str());
      }
    }
  }
  InterpolationStencil st{{nodes.begin(), nodes.end()}, std::vector<double>(nodes.size(), 1.0)};
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (i != j) {
        st.weights[j] *= (query - nodes[i]) / (nodes[j] - nodes[i]);
      }
    }
  }
  return st;
}

double projector_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw Error("projector_distance: row mismatch");
  }
  // formed explicitly: the trace identity cancels catastrophically near zero
  const Matrix diff = a * a.transpose() - b * b.transpose();
  return diff.norm();
}

}  // namespace locrom
