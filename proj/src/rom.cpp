#include "locrom/rom.hpp"

#include <cmath>
#include <sstream>

namespace locrom {

int energy_dimension(const Vector& sigma, double gamma, bool on_squares) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    std::ostringstream msg;
    msg << "energy fraction gamma must lie in (0, 1], got " << gamma;
    throw Error(msg.str());
  }
  if (sigma.size() == 0) {
    throw Error("energy_dimension: empty spectrum");
  }
  const Vector w = on_squares ? Vector(sigma.array().square()) : sigma;
  const double total = w.sum();
  if (!(total > 0.0)) {
    return 1;
  }
  double acc = 0.0;
  for (Eigen::Index m = 0; m < w.size(); ++m) {
    acc += w(m);
    if (acc / total >= gamma) {
      return static_cast<int>(m + 1);
    }
  }
  return static_cast<int>(w.size());
}

PodBasis build_basis(const Matrix& states, double source_mu, const BasisSize& size) {
  if (states.size() == 0) {
    throw Error("build_basis: empty snapshot matrix");
  }
  SvdResult dec = svd(states);
  const int max_k = static_cast<int>(dec.sigma.size());
  PodBasis basis;
  basis.sigma = dec.sigma;
  basis.source_mu = source_mu;

  int k = 0;
  if (const auto* fixed = std::get_if<FixedDimension>(&size)) {
    if (fixed->k < 1 || fixed->k > max_k) {
      std::ostringstream msg;
      msg << "build_basis: requested k=" << fixed->k << " outside [1, " << max_k << "]";
      throw Error(msg.str());
    }
    k = fixed->k;
  } else {
    const auto& e = std::get<EnergyFraction>(size);
    k = energy_dimension(dec.sigma, e.gamma, e.on_squares);
    basis.gamma = e.gamma;
  }
  basis.modes = dec.U.leftCols(k);
  return basis;
}

PodBasis build_basis(const SnapshotMatrix& snaps, const BasisSize& size) {
  return build_basis(snaps.states, snaps.params.mu, size);
}

PodBasis truncate(const PodBasis& basis, int k) {
  if (k < 1 || k > basis.dim()) {
    std::ostringstream msg;
    msg << "truncate: k=" << k << " outside [1, " << basis.dim() << "]";
    throw Error(msg.str());
  }
  PodBasis out = basis;
  out.modes = basis.modes.leftCols(k);
  return out;
}

RomOperators assemble(const PodBasis& basis, const Grid& grid, const Vector& u0) {
  const DerivativeOperators full = build_operators(grid);
  const Matrix& u = basis.modes;
  if (u.rows() != grid.interior() || u0.size() != grid.interior()) {
    throw Error("assemble: basis or initial state does not match the grid");
  }
  const int k = basis.dim();
  RomOperators ops;
  ops.basis = basis;
  ops.diffusion = u.transpose() * full.second * u;
  ops.reduced_ic = u.transpose() * u0;

  const Matrix ax_u = full.first * u;
  ops.advection.assign(static_cast<std::size_t>(k) * k * k, 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= i; ++j) {
      const Vector w = u.col(i).cwiseProduct(u.col(j));
      const Vector slice = ax_u.transpose() * w;
      for (int l = 0; l < k; ++l) {
        ops.advection[(static_cast<std::size_t>(i) * k + j) * k + l] = slice(l);
        ops.advection[(static_cast<std::size_t>(j) * k + i) * k + l] = slice(l);
      }
    }
  }
  return ops;
}

namespace {

// b(i, j) = sum_l T[i][j][l] a_l
Matrix contract_last(const RomOperators& ops, const Vector& a) {
  const int k = ops.dim();
  Matrix b(k, k);
  const double* t = ops.advection.data();
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      const double* row = t + (static_cast<std::size_t>(i) * k + j) * k;
      for (int l = 0; l < k; ++l) s += row[l] * a(l);
      b(i, j) = s;
    }
  }
  return b;
}

}  // namespace

Vector reduced_rhs(const RomOperators& ops, const ModelParams& query, const Vector& a) {
  const Matrix b = contract_last(ops, a);
  return -query.nu * (b * a) + query.mu * (ops.diffusion * a);
}

Vector lifted_rhs(const PodBasis& basis, const DerivativeOperators& full, const ModelParams& query,
                  const Vector& a) {
  const Vector v = basis.modes * a;
  return basis.modes.transpose() * burgers_rhs(full, query, v);
}

RomSolution integrate(const RomOperators& ops, const ModelParams& query, const Grid& grid,
                      const SolverSettings& settings) {
  grid.validate();
  query.validate();
  const int k = ops.dim();
  const double dt = grid.dt();
  RomSolution sol{Matrix(k, grid.n_time_points), ops.basis.modes, query.mu, ops.basis.source_mu};
  sol.reduced_states.col(0) = ops.reduced_ic;

  const double* t = ops.advection.data();
  Vector a = ops.reduced_ic;
  Matrix jac(k, k);
  for (int step = 1; step < grid.n_time_points; ++step) {
    const Vector a_prev = sol.reduced_states.col(step - 1);
    int iter = 0;
    while (true) {
      const Matrix b = contract_last(ops, a);
      const Vector g = a - a_prev - dt * (-query.nu * (b * a) + query.mu * (ops.diffusion * a));
      const double res = g.norm();
      if (res < settings.newton_tol) break;
      if (iter == settings.max_newton_iters || !std::isfinite(res)) {
        std::ostringstream msg;
        msg << "rom::integrate: reduced Newton did not converge at step " << step
            << " (query mu=" << query.mu << ", basis mu=" << ops.basis.source_mu << ", k=" << k
            << ", residual " << res << ")";
        throw NewtonFailure(msg.str(), step, res);
      }
      // d/da_m of sum_{j,l} T[i][j][l] a_j a_l = b(i, m) + sum_j T[i][j][m] a_j
      for (int i = 0; i < k; ++i) {
        for (int m = 0; m < k; ++m) {
          double c = 0.0;
          for (int j = 0; j < k; ++j) {
            c += t[(static_cast<std::size_t>(i) * k + j) * k + m] * a(j);
          }
          jac(i, m) = (i == m ? 1.0 : 0.0) -
                      dt * (-query.nu * (b(i, m) + c) + query.mu * ops.diffusion(i, m));
        }
      }
      try {
        a -= solve_linear(jac, g);
      } catch (const Error& e) {
        std::ostringstream msg;
        msg << "rom::integrate: singular reduced Jacobian at step " << step << ": " << e.what();
        throw NewtonFailure(msg.str(), step, res);
      }
      ++iter;
    }
    sol.reduced_states.col(step) = a;
  }
  return sol;
}

namespace {

void check_shapes(const SnapshotMatrix& hf, const RomSolution& rom) {
  if (rom.modes.rows() != hf.states.rows() || rom.reduced_states.cols() != hf.states.cols() ||
      rom.modes.cols() != rom.reduced_states.rows()) {
    std::ostringstream msg;
    msg << "rom error: dimension mismatch (full " << hf.states.rows() << "x" << hf.states.cols()
        << ", reduced " << rom.modes.rows() << "x" << rom.modes.cols() << " * "
        << rom.reduced_states.rows() << "x" << rom.reduced_states.cols() << ")";
    throw Error(msg.str());
  }
}

}  // namespace

double rom_error_frobenius(const SnapshotMatrix& hf, const RomSolution& rom) {
  check_shapes(hf, rom);
  return (hf.states - rom.lift()).norm();
}

double rom_error_max_over_time(const SnapshotMatrix& hf, const RomSolution& rom) {
  check_shapes(hf, rom);
  return (hf.states - rom.lift()).colwise().norm().maxCoeff();
}

double projection_error(const Matrix& states, const Matrix& modes) {
  // Residuals of well-resolved trajectories sit ~1e-9 below ||X||, where
  // double rounding in X - U U^T X is already visible; use extended precision.
  using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const LMatrix x = states.cast<long double>();
  const LMatrix u = modes.cast<long double>();
  const LMatrix r = x - u * (u.transpose() * x);
  return static_cast<double>(std::sqrt(r.squaredNorm()));
}

}  // namespace locrom
