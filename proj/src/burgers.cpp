#include "locrom/burgers.hpp"

#include <cmath>
#include <sstream>

namespace locrom {

void Grid::validate() const {
  if (n_space_points < 3 || n_time_points < 2 || !(length > 0.0) || !(final_time > 0.0)) {
    std::ostringstream msg;
    msg << "invalid grid: n_space_points=" << n_space_points << " n_time_points=" << n_time_points
        << " length=" << length << " final_time=" << final_time;
    throw Error(msg.str());
  }
}

void ModelParams::validate() const {
  if (!(mu > 0.0) || !std::isfinite(nu)) {
    std::ostringstream msg;
    msg << "invalid model parameters: mu=" << mu << " nu=" << nu;
    throw Error(msg.str());
  }
}

DerivativeOperators build_operators(const Grid& grid) {
  grid.validate();
  const int n = grid.interior();
  const double dx = grid.dx();
  DerivativeOperators ops{Matrix::Zero(n, n), Matrix::Zero(n, n)};
  const double c1 = 1.0 / (2.0 * dx);
  const double c2 = 1.0 / (dx * dx);
  for (int i = 0; i < n; ++i) {
    ops.second(i, i) = -2.0 * c2;
    if (i > 0) {
      ops.first(i, i - 1) = -c1;
      ops.second(i, i - 1) = c2;
    }
    if (i + 1 < n) {
      ops.first(i, i + 1) = c1;
      ops.second(i, i + 1) = c2;
    }
  }
  return ops;
}

double Polynomial::operator()(double s) const {
  double acc = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) {
    acc = acc * s + *it;
  }
  return acc;
}

namespace {

// Ascending coefficients of amplitude * s^a (1 - s)^b.
std::vector<double> beta_profile(double amplitude, int a, int b) {
  std::vector<double> c(a + b + 1, 0.0);
  double binom = 1.0;
  for (int j = 0; j <= b; ++j) {
    c[a + j] = amplitude * binom * ((j % 2) ? -1.0 : 1.0);
    binom = binom * (b - j) / (j + 1);
  }
  return c;
}

}  // namespace

Polynomial default_initial_polynomial() {
  // s^3 (1-s)^4 peaks at s = 3/7; scaled so the peak velocity is 8.
  constexpr int a = 3;
  constexpr int b = 4;
  constexpr double peak_velocity = 8.0;
  const double s_peak = static_cast<double>(a) / (a + b);
  const double peak = std::pow(s_peak, a) * std::pow(1.0 - s_peak, b);
  return Polynomial{beta_profile(peak_velocity / peak, a, b)};
}

Vector sample_initial_condition(const Grid& grid, const Polynomial& p) {
  grid.validate();
  Vector u(grid.interior());
  for (int i = 0; i < grid.interior(); ++i) {
    u(i) = p(grid.x(i) / grid.length);
  }
  return u;
}

Vector default_initial_condition(const Grid& grid) {
  return sample_initial_condition(grid, default_initial_polynomial());
}

Vector burgers_rhs(const DerivativeOperators& ops, const ModelParams& params, const Vector& u) {
  return -params.nu * u.cwiseProduct(ops.first * u) + params.mu * (ops.second * u);
}

Vector step_residual(const DerivativeOperators& ops, const ModelParams& params, double dt,
                     const Vector& u_prev, const Vector& v) {
  return v - u_prev - dt * burgers_rhs(ops, params, v);
}

Matrix step_jacobian(const DerivativeOperators& ops, const ModelParams& params, double dt,
                     const Vector& v) {
  const Eigen::Index n = v.size();
  Matrix adv = v.asDiagonal() * ops.first;
  adv.diagonal() += ops.first * v;
  Matrix j = Matrix::Identity(n, n) - dt * (-params.nu * adv + params.mu * ops.second);
  return j;
}

namespace {

// Banded form of the step: G and J evaluated straight from the stencils.
class TridiagonalStepper {
public:
  TridiagonalStepper(const Grid& grid, const ModelParams& params)
      : n_(grid.interior()),
        dt_(grid.dt()),
        c1_(1.0 / (2.0 * grid.dx())),
        c2_(1.0 / (grid.dx() * grid.dx())),
        nu_(params.nu),
        mu_(params.mu),
        lower_(n_),
        diag_(n_),
        upper_(n_) {}

  void residual(const Vector& u_prev, const Vector& v, Vector& g) const {
    for (int i = 0; i < n_; ++i) {
      const double left = i > 0 ? v(i - 1) : 0.0;
      const double right = i + 1 < n_ ? v(i + 1) : 0.0;
      const double ux = c1_ * (right - left);
      const double uxx = c2_ * (right - 2.0 * v(i) + left);
      g(i) = v(i) - u_prev(i) - dt_ * (-nu_ * v(i) * ux + mu_ * uxx);
    }
  }

  // Solves J(v) delta = rhs in place (rhs becomes delta).
  void solve_jacobian(const Vector& v, Vector& rhs) {
    for (int i = 0; i < n_; ++i) {
      const double left = i > 0 ? v(i - 1) : 0.0;
      const double right = i + 1 < n_ ? v(i + 1) : 0.0;
      const double ux = c1_ * (right - left);
      diag_(i) = 1.0 - dt_ * (-nu_ * ux - 2.0 * mu_ * c2_);
      lower_(i) = -dt_ * (nu_ * v(i) * c1_ + mu_ * c2_);
      upper_(i) = -dt_ * (-nu_ * v(i) * c1_ + mu_ * c2_);
    }
    // Thomas elimination
    for (int i = 1; i < n_; ++i) {
      if (diag_(i - 1) == 0.0) {
        throw Error("burgers: singular Newton Jacobian");
      }
      const double f = lower_(i) / diag_(i - 1);
      diag_(i) -= f * upper_(i - 1);
      rhs(i) -= f * rhs(i - 1);
    }
    if (diag_(n_ - 1) == 0.0) {
      throw Error("burgers: singular Newton Jacobian");
    }
    rhs(n_ - 1) /= diag_(n_ - 1);
    for (int i = n_ - 2; i >= 0; --i) {
      rhs(i) = (rhs(i) - upper_(i) * rhs(i + 1)) / diag_(i);
    }
  }

private:
  int n_;
  double dt_, c1_, c2_, nu_, mu_;
  Vector lower_, diag_, upper_;
};

}  // namespace

SnapshotMatrix solve(const Grid& grid, const ModelParams& params, const SolverSettings& settings,
                     const Vector& u0) {
  grid.validate();
  params.validate();
  const int n = grid.interior();
  if (u0.size() != n || !u0.allFinite()) {
    throw Error("burgers::solve: initial state must be finite with one entry per interior node");
  }

  SnapshotMatrix out{Matrix(n, grid.n_time_points), grid, params};
  out.states.col(0) = u0;

  TridiagonalStepper stepper(grid, params);
  Vector v = u0;
  Vector g(n);
  for (int step = 1; step < grid.n_time_points; ++step) {
    const Vector u_prev = out.states.col(step - 1);
    stepper.residual(u_prev, v, g);
    double res = g.norm();
    int iter = 0;
    while (!(res < settings.newton_tol)) {
      if (iter == settings.max_newton_iters || !std::isfinite(res)) {
        std::ostringstream msg;
        msg << "burgers::solve: Newton did not converge at step " << step << " (mu=" << params.mu
            << ", residual " << res << ")";
        throw NewtonFailure(msg.str(), step, res);
      }
      g = -g;
      stepper.solve_jacobian(v, g);
      v += g;
      stepper.residual(u_prev, v, g);
      res = g.norm();
      ++iter;
    }
    out.states.col(step) = v;
  }
  return out;
}

}  // namespace locrom
