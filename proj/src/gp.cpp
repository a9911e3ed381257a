#include "locrom/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>

#include "locrom/rng.hpp"

namespace locrom {

void GpHyper::validate() const {
  if (!(length_scale > 0.0) || !(signal_var > 0.0) || !(noise_var > 0.0) ||
      !std::isfinite(length_scale) || !std::isfinite(signal_var) || !std::isfinite(noise_var)) {
    std::ostringstream msg;
    msg << "invalid GP hyperparameters: length_scale=" << length_scale
        << " signal_var=" << signal_var << " noise_var=" << noise_var;
    throw Error(msg.str());
  }
}

std::array<double, 3> GpHyper::to_log() const {
  return {std::log(length_scale), std::log(signal_var), std::log(noise_var)};
}

GpHyper GpHyper::from_log(const std::array<double, 3>& t) {
  return GpHyper{std::exp(t[0]), std::exp(t[1]), std::exp(t[2])};
}

namespace {

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  const Vector na = a.rowwise().squaredNorm();
  const Vector nb = b.rowwise().squaredNorm();
  Matrix d = (-2.0 * a * b.transpose()).colwise() + na;
  d.rowwise() += nb.transpose();
  return d.cwiseMax(0.0);
}

Matrix rows_of(const Matrix& m, std::span<const int> idx) {
  Matrix out(idx.size(), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(i) = m.row(idx[i]);
  return out;
}

Vector entries_of(const Vector& v, std::span<const int> idx) {
  Vector out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

// NLL evaluated from a precomputed distance matrix so the optimizer does not
// rebuild it at every trial point.
double nll_from_distances(const Matrix& d2, const Vector& r, const GpHyper& h,
                          std::array<double, 3>* grad) {
  const Eigen::Index n = r.size();
  const Matrix kse = h.signal_var * (-0.5 / (h.length_scale * h.length_scale) * d2).array().exp();
  Matrix k = kse;
  k.diagonal().array() += h.noise_var;
  Eigen::LLT<Matrix> llt(k);
  if (llt.info() != Eigen::Success) {
    throw Error("gp_nll: kernel matrix is not positive definite");
  }
  const Vector alpha = llt.solve(r);
  const Matrix& l = llt.matrixLLT();
  const double logdet_half = l.diagonal().array().log().sum();
  const double value = logdet_half + 0.5 * r.dot(alpha) + 0.5 * n * std::log(2.0 * std::numbers::pi);
  if (grad != nullptr) {
    Matrix w = llt.solve(Matrix::Identity(n, n));
    w.noalias() -= alpha * alpha.transpose();
    const double inv_l2 = 1.0 / (h.length_scale * h.length_scale);
    (*grad)[0] = 0.5 * (w.array() * kse.array() * d2.array()).sum() * inv_l2;
    (*grad)[1] = 0.5 * (w.array() * kse.array()).sum();
    (*grad)[2] = 0.5 * h.noise_var * w.trace();
  }
  return value;
}

struct LogBounds {
  std::array<double, 3> lo, hi;
};

std::array<double, 3> clamp_log(std::array<double, 3> t, const LogBounds& b) {
  for (int i = 0; i < 3; ++i) t[i] = std::clamp(t[i], b.lo[i], b.hi[i]);
  return t;
}

double norm3(const std::array<double, 3>& g) {
  return std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
}

struct DescentResult {
  std::array<double, 3> theta;
  double nll;
};

// Normalized-gradient descent with an adaptive step; a trial point is
// accepted only if it lowers the NLL.
DescentResult descend(const Matrix& d2, const Vector& r, std::array<double, 3> theta,
                      const GpSettings& s, const LogBounds& bounds) {
  auto eval = [&](const std::array<double, 3>& t, std::array<double, 3>* g) {
    try {
      return nll_from_distances(d2, r, GpHyper::from_log(t), g);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  std::array<double, 3> grad{};
  double f = eval(theta, &grad);
  if (!std::isfinite(f)) return {theta, f};
  double step = s.initial_step;
  for (int it = 0; it < s.max_iters; ++it) {
    const double gn = norm3(grad);
    if (gn < s.grad_tol * std::max(1.0, std::abs(f)) || step < 1e-7) break;
    bool moved = false;
    while (step >= 1e-7) {
      std::array<double, 3> trial;
      for (int i = 0; i < 3; ++i) trial[i] = theta[i] - step * grad[i] / gn;
      trial = clamp_log(trial, bounds);
      std::array<double, 3> trial_grad{};
      const double ft = eval(trial, &trial_grad);
      if (ft < f) {
        theta = trial;
        f = ft;
        grad = trial_grad;
        step *= 1.5;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return {theta, f};
}

// Likelihood only, with the factorization done in place: the refinement set
// is too large for the gradient's explicit inverse.
double nll_value(const Matrix& x, const Vector& r, const std::array<double, 3>& theta) {
  const GpHyper h = GpHyper::from_log(theta);
  Matrix k = se_kernel(x, x, h.length_scale, h.signal_var);
  k.diagonal().array() += h.noise_var;
  Eigen::LLT<Eigen::Ref<Matrix>> llt(k);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const Vector alpha = llt.solve(r);
  return k.diagonal().array().log().sum() + 0.5 * r.dot(alpha) +
         0.5 * static_cast<double>(r.size()) * std::log(2.0 * std::numbers::pi);
}

// Compass search in log space. Each coordinate first retries the direction
// that last succeeded; the step halves after a sweep without progress.
std::array<double, 3> refine(const Matrix& x, const Vector& r, std::array<double, 3> theta,
                             int budget, const LogBounds& bounds) {
  double f = nll_value(x, r, theta);
  --budget;
  double step = 0.5;
  std::array<double, 3> first_dir{-1.0, -1.0, -1.0};
  while (budget > 0 && step >= 0.05) {
    bool improved = false;
    for (int i = 0; i < 3 && budget > 0; ++i) {
      for (double dir : {first_dir[i], -first_dir[i]}) {
        if (budget <= 0) break;
        std::array<double, 3> trial = theta;
        trial[i] += dir * step;
        trial = clamp_log(trial, bounds);
        if (trial == theta) continue;
        const double ft = nll_value(x, r, trial);
        --budget;
        if (ft < f) {
          theta = trial;
          f = ft;
          first_dir[i] = dir;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return theta;
}

}  // namespace

Matrix se_kernel(const Matrix& a, const Matrix& b, double length_scale, double signal_var) {
  if (a.cols() != b.cols()) {
    throw Error("se_kernel: inputs have different feature counts");
  }
  return signal_var *
         (-0.5 / (length_scale * length_scale) * squared_distances(a, b)).array().exp().matrix();
}

double gp_nll(const Matrix& x, const Vector& y, double prior_mean, const GpHyper& hyper,
              std::array<double, 3>* grad) {
  hyper.validate();
  if (x.rows() != y.size() || x.rows() == 0) {
    throw Error("gp_nll: feature rows and targets disagree or are empty");
  }
  const Vector r = y.array() - prior_mean;
  return nll_from_distances(squared_distances(x, x), r, hyper, grad);
}

GpModel gp_condition(const Matrix& x, const Vector& y, double prior_mean, const GpHyper& hyper,
                     double max_jitter) {
  hyper.validate();
  if (x.rows() != y.size() || x.rows() == 0) {
    throw Error("gp_condition: feature rows and targets disagree or are empty");
  }
  if (!all_finite(x) || !y.allFinite()) {
    throw Error("gp_condition: non-finite training data");
  }
  GpModel m;
  m.hyper = hyper;
  m.train_x = x;
  m.train_y = y;
  m.prior_mean = prior_mean;

  Matrix k = se_kernel(x, x, hyper.length_scale, hyper.signal_var);
  k.diagonal().array() += hyper.noise_var;
  double jitter = 0.0;
  while (true) {
    Eigen::LLT<Matrix> llt(k);
    if (llt.info() == Eigen::Success) {
      m.jitter = jitter;
      m.chol_l = llt.matrixL();
      m.alpha = llt.solve(Vector(y.array() - prior_mean));
      return m;
    }
    const double next = jitter == 0.0 ? 1e-12 : jitter * 10.0;
    if (next > max_jitter * (1.0 + 1e-9)) {
      std::ostringstream msg;
      msg << "gp_condition: kernel matrix not positive definite even with jitter " << jitter
          << " (n=" << x.rows() << ")";
      throw Error(msg.str());
    }
    k.diagonal().array() += next - jitter;
    jitter = next;
  }
}

GpModel gp_fit(const Matrix& x, const Vector& y, const GpHyper& init, const GpSettings& settings,
               std::uint64_t seed, double prior_mean) {
  init.validate();
  const int n = static_cast<int>(x.rows());
  if (n < 2 || y.size() != n) {
    throw Error("gp_fit: need at least 2 samples with matching targets");
  }
  Rng rng(seed);
  std::vector<int> order = rng.permutation(n);

  const int m_opt = std::min(n, std::max(2, settings.optimization_subset));
  std::vector<int> opt_idx(order.begin(), order.begin() + m_opt);
  std::sort(opt_idx.begin(), opt_idx.end());
  const Matrix xo = rows_of(x, opt_idx);
  const Vector ro = entries_of(y, opt_idx).array() - prior_mean;
  const Matrix d2 = squared_distances(xo, xo);

  const LogBounds bounds{{std::log(1e-3), std::log(1e-6), std::log(settings.min_noise_var)},
                         {std::log(1e3), std::log(1e6), std::log(1e2)}};
  const std::array<double, 3> t0 = clamp_log(init.to_log(), bounds);

  DescentResult best{t0, std::numeric_limits<double>::infinity()};
  for (int s = 0; s < std::max(1, settings.restarts); ++s) {
    std::array<double, 3> start = t0;
    if (s > 0) {
      for (auto& v : start) v += rng.uniform(-2.0, 2.0);
      start = clamp_log(start, bounds);
    }
    const DescentResult r = descend(d2, ro, start, settings, bounds);
    if (r.nll < best.nll) best = r;
  }
  if (!std::isfinite(best.nll)) {
    throw Error("gp_fit: no start produced a positive definite kernel");
  }

  const int m_refine = std::min(n, settings.refine_subset);
  if (settings.refine_evaluations > 1 && m_refine > m_opt) {
    std::vector<int> idx(order.begin(), order.begin() + m_refine);
    std::sort(idx.begin(), idx.end());
    const Vector rr = entries_of(y, idx).array() - prior_mean;
    best.theta = refine(rows_of(x, idx), rr, best.theta, settings.refine_evaluations, bounds);
  }

  const GpHyper tuned = GpHyper::from_log(best.theta);
  if (n <= settings.max_training_points) {
    return gp_condition(x, y, prior_mean, tuned, settings.max_jitter);
  }
  std::vector<int> keep(order.begin(), order.begin() + settings.max_training_points);
  std::sort(keep.begin(), keep.end());
  return gp_condition(rows_of(x, keep), entries_of(y, keep), prior_mean, tuned,
                      settings.max_jitter);
}

GpPrediction gp_predict(const GpModel& model, const Vector& query) {
  if (query.size() != model.train_x.cols()) {
    std::ostringstream msg;
    msg << "gp_predict: query has " << query.size() << " features, model expects "
        << model.train_x.cols();
    throw Error(msg.str());
  }
  const Matrix q = query.transpose();
  const Vector ks =
      se_kernel(model.train_x, q, model.hyper.length_scale, model.hyper.signal_var).col(0);
  GpPrediction p;
  p.mean = model.prior_mean + ks.dot(model.alpha);
  const Vector v = model.chol_l.triangularView<Eigen::Lower>().solve(ks);
  double latent = model.hyper.signal_var - v.squaredNorm();
  if (latent < 0.0) latent = 0.0;
  p.latent_variance = latent;
  p.variance = latent + model.hyper.noise_var;
  return p;
}

Vector gp_predict_mean(const GpModel& model, const Matrix& queries) {
  if (queries.cols() != model.train_x.cols()) {
    throw Error("gp_predict_mean: query feature count does not match the model");
  }
  const Matrix ks =
      se_kernel(queries, model.train_x, model.hyper.length_scale, model.hyper.signal_var);
  return (ks * model.alpha).array() + model.prior_mean;
}

}  // namespace locrom
