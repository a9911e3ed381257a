#include "locrom/ann.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "locrom/rng.hpp"

namespace locrom {

int AnnModel::parameter_count() const {
  int count = 0;
  for (const auto& l : layers) count += static_cast<int>(l.weights.size() + l.bias.size());
  return count;
}

void AnnModel::validate() const {
  if (layer_sizes.size() < 2 || layer_sizes.back() != 1 ||
      layers.size() + 1 != layer_sizes.size()) {
    throw Error("ann: layer sizes must run from the input width to a single output");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].weights.rows() != layer_sizes[l + 1] ||
        layers[l].weights.cols() != layer_sizes[l] || layers[l].bias.size() != layer_sizes[l + 1]) {
      std::ostringstream msg;
      msg << "ann: layer " << l << " has shape " << layers[l].weights.rows() << "x"
          << layers[l].weights.cols() << ", expected " << layer_sizes[l + 1] << "x"
          << layer_sizes[l];
      throw Error(msg.str());
    }
  }
}

AnnModel ann_init(std::span<const int> layer_sizes, std::uint64_t seed) {
  AnnModel m;
  m.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  if (m.layer_sizes.size() < 2 || m.layer_sizes.back() != 1) {
    throw Error("ann_init: need an input width and a single output");
  }
  for (int w : m.layer_sizes) {
    if (w < 1) throw Error("ann_init: layer widths must be positive");
  }
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    const int in = m.layer_sizes[l];
    const int out = m.layer_sizes[l + 1];
    const double a = std::sqrt(3.0 / in);
    AnnLayer layer{Matrix(out, in), Vector::Zero(out)};
    for (int j = 0; j < in; ++j) {
      for (int i = 0; i < out; ++i) layer.weights(i, j) = rng.uniform(-a, a);
    }
    m.layers.push_back(std::move(layer));
  }
  return m;
}

namespace {

// tanh through exp, which Eigen vectorizes for doubles (its tanh is scalar).
// Saturates correctly: exp overflow gives 1, underflow gives -1.
Matrix tanh_fast(const Matrix& z) {
  return (1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0)).matrix();
}

// Activations per layer with samples in columns; acts[0] is the input.
std::vector<Matrix> forward_all(const AnnModel& m, const Matrix& x) {
  if (x.cols() != m.input_dim()) {
    std::ostringstream msg;
    msg << "ann: input has " << x.cols() << " features, network expects " << m.input_dim();
    throw Error(msg.str());
  }
  std::vector<Matrix> acts;
  acts.reserve(m.layers.size() + 1);
  acts.push_back(x.transpose());
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    Matrix z = m.layers[l].weights * acts.back();
    z.colwise() += m.layers[l].bias;
    if (l + 1 < m.layers.size()) z = tanh_fast(z);
    acts.push_back(std::move(z));
  }
  return acts;
}

}  // namespace

Vector ann_forward(const AnnModel& model, const Matrix& x) {
  return forward_all(model, x).back().row(0).transpose();
}

double ann_forward(const AnnModel& model, const Vector& query) {
  return ann_forward(model, Matrix(query.transpose()))(0);
}

double ann_loss(const AnnModel& model, const Matrix& x, const Vector& y,
                std::vector<AnnLayer>* grad) {
  if (x.rows() != y.size() || x.rows() == 0) {
    throw Error("ann_loss: feature rows and targets disagree or are empty");
  }
  const std::vector<Matrix> acts = forward_all(model, x);
  const double n = static_cast<double>(y.size());
  const Eigen::RowVectorXd resid = acts.back().row(0) - y.transpose();
  const double loss = resid.squaredNorm() / n;
  if (grad == nullptr) return loss;

  grad->resize(model.layers.size());
  Matrix delta = (2.0 / n) * resid;
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    (*grad)[l].weights.noalias() = delta * acts[l].transpose();
    (*grad)[l].bias = delta.rowwise().sum();
    if (l > 0) {
      Matrix back = model.layers[l].weights.transpose() * delta;
      delta = back.array() * (1.0 - acts[l].array().square());
    }
  }
  return loss;
}

AnnOptimizer parse_optimizer(const std::string& name) {
  if (name == "gd") return AnnOptimizer::gradient_descent;
  if (name == "adam") return AnnOptimizer::adam;
  if (name == "lbfgs") return AnnOptimizer::lbfgs;
  throw Error("unknown optimizer '" + name + "' (expected gd, adam or lbfgs)");
}

std::string to_string(AnnOptimizer opt) {
  switch (opt) {
    case AnnOptimizer::adam: return "adam";
    case AnnOptimizer::lbfgs: return "lbfgs";
    default: return "gd";
  }
}

namespace {

Matrix select_rows(const Matrix& m, const std::vector<int>& idx, std::size_t from, std::size_t to) {
  Matrix out(to - from, m.cols());
  for (std::size_t i = from; i < to; ++i) out.row(i - from) = m.row(idx[i]);
  return out;
}

Vector select_entries(const Vector& v, const std::vector<int>& idx, std::size_t from,
                      std::size_t to) {
  Vector out(to - from);
  for (std::size_t i = from; i < to; ++i) out(i - from) = v(idx[i]);
  return out;
}

Vector flatten(const std::vector<AnnLayer>& layers) {
  Eigen::Index total = 0;
  for (const auto& l : layers) total += l.weights.size() + l.bias.size();
  Vector v(total);
  Eigen::Index at = 0;
  for (const auto& l : layers) {
    v.segment(at, l.weights.size()) = l.weights.reshaped();
    at += l.weights.size();
    v.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  }
  return v;
}

void unflatten(const Vector& v, std::vector<AnnLayer>& layers) {
  Eigen::Index at = 0;
  for (auto& l : layers) {
    l.weights.reshaped() = v.segment(at, l.weights.size());
    at += l.weights.size();
    l.bias = v.segment(at, l.bias.size());
    at += l.bias.size();
  }
}

// Limited-memory BFGS state: two-loop recursion over the stored pairs.
struct Lbfgs {
  int memory = 10;
  std::vector<Vector> s, y;
  std::vector<double> rho;

  void push(Vector ds, Vector dg) {
    const double sy = ds.dot(dg);
    if (!(sy > 1e-12 * ds.norm() * dg.norm())) return;  // keep H positive definite
    if (static_cast<int>(s.size()) == memory) {
      s.erase(s.begin());
      y.erase(y.begin());
      rho.erase(rho.begin());
    }
    s.push_back(std::move(ds));
    y.push_back(std::move(dg));
    rho.push_back(1.0 / sy);
  }

  Vector direction(const Vector& g) const {
    Vector q = g;
    std::vector<double> a(s.size());
    for (std::size_t i = s.size(); i-- > 0;) {
      a[i] = rho[i] * s[i].dot(q);
      q -= a[i] * y[i];
    }
    if (!s.empty()) q *= s.back().dot(y.back()) / y.back().squaredNorm();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double b = rho[i] * y[i].dot(q);
      q += (a[i] - b) * s[i];
    }
    return -q;
  }

  void reset() {
    s.clear();
    y.clear();
    rho.clear();
  }
};

}  // namespace

AnnModel ann_train(AnnModel model, const Matrix& x, const Vector& y,
                   const AnnTrainSettings& settings, std::uint64_t seed, AnnTrainReport* report) {
  model.validate();
  if (x.rows() != y.size() || x.rows() == 0) {
    throw Error("ann_train: feature rows and targets disagree or are empty");
  }
  if (settings.epochs < 0 || !(settings.learning_rate > 0.0)) {
    throw Error("ann_train: epochs must be >= 0 and the learning rate positive");
  }
  AnnTrainReport rep;

  const int n = static_cast<int>(x.rows());
  int n_val = static_cast<int>(std::lround(settings.validation_fraction * n));
  if (n_val >= n) n_val = n - 1;
  if (n_val < 0) n_val = 0;
  Matrix xt = x, xv;
  Vector yt = y, yv;
  if (n_val > 0) {
    Rng rng(seed);
    const std::vector<int> order = rng.permutation(n);
    xv = select_rows(x, order, 0, n_val);
    yv = select_entries(y, order, 0, n_val);
    xt = select_rows(x, order, n_val, n);
    yt = select_entries(y, order, n_val, n);
  }

  const std::size_t nl = model.layers.size();
  std::vector<AnnLayer> grad, m1(nl), m2(nl);
  for (std::size_t l = 0; l < nl; ++l) {
    m1[l] = {Matrix::Zero(model.layers[l].weights.rows(), model.layers[l].weights.cols()),
             Vector::Zero(model.layers[l].bias.size())};
    m2[l] = m1[l];
  }
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double b1t = 1.0, b2t = 1.0;
  Lbfgs qn;
  qn.memory = std::max(1, settings.lbfgs_memory);
  Vector prev_w, prev_g;

  AnnModel best = model;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (int epoch = 0; epoch < settings.epochs; ++epoch) {
    const double loss = ann_loss(model, xt, yt, &grad);
    if (std::isnan(loss)) {
      std::ostringstream msg;
      msg << "ann_train: loss became NaN at epoch " << epoch;
      throw Error(msg.str());
    }
    rep.loss_history.push_back(loss);
    if (n_val > 0) {
      const double val = ann_loss(model, xv, yv);
      if (val < best_val) {
        best_val = val;
        best = model;
        rep.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best > settings.patience) {
        break;
      }
    }

    const double lr = settings.learning_rate;
    if (settings.optimizer == AnnOptimizer::lbfgs) {
      const Vector w = flatten(model.layers);
      const Vector g = flatten(grad);
      if (prev_w.size() > 0) qn.push(w - prev_w, g - prev_g);
      Vector d = qn.direction(g);
      double slope = g.dot(d);
      if (!(slope < 0.0)) {
        qn.reset();
        d = -g;
        slope = -g.squaredNorm();
      }
      // Backtracking with Armijo's condition; first step scaled to the gradient.
      double step = qn.s.empty() ? std::min(1.0, 1.0 / std::max(g.norm(), 1e-300)) : 1.0;
      bool accepted = false;
      for (int tries = 0; tries < 30 && slope < 0.0; ++tries, step *= 0.5) {
        unflatten(w + step * d, model.layers);
        const double trial = ann_loss(model, xt, yt);
        if (trial <= loss + 1e-4 * step * slope) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        qn.reset();
        unflatten(w - lr * g, model.layers);
      }
      prev_w = w;
      prev_g = g;
    } else if (settings.optimizer == AnnOptimizer::gradient_descent) {
      for (std::size_t l = 0; l < nl; ++l) {
        model.layers[l].weights -= lr * grad[l].weights;
        model.layers[l].bias -= lr * grad[l].bias;
      }
    } else {
      b1t *= b1;
      b2t *= b2;
      const double scale = lr * std::sqrt(1.0 - b2t) / (1.0 - b1t);
      for (std::size_t l = 0; l < nl; ++l) {
        m1[l].weights = b1 * m1[l].weights + (1.0 - b1) * grad[l].weights;
        m2[l].weights = b2 * m2[l].weights + (1.0 - b2) * grad[l].weights.cwiseAbs2();
        m1[l].bias = b1 * m1[l].bias + (1.0 - b1) * grad[l].bias;
        m2[l].bias = b2 * m2[l].bias + (1.0 - b2) * grad[l].bias.cwiseAbs2();
        model.layers[l].weights.array() -=
            scale * m1[l].weights.array() / (m2[l].weights.array().sqrt() + eps);
        model.layers[l].bias.array() -=
            scale * m1[l].bias.array() / (m2[l].bias.array().sqrt() + eps);
      }
    }
    rep.epochs_run = epoch + 1;
  }

  if (n_val > 0 && std::isfinite(best_val)) {
    const double last_val = ann_loss(model, xv, yv);
    if (last_val < best_val) {
      best_val = last_val;
      rep.best_epoch = rep.epochs_run;
    } else {
      model = std::move(best);
    }
    rep.validation_mse = best_val;
  }
  rep.train_mse = ann_loss(model, xt, yt);
  if (report != nullptr) *report = std::move(rep);
  return model;
}

}  // namespace locrom
