#include <cmath>
#include <sstream>

#include "locrom/rng.hpp"
#include "locrom/surrogate.hpp"

namespace locrom {

std::vector<std::vector<int>> kfold_partition(int n, int k, std::uint64_t seed) {
  if (k < 2 || n < k) {
    std::ostringstream msg;
    msg << "kfold: need 2 <= K <= n, got K=" << k << " with n=" << n;
    throw Error(msg.str());
  }
  Rng rng(seed);
  const std::vector<int> order = rng.permutation(n);
  std::vector<std::vector<int>> folds(k);
  for (int i = 0; i < n; ++i) folds[i % k].push_back(order[i]);
  return folds;
}

FoldReport kfold_validate(const Matrix& x, const Vector& y, int k, std::uint64_t seed,
                          const FitPredict& fit_predict) {
  const int n = static_cast<int>(x.rows());
  if (y.size() != n) {
    throw Error("kfold: feature rows and targets disagree");
  }
  const auto folds = kfold_partition(n, k, seed);

  FoldReport rep;
  rep.predictions = Vector::Zero(n);
  std::vector<char> held(n);
  for (const auto& test : folds) {
    std::fill(held.begin(), held.end(), 0);
    for (int i : test) held[i] = 1;
    Matrix xtr(n - test.size(), x.cols()), xte(test.size(), x.cols());
    Vector ytr(n - test.size());
    for (int i = 0, r = 0; i < n; ++i) {
      if (held[i]) continue;
      xtr.row(r) = x.row(i);
      ytr(r++) = y(i);
    }
    for (std::size_t t = 0; t < test.size(); ++t) xte.row(t) = x.row(test[t]);

    const Vector yhat = fit_predict(xtr, ytr, xte);
    if (yhat.size() != static_cast<Eigen::Index>(test.size())) {
      throw Error("kfold: prediction count does not match the held-out fold");
    }
    Vector abs_err(test.size());
    for (std::size_t t = 0; t < test.size(); ++t) {
      rep.predictions(test[t]) = yhat(t);
      abs_err(t) = std::abs(yhat(t) - y(test[t]));
    }
    const double e = abs_err.mean();
    rep.fold_error.push_back(e);
    rep.fold_variance.push_back((abs_err.array() - e).square().mean());
  }
  double sum = 0.0;
  for (double e : rep.fold_error) sum += e;
  rep.error = sum / k;
  double var = 0.0;
  for (double e : rep.fold_error) var += (e - rep.error) * (e - rep.error);
  rep.variance = var / k;
  return rep;
}

FoldReport kfold_validate(const Dataset& raw, const SurrogateSettings& settings, int k,
                          std::uint64_t seed) {
  raw.validate();
  if (k < 3 || k > 10) {
    std::ostringstream msg;
    msg << "kfold: K must lie in [3, 10], got " << k;
    throw Error(msg.str());
  }
  int fold_index = 0;
  return kfold_validate(raw.features, raw.targets, k, seed,
                        [&](const Matrix& xtr, const Vector& ytr, const Matrix& xte) {
                          Dataset train{xtr, ytr, {}, raw.feature_names};
                          const Surrogate s =
                              Surrogate::fit(train, settings, seed + 1000 + fold_index++);
                          return s.predict(xte);
                        });
}

}  // namespace locrom
