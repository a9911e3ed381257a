#include "locrom/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "locrom/combine.hpp"
#include "locrom/rng.hpp"

namespace locrom {

RomOracle make_oracle(const ExperimentConfig& c) {
  return RomOracle(c.grid, sample_initial_condition(c.grid, c.initial_condition), c.model.nu,
                   c.solver);
}

namespace {

bool has_column(const Table& t, const std::string& name) {
  return std::find(t.columns.begin(), t.columns.end(), name) != t.columns.end();
}

double log_of_error(double e) {
  // An exact reduced solution would give log 0; keep the table finite.
  return std::log(std::max(e, 1e-300));
}

}  // namespace

std::vector<ErrorSample> generate_error_dataset(RomOracle& oracle, const ErrorDatasetConfig& c) {
  std::vector<ErrorSample> out;
  out.reserve(c.basis_mus.size() * c.dims.size() * c.query_mus.size());
  for (double mu : c.basis_mus) {
    for (int k : c.dims) {
      for (double mu0 : c.query_mus) {
        const double e = oracle.error(mu0, mu, k);
        out.push_back({mu0, mu, k, log_of_error(e), e >= kDivergedError});
      }
    }
  }
  return out;
}

Table error_table(const std::vector<ErrorSample>& samples) {
  Table t{{"mu0", "mu", "k", "log_eps", "diverged"}, {}};
  t.rows.reserve(samples.size());
  for (const auto& s : samples) {
    t.rows.push_back({s.mu0, s.mu, static_cast<double>(s.k), s.log_eps, s.diverged ? 1.0 : 0.0});
  }
  return t;
}

std::vector<ErrorSample> error_samples_from_table(const Table& t) {
  const int c0 = t.column("mu0"), c1 = t.column("mu"), c2 = t.column("k"), c3 = t.column("log_eps");
  const int cd = has_column(t, "diverged") ? t.column("diverged") : -1;
  const double diverged = std::log(kDivergedError);
  std::vector<ErrorSample> out;
  for (const auto& r : t.rows) {
    const bool flag = cd >= 0 ? r[cd] != 0.0 : r[c3] >= diverged;
    out.push_back({r[c0], r[c1], static_cast<int>(std::lround(r[c2])), r[c3], flag});
  }
  return out;
}

Dataset error_training_set(const std::vector<ErrorSample>& samples, bool log_targets) {
  std::vector<const ErrorSample*> kept;
  for (const auto& s : samples) {
    if (!s.diverged) kept.push_back(&s);
  }
  if (kept.empty()) throw Error("error_training_set: every sample diverged");
  Dataset d;
  d.feature_names = {"mu0", "mu", "k"};
  d.features.resize(kept.size(), 3);
  d.targets.resize(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    d.features.row(i) << kept[i]->mu0, kept[i]->mu, static_cast<double>(kept[i]->k);
    d.targets(i) = log_targets ? kept[i]->log_eps : std::exp(kept[i]->log_eps);
  }
  return d;
}

std::vector<double> dimension_mus(const DimensionDatasetConfig& c) {
  return linspace(c.mu_min, c.mu_max, c.mu_count);
}

std::vector<DimensionSample> generate_dimension_dataset(RomOracle& oracle,
                                                        const DimensionDatasetConfig& c) {
  std::vector<DimensionSample> out;
  for (double mu : dimension_mus(c)) {
    for (int k : c.dims) {
      const double e = oracle.error(mu, mu, k);
      out.push_back({mu, log_of_error(e), k, e >= kDivergedError});
    }
  }
  return out;
}

Table dimension_table(const std::vector<DimensionSample>& samples) {
  Table t{{"mu", "log_eps_target", "k", "diverged"}, {}};
  t.rows.reserve(samples.size());
  for (const auto& s : samples) {
    t.rows.push_back({s.mu, s.log_eps, static_cast<double>(s.k), s.diverged ? 1.0 : 0.0});
  }
  return t;
}

std::vector<DimensionSample> dimension_samples_from_table(const Table& t) {
  const int c0 = t.column("mu"), c1 = t.column("log_eps_target"), c2 = t.column("k");
  const int cd = has_column(t, "diverged") ? t.column("diverged") : -1;
  const double diverged = std::log(kDivergedError);
  std::vector<DimensionSample> out;
  for (const auto& r : t.rows) {
    const bool flag = cd >= 0 ? r[cd] != 0.0 : r[c1] >= diverged;
    out.push_back({r[c0], r[c1], static_cast<int>(std::lround(r[c2])), flag});
  }
  return out;
}

Dataset dimension_training_set(const std::vector<DimensionSample>& samples) {
  std::vector<const DimensionSample*> kept;
  for (const auto& s : samples) {
    if (!s.diverged) kept.push_back(&s);
  }
  if (kept.empty()) throw Error("dimension_training_set: every sample diverged");
  Dataset d;
  d.feature_names = {"mu", "log_eps_target"};
  d.features.resize(kept.size(), 2);
  d.targets.resize(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    d.features.row(i) << kept[i]->mu, kept[i]->log_eps;
    d.targets(i) = kept[i]->k;
  }
  return d;
}

namespace {

double rom_error_or_sentinel(const PodBasis& basis, const SnapshotMatrix& reference,
                             const Vector& u0, double query_mu, double nu,
                             const SolverSettings& solver) {
  try {
    const RomOperators ops = assemble(basis, reference.grid, u0);
    const RomSolution rom = integrate(ops, ModelParams{query_mu, nu}, reference.grid, solver);
    const double e = rom_error_frobenius(reference, rom);
    return std::isfinite(e) ? e : kDivergedError;
  } catch (const NewtonFailure&) {
    return kDivergedError;
  }
}

double method_error(const std::function<PodBasis()>& make, const SnapshotMatrix& reference,
                    const Vector& u0, double query_mu, double nu, const SolverSettings& solver) {
  PodBasis b;
  try {
    b = make();
  } catch (const NewtonFailure&) {
    return kDivergedError;
  }
  return rom_error_or_sentinel(b, reference, u0, query_mu, nu, solver);
}

}  // namespace

CombinationErrors combination_errors(const Grid& grid, const Vector& u0, double nu, int k,
                                     double query_mu, double mu1, double mu2,
                                     const SolverSettings& solver, const EnergyFraction& energy) {
  const SnapshotMatrix x0 = solve(grid, ModelParams{query_mu, nu}, solver, u0);
  const SnapshotMatrix x1 = solve(grid, ModelParams{mu1, nu}, solver, u0);
  const SnapshotMatrix x2 = solve(grid, ModelParams{mu2, nu}, solver, u0);
  const PodBasis b1 = build_basis(x1, FixedDimension{k});
  const PodBasis b2 = build_basis(x2, FixedDimension{k});
  const std::vector<PodBasis> pair{b1, b2};
  const std::vector<SnapshotMatrix> snaps{x1, x2};

  CombinationErrors e;
  auto run = [&](const std::function<PodBasis()>& make) {
    return method_error(make, x0, u0, query_mu, nu, solver);
  };
  e.basis1 = run([&] { return b1; });
  e.basis2 = run([&] { return b2; });
  e.matrix = run([&] { return interpolate_bases_matrix(pair, query_mu); });
  e.grassmann = run([&] { return interpolate_bases_grassmann(pair, 0, query_mu); });
  const int k1 = energy_dimension(build_basis(x1, FixedDimension{1}).sigma, energy.gamma,
                                  energy.on_squares);
  const int k2 = energy_dimension(build_basis(x2, FixedDimension{1}).sigma, energy.gamma,
                                  energy.on_squares);
  const PodBasis c1 = build_basis(x1, FixedDimension{k1});
  const PodBasis c2 = build_basis(x2, FixedDimension{k2});
  const PodBasis cat = concatenate_bases(c1, k1, c2, k2);
  e.concatenation_dim = cat.dim();
  e.concatenation = run([&] { return cat; });
  e.solution = run([&] { return interpolate_solutions(snaps, query_mu, FixedDimension{k}); });
  return e;
}

std::vector<CombinationRow> run_combination_study(const ExperimentConfig& c) {
  const EnergyFraction energy{c.energy_gamma, c.energy_on_squares};
  std::vector<CombinationRow> rows;
  for (double tf : c.combine.final_times) {
    Grid g = c.grid;
    g.final_time = tf;
    const Vector u0 = sample_initial_condition(g, c.initial_condition);
    for (double nu : c.combine.nu_sweep) {
      rows.push_back({"nu", tf, nu, c.combine.dim_for_nu_sweep,
                      combination_errors(g, u0, nu, c.combine.dim_for_nu_sweep, c.combine.query_mu,
                                         c.combine.mu1, c.combine.mu2, c.solver, energy)});
    }
    for (int k : c.combine.dim_sweep) {
      rows.push_back({"dim", tf, c.combine.nu_for_dim_sweep, k,
                      combination_errors(g, u0, c.combine.nu_for_dim_sweep, k, c.combine.query_mu,
                                         c.combine.mu1, c.combine.mu2, c.solver, energy)});
    }
  }
  return rows;
}

Table combination_table(const std::vector<CombinationRow>& rows) {
  Table t{{"sweep_is_dim", "final_time", "nu", "k", "basis_mu1", "basis_mu2", "matrix_interp",
           "grassmann_interp", "concatenation", "solution_interp", "concatenation_dim"},
          {}};
  for (const auto& r : rows) {
    const auto& e = r.errors;
    t.rows.push_back({r.sweep == "dim" ? 1.0 : 0.0, r.final_time, r.nu, static_cast<double>(r.k),
                      e.basis1, e.basis2, e.matrix, e.grassmann, e.concatenation, e.solution,
                      static_cast<double>(e.concatenation_dim)});
  }
  return t;
}

DimensionStudy run_dimension_study(const std::vector<DimensionSample>& samples,
                                   RomOracle& oracle, const ExperimentConfig& c) {
  const Dataset data = dimension_training_set(samples);
  DimensionStudy st;
  st.folds = kfold_validate(data, c.dimension_model, c.folds, c.seed);

  const int n = data.size();
  std::vector<int> hist(6, 0);
  double sum_d = 0.0, sum_d2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double raw = st.folds.predictions(i);
    const int khat = predict_dimension([raw](double, double) { return raw; }, 0.0, 0.0);
    const int k = static_cast<int>(std::lround(data.targets(i)));
    st.predicted.push_back(khat);
    st.truth.push_back(k);
    const int d = std::abs(khat - k);
    ++hist[std::min(d, 5)];
    sum_d += d;
    sum_d2 += static_cast<double>(d) * d;
  }
  for (int h : hist) st.discrepancy_share.push_back(static_cast<double>(h) / n);
  st.exact_rate = st.discrepancy_share[0];
  st.within_one_rate = st.discrepancy_share[0] + st.discrepancy_share[1];
  const double mean_d = sum_d / n;
  st.discrepancy_variance = sum_d2 / n - mean_d * mean_d;

  // Fixed-accuracy comparison on held-out parameter values.
  std::vector<double> mus;
  for (const auto& s : samples) {
    if (mus.empty() || mus.back() != s.mu) mus.push_back(s.mu);
  }
  Rng rng(c.seed + 77);
  std::vector<double> shuffled = mus;
  rng.shuffle(shuffled);
  const int n_test = std::max(1, static_cast<int>(std::lround(c.dimension_study.test_fraction *
                                                              static_cast<double>(mus.size()))));
  st.test_mus.assign(shuffled.begin(), shuffled.begin() + n_test);
  std::sort(st.test_mus.begin(), st.test_mus.end());
  const std::set<double> test_set(st.test_mus.begin(), st.test_mus.end());
  const double log_target = std::log(c.dimension_study.target_eps);

  for (double mu : st.test_mus) {
    int best = 0;
    for (const auto& s : samples) {
      if (s.mu != mu || s.diverged) continue;
      if (s.log_eps <= log_target && (best == 0 || s.k < best)) best = s.k;
    }
    st.test_true_k.push_back(best);
    st.test_spectrum_k.push_back(
        spectrum_dimension_baseline(oracle.full_basis(mu)->sigma, c.dimension_study.target_eps,
                                    c.dimension_study.spectrum_rule,
                                    c.energy_on_squares)
            .k);
  }

  std::vector<int> train_rows;
  for (int i = 0; i < n; ++i) {
    if (!test_set.count(data.features(i, 0))) train_rows.push_back(i);
  }
  st.test_model_k.assign(st.test_mus.size(), 0.0);
  for (int r = 0; r < c.dimension_study.repeats; ++r) {
    std::vector<int> rows = train_rows;
    Rng split(c.seed + 100 + r);
    split.shuffle(rows);
    rows.resize(std::max<std::size_t>(2, rows.size() * 4 / 5));
    std::sort(rows.begin(), rows.end());
    Dataset sub;
    sub.feature_names = data.feature_names;
    sub.features.resize(rows.size(), 2);
    sub.targets.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      sub.features.row(i) = data.features.row(rows[i]);
      sub.targets(i) = data.targets(rows[i]);
    }
    const Surrogate model = Surrogate::fit(sub, c.dimension_model, c.seed + 200 + r);
    const DimensionModel dm = dimension_model(model);
    for (std::size_t t = 0; t < st.test_mus.size(); ++t) {
      st.test_model_k[t] += predict_dimension(dm, st.test_mus[t], log_target);
    }
  }
  int counted = 0, not_above = 0;
  for (std::size_t t = 0; t < st.test_mus.size(); ++t) {
    st.test_model_k[t] /= c.dimension_study.repeats;
    if (st.test_true_k[t] == 0) continue;
    ++counted;
    if (st.test_spectrum_k[t] <= st.test_true_k[t]) ++not_above;
  }
  st.spectrum_not_above_rate = counted ? static_cast<double>(not_above) / counted : 0.0;
  return st;
}

}  // namespace locrom
