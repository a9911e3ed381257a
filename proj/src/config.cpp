#include "locrom/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace locrom {

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw Error("linspace: need at least one point");
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    const double x = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    v[i] = std::round(x * 1e12) / 1e12;
  }
  return v;
}

namespace {

std::vector<int> int_range(int lo, int hi) {
  std::vector<int> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

Json settings_to_json(const SurrogateSettings& s) {
  return Json{
      {"kind", to_string(s.kind)},
      {"gp",
       {{"init",
         {{"length_scale", s.gp_init.length_scale},
          {"signal_var", s.gp_init.signal_var},
          {"noise_var", s.gp_init.noise_var}}},
        {"restarts", s.gp.restarts},
        {"max_iters", s.gp.max_iters},
        {"initial_step", s.gp.initial_step},
        {"grad_tol", s.gp.grad_tol},
        {"optimization_subset", s.gp.optimization_subset},
        {"max_training_points", s.gp.max_training_points},
        {"refine_subset", s.gp.refine_subset},
        {"refine_evaluations", s.gp.refine_evaluations},
        {"min_noise_var", s.gp.min_noise_var},
        {"max_jitter", s.gp.max_jitter}}},
      {"ann",
       {{"hidden_layers", s.ann.hidden_layers},
        {"hidden_width", s.ann.hidden_width},
        {"epochs", s.ann.train.epochs},
        {"learning_rate", s.ann.train.learning_rate},
        {"optimizer", to_string(s.ann.train.optimizer)},
        {"validation_fraction", s.ann.train.validation_fraction},
        {"patience", s.ann.train.patience},
        {"lbfgs_memory", s.ann.train.lbfgs_memory}}}};
}

SurrogateSettings settings_from_json(const Json& j) {
  SurrogateSettings s;
  s.kind = parse_model_kind(j.at("kind").get<std::string>());
  const Json& gp = j.at("gp");
  s.gp_init.length_scale = gp.at("init").at("length_scale").get<double>();
  s.gp_init.signal_var = gp.at("init").at("signal_var").get<double>();
  s.gp_init.noise_var = gp.at("init").at("noise_var").get<double>();
  s.gp.restarts = gp.at("restarts").get<int>();
  s.gp.max_iters = gp.at("max_iters").get<int>();
  s.gp.initial_step = gp.at("initial_step").get<double>();
  s.gp.grad_tol = gp.at("grad_tol").get<double>();
  s.gp.optimization_subset = gp.at("optimization_subset").get<int>();
  s.gp.max_training_points = gp.at("max_training_points").get<int>();
  s.gp.refine_subset = gp.at("refine_subset").get<int>();
  s.gp.refine_evaluations = gp.at("refine_evaluations").get<int>();
  s.gp.min_noise_var = gp.at("min_noise_var").get<double>();
  s.gp.max_jitter = gp.at("max_jitter").get<double>();
  const Json& ann = j.at("ann");
  s.ann.hidden_layers = ann.at("hidden_layers").get<int>();
  s.ann.hidden_width = ann.at("hidden_width").get<int>();
  s.ann.train.epochs = ann.at("epochs").get<int>();
  s.ann.train.learning_rate = ann.at("learning_rate").get<double>();
  s.ann.train.optimizer = parse_optimizer(ann.at("optimizer").get<std::string>());
  s.ann.train.validation_fraction = ann.at("validation_fraction").get<double>();
  s.ann.train.patience = ann.at("patience").get<int>();
  s.ann.train.lbfgs_memory = ann.at("lbfgs_memory").get<int>();
  return s;
}

void reject_unknown_keys(const Json& given, const Json& known, const std::string& path) {
  if (!given.is_object() || !known.is_object()) return;
  for (auto it = given.begin(); it != given.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!known.contains(it.key())) {
      throw Error("config: unknown key '" + key + "'");
    }
    reject_unknown_keys(it.value(), known.at(it.key()), key);
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.error_dataset.basis_mus = linspace(0.1, 1.0, 10);
  c.error_dataset.query_mus = linspace(0.01, 1.0, 100);
  c.error_dataset.dims = int_range(kMinBasisDim, kMaxBasisDim);
  c.dimension_dataset.dims = int_range(kMinBasisDim, kMaxBasisDim);
  c.error_model.kind = ModelKind::ann;
  c.error_model.ann.hidden_layers = 6;
  c.dimension_model.kind = ModelKind::ann;
  c.dimension_model.ann.hidden_layers = 5;
  // Plain gradient descent and Adam stall well short of useful accuracy on
  // the 12,000-sample error surface within any affordable epoch count.
  for (SurrogateSettings* s : {&c.error_model, &c.dimension_model}) {
    s->ann.train.optimizer = AnnOptimizer::lbfgs;
    s->ann.train.epochs = 4000;
  }
  c.select_basis.candidate_mus = linspace(0.1, 1.0, 10);
  c.combine.dim_sweep = {6, 8, 10, 12, 14, 16, 18, 20};
  return c;
}

void ExperimentConfig::validate() const {
  grid.validate();
  if (!std::isfinite(model.nu) || !(model.mu > 0.0)) {
    throw Error("config: model.mu must be positive and model.nu finite");
  }
  if (solver.max_newton_iters < 1 || !(solver.newton_tol > 0.0)) {
    throw Error("config: solver needs max_newton_iters >= 1 and newton_tol > 0");
  }
  if (!(energy_gamma > 0.0 && energy_gamma <= 1.0)) {
    throw Error("config: pod.energy_gamma must lie in (0, 1]");
  }
  for (double mu : simulate_mus) {
    if (!(mu > 0.0)) throw Error("config: simulate.mus must be positive");
  }
  auto check_dims = [&](const std::vector<int>& dims, const char* where) {
    for (int k : dims) {
      if (k < 1 || k > grid.interior()) {
        std::ostringstream msg;
        msg << "config: " << where << " contains k=" << k << " outside [1, " << grid.interior()
            << "]";
        throw Error(msg.str());
      }
    }
  };
  check_dims(error_dataset.dims, "error_dataset.dims");
  check_dims(dimension_dataset.dims, "dimension_dataset.dims");
  check_dims(combine.dim_sweep, "combine.dim_sweep");
  if (dimension_dataset.mu_count < 1 || !(dimension_dataset.mu_min > 0.0) ||
      dimension_dataset.mu_max < dimension_dataset.mu_min) {
    throw Error("config: dimension_dataset needs 0 < mu_min <= mu_max and mu_count >= 1");
  }
  if (folds < 3 || folds > 10) {
    throw Error("config: surrogate.folds must lie in [3, 10]");
  }
  if (!(dimension_study.test_fraction > 0.0 && dimension_study.test_fraction < 1.0) ||
      dimension_study.repeats < 1 || !(dimension_study.target_eps > 0.0)) {
    throw Error("config: dimension_study needs test_fraction in (0,1), repeats >= 1, target_eps > 0");
  }
  if (combine.mu1 == combine.mu2) {
    throw Error("config: combine.mu1 and combine.mu2 must differ");
  }
  map.validate();
}

Json to_json(const ExperimentConfig& c) {
  return Json{
      {"grid",
       {{"length", c.grid.length},
        {"final_time", c.grid.final_time},
        {"n_space_points", c.grid.n_space_points},
        {"n_time_points", c.grid.n_time_points}}},
      {"model", {{"mu", c.model.mu}, {"nu", c.model.nu}}},
      {"solver",
       {{"max_newton_iters", c.solver.max_newton_iters}, {"newton_tol", c.solver.newton_tol}}},
      {"initial_condition", {{"coefficients", c.initial_condition.coefficients}}},
      {"simulate", {{"mus", c.simulate_mus}}},
      {"pod", {{"energy_gamma", c.energy_gamma}, {"energy_on_squares", c.energy_on_squares}}},
      {"error_dataset",
       {{"basis_mus", c.error_dataset.basis_mus},
        {"query_mus", c.error_dataset.query_mus},
        {"dims", c.error_dataset.dims}}},
      {"dimension_dataset",
       {{"mu_min", c.dimension_dataset.mu_min},
        {"mu_max", c.dimension_dataset.mu_max},
        {"mu_count", c.dimension_dataset.mu_count},
        {"dims", c.dimension_dataset.dims}}},
      {"surrogate",
       {{"log_targets", c.log_targets},
        {"folds", c.folds},
        {"error_model", settings_to_json(c.error_model)},
        {"dimension_model", settings_to_json(c.dimension_model)}}},
      {"interval",
       {{"center_mu", c.interval.center_mu},
        {"dim", c.interval.dim},
        {"threshold", c.interval.threshold},
        {"probe_step", c.interval.probe_step},
        {"max_radius", c.interval.max_radius}}},
      {"map",
       {{"A", c.map.A},
        {"B", c.map.B},
        {"eps0", c.map.eps0},
        {"delta_s", c.map.delta_s},
        {"r0", c.map.r0},
        {"dim", c.map.dim},
        {"beta1", c.map.beta1},
        {"beta2", c.map.beta2},
        {"beta3", c.map.beta3},
        {"mu_start", c.map.mu_start},
        {"max_iterations", c.map.max_iterations},
        {"max_repairs", c.map.max_repairs},
        {"max_bisections", c.map.max_bisections}}},
      {"select_basis",
       {{"query_mu", c.select_basis.query_mu},
        {"candidate_mus", c.select_basis.candidate_mus},
        {"dim", c.select_basis.dim}}},
      {"combine",
       {{"query_mu", c.combine.query_mu},
        {"mu1", c.combine.mu1},
        {"mu2", c.combine.mu2},
        {"final_times", c.combine.final_times},
        {"nu_sweep", c.combine.nu_sweep},
        {"dim_for_nu_sweep", c.combine.dim_for_nu_sweep},
        {"dim_sweep", c.combine.dim_sweep},
        {"nu_for_dim_sweep", c.combine.nu_for_dim_sweep}}},
      {"dimension_study",
       {{"target_eps", c.dimension_study.target_eps},
        {"test_fraction", c.dimension_study.test_fraction},
        {"repeats", c.dimension_study.repeats},
        {"spectrum_rule", to_string(c.dimension_study.spectrum_rule)}}},
      {"seed", c.seed}};
}

ExperimentConfig config_from_json(const Json& given) {
  if (!given.is_object()) {
    throw Error("config: top level must be a JSON object");
  }
  Json j = to_json(ExperimentConfig::defaults());
  reject_unknown_keys(given, j, "");
  j.merge_patch(given);

  ExperimentConfig c;
  try {
    const Json& g = j.at("grid");
    c.grid = Grid{g.at("length").get<double>(), g.at("final_time").get<double>(),
                  g.at("n_space_points").get<int>(), g.at("n_time_points").get<int>()};
    c.model = ModelParams{j.at("model").at("mu").get<double>(), j.at("model").at("nu").get<double>()};
    c.solver = SolverSettings{j.at("solver").at("max_newton_iters").get<int>(),
                              j.at("solver").at("newton_tol").get<double>()};
    c.initial_condition.coefficients =
        j.at("initial_condition").at("coefficients").get<std::vector<double>>();
    c.simulate_mus = j.at("simulate").at("mus").get<std::vector<double>>();
    c.energy_gamma = j.at("pod").at("energy_gamma").get<double>();
    c.energy_on_squares = j.at("pod").at("energy_on_squares").get<bool>();

    const Json& ed = j.at("error_dataset");
    c.error_dataset.basis_mus = ed.at("basis_mus").get<std::vector<double>>();
    c.error_dataset.query_mus = ed.at("query_mus").get<std::vector<double>>();
    c.error_dataset.dims = ed.at("dims").get<std::vector<int>>();
    const Json& dd = j.at("dimension_dataset");
    c.dimension_dataset.mu_min = dd.at("mu_min").get<double>();
    c.dimension_dataset.mu_max = dd.at("mu_max").get<double>();
    c.dimension_dataset.mu_count = dd.at("mu_count").get<int>();
    c.dimension_dataset.dims = dd.at("dims").get<std::vector<int>>();

    const Json& su = j.at("surrogate");
    c.log_targets = su.at("log_targets").get<bool>();
    c.folds = su.at("folds").get<int>();
    c.error_model = settings_from_json(su.at("error_model"));
    c.dimension_model = settings_from_json(su.at("dimension_model"));

    const Json& iv = j.at("interval");
    c.interval = IntervalConfig{iv.at("center_mu").get<double>(), iv.at("dim").get<int>(),
                                iv.at("threshold").get<double>(), iv.at("probe_step").get<double>(),
                                iv.at("max_radius").get<double>()};
    const Json& m = j.at("map");
    c.map.A = m.at("A").get<double>();
    c.map.B = m.at("B").get<double>();
    c.map.eps0 = m.at("eps0").get<double>();
    c.map.delta_s = m.at("delta_s").get<double>();
    c.map.r0 = m.at("r0").get<double>();
    c.map.dim = m.at("dim").get<int>();
    c.map.beta1 = m.at("beta1").get<double>();
    c.map.beta2 = m.at("beta2").get<double>();
    c.map.beta3 = m.at("beta3").get<double>();
    c.map.mu_start = m.at("mu_start").get<double>();
    c.map.max_iterations = m.at("max_iterations").get<int>();
    c.map.max_repairs = m.at("max_repairs").get<int>();
    c.map.max_bisections = m.at("max_bisections").get<int>();

    const Json& sb = j.at("select_basis");
    c.select_basis = SelectBasisConfig{sb.at("query_mu").get<double>(),
                                       sb.at("candidate_mus").get<std::vector<double>>(),
                                       sb.at("dim").get<int>()};
    const Json& cb = j.at("combine");
    c.combine.query_mu = cb.at("query_mu").get<double>();
    c.combine.mu1 = cb.at("mu1").get<double>();
    c.combine.mu2 = cb.at("mu2").get<double>();
    c.combine.final_times = cb.at("final_times").get<std::vector<double>>();
    c.combine.nu_sweep = cb.at("nu_sweep").get<std::vector<double>>();
    c.combine.dim_for_nu_sweep = cb.at("dim_for_nu_sweep").get<int>();
    c.combine.dim_sweep = cb.at("dim_sweep").get<std::vector<int>>();
    c.combine.nu_for_dim_sweep = cb.at("nu_for_dim_sweep").get<double>();

    const Json& ds = j.at("dimension_study");
    c.dimension_study = DimensionStudyConfig{ds.at("target_eps").get<double>(),
                                             ds.at("test_fraction").get<double>(),
                                             ds.at("repeats").get<int>(),
                                             parse_spectrum_rule(ds.at("spectrum_rule").get<std::string>())};
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const Json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("config: cannot open '" + path + "'");
  }
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw Error("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fingerprint(const ExperimentConfig& c) { return fnv1a_hex(to_json(c).dump()); }

}  // namespace locrom
