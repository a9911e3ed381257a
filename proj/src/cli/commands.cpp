#include "locrom/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "locrom/experiments.hpp"

namespace locrom {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::string model;       // gp | ann | oracle; empty means the config's choice
  std::string kind = "error";
  std::string dataset;     // input CSV override
  std::string checkpoint;  // model file override
};

// Raised for bad flag combinations after CLI11 has accepted the syntax.
class UsageError : public Error {
public:
  using Error::Error;
};

// Writes artifacts under one command directory and tracks what was written.
class Outputs {
public:
  Outputs(const Options& o, const ExperimentConfig& c, const std::string& sub)
      : dir_(fs::path(o.out_dir) / sub), fp_(fingerprint(c)) {
    fs::create_directories(dir_);
    json("config.json", to_json(c));
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  const std::string& fingerprint_hex() const { return fp_; }

  void csv(const std::string& name, const Table& t, Json meta = Json::object()) {
    write_csv(path(name), t);
    meta["rows"] = t.rows.size();
    finish(name, std::move(meta));
  }

  void json(const std::string& name, const Json& j, Json meta = Json::object()) {
    write_json(path(name), j);
    finish(name, std::move(meta));
  }

  void snapshots(const std::string& name, const Matrix& states, Json meta = Json::object()) {
    write_snapshots(path(name), states);
    finish(name, std::move(meta));
  }

  void text(const std::string& name, const std::string& body) {
    std::ofstream f(path(name), std::ios::binary);
    f << body;
    if (!f) throw Error("cannot write '" + path(name) + "'");
    f.close();
    finish(name, Json::object());
  }

  void basis(const std::string& name, const PodBasis& b, Json meta = Json::object()) {
    write_basis(path(name), b);
    finish(name, std::move(meta));
  }

  const std::vector<std::string>& written() const { return written_; }

private:
  void finish(const std::string& name, Json meta) {
    write_sidecar(path(name), fp_, std::move(meta));
    written_.push_back(path(name));
  }

  fs::path dir_;
  std::string fp_;
  std::vector<std::string> written_;
};

std::string mu_label(double mu) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", mu);
  return buf;
}

ExperimentConfig resolve_config(const Options& o) {
  ExperimentConfig c =
      o.config_path.empty() ? ExperimentConfig::defaults() : load_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  c.validate();
  return c;
}

std::string resolve_model(const Options& o, ModelKind fallback, bool allow_oracle) {
  if (o.model.empty()) return to_string(fallback);
  if (o.model == "gp" || o.model == "ann") return o.model;
  if (o.model == "oracle" && allow_oracle) return o.model;
  throw UsageError("--model " + o.model + " is not valid for '" + o.command + "'");
}

std::string default_dataset(const Options& o, const std::string& kind) {
  if (!o.dataset.empty()) return o.dataset;
  return (fs::path(o.out_dir) / "dataset" / (kind + "_samples.csv")).string();
}

std::string default_checkpoint(const Options& o, const std::string& model) {
  if (!o.checkpoint.empty()) return o.checkpoint;
  return (fs::path(o.out_dir) / "train" / ("error_" + model + "_model.json")).string();
}

// Inputs found under --out are recorded relative to it, so an output tree
// does not depend on where it was written.
std::string recorded_path(const Options& o, const std::string& path) {
  const fs::path root = fs::weakly_canonical(o.out_dir);
  const fs::path p = fs::weakly_canonical(path);
  const fs::path rel = p.lexically_relative(root);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return path;
}

// The error model for map and select-basis: the oracle itself, or a
// trained surrogate read from its checkpoint.
struct LoadedErrorModel {
  std::optional<Surrogate> surrogate;
  std::unique_ptr<ErrorModel> model;
  std::string source;
};

LoadedErrorModel load_error_model(const Options& o, const ExperimentConfig& c,
                                  RomOracle& oracle) {
  LoadedErrorModel m;
  const std::string which = resolve_model(o, c.error_model.kind, true);
  if (which == "oracle") {
    m.model = std::make_unique<OracleErrorModel>(oracle);
    m.source = "oracle";
    return m;
  }
  const std::string ckpt = default_checkpoint(o, which);
  const Json j = read_json(ckpt);
  m.surrogate = surrogate_from_json(j.at("model"));
  if (to_string(m.surrogate->kind()) != which) {
    throw UsageError("checkpoint '" + ckpt + "' holds a " + to_string(m.surrogate->kind()) +
                     " model, not " + which);
  }
  if (!j.value("log_targets", true)) {
    throw UsageError("checkpoint '" + ckpt + "' was trained on raw errors; maps need log targets");
  }
  m.model = std::make_unique<SurrogateErrorModel>(*m.surrogate);
  m.source = recorded_path(o, ckpt);
  return m;
}

void cmd_simulate(const Options&, const ExperimentConfig& c, Outputs& out) {
  const Vector u0 = sample_initial_condition(c.grid, c.initial_condition);
  for (double mu : c.simulate_mus) {
    ModelParams p = c.model;
    p.mu = mu;
    const SnapshotMatrix s = solve(c.grid, p, c.solver, u0);
    out.snapshots("snapshots_mu_" + mu_label(mu) + ".csv", s.states,
                  {{"mu", mu}, {"nu", p.nu}, {"n_rows", s.states.rows()}, {"n_cols", s.states.cols()}});
  }
}

void cmd_dataset(const Options& o, const ExperimentConfig& c, Outputs& out) {
  if (o.kind != "error" && o.kind != "dimension" && o.kind != "all") {
    throw UsageError("--kind must be error, dimension or all");
  }
  RomOracle oracle = make_oracle(c);
  if (o.kind == "error" || o.kind == "all") {
    const auto samples = generate_error_dataset(oracle, c.error_dataset);
    const auto diverged = std::count_if(samples.begin(), samples.end(),
                                        [](const ErrorSample& s) { return s.diverged; });
    out.csv("error_samples.csv", error_table(samples), {{"diverged", diverged}});
  }
  if (o.kind == "dimension" || o.kind == "all") {
    const auto samples = generate_dimension_dataset(oracle, c.dimension_dataset);
    const auto diverged = std::count_if(samples.begin(), samples.end(),
                                        [](const DimensionSample& s) { return s.diverged; });
    out.csv("dimension_samples.csv", dimension_table(samples), {{"diverged", diverged}});
  }
}

double population_std(const Vector& v) {
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().mean());
}

void cmd_train(const Options& o, const ExperimentConfig& c, Outputs& out) {
  if (o.kind != "error" && o.kind != "dimension") {
    throw UsageError("--kind must be error or dimension for 'train'");
  }
  const bool error_kind = o.kind == "error";
  SurrogateSettings settings = error_kind ? c.error_model : c.dimension_model;
  settings.kind = parse_model_kind(resolve_model(o, settings.kind, false));

  const Table table = read_csv(default_dataset(o, o.kind));
  const Dataset data = error_kind ? error_training_set(error_samples_from_table(table), c.log_targets)
                                  : dimension_training_set(dimension_samples_from_table(table));

  const FoldReport folds = kfold_validate(data, settings, c.folds, c.seed);
  const Surrogate model = Surrogate::fit(data, settings, c.seed);

  const std::string stem = o.kind + "_" + to_string(settings.kind);
  Table ft{{"fold", "error", "variance"}, {}};
  for (std::size_t f = 0; f < folds.fold_error.size(); ++f) {
    ft.rows.push_back({static_cast<double>(f), folds.fold_error[f], folds.fold_variance[f]});
  }
  out.csv(stem + "_folds.csv", ft);

  Table pt{data.feature_names, {}};
  pt.columns.push_back("target");
  pt.columns.push_back("prediction");
  for (int i = 0; i < data.size(); ++i) {
    std::vector<double> row(data.dim());
    for (int j = 0; j < data.dim(); ++j) row[j] = data.features(i, j);
    row.push_back(data.targets(i));
    row.push_back(folds.predictions(i));
    pt.rows.push_back(std::move(row));
  }
  out.csv(stem + "_oof_predictions.csv", pt);

  const double spread = population_std(data.targets);
  out.json(stem + "_summary.json",
           {{"kind", o.kind},
            {"model", to_string(settings.kind)},
            {"samples", data.size()},
            {"folds", c.folds},
            {"E", folds.error},
            {"VAR", folds.variance},
            {"normalized_E", spread > 0.0 ? folds.error / spread : 0.0},
            {"log_targets", error_kind ? c.log_targets : false}});
  out.json(stem + "_model.json",
           {{"kind", o.kind},
            {"log_targets", error_kind ? c.log_targets : false},
            {"model", surrogate_to_json(model)}});
}

Json interval_json(const FeasibleInterval& iv) {
  return {{"center_mu", iv.center_mu}, {"d_left", iv.d_left},     {"d_right", iv.d_right},
          {"threshold", iv.threshold}, {"basis_dim", iv.basis_dim}};
}

Table map_plot_table(const ParametricMap& map) {
  Table t{{"index", "center_mu", "d_left", "d_right", "threshold", "log_threshold", "basis_dim"},
          {}};
  for (std::size_t i = 0; i < map.intervals.size(); ++i) {
    const auto& iv = map.intervals[i];
    t.rows.push_back({static_cast<double>(i), iv.center_mu, iv.d_left, iv.d_right, iv.threshold,
                      std::log(iv.threshold), static_cast<double>(iv.basis_dim)});
  }
  return t;
}

Json map_config_json(const MapConfig& m) {
  return {{"A", m.A},         {"B", m.B},         {"eps0", m.eps0},   {"delta_s", m.delta_s},
          {"r0", m.r0},       {"dim", m.dim},     {"beta1", m.beta1}, {"beta2", m.beta2},
          {"beta3", m.beta3}, {"mu_start", m.mu_start}};
}

void cmd_map(const Options& o, const ExperimentConfig& c, Outputs& out) {
  RomOracle oracle = make_oracle(c);
  const LoadedErrorModel em = load_error_model(o, c, oracle);

  const IntervalConfig& ic = c.interval;
  try {
    const FeasibleInterval iv = find_feasible_interval(*em.model, ic.center_mu, ic.dim,
                                                       ic.threshold, ic.probe_step, ic.max_radius);
    out.json("feasible_interval.json", interval_json(iv), {{"model", em.source}});
  } catch (const InfeasibleCenter& e) {
    out.json("feasible_interval.json", {{"infeasible", true}, {"message", e.what()}},
             {{"model", em.source}});
  }

  ParametricMap map;
  try {
    map = build_map(*em.model, c.map);
  } catch (const MapIncomplete& e) {
    out.json("partial_map.json", {{"config", map_config_json(c.map)},
                                  {"intervals", map_to_json(e.partial(), {})}});
    throw;
  }
  std::vector<std::string> files;
  for (std::size_t i = 0; i < map.intervals.size(); ++i) {
    const auto& iv = map.intervals[i];
    char name[32];
    std::snprintf(name, sizeof name, "basis_%03zu.csv", i);
    out.basis(name, truncate(*oracle.full_basis(iv.center_mu), iv.basis_dim),
              {{"center_mu", iv.center_mu}, {"basis_dim", iv.basis_dim}});
    files.push_back(name);
  }
  out.json("map.json", {{"model", em.source},
                        {"config", map_config_json(c.map)},
                        {"intervals", map_to_json(map, files)}});
  out.csv("map_plot.csv", map_plot_table(map));
}

void cmd_select_basis(const Options& o, const ExperimentConfig& c, Outputs& out) {
  RomOracle oracle = make_oracle(c);
  const LoadedErrorModel em = load_error_model(o, c, oracle);
  const SelectBasisConfig& sc = c.select_basis;
  const auto predicted = rank_bases(*em.model, sc.query_mu, sc.candidate_mus, sc.dim);
  const OracleErrorModel truth_model(oracle);
  const auto truth = rank_bases(truth_model, sc.query_mu, sc.candidate_mus, sc.dim);
  std::map<double, std::pair<int, double>> true_rank;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    true_rank[truth[i].mu] = {static_cast<int>(i) + 1, truth[i].predicted_log_error};
  }
  Table t{{"rank", "mu", "predicted_log_error", "true_log_error", "true_rank"}, {}};
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& tr = true_rank.at(predicted[i].mu);
    t.rows.push_back({static_cast<double>(i + 1), predicted[i].mu, predicted[i].predicted_log_error,
                      tr.second, static_cast<double>(tr.first)});
  }
  out.csv("ranking.csv", t, {{"model", em.source}, {"query_mu", sc.query_mu}, {"dim", sc.dim}});
}

void cmd_combine(const Options&, const ExperimentConfig& c, Outputs& out) {
  out.csv("combination.csv", combination_table(run_combination_study(c)),
          {{"query_mu", c.combine.query_mu}, {"mu1", c.combine.mu1}, {"mu2", c.combine.mu2}});
}

void cmd_dimension(const Options& o, const ExperimentConfig& c, Outputs& out) {
  ExperimentConfig cc = c;
  cc.dimension_model.kind = parse_model_kind(resolve_model(o, c.dimension_model.kind, false));

  RomOracle oracle = make_oracle(cc);
  const std::string path = default_dataset(o, "dimension");
  std::vector<DimensionSample> samples;
  std::string source = recorded_path(o, path);
  if (fs::exists(path)) {
    samples = dimension_samples_from_table(read_csv(path));
  } else {
    samples = generate_dimension_dataset(oracle, cc.dimension_dataset);
    source = "generated";
  }
  const DimensionStudy st = run_dimension_study(samples, oracle, cc);

  Table pred{{"mu", "log_eps", "k_true", "k_predicted", "raw_prediction"}, {}};
  const Dataset data = dimension_training_set(samples);
  for (int i = 0; i < data.size(); ++i) {
    pred.rows.push_back({data.features(i, 0), data.features(i, 1),
                         static_cast<double>(st.truth[i]), static_cast<double>(st.predicted[i]),
                         st.folds.predictions(i)});
  }
  out.csv("predictions.csv", pred, {{"dataset", source}});

  Table hist{{"discrepancy", "share"}, {}};
  for (std::size_t d = 0; d < st.discrepancy_share.size(); ++d) {
    hist.rows.push_back({static_cast<double>(d), st.discrepancy_share[d]});
  }
  out.csv("discrepancy_histogram.csv", hist, {{"note", "discrepancy 5 collects |dk| > 4"}});

  Table fixed{{"mu", "k_true", "k_model", "k_spectrum"}, {}};
  for (std::size_t t = 0; t < st.test_mus.size(); ++t) {
    fixed.rows.push_back({st.test_mus[t], static_cast<double>(st.test_true_k[t]),
                          st.test_model_k[t], static_cast<double>(st.test_spectrum_k[t])});
  }
  out.csv("fixed_accuracy.csv", fixed,
          {{"target_eps", cc.dimension_study.target_eps},
           {"spectrum_rule", to_string(cc.dimension_study.spectrum_rule)},
           {"note", "k_true 0: no k reaches it"}});

  out.json("summary.json", {{"model", to_string(cc.dimension_model.kind)},
                            {"samples", data.size()},
                            {"E", st.folds.error},
                            {"VAR", st.folds.variance},
                            {"exact_rate", st.exact_rate},
                            {"within_one_rate", st.within_one_rate},
                            {"discrepancy_variance", st.discrepancy_variance},
                            {"spectrum_not_above_rate", st.spectrum_not_above_rate}});
}

// Scans every sidecar under the output directory (except the report's own)
// and checks that all artifacts come from the current config.
void cmd_report(const Options& o, const ExperimentConfig&, Outputs& out, bool& consistent) {
  const fs::path root(o.out_dir);
  const fs::path own = fs::absolute(root / "report");
  std::vector<fs::path> sidecars;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    const std::string name = e.path().filename().string();
    if (!e.is_regular_file() || name.size() < 10 ||
        name.compare(name.size() - 10, 10, ".meta.json") != 0) {
      continue;
    }
    if (fs::absolute(e.path()).parent_path() == own) continue;
    sidecars.push_back(e.path());
  }
  std::sort(sidecars.begin(), sidecars.end());

  consistent = true;
  Json artifacts = Json::array();
  std::ostringstream text;
  text << "config fingerprint " << out.fingerprint_hex() << "\n\n";
  for (const auto& p : sidecars) {
    const Json meta = read_json(p.string());
    const std::string fp = meta.value("config_fingerprint", "");
    const bool match = fp == out.fingerprint_hex();
    consistent = consistent && match;
    std::string rel = fs::relative(p, root).generic_string();
    rel.resize(rel.size() - 10);
    artifacts.push_back({{"artifact", rel}, {"config_fingerprint", fp}, {"matches", match}});
    text << (match ? "  ok        " : "  MISMATCH  ") << rel << "\n";
  }

  Json summaries = Json::object();
  for (const auto& dir : {"train", "dimension"}) {
    if (!fs::exists(root / dir)) continue;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(root / dir)) {
      const std::string name = e.path().filename().string();
      if (name.size() >= 12 && name.compare(name.size() - 12, 12, "summary.json") == 0) {
        files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const Json s = read_json(f.string());
      summaries[fs::relative(f, root).generic_string()] = s;
      text << "\n" << fs::relative(f, root).generic_string() << "\n";
      for (const auto& [k, v] : s.items()) text << "  " << std::left << std::setw(24) << k << v.dump() << "\n";
    }
  }
  text << "\n" << (consistent ? "all artifacts match the config" : "fingerprint mismatch") << "\n";

  out.json("report.json", {{"config_fingerprint", out.fingerprint_hex()},
                           {"consistent", consistent},
                           {"artifacts", artifacts},
                           {"summaries", summaries}});
  out.text("report.txt", text.str());
}

std::string error_type(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return "usage";
  if (dynamic_cast<const NewtonFailure*>(&e)) return "newton_failure";
  if (dynamic_cast<const MapIncomplete*>(&e)) return "map_incomplete";
  if (dynamic_cast<const Error*>(&e)) return "error";
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return "io";
  if (dynamic_cast<const Json::exception*>(&e)) return "json";
  return "internal";
}

void emit_error(std::ostream& err, const std::string& command, const std::string& type,
                const std::string& message) {
  err << Json{{"error", {{"command", command}, {"type", type}, {"message", message}}}}.dump()
      << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Local reduced-order models for the viscous Burgers equation"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.add_option("--config", o.config_path, "JSON config; omitted keys keep their defaults")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Overrides the config seed");
  app.add_option("--out", o.out_dir, "Output directory")->capture_default_str();
  app.add_option("--model", o.model, "gp, ann or oracle (map and select-basis only)")
      ->check(CLI::IsMember({"gp", "ann", "oracle"}));

  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "Full-order trajectories for simulate.mus"},
      {"dataset", "ROM error samples (--kind error|dimension|all)"},
      {"train", "K-fold validation and a checkpoint (--kind error|dimension)"},
      {"map", "Feasible interval and parametric map"},
      {"select-basis", "Rank candidate bases for a query parameter"},
      {"combine", "Basis combination comparison"},
      {"dimension", "Basis-dimension model study"},
      {"report", "Fingerprint cross-check and summary of an output directory"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->callback([&o, name = name] { o.command = name; });
    if (name == "dataset" || name == "train") {
      sub->add_option("--kind", o.kind,
                      name == "dataset" ? "error, dimension or all" : "error or dimension")
          ->capture_default_str();
    }
    if (name == "train" || name == "dimension") {
      sub->add_option("--dataset", o.dataset, "Sample CSV (default: <out>/dataset/...)");
    }
    if (name == "map" || name == "select-basis") {
      sub->add_option("--checkpoint", o.checkpoint, "Surrogate checkpoint (default: <out>/train/...)");
    }
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    emit_error(err, o.command, "usage", e.what());
    return 2;
  }

  try {
    const ExperimentConfig c = resolve_config(o);
    std::string sub = o.command;
    std::replace(sub.begin(), sub.end(), '-', '_');
    Outputs outputs(o, c, sub);
    bool consistent = true;
    if (o.command == "simulate") cmd_simulate(o, c, outputs);
    else if (o.command == "dataset") cmd_dataset(o, c, outputs);
    else if (o.command == "train") cmd_train(o, c, outputs);
    else if (o.command == "map") cmd_map(o, c, outputs);
    else if (o.command == "select-basis") cmd_select_basis(o, c, outputs);
    else if (o.command == "combine") cmd_combine(o, c, outputs);
    else if (o.command == "dimension") cmd_dimension(o, c, outputs);
    else if (o.command == "report") cmd_report(o, c, outputs, consistent);

    out << Json{{"command", o.command}, {"config_fingerprint", outputs.fingerprint_hex()},
                {"outputs", outputs.written()}}.dump(2)
        << "\n";
    if (!consistent) {
      emit_error(err, o.command, "fingerprint_mismatch",
                 "artifacts under '" + o.out_dir + "' come from a different config; see report/report.txt");
      return 3;
    }
    return 0;
  } catch (const UsageError& e) {
    emit_error(err, o.command, "usage", e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error(err, o.command, error_type(e), e.what());
    return 1;
  }
}

}  // namespace locrom
