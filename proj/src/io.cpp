#include "locrom/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace locrom {

namespace {

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, Eigen::Index cols_if_empty = 0) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : cols_if_empty;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) throw Error("ragged matrix in JSON");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

Json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  throw Error("table has no column '" + name + "'");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const Table& t) {
  auto out = open_out(path);
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    out << (c ? "," : "") << t.columns[c];
  }
  out << '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) {
      throw Error("write_csv: row width does not match the header of '" + path + "'");
    }
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
  if (!out) throw Error("write_csv: failed writing '" + path + "'");
}

Table read_csv(const std::string& path) {
  auto in = open_in(path);
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw Error("read_csv: '" + path + "' is empty");
  t.columns = split(line);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.columns.size()) {
      std::ostringstream msg;
      msg << "read_csv: " << path << ":" << lineno << " has " << cells.size() << " cells, expected "
          << t.columns.size();
      throw Error(msg.str());
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        std::ostringstream msg;
        msg << "read_csv: " << path << ":" << lineno << " has non-numeric cell '" << c << "'";
        throw Error(msg.str());
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_snapshots(const std::string& path, const Matrix& states) {
  Table t;
  for (Eigen::Index j = 0; j < states.cols(); ++j) t.columns.push_back("t_" + std::to_string(j));
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    t.rows.emplace_back(states.cols());
    for (Eigen::Index j = 0; j < states.cols(); ++j) t.rows.back()[j] = states(i, j);
  }
  write_csv(path, t);
}

Matrix read_snapshots(const std::string& path) {
  const Table t = read_csv(path);
  Matrix m(t.rows.size(), t.columns.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j < t.columns.size(); ++j) m(i, j) = t.rows[i][j];
  }
  return m;
}

void write_basis(const std::string& path, const PodBasis& basis) {
  Table t;
  for (int j = 0; j < basis.dim(); ++j) t.columns.push_back("phi_" + std::to_string(j + 1));
  for (Eigen::Index i = 0; i < basis.modes.rows(); ++i) {
    t.rows.emplace_back(basis.dim());
    for (int j = 0; j < basis.dim(); ++j) t.rows.back()[j] = basis.modes(i, j);
  }
  write_csv(path, t);
}

std::string sidecar_path(const std::string& artifact_path) { return artifact_path + ".meta.json"; }

void write_json(const std::string& path, const Json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("write_json: failed writing '" + path + "'");
}

Json read_json(const std::string& path) {
  auto in = open_in(path);
  try {
    Json j;
    in >> j;
    return j;
  } catch (const Json::exception& e) {
    throw Error("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_sidecar(const std::string& artifact_path, const std::string& config_fingerprint,
                   Json extra) {
  if (!extra.is_object()) throw Error("write_sidecar: metadata must be a JSON object");
  extra["config_fingerprint"] = config_fingerprint;
  extra["artifact"] = std::filesystem::path(artifact_path).filename().string();
  write_json(sidecar_path(artifact_path), extra);
}

Json read_sidecar(const std::string& artifact_path) {
  return read_json(sidecar_path(artifact_path));
}

Dataset dataset_from_table(const Table& t, const std::vector<std::string>& feature_columns,
                           const std::string& target) {
  Dataset d;
  d.feature_names = feature_columns;
  const int n = static_cast<int>(t.rows.size());
  d.features.resize(n, static_cast<Eigen::Index>(feature_columns.size()));
  d.targets.resize(n);
  std::vector<int> idx;
  for (const auto& c : feature_columns) idx.push_back(t.column(c));
  const int ti = t.column(target);
  for (int i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < idx.size(); ++c) d.features(i, c) = t.rows[i][idx[c]];
    d.targets(i) = t.rows[i][ti];
  }
  d.validate();
  return d;
}

Json surrogate_to_json(const Surrogate& s) {
  Json j;
  j["kind"] = to_string(s.kind());
  j["feature_shift"] = s.feature_scaling().shift;
  j["feature_scale"] = s.feature_scaling().scale;
  j["target_shift"] = s.target_shift();
  j["target_scale"] = s.target_scale();
  if (s.gp()) {
    const GpModel& g = *s.gp();
    j["gp"] = {{"length_scale", g.hyper.length_scale},
               {"signal_var", g.hyper.signal_var},
               {"noise_var", g.hyper.noise_var},
               {"prior_mean", g.prior_mean},
               {"jitter", g.jitter},
               {"train_x", matrix_to_json(g.train_x)},
               {"train_y", vector_to_json(g.train_y)}};
  }
  if (s.ann()) {
    const AnnModel& a = *s.ann();
    Json layers = Json::array();
    for (const auto& l : a.layers) {
      layers.push_back({{"weights", matrix_to_json(l.weights)}, {"bias", vector_to_json(l.bias)}});
    }
    j["ann"] = {{"layer_sizes", a.layer_sizes}, {"layers", layers}};
  }
  return j;
}

Surrogate surrogate_from_json(const Json& j) {
  try {
    AffineScaling scaling{j.at("feature_shift").get<std::vector<double>>(),
                          j.at("feature_scale").get<std::vector<double>>()};
    std::optional<GpModel> gp;
    std::optional<AnnModel> ann;
    if (j.contains("gp")) {
      const Json& g = j.at("gp");
      const GpHyper h{g.at("length_scale").get<double>(), g.at("signal_var").get<double>(),
                      g.at("noise_var").get<double>()};
      const Matrix x = matrix_from_json(g.at("train_x"));
      // Re-factorizing reproduces the stored jitter: the escalation is deterministic.
      gp = gp_condition(x, vector_from_json(g.at("train_y")), g.at("prior_mean").get<double>(), h,
                        std::max(1e-6, g.at("jitter").get<double>()));
    }
    if (j.contains("ann")) {
      AnnModel a;
      a.layer_sizes = j.at("ann").at("layer_sizes").get<std::vector<int>>();
      for (const auto& l : j.at("ann").at("layers")) {
        a.layers.push_back({matrix_from_json(l.at("weights")), vector_from_json(l.at("bias"))});
      }
      ann = std::move(a);
    }
    return Surrogate::from_parts(parse_model_kind(j.at("kind").get<std::string>()),
                                 std::move(scaling), j.at("target_shift").get<double>(),
                                 j.at("target_scale").get<double>(), std::move(gp),
                                 std::move(ann));
  } catch (const Json::exception& e) {
    throw Error(std::string("model checkpoint: ") + e.what());
  }
}

Json map_to_json(const ParametricMap& map, const std::vector<std::string>& basis_files) {
  if (!basis_files.empty() && basis_files.size() != map.intervals.size()) {
    throw Error("map_to_json: one basis file per interval expected");
  }
  Json arr = Json::array();
  for (std::size_t i = 0; i < map.intervals.size(); ++i) {
    const auto& iv = map.intervals[i];
    arr.push_back({{"center_mu", iv.center_mu},
                   {"d_left", iv.d_left},
                   {"d_right", iv.d_right},
                   {"threshold", iv.threshold},
                   {"basis_dim", iv.basis_dim},
                   {"basis_file", basis_files.empty() ? "" : basis_files[i]}});
  }
  return arr;
}

}  // namespace locrom
