#pragma once

#include <string>
#include <vector>

#include "locrom/atlas.hpp"
#include "locrom/config.hpp"
#include "locrom/rom.hpp"
#include "locrom/surrogate.hpp"

namespace locrom {

/// Numeric table with a header row. Values are written with 17 significant
/// digits so a read-back reproduces them exactly.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // throws when absent
};

std::string format_double(double v);

void write_csv(const std::string& path, const Table& t);
Table read_csv(const std::string& path);

/// Snapshot CSV: header t_0,...,t_{N_t-1}, one row per interior node.
void write_snapshots(const std::string& path, const Matrix& states);
Matrix read_snapshots(const std::string& path);

/// Basis CSV: header phi_1,...,phi_k, one row per interior node.
void write_basis(const std::string& path, const PodBasis& basis);

/// JSON written next to an artifact as <path>.meta.json. Always contains
/// the config fingerprint.
void write_sidecar(const std::string& artifact_path, const std::string& config_fingerprint,
                   Json extra = Json::object());
Json read_sidecar(const std::string& artifact_path);
std::string sidecar_path(const std::string& artifact_path);

void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

/// Dataset read from a CSV: `target` becomes the target column, the
/// remaining named columns the features (in the given order).
Dataset dataset_from_table(const Table& t, const std::vector<std::string>& feature_columns,
                           const std::string& target);

Json surrogate_to_json(const Surrogate& s);
Surrogate surrogate_from_json(const Json& j);

Json map_to_json(const ParametricMap& map, const std::vector<std::string>& basis_files);

}  // namespace locrom
