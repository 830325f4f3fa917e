#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "structmor/balancing.hpp"
#include "structmor/certificate.hpp"
#include "structmor/errors.hpp"
#include "structmor/interconnection.hpp"
#include "structmor/state_space.hpp"

namespace structmor {

using nlohmann::json;

/// Full-precision numeric formatting; infinities become the string "inf".
inline std::string format_full(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Six significant digits for human-readable tables.
inline std::string format_sig6(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

/// Numbers in JSON follow the same convention: finite doubles stay numeric,
/// infinities serialize as "inf"/"-inf" strings.
inline json json_number(double v) {
  if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
  if (std::isnan(v)) return json("nan");
  return json(v);
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty())
    throw DimensionError("field '" + name + "' must be a non-empty nested array");
  const size_t rows = j.size();
  if (!j[0].is_array()) throw DimensionError("field '" + name + "' must be a nested array");
  const size_t cols = j[0].size();
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw DimensionError("field '" + name + "' has ragged rows");
    for (size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number())
        throw DimensionError("field '" + name + "' must contain finite numbers");
      const double v = j[i][c].get<double>();
      if (!std::isfinite(v))
        throw DimensionError("field '" + name + "' must contain finite numbers");
      m(static_cast<Index>(i), static_cast<Index>(c)) = v;
    }
  }
  return m;
}

inline json model_to_json(const StateSpace& sys) {
  json j;
  j["A"] = matrix_to_json(sys.A);
  j["B"] = matrix_to_json(sys.B);
  j["C"] = matrix_to_json(sys.C);
  j["D"] = matrix_to_json(sys.D);
  return j;
}

inline StateSpace model_from_json(const json& j) {
  for (const char* f : {"A", "B", "C", "D"})
    if (!j.contains(f)) throw DimensionError(std::string("model is missing field '") + f + "'");
  return StateSpace(matrix_from_json(j["A"], "A"), matrix_from_json(j["B"], "B"),
                    matrix_from_json(j["C"], "C"), matrix_from_json(j["D"], "D"));
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError("cannot parse '" + path + "': " + e.what());
  }
  return j;
}

inline void save_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline StateSpace load_model(const std::string& path) { return model_from_json(load_json_file(path)); }

inline void save_model(const StateSpace& sys, const std::string& path) {
  save_json_file(model_to_json(sys), path);
}

inline json certificate_to_json(const PassivityCertificate& cert) {
  json j;
  j["feasible"] = cert.feasible;
  j["residual"] = json_number(cert.max_eig_residual);
  j["method"] = cert.method == CertificateMethod::Sdp ? "sdp" : "regularized-riccati";
  if (cert.Xi.has_value()) j["Xi"] = matrix_to_json(cert.Xi->X);
  return j;
}

inline json reduction_to_json(const ReductionResult& red) {
  json j = model_to_json(red.reduced);
  j["method"] = reduction_method_name(red.method);
  json g = json::array();
  for (Index i = 0; i < red.gamma.size(); ++i) g.push_back(red.gamma(i));
  j["gamma"] = std::move(g);
  if (red.certificate.has_value()) j["certificate"] = certificate_to_json(*red.certificate);
  if (!red.warnings.empty()) j["warnings"] = red.warnings;
  return j;
}

/// Topology file: {"S": matrix, "Bcal": matrix,
///                 "subsystems": [model paths], "orders": [r_j]}.
struct TopologyFile {
  InterconnectionTopology topo;
  std::vector<std::string> subsystem_paths;
  std::vector<Index> orders;  // may be empty
};

inline TopologyFile load_topology(const std::string& path) {
  const json j = load_json_file(path);
  TopologyFile tf;
  if (!j.contains("S") || !j.contains("Bcal") || !j.contains("subsystems"))
    throw DimensionError("topology file needs fields 'S', 'Bcal', 'subsystems'");
  tf.topo.S = matrix_from_json(j["S"], "S");
  tf.topo.Bcal = matrix_from_json(j["Bcal"], "Bcal");
  for (const auto& p : j["subsystems"]) tf.subsystem_paths.push_back(p.get<std::string>());
  if (j.contains("orders"))
    for (const auto& r : j["orders"]) tf.orders.push_back(r.get<Index>());
  return tf;
}

/// Minimal CSV writer; every cell is pre-formatted text.
inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace structmor
