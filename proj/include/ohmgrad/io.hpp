#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "ohmgrad/circuit.hpp"

namespace ohmgrad {

/// Plain CSV table; every row must have exactly header.size() cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }

  CsvTable& add(std::vector<std::string> row);

  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Shortest round-trip formatting ("%.17g"); NaN prints as an empty cell.
std::string fmt(double v);
std::string fmt(std::size_t v);

/// Re-read a CSV and check its header and the cell count of every row.
/// Returns the row count; throws Errc::schema_error on mismatch.
std::size_t validate_csv(const std::string& path, const std::vector<std::string>& header);

/// {"graph": ..., "r": [...], "r_min": x, "r_max": y}
nlohmann::json circuit_to_json(const Circuit& circuit);
Circuit circuit_from_json(const nlohmann::json& j);

/// edge_index, s, v, i
CsvTable steady_state_table(const SteadyState& st);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ohmgrad
