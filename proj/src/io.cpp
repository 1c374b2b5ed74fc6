#include "ohmgrad/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ohmgrad/error.hpp"

namespace ohmgrad {

CsvTable& CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header_.size())
    fail(Errc::schema_error, "CSV row has " + std::to_string(row.size()) + " cells; header has " +
                                 std::to_string(header_.size()));
  rows_.push_back(std::move(row));
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out += ',';
      out += cells[k];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

void CsvTable::write(const std::string& path) const { write_text_file(path, str()); }

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(std::size_t v) { return std::to_string(v); }

std::size_t validate_csv(const std::string& path, const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail(Errc::schema_error, path + ": empty file");
  std::string expected;
  for (std::size_t k = 0; k < header.size(); ++k) expected += (k ? "," : "") + header[k];
  if (line != expected) fail(Errc::schema_error, path + ": header '" + line + "' != '" + expected + "'");
  std::size_t rows = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cells = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (cells != header.size())
      fail(Errc::schema_error, path + ":" + std::to_string(lineno) + ": " + std::to_string(cells) + " cells");
    ++rows;
  }
  return rows;
}

nlohmann::json circuit_to_json(const Circuit& circuit) {
  const Eigen::VectorXd& r = circuit.resistances();
  return {{"graph", graph_to_json(circuit.graph())},
          {"r", std::vector<double>(r.data(), r.data() + r.size())},
          {"r_min", circuit.bounds().min},
          {"r_max", circuit.bounds().max}};
}

Circuit circuit_from_json(const nlohmann::json& j) {
  try {
    CircuitGraph g = graph_from_json(j.at("graph"));
    const auto r = j.at("r").get<std::vector<double>>();
    ResistanceBounds b;
    b.min = j.value("r_min", b.min);
    b.max = j.value("r_max", b.max);
    return Circuit(std::move(g), Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size())), b);
  } catch (const nlohmann::json::exception& ex) {
    fail(Errc::schema_error, std::string("circuit state: ") + ex.what());
  }
}

CsvTable steady_state_table(const SteadyState& st) {
  CsvTable t({"edge_index", "s", "v", "i"});
  for (Eigen::Index e = 0; e < st.v.size(); ++e)
    t.add({fmt(static_cast<std::size_t>(e)), fmt(st.s(e)), fmt(st.v(e)), fmt(st.i(e))});
  return t;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& ex) {
    fail(Errc::parse_error, path + ": " + ex.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot write " + path);
  out << text;
  if (!out) fail(Errc::io_error, "write failed: " + path);
}

}  // namespace ohmgrad
