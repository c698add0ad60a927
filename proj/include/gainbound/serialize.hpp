#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gainbound/errors.hpp"

namespace gainbound {

using json = nlohmann::json;

/// Row-major nested-array form of a matrix, the wire format every CLI
/// subcommand emits.
inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& j, const char* field) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(std::string(field) + ": expected a non-empty array");
  }
  // Accept both a flat vector and nested rows.
  if (!j.front().is_array()) {
    Eigen::MatrixXd m(j.size(), 1);
    for (size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number()) {
        throw ConfigError(std::string(field) + ": expected numbers");
      }
      m(static_cast<Eigen::Index>(i), 0) = j[i].get<double>();
    }
    return m;
  }
  const size_t cols = j.front().size();
  Eigen::MatrixXd m(j.size(), cols);
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ConfigError(std::string(field) + ": ragged matrix rows");
    }
    for (size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) {
        throw ConfigError(std::string(field) + ": expected numbers");
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          j[i][c].get<double>();
    }
  }
  return m;
}

inline Eigen::VectorXd vector_from_json(const json& j, const char* field) {
  const Eigen::MatrixXd m = matrix_from_json(j, field);
  if (m.cols() != 1) {
    throw ConfigError(std::string(field) + ": expected a vector");
  }
  return m.col(0);
}

/// 17 significant digits: enough for a 64-bit float to round-trip exactly.
inline std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

/// Minimal CSV document: header row plus numeric payload, comma separated,
/// LF line endings. Values are written with 17 significant digits.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string to_string() const {
    std::ostringstream out;
    for (size_t i = 0; i < columns.size(); ++i) {
      if (i) out << ',';
      out << columns[i];
    }
    out << '\n';
    for (const auto& row : rows) {
      for (size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        out << format_double(row[i]);
      }
      out << '\n';
    }
    return out.str();
  }
};

inline CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream stream(text);
  std::string line;
  if (!std::getline(stream, line)) {
    throw ConfigError("parse_csv: empty document");
  }
  std::istringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.columns.push_back(cell);

  size_t line_no = 1;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::vector<double> row;
    while (std::getline(fields, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        std::ostringstream msg;
        msg << "parse_csv: line " << line_no << ": bad number '" << cell
            << "'";
        throw ConfigError(msg.str());
      }
    }
    if (row.size() != table.columns.size()) {
      std::ostringstream msg;
      msg << "parse_csv: line " << line_no << ": expected "
          << table.columns.size() << " fields, got " << row.size();
      throw ConfigError(msg.str());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot open for writing: " + path.string());
  }
  out << content;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open file: " + path.string());
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

/// FNV-1a over the canonical (alphabetically keyed) JSON dump; identical
/// configs hash identically across runs and platforms.
inline std::string config_hash(const json& config) {
  const std::string dump = config.dump();
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : dump) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

}  // namespace gainbound
