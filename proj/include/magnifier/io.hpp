#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace magnifier {

/// One output table: ordered metadata, column names, numeric rows.
struct Table {
  std::string name;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Shortest round-trippable decimal form; identical inputs give identical
/// bytes.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& os, const Table& table) {
  os << "# table: " << table.name << "\n";
  for (const auto& [key, value] : table.meta) {
    os << "# " << key << ": " << value << "\n";
  }
  for (size_t i = 0; i < table.columns.size(); ++i) {
    os << (i ? "," : "") << table.columns[i];
  }
  os << "\n";
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << format_double(row[i]);
    }
    os << "\n";
  }
}

inline void write_json(std::ostream& os, const Table& table) {
  nlohmann::ordered_json doc;
  doc["table"] = table.name;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [key, value] : table.meta) meta[key] = value;
  doc["meta"] = std::move(meta);
  doc["columns"] = table.columns;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) rows.push_back(row);
  doc["rows"] = std::move(rows);
  os << doc.dump(2) << "\n";
}

} // namespace magnifier
