#include "retraction_kit/experiment.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <sstream>

namespace rkit {

namespace {

std::string format_cell(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&cell)) {
    if (std::isnan(*d)) return "nan";
    if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, *d);
    return std::string(buf, res.ptr);
  }
  return std::get<std::string>(cell);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace

std::string to_csv(const Table& table) {
  std::ostringstream os;
  for (const auto& [key, value] : table.metadata) os << "# " << key << ": " << value << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    os << (i ? "," : "") << csv_escape(table.columns[i]);
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_escape(format_cell(row[i]));
    os << '\n';
  }
  return os.str();
}

std::string to_json(const Table& table) {
  nlohmann::ordered_json doc;
  doc["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : table.metadata) doc["metadata"][key] = value;
  doc["columns"] = table.columns;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    auto out = nlohmann::ordered_json::array();
    for (const auto& cell : row) {
      if (const auto* i = std::get_if<std::int64_t>(&cell)) {
        out.push_back(*i);
      } else if (const auto* d = std::get_if<double>(&cell)) {
        if (std::isfinite(*d))
          out.push_back(*d);
        else
          out.push_back(nullptr);
      } else {
        out.push_back(std::get<std::string>(cell));
      }
    }
    doc["rows"].push_back(std::move(out));
  }
  return doc.dump(2) + "\n";
}

}  // namespace rkit
