#include "core/csv.hpp"

#include "core/errors.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

namespace driftlens::csv {

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  raise(ErrorCode::format, "csv: missing column '" + name + "'");
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

}  // namespace

Table read(std::istream& in) {
  Table table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_line(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      raise(ErrorCode::format,
            "csv: row with " + std::to_string(fields.size()) + " fields, header has " +
                std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) {
    raise(ErrorCode::format, "csv: empty input");
  }
  return table;
}

Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::io, "cannot open '" + path + "' for reading");
  return read(in);
}

std::string format_value(double v) {
  // Try increasing precision until the text parses back to the same bits.
  char buf[40];
  for (int precision = 9; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

double to_double(const std::string& field) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || (end != nullptr && *end != '\0')) {
    raise(ErrorCode::format, "csv: '" + field + "' is not a number");
  }
  return v;
}

int to_int(const std::string& field) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    raise(ErrorCode::format, "csv: '" + field + "' is not an integer");
  }
  return v;
}

}  // namespace driftlens::csv
