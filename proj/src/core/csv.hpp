#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace driftlens::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // each sized like header

  std::size_t column(const std::string& name) const;  // raises format error
};

// Minimal CSV: comma separated, no quoting (identifiers here never contain
// commas), trailing \r tolerated, blank lines skipped.
Table read(std::istream& in);
Table read_file(const std::string& path);

// Shortest representation that round-trips a double exactly.
std::string format_value(double v);

double to_double(const std::string& field);
int to_int(const std::string& field);

}  // namespace driftlens::csv
