#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace aoi {

// Column-oriented numeric table plus scalar metadata; the common currency of
// the CLI writers. Doubles are emitted with 17 significant digits so CSV and
// JSON round-trip bit-exactly.
struct ResultTable {
  std::vector<std::string> headers;
  std::vector<std::vector<double>> rows;
  std::map<std::string, std::string> text_meta;
  std::map<std::string, double> meta;
};

std::string format_double(double x);  // %.17g

// Header row, one data row per line, LF endings, metadata as trailing
// "# key = value" comment lines.
void write_csv(std::ostream& os, const ResultTable& table);

void write_json(std::ostream& os, const ResultTable& table);
ResultTable read_json(std::istream& is);

}  // namespace aoi
