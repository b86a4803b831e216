#include "aoi/report.hpp"

#include <cstdio>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "aoi/errors.hpp"

namespace aoi {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(std::ostream& os, const ResultTable& table) {
  for (std::size_t i = 0; i < table.headers.size(); ++i) {
    if (i) os << ',';
    os << table.headers[i];
  }
  os << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.headers.size())
      throw InvalidParams("table row width does not match the header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << format_double(row[i]);
    }
    os << '\n';
  }
  for (const auto& [k, v] : table.text_meta) os << "# " << k << " = " << v << '\n';
  for (const auto& [k, v] : table.meta) os << "# " << k << " = " << format_double(v) << '\n';
}

void write_json(std::ostream& os, const ResultTable& table) {
  nlohmann::json j;
  j["headers"] = table.headers;
  j["rows"] = table.rows;
  j["text_meta"] = table.text_meta;
  j["meta"] = table.meta;
  os << j.dump(2) << '\n';
}

ResultTable read_json(std::istream& is) {
  nlohmann::json j = nlohmann::json::parse(is);
  ResultTable t;
  t.headers = j.at("headers").get<std::vector<std::string>>();
  t.rows = j.at("rows").get<std::vector<std::vector<double>>>();
  if (j.contains("text_meta"))
    t.text_meta = j.at("text_meta").get<std::map<std::string, std::string>>();
  if (j.contains("meta")) t.meta = j.at("meta").get<std::map<std::string, double>>();
  return t;
}

}  // namespace aoi
