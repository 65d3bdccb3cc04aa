#include "udn/csv.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace udn::csv {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Writer::Writer(std::ostream& os, const std::vector<std::string>& header)
    : os_(os), columns_(header.size()) {
  std::string line;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) line += ',';
    line += header[i];
  }
  os_ << line << '\n';
}

void Writer::put(const std::string& line, std::size_t fields) {
  if (fields != columns_)
    throw std::logic_error("csv: row has " + std::to_string(fields) + " fields, header has " +
                           std::to_string(columns_));
  os_ << line << '\n';
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::out_of_range("csv: no column '" + std::string(name) + "'");
}

double Table::number(std::size_t row, std::string_view name) const {
  const std::string& s = rows.at(row).at(column(name));
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("csv: '" + s + "' is not a number");
  return v;
}

Table read(std::istream& is) {
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  };
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("csv: missing header");
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
    if (t.rows.back().size() != t.header.size())
      throw std::runtime_error("csv: row width does not match the header");
  }
  return t;
}

Table read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("csv: cannot open " + path);
  return read(f);
}

}  // namespace udn::csv
