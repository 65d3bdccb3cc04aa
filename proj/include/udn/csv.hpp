#pragma once

// Minimal CSV emission and parsing for metric files. Floating-point fields
// use the shortest representation that round-trips, so a value written and
// read back is bit-identical and reruns produce byte-identical files.

#include <charconv>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace udn::csv {

std::string format_double(double v);

class Writer {
 public:
  Writer(std::ostream& os, const std::vector<std::string>& header);

  template <typename... Fields>
  void row(const Fields&... fields) {
    std::string line;
    std::size_t i = 0;
    ((line += (i++ ? "," : ""), line += field(fields)), ...);
    put(line, sizeof...(Fields));
  }

  std::size_t columns() const { return columns_; }

 private:
  template <typename T>
  static std::string field(const T& v) {
    if constexpr (std::is_same_v<T, double> || std::is_same_v<T, float>) {
      return format_double(static_cast<double>(v));
    } else if constexpr (std::is_same_v<T, bool>) {
      return v ? "1" : "0";
    } else if constexpr (std::is_arithmetic_v<T>) {
      return std::to_string(v);
    } else {
      return std::string(std::string_view(v));
    }
  }
  void put(const std::string& line, std::size_t fields);

  std::ostream& os_;
  std::size_t columns_;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a named column; throws if absent.
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
};

Table read(std::istream& is);
Table read_file(const std::string& path);

}  // namespace udn::csv
