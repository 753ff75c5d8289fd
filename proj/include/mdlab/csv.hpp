#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace mdlab {

// Shortest round-trip decimal form, '.' separator, locale independent.
std::string format_double(double v);

// CSV with a mandatory header, comma separator and LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  // Appends a complete row of preformatted cells.
  CsvTable& row(std::vector<std::string> cells);
  // Appends a complete row, formatting each value.
  template <typename... Ts>
  CsvTable& add(const Ts&... values) {
    return row(std::vector<std::string>{cell(values)...});
  }

  static std::string cell(double v) { return format_double(v); }
  static std::string cell(float v) { return format_double(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(std::string_view s) { return std::string(s); }
  static std::string cell(const char* s) { return s; }
  static std::string cell(bool b) { return b ? "true" : "false"; }
  template <typename I>
    requires std::is_integral_v<I>
  static std::string cell(I v) {
    return std::to_string(v);
  }

  std::string str() const;
  void write(const std::filesystem::path& file) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace mdlab
