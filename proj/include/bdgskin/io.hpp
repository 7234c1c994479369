#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace bdgskin {

/// Shortest decimal form that parses back to the same double.
std::string format_shortest(double v);

/// CSV built in memory and written atomically. Floats use 17 significant digits.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row();
  CsvTable& add(double v);
  CsvTable& add(long long v);
  CsvTable& add(int v) { return add(static_cast<long long>(v)); }
  CsvTable& add(std::size_t v) { return add(static_cast<long long>(v)); }
  CsvTable& add(std::string_view s);

  std::size_t rows() const { return rows_.size(); }
  std::size_t columns() const { return header_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes to `<path>.tmp` and renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace bdgskin
