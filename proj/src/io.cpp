#include "bdgskin/io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include <fmt/format.h>

namespace bdgskin {

std::string format_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row() {
  if (!rows_.empty() && rows_.back().size() != header_.size())
    throw std::logic_error(fmt::format("CSV row has {} fields, header has {}",
                                       rows_.back().size(), header_.size()));
  rows_.emplace_back();
  return *this;
}

CsvTable& CsvTable::add(double v) {
  rows_.back().push_back(fmt::format("{:.17g}", v));
  return *this;
}

CsvTable& CsvTable::add(long long v) {
  rows_.back().push_back(fmt::format("{}", v));
  return *this;
}

CsvTable& CsvTable::add(std::string_view s) {
  rows_.back().emplace_back(s);
  return *this;
}

std::string CsvTable::str() const {
  std::string out = fmt::format("{}\n", fmt::join(header_, ","));
  for (const auto& r : rows_) {
    if (r.size() != header_.size())
      throw std::logic_error(
          fmt::format("CSV row has {} fields, header has {}", r.size(), header_.size()));
    out += fmt::format("{}\n", fmt::join(r, ","));
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error(fmt::format("cannot open {} for writing", tmp.string()));
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error(fmt::format("write to {} failed", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot rename {}: {}", tmp.string(), ec.message()));
}

}  // namespace bdgskin
