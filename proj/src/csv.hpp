#pragma once

// Minimal RFC 4180 reader/writer: quoted fields, doubled quotes, CRLF.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace opsel::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column position by name; nullopt when absent.
  std::optional<std::size_t> find(std::string_view name) const;
  // Throws DataError naming the file when absent.
  std::size_t require(std::string_view name, std::string_view file) const;
};

Table parse(std::string_view text);
Table read(const std::filesystem::path& path);

// Quotes the field when it contains a separator, quote or newline.
std::string escape(std::string_view field);

}  // namespace opsel::csv
