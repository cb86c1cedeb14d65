#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gpcsense::csv {

/// Round-trip decimal rendering (17 significant digits).
std::string format_double(double value);

/// Parsed comma-separated table. Lines starting with '#' are comments; a
/// `# config_digest=<hex>` comment populates `digest`.
struct Table {
  std::string digest;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

Table read(const std::filesystem::path& path);

double parse_double(const std::string& text);
long long parse_int(const std::string& text);

std::string join(const std::vector<std::string>& fields);

}  // namespace gpcsense::csv
