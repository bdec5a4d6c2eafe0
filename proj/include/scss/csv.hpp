#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace scss {

/// Minimal RFC-4180 table: header row, '.' decimal point, doubles printed
/// with enough digits to round-trip.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string format_double(double v);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace scss
