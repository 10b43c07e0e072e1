#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace bandwagon {

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);

/// Minimal CSV reader: header row plus data rows, comma separated, no quoting.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws std::invalid_argument when absent.
    std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text);

void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace bandwagon
