#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pwtl::detail {

struct CsvRow {
    std::size_t line = 0;  // 1-based line number in the source file
    std::vector<std::string> fields;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<CsvRow> rows;

    /// Column index of `name`; throws ParseError naming the column when absent.
    std::size_t column(std::string_view name, const std::filesystem::path& source) const;
};

/// Plain comma-separated reader (no quoting). Blank lines are skipped.
/// Throws ParseError when the file cannot be opened, is empty, or a row has
/// the wrong number of fields.
CsvTable read_csv_file(const std::filesystem::path& path);

/// Strict number parsing; throws ParseError with file and line on failure.
double parse_double(const std::string& text, const std::filesystem::path& source, std::size_t line);
long long parse_int(const std::string& text, const std::filesystem::path& source, std::size_t line);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

}  // namespace pwtl::detail
