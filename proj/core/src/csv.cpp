#include "csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pwtl/error.hpp"

namespace pwtl::detail {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

std::string where(const std::filesystem::path& source, std::size_t line) {
    return source.string() + ":" + std::to_string(line);
}

}  // namespace

std::size_t CsvTable::column(std::string_view name, const std::filesystem::path& source) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw ParseError(source.string() + ": missing column '" + std::string(name) + "'");
}

CsvTable read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    CsvTable table;
    std::string line;
    std::size_t number = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw ParseError(where(path, number) + ": expected " + std::to_string(table.header.size()) +
                             " fields, found " + std::to_string(fields.size()));
        }
        table.rows.push_back({number, std::move(fields)});
    }
    if (!have_header) {
        throw ParseError(path.string() + ": empty file (no header)");
    }
    return table;
}

double parse_double(const std::string& text, const std::filesystem::path& source, std::size_t line) {
    if (text == "nan" || text == "NaN") {
        return std::nan("");
    }
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw ParseError(where(source, line) + ": not a number: '" + text + "'");
    }
    return value;
}

long long parse_int(const std::string& text, const std::filesystem::path& source, std::size_t line) {
    long long value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw ParseError(where(source, line) + ": not an integer: '" + text + "'");
    }
    return value;
}

std::string format_double(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

}  // namespace pwtl::detail
