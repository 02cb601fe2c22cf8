#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "eshock/date.hpp"

namespace eshock {

/// Parsed comma-separated table. Lines starting with '#' and blank lines are
/// skipped; the first remaining line is the header. No quoting: the file
/// schemas here never embed commas.
struct CsvTable {
    std::string source;                          // path or label for error context
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;  // field count == columns.size()
    std::vector<std::size_t> line_numbers;       // 1-based original line per row

    /// Column position by name; throws SchemaError when absent.
    [[nodiscard]] std::size_t column(const std::string& name) const;
};

CsvTable parse_csv(std::string_view text, std::string source);
CsvTable read_csv(const std::string& path);

/// Field decoders; throw ParseError/ValueError tagged "source:line".
Date field_date(const CsvTable& t, std::size_t row, std::size_t col);
YearMonth field_month(const CsvTable& t, std::size_t row, std::size_t col);
double field_double(const CsvTable& t, std::size_t row, std::size_t col);
std::int64_t field_int(const CsvTable& t, std::size_t row, std::size_t col);

/// Shortest representation that round-trips through a double.
std::string format_double(double v);

/// Joins fields with commas and a trailing newline per row.
std::string to_csv_line(const std::vector<std::string>& fields);

void write_text_file(const std::string& path, std::string_view content);
std::string read_text_file(const std::string& path);

}  // namespace eshock
