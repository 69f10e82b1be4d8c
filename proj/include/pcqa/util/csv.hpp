#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace pcqa {

/// Formats a real for CSV output: fixed `decimals`, `inf` for +infinity,
/// `nan` for NaN. Always uses '.' as decimal separator.
std::string format_real(double value, int decimals = 6);

/// Joins fields with commas. Fields containing a comma, quote or newline
/// are quoted.
std::string csv_join(const std::vector<std::string>& fields);

/// Splits one CSV line, honoring double-quoted fields.
std::vector<std::string> csv_split(const std::string& line);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> line_numbers;  // 1-based source line of each row

    /// Column position of `name`; nullopt when absent.
    std::optional<std::size_t> column(const std::string& name) const;
};

/// Reads a CSV with a mandatory header. Blank lines are skipped. Throws
/// ParseError naming `origin` and the line number when a row has the wrong
/// number of fields.
CsvTable read_csv(std::istream& in, const std::string& origin);

}  // namespace pcqa
