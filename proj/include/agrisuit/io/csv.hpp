#ifndef AGRISUIT_IO_CSV_HPP
#define AGRISUIT_IO_CSV_HPP

#include <optional>
#include <string>
#include <vector>

namespace agrisuit::io {

// Column-oriented delimited text with a header row. UTF-8, '.' decimal
// separator, optional double-quoted fields.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path, char delimiter = ',');
CsvTable parse_csv(const std::string& text, char delimiter = ',');

void write_csv(const std::string& path, const CsvTable& table,
               char delimiter = ',');

// Parses a decimal number; returns nullopt on any trailing garbage or
// non-finite literal so malformed cells surface as diagnostics upstream.
std::optional<double> parse_number(const std::string& cell);
std::optional<long long> parse_integer(const std::string& cell);

} // namespace agrisuit::io

#endif
