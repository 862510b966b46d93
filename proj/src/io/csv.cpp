#include "agrisuit/io/csv.hpp"

#include "agrisuit/common.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>

namespace agrisuit::io {

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - header.begin());
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"' && current.empty()) {
            quoted = true;
        } else if (c == delimiter) {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

} // namespace

CsvTable parse_csv(const std::string& text, char delimiter) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() && in.eof()) {
            break;
        }
        auto fields = split_line(line, delimiter);
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            table.rows.push_back(std::move(fields));
        }
    }
    return table;
}

CsvTable read_csv(const std::string& path, char delimiter) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("MissingArtifact", "cannot open file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str(), delimiter);
}

void write_csv(const std::string& path, const CsvTable& table, char delimiter) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("MissingArtifact", "cannot open file for writing: " + path);
    }
    auto needs_quotes = [delimiter](const std::string& field) {
        return field.find(delimiter) != std::string::npos ||
               field.find('"') != std::string::npos ||
               field.find('\n') != std::string::npos;
    };
    auto write_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) {
                out << delimiter;
            }
            if (needs_quotes(row[i])) {
                out << '"';
                for (char c : row[i]) {
                    if (c == '"') {
                        out << '"';
                    }
                    out << c;
                }
                out << '"';
            } else {
                out << row[i];
            }
        }
        out << '\n';
    };
    write_row(table.header);
    for (const auto& row : table.rows) {
        write_row(row);
    }
}

std::optional<double> parse_number(const std::string& cell) {
    std::size_t begin = cell.find_first_not_of(" \t");
    std::size_t end = cell.find_last_not_of(" \t");
    if (begin == std::string::npos) {
        return std::nullopt;
    }
    double value = 0.0;
    const char* first = cell.data() + begin;
    const char* last = cell.data() + end + 1;
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

std::optional<long long> parse_integer(const std::string& cell) {
    std::size_t begin = cell.find_first_not_of(" \t");
    std::size_t end = cell.find_last_not_of(" \t");
    if (begin == std::string::npos) {
        return std::nullopt;
    }
    long long value = 0;
    const char* first = cell.data() + begin;
    const char* last = cell.data() + end + 1;
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last) {
        return std::nullopt;
    }
    return value;
}

} // namespace agrisuit::io
