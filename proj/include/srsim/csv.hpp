#pragma once

#include <string>
#include <vector>

namespace srsim::io {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;  // column-major

    std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
    int column_index(const std::string& name) const;  // -1 when absent
};

// Strict numeric CSV: comma separated, '.' decimal, mandatory header row,
// LF line endings on output. Parse errors carry the 1-based line number.
CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

// Write-temp-then-rename so partial output is never observed.
void atomic_write_text(const std::string& path, const std::string& contents);

}  // namespace srsim::io
