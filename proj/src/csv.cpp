#include "srsim/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace srsim::io {

int CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

static std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV file: " + path);

    CsvTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() && in.eof()) break;
        auto fields = split_fields(line);
        if (lineno == 1) {
            table.header = fields;
            table.columns.assign(fields.size(), {});
            continue;
        }
        if (line.empty()) continue;
        if (fields.size() != table.header.size()) {
            throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                     ": expected " + std::to_string(table.header.size()) +
                                     " fields, got " + std::to_string(fields.size()));
        }
        for (std::size_t i = 0; i < fields.size(); ++i) {
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(fields[i].c_str(), &end);
            if (end == fields[i].c_str() || (end && *end != '\0') || errno == ERANGE) {
                throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                         ": bad numeric field '" + fields[i] + "'");
            }
            table.columns[i].push_back(v);
        }
    }
    if (table.header.empty()) throw std::runtime_error(path + ": missing header row");
    return table;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ostringstream out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out << ',';
        out << table.header[i];
    }
    out << '\n';
    const std::size_t nrows = table.rows();
    char buf[64];
    for (std::size_t r = 0; r < nrows; ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c) out << ',';
            std::snprintf(buf, sizeof(buf), "%.12g", table.columns[c][r]);
            out << buf;
        }
        out << '\n';
    }
    atomic_write_text(path, out.str());
}

void atomic_write_text(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("short write: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw std::runtime_error("rename failed: " + tmp + " -> " + path + " (" +
                                 std::strerror(errno) + ")");
    }
}

}  // namespace srsim::io
