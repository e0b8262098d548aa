#include "consensus/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace consensus::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out += c;
        }
    }
    out += '"';
    return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_csv: cannot open " + path);
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i > 0) {
            out << ',';
        }
        out << csv_quote(header[i]);
    }
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size()) {
            throw std::runtime_error("write_csv: row width does not match the header");
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) {
                out << ',';
            }
            out << format_double(row[i]);
        }
        out << '\n';
    }
}

void write_summary(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_summary: cannot open " + path);
    }
    for (const auto& [key, value] : entries) {
        out << key << " = " << value << '\n';
    }
}

}  // namespace consensus::io
