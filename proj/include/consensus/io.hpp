#pragma once

/**
 * @file io.hpp
 * @brief CSV and flat key/value output helpers.
 */

#include <string>
#include <utility>
#include <vector>

namespace consensus::io {

/// Shortest decimal form that round-trips the double exactly.
std::string format_double(double v);

/// RFC 4180 quoting: wraps the field in quotes when it contains a comma,
/// quote or newline, doubling embedded quotes.
std::string csv_quote(const std::string& field);

/// Write a CSV file with a header row. Each row must match the header width.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Flat `key = value` record, one pair per line.
void write_summary(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace consensus::io
