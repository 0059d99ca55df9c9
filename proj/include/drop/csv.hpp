#pragma once

#include <drop/core.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace drop {

/// Reads a numeric CSV. A first row containing any non-numeric field is taken
/// as a header; lines starting with # are skipped. Parsing is
/// locale-independent.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);

void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header = {});
void write_matrix_csv(const std::string& path, const Matrix& m, const std::vector<std::string>& header = {});

/// Locale-independent shortest round-trip formatting.
std::string format_double(double v);
bool parse_double(std::string_view s, double& out);

/// Splits one CSV line on commas, trimming whitespace and surrounding quotes.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace drop
