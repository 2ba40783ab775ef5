#pragma once

#include <string>
#include <vector>

#include "gradnorm/types.hpp"

namespace gradnorm {

/// Numeric CSV with one header row. Throws InputError if the file cannot be
/// opened and ParseError (1-based line) on ragged rows or bad numbers.
Matrix read_csv_matrix(const std::string& path);
Matrix parse_csv_matrix(const std::string& text);

/// Writes `header` then one line per row, values in shortest round-trip form.
void write_csv_matrix(const std::string& path, const Matrix& m, const std::vector<std::string>& header);

/// Shortest round-trip formatting of a double.
std::string format_double(double v);

}  // namespace gradnorm
