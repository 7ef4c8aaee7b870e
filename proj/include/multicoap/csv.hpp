#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "multicoap/types.hpp"

// Plain CSV with one header line. Reals are written with 17 significant
// digits so that a write/read cycle reproduces every double exactly.

namespace multicoap::csv {

/// {prefix}1, ..., {prefix}k
std::vector<std::string> numbered_header(const std::string& prefix, Index k);

void write_matrix(const std::filesystem::path& path, const Matrix& M, const std::vector<std::string>& header);
void write_counts(const std::filesystem::path& path, const CountMatrix& X, const std::vector<std::string>& header);
void write_vector(const std::filesystem::path& path, const Vector& v, const std::string& name);

struct Table {
  std::vector<std::string> header;
  Matrix values;
};

/// Throws DataError(Io) if the file cannot be opened and DataError(Malformed)
/// on ragged rows or unparsable cells; messages carry the path and line.
Table read_table(const std::filesystem::path& path);
Matrix read_matrix(const std::filesystem::path& path);
/// Cells must be integral.
CountMatrix read_counts(const std::filesystem::path& path);
/// Requires exactly one column.
Vector read_vector(const std::filesystem::path& path);

/// Shortest representation that parses back to the same double.
std::string format_double(double x);

}  // namespace multicoap::csv
