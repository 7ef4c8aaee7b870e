#include "multicoap/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "multicoap/error.hpp"

namespace multicoap::csv {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(DataErrorKind::Io, "cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw DataError(DataErrorKind::Io, "failed writing " + path.string());
}

void write_header(std::ostream& out, const std::vector<std::string>& header) {
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  if (line.empty()) return cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<std::string> numbered_header(const std::string& prefix, Index k) {
  std::vector<std::string> out;
  for (Index c = 1; c <= k; ++c) out.push_back(prefix + std::to_string(c));
  return out;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_matrix(const std::filesystem::path& path, const Matrix& M, const std::vector<std::string>& header) {
  if (static_cast<Index>(header.size()) != M.cols()) {
    throw ConfigError("CSV header for " + path.string() + " does not match the column count");
  }
  auto out = open_for_write(path);
  write_header(out, header);
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) out << (j ? "," : "") << format_double(M(i, j));
    out << '\n';
  }
  finish(out, path);
}

void write_counts(const std::filesystem::path& path, const CountMatrix& X, const std::vector<std::string>& header) {
  if (static_cast<Index>(header.size()) != X.cols()) {
    throw ConfigError("CSV header for " + path.string() + " does not match the column count");
  }
  auto out = open_for_write(path);
  write_header(out, header);
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j) out << (j ? "," : "") << X(i, j);
    out << '\n';
  }
  finish(out, path);
}

void write_vector(const std::filesystem::path& path, const Vector& v, const std::string& name) {
  write_matrix(path, Matrix(v), {name});
}

namespace {

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::string> cells;  // row-major
  Index rows = 0;
  std::vector<std::size_t> line_of_row;
};

RawTable read_raw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(DataErrorKind::Io, "cannot open " + path.string());
  RawTable raw;
  std::string line;
  if (!std::getline(in, line)) throw DataError(DataErrorKind::Malformed, path.string() + ": missing header line");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  for (auto& cell : split(line)) raw.header.push_back(trim(cell));
  const std::size_t cols = raw.header.size();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && cols > 0) continue;
    const auto row = split(line);
    if (row.size() != cols) {
      throw DataError(DataErrorKind::Malformed, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                                    std::to_string(cols) + " fields, found " +
                                                    std::to_string(row.size()));
    }
    for (const auto& cell : row) raw.cells.push_back(trim(cell));
    raw.line_of_row.push_back(line_no);
    ++raw.rows;
  }
  return raw;
}

template <typename T>
T parse_cell(const std::string& cell, const std::filesystem::path& path, std::size_t line_no, const char* what) {
  T value{};
  const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size()) {
    throw DataError(DataErrorKind::Malformed, path.string() + ":" + std::to_string(line_no) + ": cannot parse '" +
                                                  cell + "' as " + what);
  }
  return value;
}

}  // namespace

Table read_table(const std::filesystem::path& path) {
  const RawTable raw = read_raw(path);
  const auto cols = static_cast<Index>(raw.header.size());
  Table table;
  table.header = raw.header;
  table.values.resize(raw.rows, cols);
  for (Index i = 0; i < raw.rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      table.values(i, j) = parse_cell<double>(raw.cells[static_cast<std::size_t>(i * cols + j)], path,
                                              raw.line_of_row[static_cast<std::size_t>(i)], "a number");
    }
  }
  return table;
}

Matrix read_matrix(const std::filesystem::path& path) { return read_table(path).values; }

CountMatrix read_counts(const std::filesystem::path& path) {
  const RawTable raw = read_raw(path);
  const auto cols = static_cast<Index>(raw.header.size());
  CountMatrix X(raw.rows, cols);
  for (Index i = 0; i < raw.rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      X(i, j) = parse_cell<std::int64_t>(raw.cells[static_cast<std::size_t>(i * cols + j)], path,
                                         raw.line_of_row[static_cast<std::size_t>(i)], "an integer count");
    }
  }
  return X;
}

Vector read_vector(const std::filesystem::path& path) {
  const Matrix values = read_matrix(path);
  if (values.cols() != 1) {
    throw DataError(DataErrorKind::Malformed, path.string() + ": expected a single column");
  }
  return values.col(0);
}

}  // namespace multicoap::csv
