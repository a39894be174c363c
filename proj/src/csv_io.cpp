#include "aggreg/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace aggreg::io {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t b = 0;
    while (b < cell.size() && cell[b] == ' ') ++b;
    cells.push_back(cell.substr(b));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw CsvError("line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
  }
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

DesignMatrix read_design_csv(std::istream& in, std::optional<double> bound_l) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError("design csv is empty");
  const auto header = split_line(line);
  const std::size_t m = header.size();
  for (std::size_t j = 0; j < m; ++j) {
    if (header[j] != "j" + std::to_string(j))
      throw CsvError("line 1: expected header cell 'j" + std::to_string(j) + "', got '" + header[j] + "'");
  }
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto cells = split_line(line);
    if (cells.size() != m)
      throw CsvError("line " + std::to_string(line_no) + ": expected " + std::to_string(m) + " cells, got " +
                     std::to_string(cells.size()));
    std::vector<double> row(m);
    for (std::size_t j = 0; j < m; ++j) row[j] = parse_cell(cells[j], line_no);
    rows.push_back(std::move(row));
  }
  const std::size_t n = rows.size();
  if (n == 0) throw CsvError("design csv has no data rows");
  std::vector<double> values(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) values[j * n + i] = rows[i][j];
  try {
    if (bound_l) return DesignMatrix(n, m, std::move(values), *bound_l);
    return DesignMatrix::with_inferred_bound(n, m, std::move(values));
  } catch (const InvalidInput& e) {
    throw CsvError(e.what());
  }
}

DesignMatrix read_design_csv(const std::string& path, std::optional<double> bound_l) {
  auto in = open_in(path);
  return read_design_csv(in, bound_l);
}

void write_design_csv(std::ostream& out, const DesignMatrix& d) {
  for (std::size_t j = 0; j < d.m(); ++j) out << (j ? "," : "") << 'j' << j;
  out << '\n';
  for (std::size_t i = 0; i < d.n(); ++i) {
    for (std::size_t j = 0; j < d.m(); ++j) out << (j ? "," : "") << format_double(d(i, j));
    out << '\n';
  }
}

void write_design_csv(const std::string& path, const DesignMatrix& d) {
  auto out = open_out(path);
  write_design_csv(out, d);
}

TargetVector read_targets_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError("targets csv is empty");
  const auto header = split_line(line);
  if (header.size() != 2 || header[0] != "f" || header[1] != "y")
    throw CsvError("line 1: expected header 'f,y'");
  TargetVector t;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto cells = split_line(line);
    if (cells.size() != 2) throw CsvError("line " + std::to_string(line_no) + ": expected 2 cells");
    t.f_vals.push_back(parse_cell(cells[0], line_no));
    t.y_vals.push_back(parse_cell(cells[1], line_no));
  }
  if (t.f_vals.empty()) throw CsvError("targets csv has no data rows");
  return t;
}

TargetVector read_targets_csv(const std::string& path) {
  auto in = open_in(path);
  return read_targets_csv(in);
}

void write_targets_csv(std::ostream& out, const TargetVector& t) {
  out << "f,y\n";
  for (std::size_t i = 0; i < t.f_vals.size(); ++i)
    out << format_double(t.f_vals[i]) << ',' << format_double(t.y_vals[i]) << '\n';
}

void write_targets_csv(const std::string& path, const TargetVector& t) {
  auto out = open_out(path);
  write_targets_csv(out, t);
}

}  // namespace aggreg::io
