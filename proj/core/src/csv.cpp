#include <cstdio>
#include <fstream>
#include <sstream>

#include "kslab/error.hpp"
#include "kslab/report.hpp"

namespace kslab {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_csv(const CsvTable& table) {
  std::ostringstream os;
  os << "# format_version = 1\n";
  for (std::size_t c = 0; c < table.header.size(); ++c) os << (c ? "," : "") << table.header[c];
  os << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) fail(Errc::invalid_argument, "csv: row width differs from the header");
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
    os << "\n";
  }
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(Errc::io_error, "cannot write " + path);
  os << text;
  if (!os) fail(Errc::io_error, "write failed for " + path);
}

void write_csv(const std::string& path, const CsvTable& table) { write_text(path, to_csv(table)); }

CsvTable read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(Errc::io_error, "cannot open " + path);
  CsvTable t;
  std::string line;
  bool have_header = false;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    if (!have_header) {
      while (std::getline(ss, cell, ',')) t.header.push_back(cell);
      have_header = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        fail(Errc::io_error, path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
    }
    if (row.size() != t.header.size()) fail(Errc::io_error, path + ":" + std::to_string(lineno) + ": wrong column count");
    t.rows.push_back(std::move(row));
  }
  if (!have_header) fail(Errc::empty_series, path + ": no header row");
  return t;
}

}  // namespace kslab
