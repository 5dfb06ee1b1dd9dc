#pragma once

#include <optional>
#include <string>
#include <vector>

namespace kslab {

// %.17g, the float format of every output file.
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;  // column names carry units, e.g. "t [time]"
  std::vector<std::vector<double>> rows;
};

// First line `# format_version = 1`, then the header, then rows.
std::string to_csv(const CsvTable& table);
void write_csv(const std::string& path, const CsvTable& table);
// Skips `#` lines; the first remaining line is the header.
CsvTable read_csv(const std::string& path);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = true;
  bool line = true;
};

struct PlotStyle {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
  // Least-squares guide line through the first series (log-log), annotated "slope=..".
  bool fit_guide = false;
  int width = 640;
  int height = 420;
};

// Self-contained SVG text. Throws EmptySeries if no series has a point.
std::string emit_plot(const std::vector<PlotSeries>& series, const PlotStyle& style);
void write_text(const std::string& path, const std::string& text);

}  // namespace kslab
