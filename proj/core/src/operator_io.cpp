#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "kslab/error.hpp"
#include "kslab/quantum.hpp"

namespace kslab {

namespace {

const char* kind_name(DensityOperator::Kind k) {
  switch (k) {
    case DensityOperator::Kind::state: return "state";
    case DensityOperator::Kind::symbol: return "symbol";
    default: return "general";
  }
}

void put_le(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) fail(Errc::io_error, "truncated operator dump");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace

void write_operator(const std::string& path, const DensityOperator& op) {
  std::ofstream bin(path, std::ios::binary);
  if (!bin) fail(Errc::io_error, "cannot open " + path);
  const auto& m = op.matrix();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      put_le(bin, m(i, j).real());
      put_le(bin, m(i, j).imag());
    }
  std::ofstream meta(path + ".txt");
  if (!meta) fail(Errc::io_error, "cannot open " + path + ".txt");
  const PhaseGrid& g = op.grid();
  meta << std::setprecision(17);
  meta << "format_version = 1\n";
  meta << "kind = " << kind_name(op.kind()) << "\n";
  meta << "n = " << op.n() << "\n";
  meta << "hbar = " << op.scale().hbar << "\n";
  meta << "length_x = " << g.length_x << "\n";
  meta << "v_max = " << g.v_max << "\n";
  meta << "trace_target = " << op.trace_target() << "\n";
  meta << "layout = row-major complex128 little-endian, matrix = kernel * dx\n";
}

DensityOperator read_operator(const std::string& path) {
  std::ifstream meta(path + ".txt");
  if (!meta) fail(Errc::io_error, "cannot open " + path + ".txt");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  for (const char* key : {"kind", "n", "hbar", "length_x", "v_max", "trace_target"})
    if (!kv.count(key)) fail(Errc::io_error, std::string("operator metadata lacks ") + key);
  const int n = std::stoi(kv["n"]);
  const PlanckScale scale{std::stod(kv["hbar"])};
  const PhaseGrid g = PhaseGrid::make(n, n, std::stod(kv["length_x"]), std::stod(kv["v_max"]));
  std::ifstream bin(path, std::ios::binary);
  if (!bin) fail(Errc::io_error, "cannot open " + path);
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double re = get_le(bin);
      const double im = get_le(bin);
      m(i, j) = {re, im};
    }
  const std::string& kind = kv["kind"];
  if (kind == "state") return DensityOperator::state(std::move(m), g, scale, std::stod(kv["trace_target"]));
  if (kind == "symbol") return DensityOperator::symbol(std::move(m), g, scale);
  return DensityOperator::general(std::move(m), g, scale);
}

}  // namespace kslab
