#include "pks/snapshot.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pks {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_snapshot(std::ostream& out, const CellField& field, double time) {
  const Grid& g = field.grid();
  out << g.dim() << ' ' << g.n() << ' ' << fmt17(g.h()) << ' ' << fmt17(time) << '\n';
  for (std::size_t idx = 0; idx < field.size(); ++idx) {
    const auto c = g.coords(idx);
    for (int d = 0; d < g.dim(); ++d) out << c[d] + 1 << ' ';
    out << fmt17(field[idx]) << '\n';
  }
}

void write_snapshot(const std::filesystem::path& path, const CellField& field, double time) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open snapshot for writing: " + path.string());
  write_snapshot(out, field, time);
  if (!out) throw std::runtime_error("error writing snapshot: " + path.string());
}

Snapshot read_snapshot(std::istream& in, double origin) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("snapshot: missing header");
  std::istringstream header(line);
  int dim = 0, n = 0;
  double h = 0.0, time = 0.0;
  if (!(header >> dim >> n >> h >> time)) throw std::runtime_error("snapshot: malformed header");
  Grid grid(dim, n, origin, n * h);
  CellField field(grid);
  for (std::size_t idx = 0; idx < field.size(); ++idx) {
    if (!std::getline(in, line))
      throw std::runtime_error("snapshot: truncated at cell " + std::to_string(idx));
    std::istringstream row(line);
    const auto expect = grid.coords(idx);
    for (int d = 0; d < dim; ++d) {
      int c = 0;
      if (!(row >> c) || c != expect[d] + 1)
        throw std::runtime_error("snapshot: unexpected index on line " + std::to_string(idx + 2));
    }
    std::string value;
    if (!(row >> value)) throw std::runtime_error("snapshot: missing value on line " + std::to_string(idx + 2));
    field[idx] = std::strtod(value.c_str(), nullptr);
  }
  return {std::move(field), time};
}

Snapshot read_snapshot(const std::filesystem::path& path, double origin) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open snapshot: " + path.string());
  return read_snapshot(in, origin);
}

}  // namespace pks
