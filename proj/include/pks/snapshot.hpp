#pragma once

#include <filesystem>
#include <iosfwd>

#include "pks/grid.hpp"

namespace pks {

/// Field snapshot text format:
///   line 1:  dim N h time
///   then one line per cell in layout order: i j [k] value
/// Indices are 1-based; every real is written with 17 significant digits so
/// a read restores the values bit for bit.
struct Snapshot {
  CellField field;
  double time;
};

void write_snapshot(std::ostream& out, const CellField& field, double time);
void write_snapshot(const std::filesystem::path& path, const CellField& field, double time);

/// The grid origin is not part of the format; `origin` is used for the
/// reconstructed grid and the extent is recovered as N * h.
Snapshot read_snapshot(std::istream& in, double origin = 0.0);
Snapshot read_snapshot(const std::filesystem::path& path, double origin = 0.0);

}  // namespace pks
