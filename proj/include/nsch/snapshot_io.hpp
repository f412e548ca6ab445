#pragma once
// ============================================================================
// Field snapshot format ("NSCH-FIELD v1").
//
// Layout (both encodings start with two ASCII header lines):
//   line 1:  NSCH-FIELD v1 ascii        or   NSCH-FIELD v1 binary
//   line 2:  nx ny dx dy time bc-tag    (bc-tag: periodic|physical)
//   payload: nx*ny doubles, row-major with i fastest (j = 0 row first);
//            ascii: one row per line, "%.17g" separated by single spaces
//            binary: raw IEEE-754 little-endian doubles
//
// "%.17g" round-trips doubles exactly, so ascii snapshots reload bitwise.
// Staggered velocity components are stored as plain arrays with their own
// (nx, ny) face dimensions; the reader checks dimension consistency against
// the grid derived from the accompanying metadata.
// ============================================================================

#include <string>

#include "nsch/grid.hpp"

namespace nsch {

struct SnapshotHeader {
    int nx = 0;
    int ny = 0;
    double dx = 0.0;
    double dy = 0.0;
    double time = 0.0;
    BC bc = BC::periodic;
    bool binary = false;
};

/// Write an array with the given header; throws IoError on failure.
void write_snapshot(const std::string& path, const Array2& a, const SnapshotHeader& h);

/// Read a snapshot; header dimensions must match the payload or IoError.
Array2 read_snapshot(const std::string& path, SnapshotHeader& h);

// Convenience wrappers for grid-shaped fields.
void write_scalar_snapshot(const std::string& path, const ScalarField& f, double time, bool binary);
ScalarField read_scalar_snapshot(const std::string& path, double* time = nullptr);

} // namespace nsch
