#include "nsch/snapshot_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "nsch/errors.hpp"

namespace nsch {

void write_snapshot(const std::string& path, const Array2& a, const SnapshotHeader& h) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");

    char line[256];
    out << "NSCH-FIELD v1 " << (h.binary ? "binary" : "ascii") << "\n";
    std::snprintf(line, sizeof(line), "%d %d %.17g %.17g %.17g %s\n", h.nx, h.ny, h.dx, h.dy,
                  h.time, bc_name(h.bc));
    out << line;

    if (h.binary) {
        out.write(reinterpret_cast<const char*>(a.data()),
                  std::streamsize(sizeof(double)) * a.size());
    } else {
        for (int j = 0; j < a.ny(); ++j) {
            for (int i = 0; i < a.nx(); ++i) {
                std::snprintf(line, sizeof(line), "%.17g", a(i, j));
                if (i) out << ' ';
                out << line;
            }
            out << '\n';
        }
    }
    out.flush();
    if (!out) throw IoError("write failed for '" + path + "'");
}

Array2 read_snapshot(const std::string& path, SnapshotHeader& h) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    std::string magic, version, mode;
    if (!(in >> magic >> version >> mode) || magic != "NSCH-FIELD" || version != "v1")
        throw IoError("'" + path + "' is not an NSCH-FIELD v1 snapshot");
    if (mode != "ascii" && mode != "binary")
        throw IoError("'" + path + "' has unknown encoding '" + mode + "'");
    h.binary = (mode == "binary");

    std::string bc_tag;
    if (!(in >> h.nx >> h.ny >> h.dx >> h.dy >> h.time >> bc_tag))
        throw IoError("'" + path + "' has a malformed header line");
    h.bc = bc_from_name(bc_tag);
    if (h.nx <= 0 || h.ny <= 0 || h.dx <= 0.0 || h.dy <= 0.0)
        throw IoError("'" + path + "' has non-positive dimensions");

    Array2 a(h.nx, h.ny);
    if (h.binary) {
        in.get();  // consume the newline ending the header
        in.read(reinterpret_cast<char*>(a.data()), std::streamsize(sizeof(double)) * a.size());
        if (in.gcount() != std::streamsize(sizeof(double)) * a.size())
            throw IoError("'" + path + "' payload is truncated");
    } else {
        for (std::int64_t k = 0; k < a.size(); ++k)
            if (!(in >> a[k])) throw IoError("'" + path + "' payload is truncated");
    }
    return a;
}

void write_scalar_snapshot(const std::string& path, const ScalarField& f, double time,
                           bool binary) {
    SnapshotHeader h;
    h.nx = f.grid.nx;
    h.ny = f.grid.ny;
    h.dx = f.grid.dx;
    h.dy = f.grid.dy;
    h.time = time;
    h.bc = f.grid.bc;
    h.binary = binary;
    write_snapshot(path, f.a, h);
}

ScalarField read_scalar_snapshot(const std::string& path, double* time) {
    SnapshotHeader h;
    Array2 a = read_snapshot(path, h);
    Grid g{h.nx, h.ny, h.dx, h.dy, h.bc};
    ScalarField f(g);
    f.a = std::move(a);
    if (time) *time = h.time;
    return f;
}

} // namespace nsch
