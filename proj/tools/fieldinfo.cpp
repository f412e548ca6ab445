// ============================================================================
// fieldinfo — print the header and summary statistics of a field snapshot.
//
//   fieldinfo FILE [FILE...]
//
// Exit codes: 0 success, 4 I/O error.
// ============================================================================

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>

#include "nsch/snapshot_io.hpp"

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: fieldinfo FILE [FILE...]\n";
        return 4;
    }
    int rc = 0;
    for (int a = 1; a < argc; ++a) {
        try {
            nsch::SnapshotHeader h;
            nsch::Array2 f = nsch::read_snapshot(argv[a], h);
            double lo = f[0], hi = f[0], sum = 0.0, sum2 = 0.0;
            for (std::int64_t k = 0; k < f.size(); ++k) {
                lo = std::min(lo, f[k]);
                hi = std::max(hi, f[k]);
                sum += f[k];
                sum2 += f[k] * f[k];
            }
            const double n = double(f.size());
            std::printf("%s: %dx%d %s %s  t=%.17g  dx=%.17g dy=%.17g\n", argv[a], h.nx, h.ny,
                        nsch::bc_name(h.bc), h.binary ? "binary" : "ascii", h.time, h.dx, h.dy);
            std::printf("  min=%.17g max=%.17g mean=%.17g rms=%.17g\n", lo, hi, sum / n,
                        std::sqrt(sum2 / n));
        } catch (const std::exception& e) {
            std::cerr << "fieldinfo: " << e.what() << "\n";
            rc = 4;
        }
    }
    return rc;
}
