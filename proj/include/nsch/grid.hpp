#pragma once
// ============================================================================
// Uniform 2-D marker-and-cell (MAC) staggered grid and field containers.
//
// Layout conventions (used consistently by every operator in the library):
//
//   * Cells are indexed (i, j), i = 0..nx-1, j = 0..ny-1, row-major with i
//     fastest.  The cell centre sits at ((i+1/2) dx, (j+1/2) dy).  Scalars
//     (phi, mu, pressure, density, ...) live at cell centres.
//   * Corners (nodes) sit at (i dx, j dy).
//   * x-faces sit at (i dx, (j+1/2) dy) and carry the x velocity component.
//   * y-faces sit at ((i+1/2) dx, j dy) and carry the y component.
//
// Boundary handling:
//   * BC::periodic  — every index wraps; faces/corners use nx x ny storage.
//   * BC::physical  — no-slip walls on all four sides.  Normal face values on
//     the wall are stored ((nx+1) x ny for u_x) and pinned to zero; tangential
//     ghost values use odd reflection (u_ghost = -u_interior), scalars use
//     even mirror ghosts (homogeneous Neumann).
//
// Fields own their storage (std::vector<double>) and carry their Grid by
// value so operators can validate shapes cheaply.
// ============================================================================

#include <cstdint>
#include <string>
#include <vector>

#include "nsch/errors.hpp"

namespace nsch {

enum class BC { periodic, physical };

/// Parse/format the boundary tag used in config files and snapshot headers.
inline const char* bc_name(BC bc) { return bc == BC::periodic ? "periodic" : "physical"; }
inline BC bc_from_name(const std::string& s) {
    if (s == "periodic") return BC::periodic;
    if (s == "physical") return BC::physical;
    throw ConfigError("unknown boundary tag '" + s + "' (expected periodic|physical)");
}

struct Grid {
    int nx = 0;
    int ny = 0;
    double dx = 0.0;
    double dy = 0.0;
    BC bc = BC::periodic;

    double lx() const { return nx * dx; }
    double ly() const { return ny * dy; }
    std::int64_t cells() const { return std::int64_t(nx) * ny; }
    double cell_area() const { return dx * dy; }

    // Storage shapes for the staggered components.
    int ux_nx() const { return bc == BC::periodic ? nx : nx + 1; }
    int ux_ny() const { return ny; }
    int uy_nx() const { return nx; }
    int uy_ny() const { return bc == BC::periodic ? ny : ny + 1; }
    int corner_nx() const { return bc == BC::periodic ? nx : nx + 1; }
    int corner_ny() const { return bc == BC::periodic ? ny : ny + 1; }

    // Physical coordinates of the stored degrees of freedom.
    double xc(int i) const { return (i + 0.5) * dx; }
    double yc(int j) const { return (j + 0.5) * dy; }
    double xf(int i) const { return i * dx; }  // x-face / corner abscissa
    double yf(int j) const { return j * dy; }  // y-face / corner ordinate

    bool operator==(const Grid& o) const {
        return nx == o.nx && ny == o.ny && dx == o.dx && dy == o.dy && bc == o.bc;
    }
};

/// Dense row-major 2-D array of doubles (i fastest).
class Array2 {
public:
    Array2() = default;
    Array2(int nx, int ny, double fill = 0.0) : nx_(nx), ny_(ny), a_(std::size_t(nx) * ny, fill) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::int64_t size() const { return std::int64_t(nx_) * ny_; }

    double& operator()(int i, int j) { return a_[std::size_t(j) * nx_ + i]; }
    double operator()(int i, int j) const { return a_[std::size_t(j) * nx_ + i]; }
    double& operator[](std::int64_t k) { return a_[std::size_t(k)]; }
    double operator[](std::int64_t k) const { return a_[std::size_t(k)]; }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }

    void fill(double v) { a_.assign(a_.size(), v); }

private:
    int nx_ = 0;
    int ny_ = 0;
    std::vector<double> a_;
};

/// Cell-centred scalar field.
struct ScalarField {
    Grid grid;
    Array2 a;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), a(g.nx, g.ny, fill) {}

    double& operator()(int i, int j) { return a(i, j); }
    double operator()(int i, int j) const { return a(i, j); }
};

/// Staggered (MAC) vector field: x on x-faces, y on y-faces.
struct VectorField {
    Grid grid;
    Array2 x;
    Array2 y;

    VectorField() = default;
    explicit VectorField(const Grid& g, double fill = 0.0)
        : grid(g), x(g.ux_nx(), g.ux_ny(), fill), y(g.uy_nx(), g.uy_ny(), fill) {}
};

/// Cell-centred symmetric 2x2 tensor field (xx, xy, yy).
struct TensorField {
    Grid grid;
    Array2 xx;
    Array2 xy;
    Array2 yy;

    TensorField() = default;
    explicit TensorField(const Grid& g, double fill = 0.0)
        : grid(g), xx(g.nx, g.ny, fill), xy(g.nx, g.ny, fill), yy(g.nx, g.ny, fill) {}
};

/// Corner (node) scalar field; internal building block for shear stresses,
/// stream functions and staggered tensor components.
struct CornerField {
    Grid grid;
    Array2 a;

    CornerField() = default;
    explicit CornerField(const Grid& g, double fill = 0.0)
        : grid(g), a(g.corner_nx(), g.corner_ny(), fill) {}

    double& operator()(int i, int j) { return a(i, j); }
    double operator()(int i, int j) const { return a(i, j); }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (!(a == b)) throw SolverError(std::string(where) + ": grid mismatch");
}

} // namespace nsch
