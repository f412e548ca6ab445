#include "nsch/operators.hpp"

#include <cmath>

#include "nsch/parallel.hpp"

namespace nsch {

namespace {
inline int wrap(int i, int n) { return (i % n + n) % n; }
} // namespace

// ---------------------------------------------------------------------------
// Ghost-aware access
// ---------------------------------------------------------------------------

double cell_at(const ScalarField& f, int i, int j) {
    const Grid& g = f.grid;
    if (g.bc == BC::periodic) return f.a(wrap(i, g.nx), wrap(j, g.ny));
    // Even mirror: reflect until inside (stencils stay within two layers).
    while (i < 0 || i >= g.nx) i = (i < 0) ? -i - 1 : 2 * g.nx - 1 - i;
    while (j < 0 || j >= g.ny) j = (j < 0) ? -j - 1 : 2 * g.ny - 1 - j;
    return f.a(i, j);
}

double ux_at(const VectorField& u, int i, int j) {
    const Grid& g = u.grid;
    if (g.bc == BC::periodic) return u.x(wrap(i, g.nx), wrap(j, g.ny));
    double s = 1.0;
    // Normal direction: odd extension through the wall nodes (u(0) = 0).
    while (i < 0 || i > g.nx) {
        if (i < 0) { i = -i; s = -s; }
        else       { i = 2 * g.nx - i; s = -s; }
    }
    // Tangential direction: odd mirror across the wall plane (no slip).
    while (j < 0 || j >= g.ny) {
        if (j < 0) { j = -j - 1; s = -s; }
        else       { j = 2 * g.ny - 1 - j; s = -s; }
    }
    return s * u.x(i, j);
}

double uy_at(const VectorField& u, int i, int j) {
    const Grid& g = u.grid;
    if (g.bc == BC::periodic) return u.y(wrap(i, g.nx), wrap(j, g.ny));
    double s = 1.0;
    while (j < 0 || j > g.ny) {
        if (j < 0) { j = -j; s = -s; }
        else       { j = 2 * g.ny - j; s = -s; }
    }
    while (i < 0 || i >= g.nx) {
        if (i < 0) { i = -i - 1; s = -s; }
        else       { i = 2 * g.nx - 1 - i; s = -s; }
    }
    return s * u.y(i, j);
}

double corner_at(const CornerField& f, int i, int j) {
    const Grid& g = f.grid;
    if (g.bc == BC::periodic) return f.a(wrap(i, g.nx), wrap(j, g.ny));
    while (i < 0 || i > g.nx) i = (i < 0) ? -i : 2 * g.nx - i;
    while (j < 0 || j > g.ny) j = (j < 0) ? -j : 2 * g.ny - j;
    return f.a(i, j);
}

// ---------------------------------------------------------------------------
// First-order operators
// ---------------------------------------------------------------------------

ScalarField divergence(const VectorField& u) {
    const Grid& g = u.grid;
    ScalarField d(g);
    const double idx = 1.0 / g.dx, idy = 1.0 / g.dy;
    parallel_for(g.cells(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t k = b; k < e; ++k) {
            const int i = int(k % g.nx), j = int(k / g.nx);
            const double xr = (g.bc == BC::periodic && i + 1 == g.nx) ? u.x(0, j) : u.x(i + 1, j);
            const double yt = (g.bc == BC::periodic && j + 1 == g.ny) ? u.y(i, 0) : u.y(i, j + 1);
            d.a(i, j) = (xr - u.x(i, j)) * idx + (yt - u.y(i, j)) * idy;
        }
    });
    return d;
}

VectorField gradient(const ScalarField& f) {
    const Grid& g = f.grid;
    VectorField gr(g);
    const double idx = 1.0 / g.dx, idy = 1.0 / g.dy;
    for (int j = 0; j < gr.x.ny(); ++j)
        for (int i = 0; i < gr.x.nx(); ++i) {
            if (g.bc == BC::physical && (i == 0 || i == g.nx)) { gr.x(i, j) = 0.0; continue; }
            const int im = (g.bc == BC::periodic) ? wrap(i - 1, g.nx) : i - 1;
            gr.x(i, j) = (f.a(i % g.nx, j) - f.a(im, j)) * idx;
        }
    for (int j = 0; j < gr.y.ny(); ++j)
        for (int i = 0; i < gr.y.nx(); ++i) {
            if (g.bc == BC::physical && (j == 0 || j == g.ny)) { gr.y(i, j) = 0.0; continue; }
            const int jm = (g.bc == BC::periodic) ? wrap(j - 1, g.ny) : j - 1;
            gr.y(i, j) = (f.a(i, j % g.ny) - f.a(i, jm)) * idy;
        }
    return gr;
}

ScalarField laplacian(const ScalarField& f) { return divergence(gradient(f)); }

CornerField shear_at_corners(const VectorField& u) {
    const Grid& g = u.grid;
    CornerField c(g);
    const double idx = 1.0 / g.dx, idy = 1.0 / g.dy;
    for (int j = 0; j < c.a.ny(); ++j)
        for (int i = 0; i < c.a.nx(); ++i) {
            const double dudy = (ux_at(u, i, j) - ux_at(u, i, j - 1)) * idy;
            const double dvdx = (uy_at(u, i, j) - uy_at(u, i - 1, j)) * idx;
            c.a(i, j) = 0.5 * (dudy + dvdx);
        }
    return c;
}

void corner_cross_derivatives(const VectorField& u, CornerField& dudy, CornerField& dvdx) {
    const Grid& g = u.grid;
    dudy = CornerField(g);
    dvdx = CornerField(g);
    const double idx = 1.0 / g.dx, idy = 1.0 / g.dy;
    for (int j = 0; j < dudy.a.ny(); ++j)
        for (int i = 0; i < dudy.a.nx(); ++i) {
            dudy.a(i, j) = (ux_at(u, i, j) - ux_at(u, i, j - 1)) * idy;
            dvdx.a(i, j) = (uy_at(u, i, j) - uy_at(u, i - 1, j)) * idx;
        }
}

TensorField sym_gradient(const VectorField& u) {
    const Grid& g = u.grid;
    TensorField D(g);
    const double idx = 1.0 / g.dx, idy = 1.0 / g.dy;
    CornerField sh = shear_at_corners(u);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double xr = (g.bc == BC::periodic && i + 1 == g.nx) ? u.x(0, j) : u.x(i + 1, j);
            const double yt = (g.bc == BC::periodic && j + 1 == g.ny) ? u.y(i, 0) : u.y(i, j + 1);
            D.xx(i, j) = (xr - u.x(i, j)) * idx;
            D.yy(i, j) = (yt - u.y(i, j)) * idy;
            D.xy(i, j) = 0.25 * (corner_at(sh, i, j) + corner_at(sh, i + 1, j) +
                                 corner_at(sh, i, j + 1) + corner_at(sh, i + 1, j + 1));
        }
    return D;
}

VectorField curl_stream(const CornerField& psi) {
    const Grid& g = psi.grid;
    VectorField u(g);
    const double idx = 1.0 / g.dx, idy = 1.0 / g.dy;
    for (int j = 0; j < u.x.ny(); ++j)
        for (int i = 0; i < u.x.nx(); ++i)
            u.x(i, j) = (corner_at(psi, i, j + 1) - corner_at(psi, i, j)) * idy;
    for (int j = 0; j < u.y.ny(); ++j)
        for (int i = 0; i < u.y.nx(); ++i)
            u.y(i, j) = -(corner_at(psi, i + 1, j) - corner_at(psi, i, j)) * idx;
    return u;
}

// ---------------------------------------------------------------------------
// Interpolation
// ---------------------------------------------------------------------------

VectorField cells_to_faces(const ScalarField& c) {
    const Grid& g = c.grid;
    VectorField f(g);
    for (int j = 0; j < f.x.ny(); ++j)
        for (int i = 0; i < f.x.nx(); ++i)
            f.x(i, j) = 0.5 * (cell_at(c, i - 1, j) + cell_at(c, i, j));
    for (int j = 0; j < f.y.ny(); ++j)
        for (int i = 0; i < f.y.nx(); ++i)
            f.y(i, j) = 0.5 * (cell_at(c, i, j - 1) + cell_at(c, i, j));
    return f;
}

CornerField cells_to_corners(const ScalarField& c) {
    const Grid& g = c.grid;
    CornerField n(g);
    for (int j = 0; j < n.a.ny(); ++j)
        for (int i = 0; i < n.a.nx(); ++i)
            n.a(i, j) = 0.25 * (cell_at(c, i - 1, j - 1) + cell_at(c, i, j - 1) +
                                cell_at(c, i - 1, j) + cell_at(c, i, j));
    return n;
}

double uy_at_xface(const VectorField& u, int i, int j) {
    return 0.25 * (uy_at(u, i - 1, j) + uy_at(u, i, j) + uy_at(u, i - 1, j + 1) +
                   uy_at(u, i, j + 1));
}

double ux_at_yface(const VectorField& u, int i, int j) {
    return 0.25 * (ux_at(u, i, j - 1) + ux_at(u, i, j) + ux_at(u, i + 1, j - 1) +
                   ux_at(u, i + 1, j));
}

void faces_to_cells(const VectorField& u, ScalarField& ux_c, ScalarField& uy_c) {
    const Grid& g = u.grid;
    ux_c = ScalarField(g);
    uy_c = ScalarField(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            ux_c.a(i, j) = 0.5 * (ux_at(u, i, j) + ux_at(u, i + 1, j));
            uy_c.a(i, j) = 0.5 * (uy_at(u, i, j) + uy_at(u, i, j + 1));
        }
}

// ---------------------------------------------------------------------------
// Quadrature / reductions
// ---------------------------------------------------------------------------

double dot_cells(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid, "dot_cells");
    const double w = a.grid.cell_area();
    return w * parallel_sum(a.a.size(), [&](std::int64_t k) { return a.a[k] * b.a[k]; });
}

double sum_cells(const ScalarField& a) {
    return a.grid.cell_area() * parallel_sum(a.a.size(), [&](std::int64_t k) { return a.a[k]; });
}

double dot_faces(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid, b.grid, "dot_faces");
    const double w = a.grid.cell_area();
    const double sx =
        parallel_sum(a.x.size(), [&](std::int64_t k) { return a.x[k] * b.x[k]; });
    const double sy =
        parallel_sum(a.y.size(), [&](std::int64_t k) { return a.y[k] * b.y[k]; });
    return w * (sx + sy);
}

double norm2_cells(const ScalarField& a) { return std::sqrt(dot_cells(a, a)); }
double norm2_faces(const VectorField& a) { return std::sqrt(dot_faces(a, a)); }

double max_abs_cells(const ScalarField& a) {
    return parallel_max(a.a.size(), [&](std::int64_t k) { return std::abs(a.a[k]); });
}

double max_abs_faces(const VectorField& a) {
    const double mx = parallel_max(a.x.size(), [&](std::int64_t k) { return std::abs(a.x[k]); });
    const double my = parallel_max(a.y.size(), [&](std::int64_t k) { return std::abs(a.y[k]); });
    return std::max(mx, my);
}

double corner_weight(const Grid& g, int i, int j) {
    if (g.bc == BC::periodic) return 1.0;
    const double wi = (i == 0 || i == g.nx) ? 0.5 : 1.0;
    const double wj = (j == 0 || j == g.ny) ? 0.5 : 1.0;
    return wi * wj;
}

// ---------------------------------------------------------------------------
// Whole-field helpers
// ---------------------------------------------------------------------------

void axpy_cells(double alpha, const ScalarField& x, ScalarField& y) {
    for (std::int64_t k = 0; k < x.a.size(); ++k) y.a[k] += alpha * x.a[k];
}

void axpy_faces(double alpha, const VectorField& x, VectorField& y) {
    for (std::int64_t k = 0; k < x.x.size(); ++k) y.x[k] += alpha * x.x[k];
    for (std::int64_t k = 0; k < x.y.size(); ++k) y.y[k] += alpha * x.y[k];
}

void scale_faces(double alpha, VectorField& u) {
    for (std::int64_t k = 0; k < u.x.size(); ++k) u.x[k] *= alpha;
    for (std::int64_t k = 0; k < u.y.size(); ++k) u.y[k] *= alpha;
}

double mean_cells(const ScalarField& a) {
    return parallel_sum(a.a.size(), [&](std::int64_t k) { return a.a[k]; }) / double(a.a.size());
}

void subtract_mean_cells(ScalarField& a) {
    const double m = mean_cells(a);
    for (std::int64_t k = 0; k < a.a.size(); ++k) a.a[k] -= m;
}

} // namespace nsch
