#include "nsch/biharmonic.hpp"

#include <cmath>
#include <map>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "nsch/operators.hpp"
#include "nsch/spectral.hpp"

namespace nsch {

namespace {

// Quartic one-sided ghost closure for clamped walls (w = w' = 0):
// ghost layers expressed in the first three interior cells.
constexpr double G1[3] = {3.0, -1.0 / 3.0, 1.0 / 25.0};
constexpr double G2[3] = {54.0, -8.0, 27.0 / 25.0};

struct StencilEntry {
    int di, dj;
    double w;
};

// 13-point interior stencil of (five-point Laplacian)^2.
std::vector<StencilEntry> biharmonic_stencil(double dx, double dy) {
    const double ix2 = 1.0 / (dx * dx), iy2 = 1.0 / (dy * dy);
    std::map<std::pair<int, int>, double> acc;
    const StencilEntry lap[5] = {
        {0, 0, -2.0 * (ix2 + iy2)}, {1, 0, ix2}, {-1, 0, ix2}, {0, 1, iy2}, {0, -1, iy2}};
    for (const auto& a : lap)
        for (const auto& b : lap) acc[{a.di + b.di, a.dj + b.dj}] += a.w * b.w;
    std::vector<StencilEntry> out;
    for (const auto& [k, w] : acc) out.push_back({k.first, k.second, w});
    return out;
}

// Distribute weight w at possibly-out-of-range (i, j) onto interior cells,
// applying the clamped closure dimension by dimension.
void distribute(int i, int j, double w, int nx, int ny,
                std::vector<Eigen::Triplet<double>>& trips, int row) {
    if (i < 0 || i >= nx) {
        const double* c;
        int base, dir;
        if (i == -1) { c = G1; base = 0; dir = 1; }
        else if (i == -2) { c = G2; base = 0; dir = 1; }
        else if (i == nx) { c = G1; base = nx - 1; dir = -1; }
        else { c = G2; base = nx - 1; dir = -1; }  // i == nx + 1
        for (int t = 0; t < 3; ++t) distribute(base + dir * t, j, w * c[t], nx, ny, trips, row);
        return;
    }
    if (j < 0 || j >= ny) {
        const double* c;
        int base, dir;
        if (j == -1) { c = G1; base = 0; dir = 1; }
        else if (j == -2) { c = G2; base = 0; dir = 1; }
        else if (j == ny) { c = G1; base = ny - 1; dir = -1; }
        else { c = G2; base = ny - 1; dir = -1; }
        for (int t = 0; t < 3; ++t) distribute(i, base + dir * t, w * c[t], nx, ny, trips, row);
        return;
    }
    trips.emplace_back(row, j * nx + i, w);
}

} // namespace

struct BiharmonicSolver::Impl {
    Grid g;
    bool periodic = false;
    Eigen::SparseMatrix<double> A;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

BiharmonicSolver::BiharmonicSolver(const Grid& g) : impl_(new Impl) {
    impl_->g = g;
    impl_->periodic = (g.bc == BC::periodic);
    if (impl_->periodic) return;  // transform-space pseudo-inverse, no matrix

    const int nx = g.nx, ny = g.ny;
    if (nx < 8 || ny < 8) throw SolverError("biharmonic: grid too small (need nx, ny >= 8)");
    const auto stencil = biharmonic_stencil(g.dx, g.dy);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(std::size_t(nx) * ny * 16);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int row = j * nx + i;
            for (const auto& s : stencil) distribute(i + s.di, j + s.dj, s.w, nx, ny, trips, row);
        }
    impl_->A.resize(nx * ny, nx * ny);
    impl_->A.setFromTriplets(trips.begin(), trips.end());
    impl_->A.makeCompressed();
    impl_->lu.compute(impl_->A);
    if (impl_->lu.info() != Eigen::Success)
        throw SolverError("biharmonic: sparse LU factorisation failed");
}

BiharmonicSolver::~BiharmonicSolver() = default;
BiharmonicSolver::BiharmonicSolver(BiharmonicSolver&&) noexcept = default;
BiharmonicSolver& BiharmonicSolver::operator=(BiharmonicSolver&&) noexcept = default;

const Grid& BiharmonicSolver::grid() const { return impl_->g; }

ScalarField BiharmonicSolver::solve(const ScalarField& f) const {
    const Grid& g = impl_->g;
    require_same_grid(g, f.grid, "biharmonic solve");
    ScalarField w(g);
    if (impl_->periodic) {
        const double mean = mean_cells(f);
        const double scale = max_abs_cells(f);
        if (scale > 0.0 && std::abs(mean) > 1e-8 * scale)
            throw SolverError("biharmonic: incompatible data (nonzero mean, periodic)");
        ScalarField b = f;
        for (std::int64_t k = 0; k < b.a.size(); ++k) b.a[k] -= mean;
        cell_helmholtz_biharmonic_solve(g, b.a, 0.0, 0.0, 1.0, w.a);
        return w;
    }
    const std::int64_t n = g.cells();
    Eigen::Map<const Eigen::VectorXd> b(f.a.data(), n);
    Eigen::VectorXd x = impl_->lu.solve(b);
    // Iterative refinement: the additivity/exactness properties downstream
    // want algebraic residuals at the 1e-13 * |f| level.
    const double bn = b.norm();
    for (int pass = 0; pass < 3 && bn > 0.0; ++pass) {
        Eigen::VectorXd r = b - impl_->A * x;
        if (r.norm() <= 1e-13 * bn) break;
        x += impl_->lu.solve(r);
    }
    for (std::int64_t k = 0; k < n; ++k) w.a[k] = x[k];
    return w;
}

ScalarField BiharmonicSolver::apply(const ScalarField& w) const {
    const Grid& g = impl_->g;
    require_same_grid(g, w.grid, "biharmonic apply");
    ScalarField out(g);
    if (impl_->periodic) {
        out = laplacian(laplacian(w));
        return out;
    }
    const std::int64_t n = g.cells();
    Eigen::Map<const Eigen::VectorXd> xin(w.a.data(), n);
    Eigen::VectorXd y = impl_->A * xin;
    for (std::int64_t k = 0; k < n; ++k) out.a[k] = y[k];
    return out;
}

ScalarField BiharmonicSolver::laplacian_clamped(const ScalarField& w) const {
    const Grid& g = impl_->g;
    require_same_grid(g, w.grid, "biharmonic laplacian_clamped");
    if (impl_->periodic) return laplacian(w);
    ScalarField out(g);
    const int nx = g.nx, ny = g.ny;
    const double ix2 = 1.0 / (g.dx * g.dx), iy2 = 1.0 / (g.dy * g.dy);
    auto at = [&](int i, int j) -> double {
        // First ghost layer with the quartic clamped closure.
        if (i == -1) return G1[0] * w.a(0, j) + G1[1] * w.a(1, j) + G1[2] * w.a(2, j);
        if (i == nx) return G1[0] * w.a(nx - 1, j) + G1[1] * w.a(nx - 2, j) + G1[2] * w.a(nx - 3, j);
        if (j == -1) return G1[0] * w.a(i, 0) + G1[1] * w.a(i, 1) + G1[2] * w.a(i, 2);
        if (j == ny) return G1[0] * w.a(i, ny - 1) + G1[1] * w.a(i, ny - 2) + G1[2] * w.a(i, ny - 3);
        return w.a(i, j);
    };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            out.a(i, j) = (at(i + 1, j) - 2.0 * w.a(i, j) + at(i - 1, j)) * ix2 +
                          (at(i, j + 1) - 2.0 * w.a(i, j) + at(i, j - 1)) * iy2;
    return out;
}

} // namespace nsch
