#include "nsch/spectral.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>

namespace nsch {

namespace {

struct PlanEntry {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    double* buf = nullptr;
    double norm = 1.0;
};

fftw_r2r_kind forward_kind(Tkind k) {
    switch (k) {
        case Tkind::periodic: return FFTW_R2HC;
        case Tkind::cos_cell: return FFTW_REDFT10;
        case Tkind::sin_cell: return FFTW_RODFT10;
        case Tkind::sin_node: return FFTW_RODFT00;
    }
    return FFTW_R2HC;
}

fftw_r2r_kind backward_kind(Tkind k) {
    switch (k) {
        case Tkind::periodic: return FFTW_HC2R;
        case Tkind::cos_cell: return FFTW_REDFT01;
        case Tkind::sin_cell: return FFTW_RODFT01;
        case Tkind::sin_node: return FFTW_RODFT00;
    }
    return FFTW_HC2R;
}

double norm_factor(Tkind k, int n) {
    switch (k) {
        case Tkind::periodic: return double(n);
        case Tkind::cos_cell: return 2.0 * n;
        case Tkind::sin_cell: return 2.0 * n;
        case Tkind::sin_node: return 2.0 * (n + 1);
    }
    return double(n);
}

std::mutex g_mutex;
std::map<std::tuple<int, int, int, int>, PlanEntry> g_plans;

PlanEntry& get_plans(int nx, int ny, Tkind kx, Tkind ky) {
    auto key = std::make_tuple(nx, ny, int(kx), int(ky));
    auto it = g_plans.find(key);
    if (it != g_plans.end()) return it->second;
    PlanEntry e;
    e.buf = fftw_alloc_real(std::size_t(nx) * ny);
    // FFTW_ESTIMATE: deterministic plan choice, no timing-dependent tuning.
    // Dimension order: n0 is the slow (j) axis, n1 the fast (i) axis.
    e.fwd = fftw_plan_r2r_2d(ny, nx, e.buf, e.buf, forward_kind(ky), forward_kind(kx),
                             FFTW_ESTIMATE);
    e.bwd = fftw_plan_r2r_2d(ny, nx, e.buf, e.buf, backward_kind(ky), backward_kind(kx),
                             FFTW_ESTIMATE);
    e.norm = norm_factor(kx, nx) * norm_factor(ky, ny);
    return g_plans.emplace(key, e).first->second;
}

} // namespace

double modal_eigenvalue(Tkind kind, int k, int n, double h) {
    static const double pi = std::acos(-1.0);
    double s = 0.0;
    switch (kind) {
        case Tkind::periodic: {
            const int f = (k <= n / 2) ? k : n - k;
            s = std::sin(pi * f / n);
            break;
        }
        case Tkind::cos_cell: s = std::sin(pi * k / (2.0 * n)); break;
        case Tkind::sin_cell: s = std::sin(pi * (k + 1) / (2.0 * n)); break;
        case Tkind::sin_node: s = std::sin(pi * (k + 1) / (2.0 * (n + 1))); break;
    }
    return -4.0 * s * s / (h * h);
}

void modal_filter(Array2& a, Tkind kx, Tkind ky, double hx, double hy,
                  const std::function<double(double)>& g) {
    const int nx = a.nx(), ny = a.ny();
    std::lock_guard<std::mutex> lock(g_mutex);
    PlanEntry& pe = get_plans(nx, ny, kx, ky);

    for (std::int64_t k = 0; k < a.size(); ++k) pe.buf[k] = a[k];
    fftw_execute(pe.fwd);

    std::vector<double> lx(nx), ly(ny);
    for (int i = 0; i < nx; ++i) lx[i] = modal_eigenvalue(kx, i, nx, hx);
    for (int j = 0; j < ny; ++j) ly[j] = modal_eigenvalue(ky, j, ny, hy);
    const double inv_norm = 1.0 / pe.norm;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            pe.buf[std::size_t(j) * nx + i] *= g(lx[i] + ly[j]) * inv_norm;
        }
    }

    fftw_execute(pe.bwd);
    for (std::int64_t k = 0; k < a.size(); ++k) a[k] = pe.buf[k];
}

void cell_helmholtz_biharmonic_solve(const Grid& g, const Array2& rhs, double c0, double c2,
                                     double c4, Array2& out) {
    out = rhs;
    const Tkind k = (g.bc == BC::periodic) ? Tkind::periodic : Tkind::cos_cell;
    modal_filter(out, k, k, g.dx, g.dy, [&](double lam) {
        const double den = c0 + c2 * lam + c4 * lam * lam;
        if (den == 0.0) return 0.0;  // zero-mean pseudo-inverse of the constant mode
        return 1.0 / den;
    });
}

void face_helmholtz_solve(const VectorField& u, double eps, VectorField& out) {
    const Grid& g = u.grid;
    out = u;
    auto sym = [eps](double lam) { return 1.0 / (1.0 - eps * lam); };
    if (g.bc == BC::periodic) {
        modal_filter(out.x, Tkind::periodic, Tkind::periodic, g.dx, g.dy, sym);
        modal_filter(out.y, Tkind::periodic, Tkind::periodic, g.dx, g.dy, sym);
        return;
    }
    // Physical walls: normal components live on interior node lines
    // (Dirichlet), tangential directions use the odd cell mirror (no slip).
    {
        Array2 interior(g.nx - 1, g.ny);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 1; i < g.nx; ++i) interior(i - 1, j) = u.x(i, j);
        modal_filter(interior, Tkind::sin_node, Tkind::sin_cell, g.dx, g.dy, sym);
        for (int j = 0; j < g.ny; ++j) {
            out.x(0, j) = 0.0;
            out.x(g.nx, j) = 0.0;
            for (int i = 1; i < g.nx; ++i) out.x(i, j) = interior(i - 1, j);
        }
    }
    {
        Array2 interior(g.nx, g.ny - 1);
        for (int j = 1; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) interior(i, j - 1) = u.y(i, j);
        modal_filter(interior, Tkind::sin_cell, Tkind::sin_node, g.dx, g.dy, sym);
        for (int i = 0; i < g.nx; ++i) {
            out.y(i, 0) = 0.0;
            out.y(i, g.ny) = 0.0;
        }
        for (int j = 1; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) out.y(i, j) = interior(i, j - 1);
    }
}

} // namespace nsch
