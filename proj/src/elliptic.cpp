#include "nsch/elliptic.hpp"

#include <cmath>
#include <vector>

#include "nsch/operators.hpp"
#include "nsch/spectral.hpp"

namespace nsch {

namespace {

inline int wrap(int i, int n) { return (i % n + n) % n; }

// ---------------------------------------------------------------------------
// The operator A p = div(beta grad p) on one grid level.
//
// Face coefficients are stored in VectorField shape; wall fluxes vanish in
// physical mode (homogeneous Neumann), periodic indices wrap.  The level
// also carries the (negative) diagonal for Jacobi / Gauss-Seidel.
// ---------------------------------------------------------------------------
struct Level {
    Grid g;
    Array2 bx, by;   // face coefficients
    Array2 diag;     // cell diagonal of A (negative)
    Array2 p, rhs, r, tmp;

    explicit Level(const Grid& gr)
        : g(gr), bx(gr.ux_nx(), gr.ux_ny(), 1.0), by(gr.uy_nx(), gr.uy_ny(), 1.0),
          diag(gr.nx, gr.ny), p(gr.nx, gr.ny), rhs(gr.nx, gr.ny), r(gr.nx, gr.ny),
          tmp(gr.nx, gr.ny) {}

    // Coefficients of the four fluxes around cell (i,j); zero at walls.
    inline void fluxes(int i, int j, double& bl, double& br, double& bb, double& bt) const {
        if (g.bc == BC::periodic) {
            bl = bx(i, j);
            br = bx(wrap(i + 1, g.nx), j);
            bb = by(i, j);
            bt = by(i, wrap(j + 1, g.ny));
        } else {
            bl = (i == 0) ? 0.0 : bx(i, j);
            br = (i == g.nx - 1) ? 0.0 : bx(i + 1, j);
            bb = (j == 0) ? 0.0 : by(i, j);
            bt = (j == g.ny - 1) ? 0.0 : by(i, j + 1);
        }
    }

    inline double left(const Array2& q, int i, int j) const {
        return (i > 0) ? q(i - 1, j) : (g.bc == BC::periodic ? q(g.nx - 1, j) : 0.0);
    }
    inline double right(const Array2& q, int i, int j) const {
        return (i < g.nx - 1) ? q(i + 1, j) : (g.bc == BC::periodic ? q(0, j) : 0.0);
    }
    inline double below(const Array2& q, int i, int j) const {
        return (j > 0) ? q(i, j - 1) : (g.bc == BC::periodic ? q(i, g.ny - 1) : 0.0);
    }
    inline double above(const Array2& q, int i, int j) const {
        return (j < g.ny - 1) ? q(i, j + 1) : (g.bc == BC::periodic ? q(i, 0) : 0.0);
    }

    void build_diag() {
        const double ix2 = 1.0 / (g.dx * g.dx), iy2 = 1.0 / (g.dy * g.dy);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                double bl, br, bb, bt;
                fluxes(i, j, bl, br, bb, bt);
                diag(i, j) = -((bl + br) * ix2 + (bb + bt) * iy2);
            }
    }

    void apply(const Array2& q, Array2& out) const {
        const double ix2 = 1.0 / (g.dx * g.dx), iy2 = 1.0 / (g.dy * g.dy);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                double bl, br, bb, bt;
                fluxes(i, j, bl, br, bb, bt);
                const double c = q(i, j);
                out(i, j) = (br * (right(q, i, j) - c) - bl * (c - left(q, i, j))) * ix2 +
                            (bt * (above(q, i, j) - c) - bb * (c - below(q, i, j))) * iy2;
            }
    }

    void residual(Array2& out) const {
        apply(p, out);
        for (std::int64_t k = 0; k < out.size(); ++k) out[k] = rhs[k] - out[k];
    }

    // One red-black Gauss-Seidel sweep (both colors, fixed order).
    void smooth() {
        const double ix2 = 1.0 / (g.dx * g.dx), iy2 = 1.0 / (g.dy * g.dy);
        for (int color = 0; color < 2; ++color)
            for (int j = 0; j < g.ny; ++j)
                for (int i = (j + color) % 2; i < g.nx; i += 2) {
                    double bl, br, bb, bt;
                    fluxes(i, j, bl, br, bb, bt);
                    const double off = (br * right(p, i, j) + bl * left(p, i, j)) * ix2 +
                                       (bt * above(p, i, j) + bb * below(p, i, j)) * iy2;
                    p(i, j) = (rhs(i, j) - off) / diag(i, j);
                }
    }

    void zero_mean(Array2& q) const {
        double m = 0.0;
        for (std::int64_t k = 0; k < q.size(); ++k) m += q[k];
        m /= double(q.size());
        for (std::int64_t k = 0; k < q.size(); ++k) q[k] -= m;
    }
};

std::vector<Level> build_hierarchy(const Grid& g, const VectorField* beta) {
    std::vector<Level> levels;
    levels.emplace_back(g);
    if (beta) {
        levels[0].bx = beta->x;
        levels[0].by = beta->y;
    }
    while (true) {
        const Grid& fg = levels.back().g;
        if (fg.nx % 2 || fg.ny % 2 || fg.nx / 2 < 4 || fg.ny / 2 < 4) break;
        Grid cg{fg.nx / 2, fg.ny / 2, 2.0 * fg.dx, 2.0 * fg.dy, fg.bc};
        Level coarse(cg);
        const Level& fine = levels.back();
        for (int j = 0; j < coarse.bx.ny(); ++j)
            for (int i = 0; i < coarse.bx.nx(); ++i)
                coarse.bx(i, j) = 0.5 * (fine.bx(2 * i, 2 * j) + fine.bx(2 * i, 2 * j + 1));
        for (int j = 0; j < coarse.by.ny(); ++j)
            for (int i = 0; i < coarse.by.nx(); ++i)
                coarse.by(i, j) = 0.5 * (fine.by(2 * i, 2 * j) + fine.by(2 * i + 1, 2 * j));
        levels.push_back(std::move(coarse));
    }
    for (auto& l : levels) l.build_diag();
    return levels;
}

void restrict_to(const Array2& fine, Array2& coarse) {
    for (int j = 0; j < coarse.ny(); ++j)
        for (int i = 0; i < coarse.nx(); ++i)
            coarse(i, j) = 0.25 * (fine(2 * i, 2 * j) + fine(2 * i + 1, 2 * j) +
                                   fine(2 * i, 2 * j + 1) + fine(2 * i + 1, 2 * j + 1));
}

// Bilinear cell-centred prolongation, added into `fine`.
void prolong_add(const Level& clev, const Array2& coarse, Array2& fine) {
    const int cnx = coarse.nx(), cny = coarse.ny();
    const bool per = clev.g.bc == BC::periodic;
    auto cval = [&](int I, int J) {
        if (per) return coarse(wrap(I, cnx), wrap(J, cny));
        I = std::min(std::max(I, 0), cnx - 1);  // even mirror == clamp for 1 layer
        J = std::min(std::max(J, 0), cny - 1);
        return coarse(I, J);
    };
    for (int j = 0; j < fine.ny(); ++j) {
        const int J = j / 2, sj = (j % 2) ? 1 : -1;
        for (int i = 0; i < fine.nx(); ++i) {
            const int I = i / 2, si = (i % 2) ? 1 : -1;
            fine(i, j) += (9.0 * cval(I, J) + 3.0 * cval(I + si, J) + 3.0 * cval(I, J + sj) +
                           cval(I + si, J + sj)) / 16.0;
        }
    }
}

void v_cycle(std::vector<Level>& levels, std::size_t l) {
    Level& lev = levels[l];
    if (l + 1 == levels.size()) {
        for (int s = 0; s < 80; ++s) lev.smooth();
        lev.zero_mean(lev.p);
        return;
    }
    for (int s = 0; s < 2; ++s) lev.smooth();
    lev.residual(lev.r);
    Level& clev = levels[l + 1];
    restrict_to(lev.r, clev.rhs);
    clev.p.fill(0.0);
    v_cycle(levels, l + 1);
    prolong_add(clev, clev.p, lev.p);
    for (int s = 0; s < 2; ++s) lev.smooth();
}

double l2(const Array2& a) {
    double s = 0.0;
    for (std::int64_t k = 0; k < a.size(); ++k) s += a[k] * a[k];
    return std::sqrt(s);
}

EllipticReport solve_mg(std::vector<Level>& levels, const EllipticSolverConfig& cfg) {
    Level& top = levels[0];
    const double b0 = l2(top.rhs);
    EllipticReport rep;
    if (b0 == 0.0) {
        top.p.fill(0.0);
        return rep;
    }
    top.p.fill(0.0);
    for (int it = 1; it <= cfg.max_iter; ++it) {
        v_cycle(levels, 0);
        top.zero_mean(top.p);
        top.residual(top.r);
        const double rn = l2(top.r);
        rep.iterations = it;
        rep.rel_residual = rn / b0;
        if (!std::isfinite(rn)) throw SolverError("multigrid: NaN residual breakdown");
        if (rep.rel_residual <= cfg.rel_tol) return rep;
    }
    throw SolverError("multigrid: no convergence after " + std::to_string(cfg.max_iter) +
                      " V-cycles (relative residual " + std::to_string(rep.rel_residual) + ")");
}

// Jacobi-preconditioned CG on the SPD operator -A (fixed reduction order).
EllipticReport solve_cg(Level& lev, const EllipticSolverConfig& cfg) {
    const std::int64_t n = lev.rhs.size();
    Array2& x = lev.p;
    x.fill(0.0);
    Array2 r = lev.rhs;                      // r = b - (-A)x = b
    for (std::int64_t k = 0; k < n; ++k) r[k] = -lev.rhs[k];  // solve (-A)x = -b
    lev.zero_mean(r);
    Array2 z(r.nx(), r.ny()), q(r.nx(), r.ny()), s(r.nx(), r.ny());
    auto precon = [&](const Array2& in, Array2& out) {
        for (std::int64_t k = 0; k < n; ++k) out[k] = in[k] / std::max(1e-300, -lev.diag[k]);
    };
    const double b0 = l2(r);
    EllipticReport rep;
    if (b0 == 0.0) return rep;
    precon(r, z);
    s = z;
    double rz = 0.0;
    for (std::int64_t k = 0; k < n; ++k) rz += r[k] * z[k];
    for (int it = 1; it <= cfg.max_iter; ++it) {
        lev.apply(s, q);
        for (std::int64_t k = 0; k < n; ++k) q[k] = -q[k];
        double sq = 0.0;
        for (std::int64_t k = 0; k < n; ++k) sq += s[k] * q[k];
        if (sq == 0.0) break;
        const double alpha = rz / sq;
        for (std::int64_t k = 0; k < n; ++k) x[k] += alpha * s[k];
        for (std::int64_t k = 0; k < n; ++k) r[k] -= alpha * q[k];
        lev.zero_mean(r);
        const double rn = l2(r);
        rep.iterations = it;
        rep.rel_residual = rn / b0;
        if (!std::isfinite(rn)) throw SolverError("conjugate-gradient: NaN residual breakdown");
        if (rep.rel_residual <= cfg.rel_tol) {
            lev.zero_mean(x);
            return rep;
        }
        precon(r, z);
        double rz_new = 0.0;
        for (std::int64_t k = 0; k < n; ++k) rz_new += r[k] * z[k];
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::int64_t k = 0; k < n; ++k) s[k] = z[k] + beta * s[k];
    }
    throw SolverError("conjugate-gradient: no convergence after " +
                      std::to_string(cfg.max_iter) + " iterations (relative residual " +
                      std::to_string(rep.rel_residual) + ")");
}

} // namespace

ScalarField poisson_solve(const ScalarField& rhs, const EllipticSolverConfig& cfg,
                          const VectorField* beta, EllipticReport* report) {
    const Grid& g = rhs.grid;
    if (beta) require_same_grid(g, beta->grid, "poisson_solve");

    // Compatibility: the Neumann/periodic problem requires zero-mean data.
    // The mean is always projected out (it is pure roundoff when the data
    // comes from a discrete divergence); only data that is *dominated* by
    // its mean — essentially a nonzero constant, a sure sign of misuse —
    // is rejected.
    ScalarField b = rhs;
    const double mean = mean_cells(b);
    const double scale = max_abs_cells(b);
    if (scale > 0.0 && std::abs(mean) > 0.5 * scale)
        throw SolverError("poisson_solve: incompatible data (mean-dominated rhs)");
    for (std::int64_t k = 0; k < b.a.size(); ++k) b.a[k] -= mean;

    EllipticReport rep;
    ScalarField p(g);
    if (cfg.method == EllipticSolverConfig::Method::multigrid) {
        auto levels = build_hierarchy(g, beta);
        levels[0].rhs = b.a;
        rep = solve_mg(levels, cfg);
        p.a = levels[0].p;
    } else {
        Level lev(g);
        if (beta) {
            lev.bx = beta->x;
            lev.by = beta->y;
        }
        lev.build_diag();
        lev.rhs = b.a;
        rep = solve_cg(lev, cfg);
        p.a = lev.p;
    }
    subtract_mean_cells(p);
    if (report) *report = rep;
    return p;
}

ScalarField poisson_solve_neumann(const ScalarField& rhs, const EllipticSolverConfig& cfg,
                                  EllipticReport* report) {
    return poisson_solve(rhs, cfg, nullptr, report);
}

VectorField helmholtz_project(const VectorField& u, const EllipticSolverConfig& cfg,
                              const VectorField* beta, ScalarField* q_out,
                              EllipticReport* report) {
    ScalarField d = divergence(u);
    ScalarField q = poisson_solve(d, cfg, beta, report);
    VectorField gq = gradient(q);
    VectorField out = u;
    if (beta) {
        for (std::int64_t k = 0; k < out.x.size(); ++k) out.x[k] -= beta->x[k] * gq.x[k];
        for (std::int64_t k = 0; k < out.y.size(); ++k) out.y[k] -= beta->y[k] * gq.y[k];
    } else {
        for (std::int64_t k = 0; k < out.x.size(); ++k) out.x[k] -= gq.x[k];
        for (std::int64_t k = 0; k < out.y.size(); ++k) out.y[k] -= gq.y[k];
    }
    if (q_out) *q_out = std::move(q);
    return out;
}

VectorField stokes_mollify(const VectorField& u, double eps, const EllipticSolverConfig& cfg) {
    VectorField pu = helmholtz_project(u, cfg);
    if (eps <= 0.0) return pu;
    VectorField hu(u.grid);
    face_helmholtz_solve(pu, eps, hu);
    return helmholtz_project(hu, cfg);
}

} // namespace nsch
