#include "nsch/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "nsch/biharmonic.hpp"
#include "nsch/errors.hpp"
#include "nsch/operators.hpp"
#include "nsch/rng.hpp"

namespace nsch {

namespace {
inline int wrapi(int i, int n) { return (i % n + n) % n; }
}

// ---------------------------------------------------------------------------
// Truncation family
// ---------------------------------------------------------------------------

namespace {
// Quintic smoothstep on [0,1]: s5(0)=0, s5(1)=1, two vanishing derivatives
// at both ends, max slope 15/8.
inline double s5(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
inline double s5_d(double t) { return 30.0 * t * t * (1.0 + t * (-2.0 + t)); }

// P(x) = int_0^x psi(u) u du, closed form.
// On [1,2] with w = x-1: the integrand is (1 - s5(w))(1 + w)
//   = 1 + w - 10 w^3 + 5 w^4 + 9 w^5 - 6 w^6,
// whose primitive is K below; K(1) = 9/14.
inline double trunc_K(double w) {
    return w + 0.5 * w * w - 2.5 * std::pow(w, 4) + std::pow(w, 5) + 1.5 * std::pow(w, 6) -
           (6.0 / 7.0) * std::pow(w, 7);
}
inline double trunc_P(double x) {
    if (x <= 1.0) return 0.5 * x * x;
    if (x >= 2.0) return 0.5 + 9.0 / 14.0;
    return 0.5 + trunc_K(x - 1.0);
}
} // namespace

double truncation_psi(double s) {
    s = std::abs(s);
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    return 1.0 - s5(s - 1.0);
}

double truncation_psi_d(double s) {
    s = std::abs(s);
    if (s <= 1.0 || s >= 2.0) return 0.0;
    return -s5_d(s - 1.0);
}

double truncation_upsilon(double s, int L) {
    s = std::abs(s);
    double acc = 0.0;
    double scale = 0.5;
    for (int l = 1; l <= L; ++l) {
        scale *= 0.5;  // 2^{-l} starting at l=1 -> 1/2
        acc += truncation_psi(scale * 2.0 * s);
    }
    return acc;
}

double truncation_h(double s, int L) {
    s = std::abs(s);
    double acc = 0.0;
    double p2 = 1.0;
    for (int l = 1; l <= L; ++l) {
        p2 *= 2.0;  // 2^l
        acc += p2 * p2 * trunc_P(std::min(s / p2, 2.0));
    }
    return acc;
}

VectorField truncated_field(const VectorField& q, int L) {
    const Grid& g = q.grid;
    VectorField out(g);
    for (int j = 0; j < q.x.ny(); ++j)
        for (int i = 0; i < q.x.nx(); ++i) {
            const double qx = q.x(i, j);
            const double qy = uy_at_xface(q, i, j);
            out.x(i, j) = truncation_upsilon(std::hypot(qx, qy), L) * qx;
        }
    for (int j = 0; j < q.y.ny(); ++j)
        for (int i = 0; i < q.y.nx(); ++i) {
            const double qy = q.y(i, j);
            const double qx = ux_at_yface(q, i, j);
            out.y(i, j) = truncation_upsilon(std::hypot(qx, qy), L) * qy;
        }
    return out;
}

TruncationGradientReport truncation_gradient_bound(const VectorField& q, int L) {
    const Grid& g = q.grid;
    TruncationGradientReport rep;

    // |q| and Upsilon_L(|q|) at cells.
    ScalarField qx_c(g), qy_c(g), qnorm(g), ups(g);
    faces_to_cells(q, qx_c, qy_c);
    for (std::int64_t k = 0; k < qnorm.a.size(); ++k) {
        qnorm.a[k] = std::hypot(qx_c.a[k], qy_c.a[k]);
        ups.a[k] = truncation_upsilon(qnorm.a[k], L);
        rep.max_upsilon = std::max(rep.max_upsilon, ups.a[k]);
    }

    // max over faces of |grad Upsilon| |q| / (|grad |q|| + tiny).
    VectorField gu = gradient(ups);
    VectorField gn = gradient(qnorm);
    const double tiny = 1e-30;
    auto face_norm = [&](const VectorField& f, bool xcomp, int i, int j) {
        const double a = xcomp ? f.x(i, j) : f.y(i, j);
        const double b = xcomp ? uy_at_xface(f, i, j) : ux_at_yface(f, i, j);
        return std::hypot(a, b);
    };
    for (int j = 0; j < gu.x.ny(); ++j)
        for (int i = 0; i < gu.x.nx(); ++i) {
            const double num = face_norm(gu, true, i, j) * face_norm(q, true, i, j);
            const double den = face_norm(gn, true, i, j) + tiny;
            rep.constant = std::max(rep.constant, num / den);
        }
    for (int j = 0; j < gu.y.ny(); ++j)
        for (int i = 0; i < gu.y.nx(); ++i) {
            const double num = face_norm(gu, false, i, j) * face_norm(q, false, i, j);
            const double den = face_norm(gn, false, i, j) + tiny;
            rep.constant = std::max(rep.constant, num / den);
        }

    // Dyadic band occupancy of |q| at cells.
    const std::int64_t ncells = qnorm.a.size();
    for (int l = 0; l <= L; ++l) {
        const double lo = std::pow(2.0, l), hi = 2.0 * lo;
        std::int64_t cnt = 0;
        for (std::int64_t k = 0; k < ncells; ++k)
            if (qnorm.a[k] > lo && qnorm.a[k] <= hi) ++cnt;
        rep.occupancy.push_back({l, double(cnt) / double(ncells)});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Staggered tensor
// ---------------------------------------------------------------------------

VectorField mac_tensor_divergence(const MacTensor& T) {
    const Grid& g = T.grid;
    VectorField out(g);
    const double idx = 1.0 / g.dx, idy = 1.0 / g.dy;
    auto cc = [&](const Array2& q, int i, int j) {
        if (g.bc == BC::periodic) return q(wrapi(i, g.nx), wrapi(j, g.ny));
        i = std::clamp(i, 0, g.nx - 1);
        j = std::clamp(j, 0, g.ny - 1);
        return q(i, j);
    };
    auto cn = [&](const Array2& q, int i, int j) {
        if (g.bc == BC::periodic) return q(wrapi(i, g.nx), wrapi(j, g.ny));
        return q(i, j);
    };
    for (int j = 0; j < out.x.ny(); ++j)
        for (int i = 0; i < out.x.nx(); ++i) {
            if (g.bc == BC::physical && (i == 0 || i == g.nx)) { out.x(i, j) = 0.0; continue; }
            out.x(i, j) = (cc(T.xx, i % g.nx, j) - cc(T.xx, i - 1, j)) * idx +
                          (cn(T.xy, i, j + 1) - cn(T.xy, i, j)) * idy;
        }
    for (int j = 0; j < out.y.ny(); ++j)
        for (int i = 0; i < out.y.nx(); ++i) {
            if (g.bc == BC::physical && (j == 0 || j == g.ny)) { out.y(i, j) = 0.0; continue; }
            out.y(i, j) = (cn(T.yx, i + 1, j) - cn(T.yx, i, j)) * idx +
                          (cc(T.yy, i, j % g.ny) - cc(T.yy, i, j - 1)) * idy;
        }
    return out;
}

ScalarField mac_tensor_divdiv(const MacTensor& T) { return divergence(mac_tensor_divergence(T)); }

double mac_tensor_dot_grad(const MacTensor& T, const VectorField& eta) {
    const Grid& g = T.grid;
    const double idx = 1.0 / g.dx, idy = 1.0 / g.dy;
    double acc = 0.0;

    // Cell entries against the natural derivatives of eta.
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double dxx = (ux_at(eta, i + 1, j) - ux_at(eta, i, j)) * idx;
            const double dyy = (uy_at(eta, i, j + 1) - uy_at(eta, i, j)) * idy;
            acc += T.xx(i, j) * dxx + T.yy(i, j) * dyy;
        }

    // Corner entries against the cross derivatives.  The test field is
    // treated as extended by zero through the walls (the H^1_0 pairing that
    // makes this the exact adjoint of -mac_tensor_divergence).
    auto etax0 = [&](int i, int j) {
        if (g.bc == BC::periodic) return eta.x(wrapi(i, g.nx), wrapi(j, g.ny));
        if (j < 0 || j >= g.ny) return 0.0;
        return eta.x(i, j);
    };
    auto etay0 = [&](int i, int j) {
        if (g.bc == BC::periodic) return eta.y(wrapi(i, g.nx), wrapi(j, g.ny));
        if (i < 0 || i >= g.nx) return 0.0;
        return eta.y(i, j);
    };
    const int cnx = (g.bc == BC::periodic) ? g.nx : g.nx + 1;
    const int cny = (g.bc == BC::periodic) ? g.ny : g.ny + 1;
    for (int j = 0; j < cny; ++j)
        for (int i = 0; i < cnx; ++i) {
            const double dxy = (etax0(i, j) - etax0(i, j - 1)) * idy;
            const double dyx = (etay0(i, j) - etay0(i - 1, j)) * idx;
            acc += T.xy(i, j) * dxy + T.yx(i, j) * dyx;
        }
    return acc * g.cell_area();
}

// ---------------------------------------------------------------------------
// Pressure decomposition
// ---------------------------------------------------------------------------

namespace {

double mac_tensor_norm2(const MacTensor& T) {
    double acc = 0.0;
    for (std::int64_t k = 0; k < T.xx.size(); ++k) acc += T.xx[k] * T.xx[k] + T.yy[k] * T.yy[k];
    for (std::int64_t k = 0; k < T.xy.size(); ++k) acc += T.xy[k] * T.xy[k] + T.yx[k] * T.yx[k];
    return acc * T.grid.cell_area();
}

void axpy_tensor(double a, const MacTensor& x, MacTensor& y) {
    for (std::int64_t k = 0; k < y.xx.size(); ++k) {
        y.xx[k] += a * x.xx[k];
        y.yy[k] += a * x.yy[k];
    }
    for (std::int64_t k = 0; k < y.xy.size(); ++k) {
        y.xy[k] += a * x.xy[k];
        y.yx[k] += a * x.yx[k];
    }
}

// pi0_tilde series for one flux history: K_k = trapezoid integral of H,
// then Lap_clamped(BiLapInv(div div K_k)).
std::vector<ScalarField> tilde_series(const std::vector<double>& times,
                                      const std::vector<MacTensor>& H,
                                      const BiharmonicSolver& bih, const Grid& g) {
    std::vector<ScalarField> tilde;
    tilde.reserve(times.size());
    MacTensor K(g);
    K.xx.fill(0.0); K.yy.fill(0.0); K.xy.fill(0.0); K.yx.fill(0.0);
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (k == 0) {
            ScalarField z(g);
            z.a.fill(0.0);
            tilde.push_back(std::move(z));
            continue;
        }
        const double dt = times[k] - times[k - 1];
        axpy_tensor(0.5 * dt, H[k - 1], K);
        axpy_tensor(0.5 * dt, H[k], K);
        ScalarField F = mac_tensor_divdiv(K);
        if (g.bc == BC::periodic) subtract_mean_cells(F);
        ScalarField w = bih.solve(F);
        tilde.push_back(bih.laplacian_clamped(w));
    }
    return tilde;
}

std::vector<ScalarField> backward_difference(const std::vector<double>& times,
                                             const std::vector<ScalarField>& tilde) {
    std::vector<ScalarField> out;
    out.reserve(tilde.size() - 1);
    for (std::size_t k = 1; k < tilde.size(); ++k) {
        const double dt = times[k] - times[k - 1];
        ScalarField d = tilde[k];
        axpy_cells(-1.0, tilde[k - 1], d);
        for (std::int64_t q = 0; q < d.a.size(); ++q) d.a[q] /= dt;
        out.push_back(std::move(d));
    }
    return out;
}

// Random solenoidal probe with zero boundary trace: curl of a stream
// function that vanishes on (and near) the boundary corners.
VectorField solenoidal_probe(const Grid& g, Rng& rng) {
    CornerField psi(g);
    for (int j = 0; j < psi.a.ny(); ++j)
        for (int i = 0; i < psi.a.nx(); ++i) {
            const bool boundary = (g.bc == BC::physical) &&
                                  (i <= 1 || j <= 1 || i >= psi.a.nx() - 2 || j >= psi.a.ny() - 2);
            psi.a(i, j) = boundary ? 0.0 : (rng.uniform() - 0.5);
        }
    return curl_stream(psi);
}

} // namespace

PressureResult pressure_decompose(const PressureInput& in, const PressureOptions& opt) {
    const std::size_t n = in.times.size();
    if (n < 2 || in.u.size() != n || in.H.size() != n)
        throw ConfigError("pressure_decompose: need matching times/u/H with at least 2 samples");
    const bool have_split = !in.H1.empty() || !in.H2.empty();
    if (have_split && (in.H1.size() != n || in.H2.size() != n))
        throw ConfigError("pressure_decompose: split flux must match the sample count");
    const Grid& g = in.u[0].grid;

    PressureResult res;
    res.times = in.times;

    // Harmonic part: Lap pi_h = -div(u_k - u_0).
    res.pi_h.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0) {
            ScalarField z(g);
            z.a.fill(0.0);
            res.pi_h.push_back(std::move(z));
            continue;
        }
        VectorField du = in.u[k];
        axpy_faces(-1.0, in.u[0], du);
        res.sup_u_diff = std::max(res.sup_u_diff, std::sqrt(std::max(0.0, dot_faces(du, du))));
        ScalarField rhs = divergence(du);
        for (std::int64_t q = 0; q < rhs.a.size(); ++q) rhs.a[q] = -rhs.a[q];
        res.pi_h.push_back(poisson_solve(rhs, opt.poisson));
        res.sup_pi_h = std::max(res.sup_pi_h, norm2_cells(res.pi_h.back()));
    }

    // Time-integrated pressure and its backward difference.
    BiharmonicSolver bih(g);
    res.pi0_tilde = tilde_series(in.times, in.H, bih, g);
    res.pi0 = backward_difference(in.times, res.pi0_tilde);
    if (have_split) {
        res.pi1 = backward_difference(in.times, tilde_series(in.times, in.H1, bih, g));
        res.pi2 = backward_difference(in.times, tilde_series(in.times, in.H2, bih, g));
    }

    for (std::size_t k = 1; k < n; ++k) {
        const double dt = in.times[k] - in.times[k - 1];
        res.norm_pi0 = res.norm_pi0 + dt * norm2_cells(res.pi0[k - 1]) * norm2_cells(res.pi0[k - 1]);
        res.norm_H = res.norm_H + dt * mac_tensor_norm2(in.H[k]);
    }
    res.norm_pi0 = std::sqrt(res.norm_pi0);
    res.norm_H = std::sqrt(res.norm_H);

    // Probe check of <u_k - u_0, eta> = <K_k, grad eta> for solenoidal eta.
    if (opt.check_relation) {
        Rng rng(opt.probe_seed);
        std::vector<VectorField> probes;
        for (int p = 0; p < opt.relation_probes; ++p) probes.push_back(solenoidal_probe(g, rng));
        MacTensor K(g);
        K.xx.fill(0.0); K.yy.fill(0.0); K.xy.fill(0.0); K.yx.fill(0.0);
        for (std::size_t k = 1; k < n; ++k) {
            const double dt = in.times[k] - in.times[k - 1];
            axpy_tensor(0.5 * dt, in.H[k - 1], K);
            axpy_tensor(0.5 * dt, in.H[k], K);
            VectorField du = in.u[k];
            axpy_faces(-1.0, in.u[0], du);
            for (const VectorField& eta : probes) {
                const double lhs = dot_faces(du, eta);
                const double rhs = mac_tensor_dot_grad(K, eta);
                const double scale = std::abs(lhs) + std::abs(rhs) + 1e-300;
                res.relation_residual =
                    std::max(res.relation_residual, std::abs(lhs - rhs) / scale);
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Divergence equation on a disc
// ---------------------------------------------------------------------------

BogovskiiResult bogovskii_solve(const ScalarField& f, double cx, double cy, double radius) {
    const Grid& g = f.grid;
    const double r2 = radius * radius;

    Array2 cell_id(g.nx, g.ny);
    cell_id.fill(-1.0);
    std::vector<std::pair<int, int>> cells;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double dx0 = g.xc(i) - cx, dy0 = g.yc(j) - cy;
            if (dx0 * dx0 + dy0 * dy0 < r2) {
                if (i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1)
                    throw SolverError("bogovskii_solve: disc must lie strictly inside the domain");
                cell_id(i, j) = double(cells.size());
                cells.emplace_back(i, j);
            }
        }
    if (cells.size() < 5) throw SolverError("bogovskii_solve: disc resolves fewer than 5 cells");

    // Compatibility: the data must have zero mean over the disc.
    double fsum = 0.0, fmax = 1e-300;
    for (auto [i, j] : cells) {
        fsum += f.a(i, j);
        fmax = std::max(fmax, std::abs(f.a(i, j)));
    }
    if (std::abs(fsum / double(cells.size())) > 1e-8 * fmax)
        throw SolverError("bogovskii_solve: data has nonzero mean over the disc");

    // Face dofs: faces whose two neighbouring cells are both inside.
    auto in_disc = [&](int i, int j) {
        return i >= 0 && j >= 0 && i < g.nx && j < g.ny && cell_id(i, j) >= 0.0;
    };
    Array2 fx_id(g.nx + 1, g.ny), fy_id(g.nx, g.ny + 1);
    fx_id.fill(-1.0);
    fy_id.fill(-1.0);
    int ndof = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            if (in_disc(i - 1, j) && in_disc(i, j)) fx_id(i, j) = double(ndof++);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (in_disc(i, j - 1) && in_disc(i, j)) fy_id(i, j) = double(ndof++);

    const int ncon = int(cells.size()) - 1;  // drop one redundant constraint
    const int nsys = ndof + ncon;
    const double ix2 = 1.0 / (g.dx * g.dx), iy2 = 1.0 / (g.dy * g.dy);
    const double idx = 1.0 / g.dx, idy = 1.0 / g.dy;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(nsys) * 8);

    // Energy block: |grad w|^2 with zero extension outside the disc.
    auto add_energy = [&](const Array2& id, int nx, int ny, bool xcomp) {
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                if (id(i, j) < 0.0) continue;
                const int a = int(id(i, j));
                trip.emplace_back(a, a, 2.0 * ix2 + 2.0 * iy2);
                // Neighbour couplings (only inside dofs).
                const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
                for (int q = 0; q < 4; ++q) {
                    const int ii = i + di[q], jj = j + dj[q];
                    if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) continue;
                    if (id(ii, jj) < 0.0) continue;
                    const double wgt = (dj[q] == 0) ? ix2 : iy2;
                    trip.emplace_back(a, int(id(ii, jj)), -wgt);
                }
                (void)xcomp;
            }
    };
    add_energy(fx_id, g.nx + 1, g.ny, true);
    add_energy(fy_id, g.nx, g.ny + 1, false);

    // Constraint block: div w = f on disc cells (minus the dropped one).
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nsys);
    for (int c = 0; c < ncon; ++c) {
        auto [i, j] = cells[std::size_t(c)];
        const int row = ndof + c;
        auto couple = [&](double id, double coef) {
            if (id < 0.0) return;
            trip.emplace_back(row, int(id), coef);
            trip.emplace_back(int(id), row, coef);
        };
        couple(fx_id(i + 1, j), idx);
        couple(fx_id(i, j), -idx);
        couple(fy_id(i, j + 1), idy);
        couple(fy_id(i, j), -idy);
        rhs[row] = f.a(i, j);
    }

    Eigen::SparseMatrix<double> A(nsys, nsys);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        throw SolverError("bogovskii_solve: saddle-point factorisation failed");
    Eigen::VectorXd sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw SolverError("bogovskii_solve: saddle-point solve failed");

    BogovskiiResult out;
    out.w = VectorField(g);
    out.w.x.fill(0.0);
    out.w.y.fill(0.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            if (i < out.w.x.nx() && fx_id(i, j) >= 0.0) out.w.x(i, j) = sol[int(fx_id(i, j))];
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (j < out.w.y.ny() && fy_id(i, j) >= 0.0) out.w.y(i, j) = sol[int(fy_id(i, j))];

    // Residual and norms over the disc.
    double dres = 0.0, fn = 0.0;
    ScalarField dv = divergence(out.w);
    for (auto [i, j] : cells) {
        const double r = dv.a(i, j) - f.a(i, j);
        dres += r * r;
        fn += f.a(i, j) * f.a(i, j);
    }
    out.div_residual = std::sqrt(dres * g.cell_area());
    out.data_norm = std::sqrt(fn * g.cell_area());

    // |grad w|^2 = w^T G w: reuse the assembled energy block.
    double h1 = 0.0;
    {
        Eigen::VectorXd wv = Eigen::VectorXd::Zero(nsys);
        for (int k = 0; k < ndof; ++k) wv[k] = sol[k];
        // Zero the multiplier rows so only the energy block contributes.
        Eigen::VectorXd gw = Eigen::VectorXd::Zero(nsys);
        for (int k = 0; k < A.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
                if (it.row() < ndof && it.col() < ndof) gw[it.row()] += it.value() * wv[it.col()];
        for (int k = 0; k < ndof; ++k) h1 += gw[k] * wv[k];
    }
    out.h1_norm = std::sqrt(std::max(0.0, h1) * g.cell_area());
    return out;
}

} // namespace nsch
