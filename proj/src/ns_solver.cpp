#include "nsch/ns_solver.hpp"

#include <algorithm>
#include <cmath>

#include "nsch/operators.hpp"
#include "nsch/parallel.hpp"

namespace nsch {

namespace {

inline int wrapi(int i, int n) { return (i % n + n) % n; }

// ---------------------------------------------------------------------------
// Frozen-coefficient viscous operator  u -> -div( a D u )
//
// a_c multiplies the diagonal strain entries at cells, a_n the off-diagonal
// entry at corners.  Derived from the quadratic form
//   Q(u) = sum_cells a_c (Dxx^2 + Dyy^2) + sum_corners 2 a_n Dxy^2
// (with the no-slip ghost reflections folded in), so it is symmetric and
// positive semidefinite by construction.
// ---------------------------------------------------------------------------
struct FrozenCoeff {
    ScalarField a_c;
    CornerField a_n;
};

void viscous_apply_impl(const VectorField& u, const ScalarField& a_c, const CornerField& a_n,
                        VectorField& out) {
    const Grid& g = u.grid;
    const double idx = 1.0 / g.dx, idy = 1.0 / g.dy;

    // Stress pieces.
    Array2 sxx(g.nx, g.ny), syy(g.nx, g.ny);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double xr = (g.bc == BC::periodic && i + 1 == g.nx) ? u.x(0, j) : u.x(i + 1, j);
            const double yt = (g.bc == BC::periodic && j + 1 == g.ny) ? u.y(i, 0) : u.y(i, j + 1);
            sxx(i, j) = a_c.a(i, j) * (xr - u.x(i, j)) * idx;
            syy(i, j) = a_c.a(i, j) * (yt - u.y(i, j)) * idy;
        }
    CornerField sh = shear_at_corners(u);
    Array2 sxy(sh.a.nx(), sh.a.ny());
    for (int j = 0; j < sxy.ny(); ++j)
        for (int i = 0; i < sxy.nx(); ++i) sxy(i, j) = a_n.a(i, j) * sh.a(i, j);

    auto sxx_at = [&](int i, int j) {
        if (g.bc == BC::periodic) return sxx(wrapi(i, g.nx), wrapi(j, g.ny));
        // Even mirror (only first layer needed).
        if (i < 0) i = 0;
        if (i >= g.nx) i = g.nx - 1;
        return sxx(i, j);
    };
    auto syy_at = [&](int i, int j) {
        if (g.bc == BC::periodic) return syy(wrapi(i, g.nx), wrapi(j, g.ny));
        if (j < 0) j = 0;
        if (j >= g.ny) j = g.ny - 1;
        return syy(i, j);
    };
    auto sxy_at = [&](int i, int j) {
        if (g.bc == BC::periodic) return sxy(wrapi(i, g.nx), wrapi(j, g.ny));
        return sxy(i, j);  // all corners stored
    };

    // x faces: -( d_x sxx + d_y sxy ).
    for (int j = 0; j < u.x.ny(); ++j)
        for (int i = 0; i < u.x.nx(); ++i) {
            if (g.bc == BC::physical && (i == 0 || i == g.nx)) { out.x(i, j) = 0.0; continue; }
            const double div_x = (sxx_at(i % g.nx, j) - sxx_at(i - 1, j)) * idx +
                                 (sxy_at(i, j + 1) - sxy_at(i, j)) * idy;
            out.x(i, j) = -div_x;
        }
    // y faces: -( d_x sxy + d_y syy ).
    for (int j = 0; j < u.y.ny(); ++j)
        for (int i = 0; i < u.y.nx(); ++i) {
            if (g.bc == BC::physical && (j == 0 || j == g.ny)) { out.y(i, j) = 0.0; continue; }
            const double div_y = (sxy_at(i + 1, j) - sxy_at(i, j)) * idx +
                                 (syy_at(i, j % g.ny) - syy_at(i, j - 1)) * idy;
            out.y(i, j) = -div_y;
        }
}

// Jacobi diagonal of  rho_f/dt + viscous  (from the quadratic form).
void viscous_diag(const Grid& g, const ScalarField& a_c, const CornerField& a_n,
                  const VectorField& mass, Array2& dx_diag, Array2& dy_diag) {
    const double ix2 = 1.0 / (g.dx * g.dx), iy2 = 1.0 / (g.dy * g.dy);
    auto ac_at = [&](int i, int j) { return cell_at(a_c, i, j); };
    auto an_at = [&](int i, int j) { return corner_at(a_n, i, j); };

    for (int j = 0; j < dx_diag.ny(); ++j)
        for (int i = 0; i < dx_diag.nx(); ++i) {
            if (g.bc == BC::physical && (i == 0 || i == g.nx)) { dx_diag(i, j) = 1.0; continue; }
            double d = mass.x(i, j) + (ac_at(i, j) + ac_at(i - 1, j)) * ix2;
            // Ghost reflection doubles the dependence at wall-row corners.
            const double cb = (g.bc == BC::physical && j == 0) ? 2.0 : 1.0;
            const double ctop = (g.bc == BC::physical && j == g.ny - 1) ? 2.0 : 1.0;
            d += an_at(i, j) * cb * cb * 0.5 * iy2;
            d += an_at(i, j + 1) * ctop * ctop * 0.5 * iy2;
            dx_diag(i, j) = d;
        }
    for (int j = 0; j < dy_diag.ny(); ++j)
        for (int i = 0; i < dy_diag.nx(); ++i) {
            if (g.bc == BC::physical && (j == 0 || j == g.ny)) { dy_diag(i, j) = 1.0; continue; }
            double d = mass.y(i, j) + (ac_at(i, j) + ac_at(i, j - 1)) * iy2;
            const double cl = (g.bc == BC::physical && i == 0) ? 2.0 : 1.0;
            const double cr = (g.bc == BC::physical && i == g.nx - 1) ? 2.0 : 1.0;
            d += an_at(i, j) * cl * cl * 0.5 * ix2;
            d += an_at(i + 1, j) * cr * cr * 0.5 * ix2;
            dy_diag(i, j) = d;
        }
}

struct ViscousSystem {
    const Grid& g;
    const ScalarField& a_c;
    const CornerField& a_n;
    const VectorField& mass;  // rho_f / dt on faces
    Array2 dx_diag, dy_diag;

    ViscousSystem(const Grid& gr, const ScalarField& ac, const CornerField& an,
                  const VectorField& m)
        : g(gr), a_c(ac), a_n(an), mass(m), dx_diag(gr.ux_nx(), gr.ux_ny()),
          dy_diag(gr.uy_nx(), gr.uy_ny()) {
        viscous_diag(g, a_c, a_n, mass, dx_diag, dy_diag);
    }

    void apply(const VectorField& u, VectorField& out) const {
        viscous_apply_impl(u, a_c, a_n, out);
        for (std::int64_t k = 0; k < out.x.size(); ++k) out.x[k] += mass.x[k] * u.x[k];
        for (std::int64_t k = 0; k < out.y.size(); ++k) out.y[k] += mass.y[k] * u.y[k];
        mask(out);
    }

    // Zero the pinned wall dofs so they stay out of the Krylov space.
    void mask(VectorField& u) const {
        if (g.bc != BC::physical) return;
        for (int j = 0; j < u.x.ny(); ++j) {
            u.x(0, j) = 0.0;
            u.x(g.nx, j) = 0.0;
        }
        for (int i = 0; i < u.y.nx(); ++i) {
            u.y(i, 0) = 0.0;
            u.y(i, g.ny) = 0.0;
        }
    }
};

double dot_raw(const VectorField& a, const VectorField& b) {
    double s = 0.0;
    for (std::int64_t k = 0; k < a.x.size(); ++k) s += a.x[k] * b.x[k];
    for (std::int64_t k = 0; k < a.y.size(); ++k) s += a.y[k] * b.y[k];
    return s;
}

// Jacobi-preconditioned CG for the SPD system sys.apply(v) = rhs.
int viscous_cg(const ViscousSystem& sys, const VectorField& rhs, VectorField& v, double rel_tol,
               int max_iter) {
    const Grid& g = rhs.grid;
    VectorField r(g), z(g), s(g), q(g);
    sys.apply(v, q);
    for (std::int64_t k = 0; k < r.x.size(); ++k) r.x[k] = rhs.x[k] - q.x[k];
    for (std::int64_t k = 0; k < r.y.size(); ++k) r.y[k] = rhs.y[k] - q.y[k];
    sys.mask(r);
    const double b0 = std::sqrt(std::max(dot_raw(rhs, rhs), 1e-300));
    auto precon = [&](const VectorField& in, VectorField& out) {
        for (std::int64_t k = 0; k < in.x.size(); ++k) out.x[k] = in.x[k] / sys.dx_diag[k];
        for (std::int64_t k = 0; k < in.y.size(); ++k) out.y[k] = in.y[k] / sys.dy_diag[k];
    };
    precon(r, z);
    s = z;
    double rz = dot_raw(r, z);
    for (int it = 1; it <= max_iter; ++it) {
        sys.apply(s, q);
        const double sq = dot_raw(s, q);
        if (sq <= 0.0) return it;
        const double alpha = rz / sq;
        for (std::int64_t k = 0; k < v.x.size(); ++k) v.x[k] += alpha * s.x[k];
        for (std::int64_t k = 0; k < v.y.size(); ++k) v.y[k] += alpha * s.y[k];
        for (std::int64_t k = 0; k < r.x.size(); ++k) r.x[k] -= alpha * q.x[k];
        for (std::int64_t k = 0; k < r.y.size(); ++k) r.y[k] -= alpha * q.y[k];
        const double rn = std::sqrt(dot_raw(r, r));
        if (!std::isfinite(rn)) throw SolverError("momentum: NaN breakdown in viscous CG");
        if (rn <= rel_tol * b0) return it;
        precon(r, z);
        const double rz_new = dot_raw(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::int64_t k = 0; k < s.x.size(); ++k) s.x[k] = z.x[k] + beta * s.x[k];
        for (std::int64_t k = 0; k < s.y.size(); ++k) s.y[k] = z.y[k] + beta * s.y[k];
    }
    throw SolverError("momentum: viscous CG did not converge in " + std::to_string(max_iter) +
                      " iterations");
}

// Frozen viscous coefficients from the current velocity iterate.
FrozenCoeff make_coefficients(const FluidParams& fp, const ScalarField& phi,
                              const VectorField& v) {
    const Grid& g = phi.grid;
    FrozenCoeff fc{ScalarField(g), CornerField(g)};
    TensorField D = sym_gradient(v);
    for (std::int64_t k = 0; k < fc.a_c.a.size(); ++k)
        fc.a_c.a[k] = fp.viscous_coefficient(phi.a[k], sym_tensor_norm(D.xx[k], D.xy[k], D.yy[k]));

    CornerField sh = shear_at_corners(v);
    CornerField phin = cells_to_corners(phi);
    ScalarField dxx2(g), dyy2(g);
    for (std::int64_t k = 0; k < dxx2.a.size(); ++k) {
        dxx2.a[k] = D.xx[k] * D.xx[k];
        dyy2.a[k] = D.yy[k] * D.yy[k];
    }
    CornerField dxx2n = cells_to_corners(dxx2);
    CornerField dyy2n = cells_to_corners(dyy2);
    for (std::int64_t k = 0; k < fc.a_n.a.size(); ++k) {
        const double norm2 =
            std::max(0.0, dxx2n.a[k] + dyy2n.a[k]) + 2.0 * sh.a[k] * sh.a[k];
        fc.a_n.a[k] = fp.viscous_coefficient(phin.a[k], std::sqrt(norm2));
    }
    return fc;
}

double coeff_change(const FrozenCoeff& a, const FrozenCoeff& b) {
    double num = 0.0, den = 1e-300;
    for (std::int64_t k = 0; k < a.a_c.a.size(); ++k) {
        num = std::max(num, std::abs(a.a_c.a[k] - b.a_c.a[k]));
        den = std::max(den, std::abs(b.a_c.a[k]));
    }
    for (std::int64_t k = 0; k < a.a_n.a.size(); ++k) {
        num = std::max(num, std::abs(a.a_n.a[k] - b.a_n.a[k]));
        den = std::max(den, std::abs(b.a_n.a[k]));
    }
    return num / den;
}

} // namespace

VectorField convection_term(const VectorField& v_n, const VectorField& c_flux,
                            const ScalarField& R, ConvectionForm form) {
    const Grid& g = v_n.grid;
    VectorField out(g);
    VectorField R_face = cells_to_faces(R);
    const double idx = 1.0 / g.dx, idy = 1.0 / g.dy;

    if (form == ConvectionForm::advective) {
        for (int j = 0; j < out.x.ny(); ++j)
            for (int i = 0; i < out.x.nx(); ++i) {
                if (g.bc == BC::physical && (i == 0 || i == g.nx)) { out.x(i, j) = 0.0; continue; }
                const double cx = c_flux.x(i, j);
                const double cy = uy_at_xface(c_flux, i, j);
                const double ddx = (ux_at(v_n, i + 1, j) - ux_at(v_n, i - 1, j)) * (0.5 * idx);
                const double ddy = (ux_at(v_n, i, j + 1) - ux_at(v_n, i, j - 1)) * (0.5 * idy);
                out.x(i, j) = cx * ddx + cy * ddy + 0.5 * R_face.x(i, j) * v_n.x(i, j);
            }
        for (int j = 0; j < out.y.ny(); ++j)
            for (int i = 0; i < out.y.nx(); ++i) {
                if (g.bc == BC::physical && (j == 0 || j == g.ny)) { out.y(i, j) = 0.0; continue; }
                const double cy = c_flux.y(i, j);
                const double cx = ux_at_yface(c_flux, i, j);
                const double ddx = (uy_at(v_n, i + 1, j) - uy_at(v_n, i - 1, j)) * (0.5 * idx);
                const double ddy = (uy_at(v_n, i, j + 1) - uy_at(v_n, i, j - 1)) * (0.5 * idy);
                out.y(i, j) = cx * ddx + cy * ddy + 0.5 * R_face.y(i, j) * v_n.y(i, j);
            }
        return out;
    }

    // Conservative: div(v (x) c) - R v / 2, fluxes at cells and corners.
    Array2 fxx(g.nx, g.ny), fyy(g.nx, g.ny);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double vx = 0.5 * (ux_at(v_n, i, j) + ux_at(v_n, i + 1, j));
            const double cx = 0.5 * (ux_at(c_flux, i, j) + ux_at(c_flux, i + 1, j));
            const double vy = 0.5 * (uy_at(v_n, i, j) + uy_at(v_n, i, j + 1));
            const double cy = 0.5 * (uy_at(c_flux, i, j) + uy_at(c_flux, i, j + 1));
            fxx(i, j) = vx * cx;
            fyy(i, j) = vy * cy;
        }
    CornerField fxy(v_n.grid), fyx(v_n.grid);
    for (int j = 0; j < fxy.a.ny(); ++j)
        for (int i = 0; i < fxy.a.nx(); ++i) {
            const double vx_n = 0.5 * (ux_at(v_n, i, j - 1) + ux_at(v_n, i, j));
            const double cy_n = 0.5 * (uy_at(c_flux, i - 1, j) + uy_at(c_flux, i, j));
            const double vy_n = 0.5 * (uy_at(v_n, i - 1, j) + uy_at(v_n, i, j));
            const double cx_n = 0.5 * (ux_at(c_flux, i, j - 1) + ux_at(c_flux, i, j));
            fxy.a(i, j) = vx_n * cy_n;  // flux of x momentum in y direction
            fyx.a(i, j) = vy_n * cx_n;  // flux of y momentum in x direction
        }
    auto cell_at2 = [&](const Array2& q, int i, int j) {
        if (g.bc == BC::periodic) return q(wrapi(i, g.nx), wrapi(j, g.ny));
        i = std::clamp(i, 0, g.nx - 1);
        j = std::clamp(j, 0, g.ny - 1);
        return q(i, j);
    };
    for (int j = 0; j < out.x.ny(); ++j)
        for (int i = 0; i < out.x.nx(); ++i) {
            if (g.bc == BC::physical && (i == 0 || i == g.nx)) { out.x(i, j) = 0.0; continue; }
            out.x(i, j) = (cell_at2(fxx, i, j) - cell_at2(fxx, i - 1, j)) * idx +
                          (corner_at(fxy, i, j + 1) - corner_at(fxy, i, j)) * idy -
                          0.5 * R_face.x(i, j) * v_n.x(i, j);
        }
    for (int j = 0; j < out.y.ny(); ++j)
        for (int i = 0; i < out.y.nx(); ++i) {
            if (g.bc == BC::physical && (j == 0 || j == g.ny)) { out.y(i, j) = 0.0; continue; }
            out.y(i, j) = (corner_at(fyx, i + 1, j) - corner_at(fyx, i, j)) * idx +
                          (cell_at2(fyy, i, j) - cell_at2(fyy, i, j - 1)) * idy -
                          0.5 * R_face.y(i, j) * v_n.y(i, j);
        }
    return out;
}

VectorField viscous_apply(const VectorField& u, const ScalarField& a_c, const CornerField& a_n) {
    VectorField out(u.grid);
    viscous_apply_impl(u, a_c, a_n, out);
    return out;
}

VectorField capillary_force(const ScalarField& phi, const ScalarField& mu, double eps0) {
    require_same_grid(phi.grid, mu.grid, "capillary_force");
    VectorField gphi = gradient(phi);
    VectorField muf = cells_to_faces(mu);
    VectorField F(phi.grid);
    for (std::int64_t k = 0; k < F.x.size(); ++k) F.x[k] = eps0 * muf.x[k] * gphi.x[k];
    for (std::int64_t k = 0; k < F.y.size(); ++k) F.y[k] = eps0 * muf.y[k] * gphi.y[k];
    return F;
}

MomentumStepResult momentum_step(const VectorField& v_n, const VectorField& W,
                                 const ScalarField& phi_new, const ScalarField& mu_new,
                                 const FluidParams& fp, const DensityLaw& law,
                                 const MomentumStepConfig& cfg) {
    const Grid& g = v_n.grid;
    require_same_grid(g, phi_new.grid, "momentum_step");

    // Density, relative flux, mass source of the fresh phase state.
    ScalarField rho_c(g);
    for (std::int64_t k = 0; k < rho_c.a.size(); ++k) rho_c.a[k] = law.rho(phi_new.a[k]);
    VectorField rho_f = cells_to_faces(rho_c);
    VectorField J = flux_J(law, cfg.mobility, phi_new, mu_new);
    ScalarField R = source_R(law, cfg.mobility, phi_new, mu_new);

    // Mass flux c = rho W + J carried by the convection term.
    VectorField c_flux(g);
    for (std::int64_t k = 0; k < c_flux.x.size(); ++k)
        c_flux.x[k] = rho_f.x[k] * W.x[k] + J.x[k];
    for (std::int64_t k = 0; k < c_flux.y.size(); ++k)
        c_flux.y[k] = rho_f.y[k] * W.y[k] + J.y[k];

    VectorField conv = convection_term(v_n, c_flux, R, cfg.convection_form);
    VectorField fcap = capillary_force(phi_new, mu_new, cfg.eps0);

    // Explicit right-hand side: rho v^n / dt - conv + capillary.
    VectorField rhs(g);
    for (std::int64_t k = 0; k < rhs.x.size(); ++k)
        rhs.x[k] = rho_f.x[k] * v_n.x[k] / cfg.dt - conv.x[k] + fcap.x[k];
    for (std::int64_t k = 0; k < rhs.y.size(); ++k)
        rhs.y[k] = rho_f.y[k] * v_n.y[k] / cfg.dt - conv.y[k] + fcap.y[k];

    VectorField mass(g);
    for (std::int64_t k = 0; k < mass.x.size(); ++k) mass.x[k] = rho_f.x[k] / cfg.dt;
    for (std::int64_t k = 0; k < mass.y.size(); ++k) mass.y[k] = rho_f.y[k] / cfg.dt;

    MomentumStepResult out;
    out.v = v_n;  // warm start

    // Picard iteration on the frozen power-law coefficient.
    FrozenCoeff fc = make_coefficients(fp, phi_new, out.v);
    for (int it = 1; it <= cfg.picard_max_iter; ++it) {
        ViscousSystem sys(g, fc.a_c, fc.a_n, mass);
        VectorField r = rhs;
        sys.mask(r);
        out.viscous_cg_iterations +=
            viscous_cg(sys, r, out.v, cfg.viscous_rel_tol, cfg.viscous_max_iter);
        out.picard_iterations = it;
        FrozenCoeff fresh = make_coefficients(fp, phi_new, out.v);
        out.picard_change = coeff_change(fresh, fc);
        fc = std::move(fresh);
        if (out.picard_change <= cfg.picard_tol) break;
        if (it == cfg.picard_max_iter)
            throw SolverError("momentum: Picard iteration did not converge (coefficient change " +
                              std::to_string(out.picard_change) + ")");
    }

    // Variable-density projection: div((dt/rho) grad q) = div v*.
    VectorField beta(g);
    for (std::int64_t k = 0; k < beta.x.size(); ++k) beta.x[k] = cfg.dt / rho_f.x[k];
    for (std::int64_t k = 0; k < beta.y.size(); ++k) beta.y[k] = cfg.dt / rho_f.y[k];
    EllipticReport prep;
    out.v = helmholtz_project(out.v, cfg.projection, &beta, &out.pi, &prep);
    out.projection_iterations = prep.iterations;
    out.div_residual = norm2_cells(divergence(out.v));
    return out;
}

double weak_form_residual(const SampledTrajectory& traj,
                          const std::function<VectorField(double)>& eta, const FluidParams& fp,
                          const DensityLaw& law, const PotentialSpec& pot, double eps0,
                          double mobility) {
    (void)pot;
    const std::size_t K = traj.times.size();
    if (K < 2) throw SolverError("weak_form_residual: need at least two samples");
    const Grid& g = traj.phi[0].grid;

    std::vector<VectorField> etas(K);
    for (std::size_t k = 0; k < K; ++k) etas[k] = eta(traj.times[k]);

    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < K; ++k) {
        const double dt = traj.times[k + 1] - traj.times[k];
        const ScalarField& phi = traj.phi[k];
        const ScalarField& mu = traj.mu[k];
        const VectorField& v = traj.v[k];
        const VectorField& et = etas[k];

        ScalarField rho_c(g);
        for (std::int64_t q = 0; q < rho_c.a.size(); ++q) rho_c.a[q] = law.rho(phi.a[q]);
        VectorField rho_f = cells_to_faces(rho_c);
        VectorField J = flux_J(law, mobility, phi, mu);
        ScalarField R = source_R(law, mobility, phi, mu);

        // -<rho v, d_t^+ eta>
        {
            VectorField dte = etas[k + 1];
            axpy_faces(-1.0, et, dte);
            scale_faces(1.0 / dt, dte);
            double s = 0.0;
            for (std::int64_t q = 0; q < v.x.size(); ++q) s += rho_f.x[q] * v.x[q] * dte.x[q];
            for (std::int64_t q = 0; q < v.y.size(); ++q) s += rho_f.y[q] * v.y[q] * dte.y[q];
            acc -= dt * s * g.cell_area();
        }

        // -<v (x) (rho v + J), grad eta>  =  - sum_a v_a (c . grad) eta_a
        {
            VectorField c(g);
            for (std::int64_t q = 0; q < c.x.size(); ++q)
                c.x[q] = rho_f.x[q] * v.x[q] + J.x[q];
            for (std::int64_t q = 0; q < c.y.size(); ++q)
                c.y[q] = rho_f.y[q] * v.y[q] + J.y[q];
            ScalarField vx_c(g), vy_c(g), cx_c(g), cy_c(g);
            faces_to_cells(v, vx_c, vy_c);
            faces_to_cells(c, cx_c, cy_c);
            CornerField dexy(g), deyx(g);
            corner_cross_derivatives(et, dexy, deyx);  // d eta_x / dy, d eta_y / dx
            TensorField De = sym_gradient(et);          // for the diagonal entries
            double s = 0.0;
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const double dexx = De.xx(i, j);  // d eta_x / dx
                    const double deyy = De.yy(i, j);
                    const double dxy = 0.25 * (corner_at(dexy, i, j) + corner_at(dexy, i + 1, j) +
                                               corner_at(dexy, i, j + 1) +
                                               corner_at(dexy, i + 1, j + 1));
                    const double dyx = 0.25 * (corner_at(deyx, i, j) + corner_at(deyx, i + 1, j) +
                                               corner_at(deyx, i, j + 1) +
                                               corner_at(deyx, i + 1, j + 1));
                    s += vx_c(i, j) * (cx_c(i, j) * dexx + cy_c(i, j) * dxy) +
                         vy_c(i, j) * (cx_c(i, j) * dyx + cy_c(i, j) * deyy);
                }
            acc -= dt * s * g.cell_area();
        }

        // -<R v / 2, eta>
        {
            VectorField R_face = cells_to_faces(R);
            double s = 0.0;
            for (std::int64_t q = 0; q < v.x.size(); ++q)
                s += 0.5 * R_face.x[q] * v.x[q] * et.x[q];
            for (std::int64_t q = 0; q < v.y.size(); ++q)
                s += 0.5 * R_face.y[q] * v.y[q] * et.y[q];
            acc -= dt * s * g.cell_area();
        }

        // +<S(phi, Dv), D eta>
        {
            TensorField D = sym_gradient(v);
            TensorField S = stress_field(fp, phi, D);
            TensorField De = sym_gradient(et);
            double s = 0.0;
            for (std::int64_t q = 0; q < S.xx.size(); ++q)
                s += S.xx[q] * De.xx[q] + 2.0 * S.xy[q] * De.xy[q] + S.yy[q] * De.yy[q];
            acc += dt * s * g.cell_area();
        }

        // -eps0 <grad phi (x) grad phi, grad eta>
        {
            VectorField gp = gradient(phi);
            ScalarField gx_c(g), gy_c(g);
            faces_to_cells(gp, gx_c, gy_c);
            CornerField dexy(g), deyx(g);
            corner_cross_derivatives(et, dexy, deyx);
            TensorField De = sym_gradient(et);
            double s = 0.0;
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const double dxy = 0.25 * (corner_at(dexy, i, j) + corner_at(dexy, i + 1, j) +
                                               corner_at(dexy, i, j + 1) +
                                               corner_at(dexy, i + 1, j + 1));
                    const double dyx = 0.25 * (corner_at(deyx, i, j) + corner_at(deyx, i + 1, j) +
                                               corner_at(deyx, i, j + 1) +
                                               corner_at(deyx, i + 1, j + 1));
                    const double gx = gx_c(i, j), gy = gy_c(i, j);
                    s += gx * (gx * De.xx(i, j) + gy * dxy) + gy * (gx * dyx + gy * De.yy(i, j));
                }
            acc -= eps0 * dt * s * g.cell_area();
        }
    }

    // -<rho_0 v_0, eta(0)>
    {
        ScalarField rho_c(g);
        for (std::int64_t q = 0; q < rho_c.a.size(); ++q) rho_c.a[q] = law.rho(traj.phi[0].a[q]);
        VectorField rho_f = cells_to_faces(rho_c);
        double s = 0.0;
        for (std::int64_t q = 0; q < traj.v[0].x.size(); ++q)
            s += rho_f.x[q] * traj.v[0].x[q] * etas[0].x[q];
        for (std::int64_t q = 0; q < traj.v[0].y.size(); ++q)
            s += rho_f.y[q] * traj.v[0].y[q] * etas[0].y[q];
        acc -= s * g.cell_area();
    }

    return std::abs(acc);
}

} // namespace nsch
