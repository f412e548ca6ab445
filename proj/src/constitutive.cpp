#include "nsch/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nsch/operators.hpp"
#include "nsch/rng.hpp"

namespace nsch {

// ---------------------------------------------------------------------------
// Scalar shapes
// ---------------------------------------------------------------------------

double smoothstep5(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double smoothstep5_d(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

double blend_slope(double t) {
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    return 1.0 + t * t * (-18.0 + t * (32.0 - 15.0 * t));
}

double blend_slope_d(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return t * (-36.0 + t * (96.0 - 60.0 * t));
}

double blend_primitive(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 0.0;  // integral of the slope over [0,1] vanishes
    return t * (1.0 + t * t * (-6.0 + t * (8.0 - 3.0 * t)));
}

double blend_primitive_max() {
    // G' = blend_slope has a single interior root t* (G increases before it,
    // decreases after); locate it by bisection once.
    static const double gmax = [] {
        double lo = 0.25, hi = 0.5;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (blend_slope(mid) > 0.0 ? lo : hi) = mid;
        }
        return blend_primitive(0.5 * (lo + hi));
    }();
    return gmax;
}

// ---------------------------------------------------------------------------
// PotentialSpec
// ---------------------------------------------------------------------------

PotentialSpec double_well_potential() {
    PotentialSpec p;
    p.f = [](double s) { const double w = s * s - 1.0; return 0.25 * w * w; };
    p.df = [](double s) { return s * s * s - s; };
    p.d2f = [](double s) { return 3.0 * s * s - 1.0; };
    p.d3f = [](double s) { return 6.0 * s; };
    p.alpha = 1.0;
    return p;
}

// ---------------------------------------------------------------------------
// DensityLaw
// ---------------------------------------------------------------------------

DensityLaw::DensityLaw(double rho1, double rho2, double delta_b)
    : rho1_(rho1), rho2_(rho2), delta_b_(delta_b), slope_(0.5 * (rho2 - rho1)) {
    if (!(rho1 > 0.0) || !(rho2 > 0.0)) throw ConfigError("density law: phase densities must be positive");
    if (!(delta_b > 0.0) || delta_b > 1.0) throw ConfigError("density law: delta_b must lie in (0, 1]");
    if (min_rho() <= 0.0)
        throw ConfigError("density law: blend dip would make the density non-positive");
}

double DensityLaw::rho(double s) const {
    const double mid = 0.5 * (rho1_ + rho2_);
    if (s >= 1.0) {
        const double t = (s - 1.0) / delta_b_;
        return rho2_ + slope_ * delta_b_ * blend_primitive(t);
    }
    if (s <= -1.0) {
        const double t = (-1.0 - s) / delta_b_;
        return rho1_ - slope_ * delta_b_ * blend_primitive(t);
    }
    return mid + slope_ * s;
}

double DensityLaw::drho(double s) const {
    if (s >= 1.0) return slope_ * blend_slope((s - 1.0) / delta_b_);
    if (s <= -1.0) return slope_ * blend_slope((-1.0 - s) / delta_b_);
    return slope_;
}

double DensityLaw::d2rho(double s) const {
    if (s >= 1.0) return slope_ * blend_slope_d((s - 1.0) / delta_b_) / delta_b_;
    if (s <= -1.0) return -slope_ * blend_slope_d((-1.0 - s) / delta_b_) / delta_b_;
    return 0.0;
}

double DensityLaw::dip_bound() const {
    return blend_primitive_max() * std::abs(slope_) * delta_b_;
}

double DensityLaw::min_rho() const { return std::min(rho1_, rho2_) - dip_bound(); }

// ---------------------------------------------------------------------------
// FluidParams
// ---------------------------------------------------------------------------

double FluidParams::clamp_chi(double s) const {
    if (s >= 1.0) {
        const double t = (s - 1.0) / delta_b;
        return 1.0 + delta_b * blend_primitive(t);
    }
    if (s <= -1.0) {
        const double t = (-1.0 - s) / delta_b;
        return -1.0 - delta_b * blend_primitive(t);
    }
    return s;
}

double FluidParams::clamp_chi_d(double s) const {
    if (s >= 1.0) return blend_slope((s - 1.0) / delta_b);
    if (s <= -1.0) return blend_slope((-1.0 - s) / delta_b);
    return 1.0;
}

double FluidParams::viscosity(double s) const {
    return 0.5 * (nu1 + nu2) + 0.5 * (nu2 - nu1) * clamp_chi(s);
}

double FluidParams::viscous_coefficient(double s, double shear_norm) const {
    const double nu = viscosity(s);
    const double p = power_index;
    if (p == 2.0) return 2.0 * nu;
    if (p < 2.0) {
        const double q = shear_norm * shear_norm + kappa_reg * kappa_reg;
        return 2.0 * nu * std::pow(q, 0.5 * (p - 2.0));
    }
    return 2.0 * nu * std::pow(shear_norm, p - 2.0);
}

double FluidParams::min_viscosity() const {
    return std::min(nu1, nu2) - 0.5 * std::abs(nu2 - nu1) * delta_b * blend_primitive_max();
}

double FluidParams::max_viscosity() const {
    return std::max(nu1, nu2) + 0.5 * std::abs(nu2 - nu1) * delta_b * blend_primitive_max();
}

double FluidParams::effective_omega() const { return omega > 0.0 ? omega : min_viscosity(); }

double FluidParams::effective_c1() const {
    if (omega > 0.0) return c1;
    return std::max(1e-9, min_viscosity() * std::pow(kappa_reg, power_index));
}

void stress_pointwise(const FluidParams& fp, double s, double mxx, double mxy, double myy,
                      double& sxx, double& sxy, double& syy) {
    const double a = fp.viscous_coefficient(s, sym_tensor_norm(mxx, mxy, myy));
    sxx = a * mxx;
    sxy = a * mxy;
    syy = a * myy;
}

TensorField stress_field(const FluidParams& fp, const ScalarField& phi, const TensorField& D) {
    require_same_grid(phi.grid, D.grid, "stress_field");
    TensorField S(phi.grid);
    for (std::int64_t k = 0; k < phi.a.size(); ++k) {
        const double a =
            fp.viscous_coefficient(phi.a[k], sym_tensor_norm(D.xx[k], D.xy[k], D.yy[k]));
        S.xx[k] = a * D.xx[k];
        S.xy[k] = a * D.xy[k];
        S.yy[k] = a * D.yy[k];
    }
    return S;
}

VectorField flux_J(const DensityLaw& law, double mobility, const ScalarField& phi,
                   const ScalarField& mu) {
    require_same_grid(phi.grid, mu.grid, "flux_J");
    VectorField gmu = gradient(mu);
    VectorField phif = cells_to_faces(phi);
    VectorField J(phi.grid);
    for (std::int64_t k = 0; k < J.x.size(); ++k)
        J.x[k] = -mobility * law.drho(phif.x[k]) * gmu.x[k];
    for (std::int64_t k = 0; k < J.y.size(); ++k)
        J.y[k] = -mobility * law.drho(phif.y[k]) * gmu.y[k];
    return J;
}

ScalarField source_R(const DensityLaw& law, double mobility, const ScalarField& phi,
                     const ScalarField& mu) {
    require_same_grid(phi.grid, mu.grid, "source_R");
    const Grid& g = phi.grid;
    VectorField gphi = gradient(phi);
    VectorField gmu = gradient(mu);
    ScalarField R(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int ip = (g.bc == BC::periodic) ? (i + 1) % g.nx : i + 1;
            const int jp = (g.bc == BC::periodic) ? (j + 1) % g.ny : j + 1;
            const double px = 0.5 * (gphi.x(i, j) * gmu.x(i, j) + gphi.x(ip, j) * gmu.x(ip, j));
            const double py = 0.5 * (gphi.y(i, j) * gmu.y(i, j) + gphi.y(i, jp) * gmu.y(i, jp));
            R.a(i, j) = -mobility * law.d2rho(phi.a(i, j)) * (px + py);
        }
    return R;
}

// ---------------------------------------------------------------------------
// Assumption validators
// ---------------------------------------------------------------------------

PotentialCheck validate_assumption_growth_potential(const PotentialSpec& pot, double lo, double hi,
                                                    int samples) {
    PotentialCheck out;
    out.min_convexity = 1e300;
    const double h = (hi - lo) / (samples - 1);
    for (int k = 0; k < samples; ++k) {
        const double s = lo + k * h;
        const double growth = std::abs(pot.d3f(s)) / (std::abs(s) + 1.0);
        if (growth > out.growth_constant) {
            out.growth_constant = growth;
            out.worst_s = s;
        }
        out.min_convexity = std::min(out.min_convexity, pot.d2f(s) + pot.alpha);
    }
    const bool finite = std::isfinite(out.growth_constant) && std::isfinite(out.min_convexity);
    const bool convex = out.min_convexity >= -1e-12 * std::max(1.0, std::abs(pot.alpha));
    out.ok = finite && convex;
    std::ostringstream msg;
    if (!finite) msg << "non-finite scan value; ";
    if (!convex) msg << "f'' + alpha < 0 at s=" << out.worst_s << "; ";
    if (out.ok) msg << "ok";
    out.message = msg.str();
    return out;
}

StressCheck validate_assumption_stress_structure(const FluidParams& fp, int pairs,
                                                 unsigned long long seed) {
    StressCheck out;
    out.worst_coercivity = 1e300;
    out.worst_monotonicity = 1e300;
    Rng rng(seed);
    const double p = fp.power_index;
    const double omega = fp.effective_omega();
    const double c1 = fp.effective_c1();
    for (int t = 0; t < pairs; ++t) {
        const double s1 = rng.uniform(-5.0, 5.0);
        const double s2 = rng.uniform(-5.0, 5.0);
        const double scale = std::pow(10.0, rng.uniform(-6.0, 3.0));
        double m1xx = rng.symmetric(scale), m1xy = rng.symmetric(scale),
               m1yy = rng.symmetric(scale);
        double m2xx = rng.symmetric(scale), m2xy = rng.symmetric(scale),
               m2yy = rng.symmetric(scale);
        double s1xx, s1xy, s1yy, s2xx, s2xy, s2yy;
        stress_pointwise(fp, s1, m1xx, m1xy, m1yy, s1xx, s1xy, s1yy);
        const double n1 = sym_tensor_norm(m1xx, m1xy, m1yy);
        const double ns1 = sym_tensor_norm(s1xx, s1xy, s1yy);

        out.growth_constant =
            std::max(out.growth_constant, ns1 / (std::pow(n1, p - 1.0) + 1.0));

        stress_pointwise(fp, s2, m1xx, m1xy, m1yy, s2xx, s2xy, s2yy);
        if (std::abs(s1 - s2) > 1e-12) {
            const double dn = sym_tensor_norm(s1xx - s2xx, s1xy - s2xy, s1yy - s2yy);
            out.lipschitz_constant = std::max(
                out.lipschitz_constant, dn / (std::abs(s1 - s2) * (std::pow(n1, p - 1.0) + 1.0)));
        }

        const double sm = s1xx * m1xx + 2.0 * s1xy * m1xy + s1yy * m1yy;
        out.worst_coercivity =
            std::min(out.worst_coercivity, sm - omega * std::pow(n1, p) + c1);

        stress_pointwise(fp, s1, m2xx, m2xy, m2yy, s2xx, s2xy, s2yy);
        const double dxx = m1xx - m2xx, dxy = m1xy - m2xy, dyy = m1yy - m2yy;
        const double dn2 = dxx * dxx + 2.0 * dxy * dxy + dyy * dyy;
        if (dn2 > 0.0) {
            const double inner =
                (s1xx - s2xx) * dxx + 2.0 * (s1xy - s2xy) * dxy + (s1yy - s2yy) * dyy;
            out.worst_monotonicity = std::min(out.worst_monotonicity, inner / dn2);
        }
    }
    const bool ok_growth = std::isfinite(out.growth_constant);
    const bool ok_lip = std::isfinite(out.lipschitz_constant);
    const bool ok_coer = out.worst_coercivity >= -1e-10 * std::max(1.0, c1);
    const bool ok_mono = out.worst_monotonicity > 0.0;
    out.ok = ok_growth && ok_lip && ok_coer && ok_mono;
    std::ostringstream msg;
    if (!ok_growth) msg << "growth constant diverged; ";
    if (!ok_lip) msg << "phase Lipschitz constant diverged; ";
    if (!ok_coer) msg << "coercivity witness violated (" << out.worst_coercivity << "); ";
    if (!ok_mono) msg << "monotonicity violated (" << out.worst_monotonicity << "); ";
    if (out.ok) msg << "ok";
    out.message = msg.str();
    return out;
}

DensityCheck validate_assumption_density(const DensityLaw& law, double lo, double hi,
                                         int samples) {
    DensityCheck out;
    out.min_rho = 1e300;
    const double h = (hi - lo) / (samples - 1);
    for (int k = 0; k < samples; ++k) {
        const double s = lo + k * h;
        out.min_rho = std::min(out.min_rho, law.rho(s));
        out.max_abs_drho = std::max(out.max_abs_drho, std::abs(law.drho(s)));
        out.max_abs_d2rho = std::max(out.max_abs_d2rho, std::abs(law.d2rho(s)));
    }
    // C^2 continuity across the seam points of the piecewise definition:
    // two-sided differences must shrink with eps relative to the natural
    // scale of each derivative level.
    const double seams[4] = {-1.0 - law.delta_b(), -1.0, 1.0, 1.0 + law.delta_b()};
    const double eps = 1e-6;
    const double scale0 = std::max(1.0, std::max(law.rho1(), law.rho2()));
    const double scale1 = std::max(1.0, out.max_abs_drho);
    const double scale2 = std::max(1.0, out.max_abs_d2rho);
    for (double s : seams) {
        const double j0 = std::abs(law.rho(s + eps) - law.rho(s - eps));
        const double j1 = std::abs(law.drho(s + eps) - law.drho(s - eps));
        const double j2 = std::abs(law.d2rho(s + eps) - law.d2rho(s - eps));
        out.worst_seam_jump =
            std::max({out.worst_seam_jump, j0 / scale0, j1 / scale1, j2 / scale2});
    }
    const bool pos = out.min_rho > 0.0;
    const bool finite = std::isfinite(out.max_abs_drho) && std::isfinite(out.max_abs_d2rho);
    const bool smooth = out.worst_seam_jump < 1e-3;
    out.ok = pos && finite && smooth;
    std::ostringstream msg;
    if (!pos) msg << "density not strictly positive (min " << out.min_rho << "); ";
    if (!finite) msg << "derivative bounds not finite; ";
    if (!smooth) msg << "seam continuity check failed (" << out.worst_seam_jump << "); ";
    if (out.ok) msg << "ok";
    out.message = msg.str();
    return out;
}

} // namespace nsch
