#include <cmath>

#include "nsch/config.hpp"
#include "nsch/elliptic.hpp"
#include "nsch/operators.hpp"
#include "nsch/rng.hpp"
#include "nsch/spectral.hpp"

namespace nsch {

namespace {

// Band-limited noise: iid uniforms smoothed by the discrete heat semigroup
// exp(l^2 Lap), then rescaled to the requested amplitude.  Deterministic in
// the seed and independent of the thread count.
ScalarField band_limited_noise(const Grid& g, unsigned long long seed, double amplitude) {
    ScalarField f(g);
    Rng rng(seed);
    for (std::int64_t k = 0; k < f.a.size(); ++k) f.a[k] = rng.uniform() - 0.5;
    const double l = 1.5 * std::max(g.dx, g.dy);
    const Tkind kind = (g.bc == BC::periodic) ? Tkind::periodic : Tkind::cos_cell;
    modal_filter(f.a, kind, kind, g.dx, g.dy,
                 [l](double lam) { return std::exp(l * l * lam); });
    double mx = 0.0;
    for (std::int64_t k = 0; k < f.a.size(); ++k) mx = std::max(mx, std::abs(f.a[k]));
    if (mx > 0.0)
        for (std::int64_t k = 0; k < f.a.size(); ++k) f.a[k] *= amplitude / mx;
    return f;
}

// tanh band profile: +1 inside the centre band of half-height ly/4, -1
// outside, transition width w.  Smooth across the periodic seam.
double band_profile(double y, double ly, double w) {
    return std::tanh((0.25 * ly - std::abs(y - 0.5 * ly)) / w);
}

} // namespace

State initial_state(const RunConfig& c) {
    const Grid& g = c.grid;
    ScalarField phi(g);
    VectorField v(g);
    const InitialSpec& spec = c.initial;

    switch (spec.type) {
        case InitialSpec::Type::spinodal: {
            phi = band_limited_noise(g, spec.seed, spec.amplitude);
            const double shift = spec.mean - mean_cells(phi);
            for (std::int64_t k = 0; k < phi.a.size(); ++k) phi.a[k] += shift;
            break;
        }
        case InitialSpec::Type::stripe: {
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    phi(i, j) = band_profile(g.yc(j), g.ly(), spec.width);
            break;
        }
        case InitialSpec::Type::blob: {
            const double r0 = (spec.radius > 0.0) ? spec.radius : 0.25 * g.lx();
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const double dx0 = g.xc(i) - 0.5 * g.lx();
                    const double dy0 = g.yc(j) - 0.5 * g.ly();
                    phi(i, j) = std::tanh((r0 - std::hypot(dx0, dy0)) / spec.width);
                }
            break;
        }
        case InitialSpec::Type::shear_layer: {
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    phi(i, j) = band_profile(g.yc(j), g.ly(), spec.width);
            // Counterflowing band plus a small transverse perturbation that
            // triggers the roll-up.
            const double pi2 = 2.0 * std::acos(-1.0);
            for (int j = 0; j < v.x.ny(); ++j)
                for (int i = 0; i < v.x.nx(); ++i)
                    v.x(i, j) = spec.amplitude * band_profile(g.yc(j), g.ly(), spec.width);
            for (int j = 0; j < v.y.ny(); ++j)
                for (int i = 0; i < v.y.nx(); ++i)
                    v.y(i, j) = 0.05 * spec.amplitude * std::sin(pi2 * g.xc(i) / g.lx());
            break;
        }
        case InitialSpec::Type::quiescent: {
            phi.a.fill(spec.value);
            break;
        }
    }

    if (g.bc == BC::physical) {
        for (int j = 0; j < v.x.ny(); ++j) {
            v.x(0, j) = 0.0;
            v.x(g.nx, j) = 0.0;
        }
        for (int i = 0; i < v.y.nx(); ++i) {
            v.y(i, 0) = 0.0;
            v.y(i, g.ny) = 0.0;
        }
    }
    v = helmholtz_project(v, c.elliptic);
    return make_state(phi, v, c.coupled_config());
}

} // namespace nsch
