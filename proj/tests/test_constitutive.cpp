/// @file test_constitutive.cpp
/// @brief Constitutive laws: double well, blended density, power-law stress.
///
/// Pins (a) closed-form spot values of the scalar shape functions, (b) the
/// structural properties the solvers rely on (convexity shift, C^2 blends,
/// stress monotonicity/coercivity), and (c) the executable assumption
/// validators themselves, including the analytic growth constant of the
/// quartic well: max |f'''(s)|/(|s|+1) on [-10,10] is 6*10/11 = 60/11.

#include <gtest/gtest.h>

#include <cmath>

#include "nsch/constitutive.hpp"
#include "nsch/grid.hpp"
#include "nsch/operators.hpp"
#include "nsch/rng.hpp"

using namespace nsch;

namespace {

constexpr double kPi = 3.14159265358979323846;

FluidParams newtonian(double nu = 1.0) {
    FluidParams fp;
    fp.nu1 = fp.nu2 = nu;
    fp.power_index = 2.0;
    return fp;
}

} // namespace

// ============================================================================
// Scalar shapes
// ============================================================================

TEST(Constitutive, SmoothstepEndpointsAndPeakSlope) {
    EXPECT_EQ(smoothstep5(0.0), 0.0);
    EXPECT_EQ(smoothstep5(1.0), 1.0);
    EXPECT_NEAR(smoothstep5(0.5), 0.5, 1e-15);       // odd symmetry about 1/2
    EXPECT_NEAR(smoothstep5_d(0.5), 15.0 / 8.0, 1e-15);
    EXPECT_EQ(smoothstep5_d(0.0), 0.0);
    EXPECT_EQ(smoothstep5_d(1.0), 0.0);
    // Derivative consistency by central differences.
    for (double t : {0.12, 0.37, 0.61, 0.88}) {
        const double h = 1e-6;
        const double fd = (smoothstep5(t + h) - smoothstep5(t - h)) / (2 * h);
        EXPECT_NEAR(smoothstep5_d(t), fd, 1e-8);
    }
}

TEST(Constitutive, BlendSlopeIsZeroIntegralC1Bump) {
    EXPECT_EQ(blend_slope(0.0), 1.0);
    EXPECT_EQ(blend_slope(1.0), 0.0);
    EXPECT_EQ(blend_slope_d(0.0), 0.0);
    EXPECT_EQ(blend_slope_d(1.0), 0.0);
    EXPECT_EQ(blend_primitive(0.0), 0.0);
    EXPECT_NEAR(blend_primitive(1.0), 0.0, 1e-15); // integral of g over [0,1] is 0
    // Primitive matches trapezoid quadrature of the slope.
    const int n = 200000;
    double acc = 0.0, worst = 0.0;
    for (int k = 1; k <= n; ++k) {
        const double a = double(k - 1) / n, b = double(k) / n;
        acc += 0.5 * (blend_slope(a) + blend_slope(b)) / n;
        worst = std::max(worst, std::abs(acc - blend_primitive(b)));
    }
    EXPECT_LE(worst, 1e-9);
    // And the advertised max of the primitive is the actual max.
    double mx = 0.0;
    for (int k = 0; k <= n; ++k) mx = std::max(mx, blend_primitive(double(k) / n));
    EXPECT_NEAR(blend_primitive_max(), mx, 1e-9);
}

// ============================================================================
// Double-well potential
// ============================================================================

TEST(Constitutive, DoubleWellSpotValues) {
    const PotentialSpec pot = double_well_potential();
    EXPECT_EQ(pot.f(1.0), 0.0);
    EXPECT_EQ(pot.f(-1.0), 0.0);
    EXPECT_NEAR(pot.f(0.0), 0.25, 1e-15);
    EXPECT_EQ(pot.df(0.0), 0.0);
    EXPECT_NEAR(pot.df(2.0), 2.0 * (4.0 - 1.0), 1e-15); // s(s^2-1)
    EXPECT_NEAR(pot.d2f(0.0), -1.0, 1e-15);             // 3s^2 - 1
    EXPECT_NEAR(pot.d3f(0.5), 3.0, 1e-15);              // 6s
    EXPECT_EQ(pot.alpha, 1.0);
}

TEST(Constitutive, ConvexSplitShiftIsConvexOnCore) {
    const PotentialSpec pot = double_well_potential();
    // f0'' = 3s^2 - 1 + alpha = 3s^2 >= 0 everywhere with alpha = 1.
    for (double s = -3.0; s <= 3.0; s += 0.01) EXPECT_GE(pot.f0_d2(s), -1e-15) << s;
    EXPECT_NEAR(pot.f0_d(0.7), 0.7 * 0.7 * 0.7, 1e-14); // df + s = s^3
}

TEST(Constitutive, PotentialValidatorReportsAnalyticGrowthConstant) {
    const PotentialCheck chk = validate_assumption_growth_potential(double_well_potential());
    EXPECT_TRUE(chk.ok) << chk.message;
    // |f'''| = 6|s|, so max over [-10,10] of 6|s|/(|s|+1) is 60/11.
    EXPECT_NEAR(chk.growth_constant, 60.0 / 11.0, 1e-6);
    EXPECT_GE(chk.min_convexity, -1e-12);
    EXPECT_NEAR(std::abs(chk.worst_s), 10.0, 1e-3);
}

TEST(Constitutive, PotentialValidatorFlagsBadAlpha) {
    PotentialSpec pot = double_well_potential();
    pot.alpha = 0.5; // f'' + alpha = 3s^2 - 0.5 dips negative near s = 0
    const PotentialCheck chk = validate_assumption_growth_potential(pot);
    EXPECT_FALSE(chk.ok);
    EXPECT_LT(chk.min_convexity, 0.0);
}

// ============================================================================
// Density law
// ============================================================================

TEST(Constitutive, DensityPlateausAndAffineCore) {
    const DensityLaw law(1.0, 3.0, 0.1);
    // Affine on [-1, 1]: rho(s) = (rho1+rho2)/2 + (rho2-rho1)/2 s.
    for (double s : {-1.0, -0.5, 0.0, 0.25, 1.0})
        EXPECT_NEAR(law.rho(s), 2.0 + s, 1e-14) << s;
    // Hard plateaus outside the blend band.
    EXPECT_EQ(law.rho(-1.5), law.rho(-2.0));
    EXPECT_EQ(law.rho(1.5), law.rho(7.0));
    EXPECT_EQ(law.drho(1.5), 0.0);
    EXPECT_EQ(law.d2rho(1.5), 0.0);
    EXPECT_EQ(law.drho(0.0), 1.0);
    EXPECT_EQ(law.d2rho(0.0), 0.0);
}

TEST(Constitutive, DensityBlendIsC2AcrossSeams) {
    const DensityLaw law(1.0, 3.0, 0.2);
    const double h = 1e-7;
    for (double seam : {1.0, 1.2, -1.0, -1.2}) {
        EXPECT_NEAR(law.rho(seam - h), law.rho(seam + h), 1e-5);
        EXPECT_NEAR(law.drho(seam - h), law.drho(seam + h), 1e-4);
        // Finite-difference second derivative stays bounded through the seam.
        const double d2 = (law.rho(seam + h) - 2 * law.rho(seam) + law.rho(seam - h)) / (h * h);
        EXPECT_LE(std::abs(d2), 10.0 * (1.0 + std::abs(law.d2rho(seam))));
    }
}

TEST(Constitutive, DensityStaysPositiveIncludingDip) {
    // The zero-integral blend slope dips below the plateau by
    // dip_bound = |rho2-rho1|/2 * delta_b * blend_primitive_max().
    const DensityLaw law(1.0, 3.0, 0.3);
    double mn = 1e300;
    for (double s = -3.0; s <= 3.0; s += 1e-4) mn = std::min(mn, law.rho(s));
    EXPECT_GT(mn, 0.0);
    EXPECT_GE(mn, law.min_rho() - 1e-12);
    EXPECT_LE(law.min_rho(), mn + 1e-6);
    EXPECT_NEAR(law.dip_bound(), 1.0 * 0.3 * blend_primitive_max(), 1e-14);
}

TEST(Constitutive, DensityValidatorAcceptsSaneLawsRejectsVacuum) {
    const DensityCheck ok = validate_assumption_density(DensityLaw(1.0, 3.0, 0.1));
    EXPECT_TRUE(ok.ok) << ok.message;
    EXPECT_NEAR(ok.max_abs_drho, 1.0, 1e-6);
    // The seam metric is a two-sided difference at eps = 1e-6; for a C^2 law
    // it is ~2 eps |rho'''| (measured 9e-5 here), far below the 1e-3 gate a
    // genuine kink would blow through.
    EXPECT_LE(ok.worst_seam_jump, 5e-4);
    // A huge contrast with a huge blend width overshoots below zero.
    EXPECT_THROW(DensityLaw(1e-3, 2.0, 1.0), ConfigError);
}

// ============================================================================
// Power-law stress
// ============================================================================

TEST(Constitutive, NewtonianStressIsExactlyLinear) {
    const FluidParams fp = newtonian(0.7);
    double sxx, sxy, syy;
    stress_pointwise(fp, 0.3, 1.0, -2.0, 0.5, sxx, sxy, syy);
    const double a = 2.0 * fp.viscosity(0.3);
    EXPECT_EQ(sxx, a * 1.0);
    EXPECT_EQ(sxy, a * -2.0);
    EXPECT_EQ(syy, a * 0.5);
    // p = 2 must bypass the kappa regularisation entirely.
    EXPECT_EQ(fp.viscous_coefficient(0.3, 0.0), a);
    EXPECT_EQ(fp.viscous_coefficient(0.3, 123.0), a);
}

TEST(Constitutive, PowerLawScalingExponent) {
    FluidParams fp = newtonian();
    fp.power_index = 3.0;
    // |S(t M)| / |S(M)| = t^{p-1} for p >= 2 (kappa inactive).
    double s1xx, s1xy, s1yy, s2xx, s2xy, s2yy;
    stress_pointwise(fp, 0.0, 0.4, 0.1, -0.2, s1xx, s1xy, s1yy);
    stress_pointwise(fp, 0.0, 0.8, 0.2, -0.4, s2xx, s2xy, s2yy);
    const double n1 = sym_tensor_norm(s1xx, s1xy, s1yy);
    const double n2 = sym_tensor_norm(s2xx, s2xy, s2yy);
    EXPECT_NEAR(n2 / n1, 4.0, 1e-12); // 2^{p-1}
}

TEST(Constitutive, ShearThinningUsesRegularisedNorm) {
    FluidParams fp = newtonian();
    fp.power_index = 1.8;
    fp.kappa_reg = 1e-8;
    // At M = 0 the coefficient is finite: a = 2 nu (kappa^2)^{(p-2)/2}.
    const double a0 = fp.viscous_coefficient(0.0, 0.0);
    EXPECT_TRUE(std::isfinite(a0));
    EXPECT_NEAR(a0, 2.0 * std::pow(fp.kappa_reg * fp.kappa_reg, -0.1), 1e-6);
    // Decreasing in |M|.
    EXPECT_LT(fp.viscous_coefficient(0.0, 1.0), fp.viscous_coefficient(0.0, 0.5));
}

TEST(Constitutive, ViscosityBlendClampedOutsidePhysicalRange) {
    FluidParams fp;
    fp.nu1 = 1.0;
    fp.nu2 = 0.5;
    fp.delta_b = 0.1;
    EXPECT_NEAR(fp.viscosity(-1.0), 1.0, 1e-14);
    EXPECT_NEAR(fp.viscosity(1.0), 0.5, 1e-14);
    EXPECT_EQ(fp.viscosity(-4.0), fp.viscosity(-1.2));
    EXPECT_EQ(fp.viscosity(4.0), fp.viscosity(1.2));
    EXPECT_GE(fp.min_viscosity(), 0.0);
    EXPECT_LE(fp.min_viscosity(), fp.max_viscosity());
    // clamp_chi maps R onto [-1-delta_b misfit band, 1+...] monotonically.
    EXPECT_NEAR(fp.clamp_chi(0.4), 0.4, 1e-14);
    EXPECT_EQ(fp.clamp_chi(5.0), fp.clamp_chi(2.0));
    EXPECT_EQ(fp.clamp_chi(-5.0), -fp.clamp_chi(5.0));
}

TEST(Constitutive, StressValidatorPassesForAllSpecExponents) {
    for (double p : {1.8, 2.0, 3.0}) {
        FluidParams fp;
        fp.nu1 = 1.0;
        fp.nu2 = 0.5;
        fp.power_index = p;
        const StressCheck chk = validate_assumption_stress_structure(fp, 10000, 99);
        EXPECT_TRUE(chk.ok) << "p=" << p << ": " << chk.message;
        EXPECT_GE(chk.worst_monotonicity, -1e-12) << p;
        EXPECT_GE(chk.worst_coercivity, -1e-9) << p;
        EXPECT_GT(chk.growth_constant, 0.0);
        EXPECT_GT(chk.lipschitz_constant, 0.0);
    }
}

// ============================================================================
// Field-level assembly: J and R
// ============================================================================

TEST(Constitutive, FluxAndSourceVanishForMatchedDensities) {
    const Grid g{24, 24, 1.0 / 24, 1.0 / 24, BC::periodic};
    ScalarField phi(g), mu(g);
    Rng rng(5);
    for (std::int64_t k = 0; k < phi.a.size(); ++k) {
        phi.a[k] = rng.symmetric(2.0);
        mu.a[k] = rng.symmetric(1.0);
    }
    const DensityLaw matched(2.5, 2.5, 0.1);
    const VectorField J = flux_J(matched, 1.0, phi, mu);
    EXPECT_EQ(max_abs_faces(J), 0.0);
    const ScalarField R = source_R(matched, 1.0, phi, mu);
    EXPECT_EQ(max_abs_cells(R), 0.0);
}

TEST(Constitutive, SourceVanishesOnAffineCore) {
    // R is proportional to rho''(phi); inside [-1,1] the law is affine.
    const Grid g{16, 16, 1.0 / 16, 1.0 / 16, BC::periodic};
    ScalarField phi(g), mu(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            phi(i, j) = 0.8 * std::sin(2 * kPi * g.xc(i));
            mu(i, j) = std::cos(2 * kPi * g.yc(j));
        }
    const DensityLaw law(1.0, 3.0, 0.1);
    const ScalarField R = source_R(law, 0.5, phi, mu);
    EXPECT_EQ(max_abs_cells(R), 0.0);
}

TEST(Constitutive, FluxMatchesHandAssembledGradient) {
    const Grid g{16, 16, 1.0 / 16, 1.0 / 16, BC::periodic};
    ScalarField phi(g), mu(g);
    Rng rng(8);
    for (std::int64_t k = 0; k < phi.a.size(); ++k) {
        phi.a[k] = rng.symmetric(0.9); // stay on the affine core: rho' = slope
        mu.a[k] = rng.symmetric(1.0);
    }
    const DensityLaw law(1.0, 2.0, 0.1);
    const double m = 0.25;
    const VectorField J = flux_J(law, m, phi, mu);
    const VectorField gmu = gradient(mu);
    // J = -m rho'(phi) grad mu with rho' face-averaged; on the affine core
    // rho' is the constant slope, so the product is exact.
    const double slope = 0.5 * (law.rho2() - law.rho1());
    for (std::int64_t k = 0; k < J.x.size(); ++k)
        EXPECT_NEAR(J.x[k], -m * slope * gmu.x[k], 1e-13);
    for (std::int64_t k = 0; k < J.y.size(); ++k)
        EXPECT_NEAR(J.y[k], -m * slope * gmu.y[k], 1e-13);
}
