#pragma once
// ============================================================================
// Constitutive laws for a two-phase power-law mixture:
//
//   * PotentialSpec  — double-well free energy f with a convex/concave
//                      splitting f(s) = f0(s) - alpha s^2 / 2, f0 convex.
//   * DensityLaw     — C^2 density rho(phi), affine in phi on [-1, 1] and
//                      exactly constant outside a blend layer of width
//                      delta_b; rho' and rho'' are exposed for the relative
//                      flux J and the mass-source term R.
//   * FluidParams    — power-law exponent p, phase viscosities, kappa
//                      regularisation, and declared coercivity witnesses.
//   * stress / viscous coefficient, flux_J, source_R field assembly.
//   * validate_assumption_{growth_potential, stress_structure, density} —
//     executable checks of the standing structural assumptions, returning
//     measured constants.
//
// Shapes: the clamp chi(s) used by the viscosity and the blend used by the
// density share one C^2 quintic transition with vanishing endpoint slopes;
// the density blend additionally has a vanishing integral so that rho is
// *exactly* constant beyond the layer while keeping rho' continuous.  The
// price is a small monotonicity dip inside the layer, bounded by
//   dip = max_G * |rho2 - rho1| / 2 * delta_b,   max_G ~ 0.1975,
// which the validator accounts for when checking positivity.
// ============================================================================

#include <cmath>
#include <functional>
#include <string>

#include "nsch/grid.hpp"

namespace nsch {

// ---------------------------------------------------------------------------
// Scalar shapes shared by density and viscosity blends
// ---------------------------------------------------------------------------

/// Quintic smoothstep H(t): H(0)=0, H(1)=1, H'=H''=0 at both ends,
/// max H' = 15/8.
double smoothstep5(double t);
double smoothstep5_d(double t);

/// Zero-integral C^1 blend slope g(t) = 1 - 18 t^2 + 32 t^3 - 15 t^4 with
/// g(0)=1, g(1)=0, g'(0)=g'(1)=0 and integral 0; primitive G(t) with
/// G(0)=G(1)=0.
double blend_slope(double t);
double blend_slope_d(double t);
double blend_primitive(double t);
/// max of the blend primitive on [0,1] (the dip/overshoot constant).
double blend_primitive_max();

// ---------------------------------------------------------------------------
// PotentialSpec
// ---------------------------------------------------------------------------

struct PotentialSpec {
    std::function<double(double)> f;    // free energy density
    std::function<double(double)> df;   // f'
    std::function<double(double)> d2f;  // f''
    std::function<double(double)> d3f;  // f'''
    double alpha = 1.0;                 // f + alpha s^2/2 is convex

    double f0_d(double s) const { return df(s) + alpha * s; }    // convex part f0'
    double f0_d2(double s) const { return d2f(s) + alpha; }      // f0''
};

/// The standard quartic double well f(s) = (s^2 - 1)^2 / 4 with alpha = 1
/// (f0(s) = s^4/4 + const is convex).
PotentialSpec double_well_potential();

// ---------------------------------------------------------------------------
// DensityLaw
// ---------------------------------------------------------------------------

class DensityLaw {
public:
    /// rho1 = rho(-1), rho2 = rho(+1); affine in between, blended to exact
    /// constants over |s| in [1, 1 + delta_b].
    DensityLaw(double rho1, double rho2, double delta_b = 0.1);

    double rho(double s) const;
    double drho(double s) const;   // rho'
    double d2rho(double s) const;  // rho''

    double rho1() const { return rho1_; }
    double rho2() const { return rho2_; }
    double delta_b() const { return delta_b_; }

    /// Largest deviation of rho below/above its plateau values inside the
    /// blend layer: blend_primitive_max() * |rho2-rho1|/2 * delta_b.
    double dip_bound() const;

    /// min over all s of rho(s) (plateau minus the dip on the lighter side).
    double min_rho() const;

private:
    double rho1_, rho2_, delta_b_, slope_;
};

// ---------------------------------------------------------------------------
// FluidParams and the power-law stress
// ---------------------------------------------------------------------------

struct FluidParams {
    double nu1 = 1.0;          // viscosity factor of phase -1
    double nu2 = 1.0;          // viscosity factor of phase +1
    double power_index = 2.0;  // p > 1; p = 2 is Newtonian
    double kappa_reg = 1e-8;   // shear-rate regularisation, active for p < 2
    double delta_b = 0.1;      // clamp blend width (matches DensityLaw)

    // Declared coercivity witnesses for S : M >= omega |M|^p - c1.
    // Non-positive omega means "derive a safe default" (see a2 validator).
    double omega = 0.0;
    double c1 = 0.0;

    /// C^2 clamp of the order parameter onto [-1 - d, 1 + d]: identity on
    /// [-1, 1], constant +-1 outside the blend layer, |chi| <= 1 + dip.
    double clamp_chi(double s) const;
    double clamp_chi_d(double s) const;

    /// Interpolated viscosity factor nu(chi(s)); affine in the clamp value.
    double viscosity(double s) const;

    /// Effective scalar coefficient a(s, |M|) with S = a M, i.e.
    /// a = 2 nu(s) (|M|^2 + kappa^2)^{(p-2)/2} (kappa active only for p<2).
    double viscous_coefficient(double s, double shear_norm) const;

    /// min over s of viscosity(s) (includes the clamp dip).
    double min_viscosity() const;
    double max_viscosity() const;

    /// omega / c1 actually used in checks: declared values if omega > 0,
    /// otherwise (min_viscosity, 1e-9).
    double effective_omega() const;
    double effective_c1() const;
};

/// Frobenius norm of a symmetric 2x2 tensor given (xx, xy, yy).
inline double sym_tensor_norm(double xx, double xy, double yy) {
    return std::sqrt(xx * xx + 2.0 * xy * xy + yy * yy);
}

/// Pointwise power-law stress S(s, M) = a(s, |M|) M for symmetric M.
void stress_pointwise(const FluidParams& fp, double s, double mxx, double mxy, double myy,
                      double& sxx, double& sxy, double& syy);

/// Cell-centred stress field S(phi, D) from cell phi and cell tensor D.
TensorField stress_field(const FluidParams& fp, const ScalarField& phi, const TensorField& D);

/// Relative mass flux J = -m rho'(phi) grad mu on faces (phi interpolated
/// to faces with two-point averages).
VectorField flux_J(const DensityLaw& law, double mobility, const ScalarField& phi,
                   const ScalarField& mu);

/// Mass source R = -m rho''(phi) grad phi . grad mu at cells (face gradient
/// products averaged back to centres).  Vanishes identically wherever
/// |phi| <= 1 because rho'' == 0 there.
ScalarField source_R(const DensityLaw& law, double mobility, const ScalarField& phi,
                     const ScalarField& mu);

// ---------------------------------------------------------------------------
// Assumption validators (executable structural checks)
// ---------------------------------------------------------------------------

struct PotentialCheck {
    bool ok = false;
    double growth_constant = 0.0;   // max |f'''(s)| / (|s| + 1) over the scan
    double min_convexity = 0.0;     // min f''(s) + alpha over the scan
    double worst_s = 0.0;
    std::string message;
};

/// Scan f on [lo, hi]: f''' growth |f'''| <= C (|s|+1) with finite C, and
/// f'' >= -alpha (splitting really is convex/concave).
PotentialCheck validate_assumption_growth_potential(const PotentialSpec& pot, double lo = -10.0,
                                                    double hi = 10.0, int samples = 1000001);

struct StressCheck {
    bool ok = false;
    double growth_constant = 0.0;    // |S| <= C (|M|^{p-1} + 1)
    double lipschitz_constant = 0.0; // |S(s1,M)-S(s2,M)| <= C |s1-s2| (|M|^{p-1}+1)
    double worst_coercivity = 0.0;   // min of S:M - omega |M|^p + c1
    double worst_monotonicity = 0.0; // min of (S(M1)-S(M2)):(M1-M2)
    std::string message;
};

/// Randomised check of growth, phase-Lipschitz continuity, coercivity with
/// the effective (omega, c1) witnesses, and monotonicity of M -> S(s, M).
StressCheck validate_assumption_stress_structure(const FluidParams& fp, int pairs = 20000,
                                                 unsigned long long seed = 12345);

struct DensityCheck {
    bool ok = false;
    double min_rho = 0.0;
    double max_abs_drho = 0.0;
    double max_abs_d2rho = 0.0;
    double worst_seam_jump = 0.0; // largest mismatch of rho, rho', rho'' across seams
    std::string message;
};

/// Scan rho on [lo, hi]: strict positivity (including the blend dip),
/// bounded derivatives, and C^2 continuity across the seam points.
DensityCheck validate_assumption_density(const DensityLaw& law, double lo = -5.0, double hi = 5.0,
                                         int samples = 1000001);

} // namespace nsch
