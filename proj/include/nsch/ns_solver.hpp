#pragma once
// ============================================================================
// Momentum step for the variable-density power-law mixture, and the
// weak-form residual assembler used for verification.
//
// Given v^n, the fresh phase state (phi^{n+1}, mu^{n+1}) and the mollified
// velocity W = mollify(v^n), one step solves
//
//   rho_f (v* - v^n)/dt + [(rho W + J) . grad] v^n + (R/2) v^n
//        - div( a(phi, |D v*|) D v* )  =  eps0 mu grad phi
//   v^{n+1} = v* - (dt / rho_f) grad q,   div v^{n+1} = 0,   pi^{n+1} = q
//
// * rho_f is the face-interpolated density of phi^{n+1}; J and R are the
//   relative flux and mass source of the new phase state.  The extra R v/2
//   term keeps the kinetic energy budget consistent with the mass budget
//   (equivalently: the conservative form carries -R v/2).
// * Convection is explicit and centred (advective form by default; an
//   equivalent divergence/conservative form is available).
// * The capillary force enters as eps0 mu grad phi; the remaining gradient
//   part of -eps0 div(grad phi x grad phi) is absorbed into the pressure.
// * The viscous term is implicit with a lagged coefficient: Picard
//   iteration freezes a = 2 nu(phi)(|D v^{(k)}|^2 + kappa^2)^{(p-2)/2} and
//   solves the symmetric positive definite system by matrix-free
//   Jacobi-preconditioned CG.  The iteration count equals the number of
//   linear solves; for p = 2 the coefficient is independent of v and the
//   loop exits after exactly one solve.
// * The projection solves the variable-coefficient Poisson problem
//   div((dt/rho_f) grad q) = div v* with the configured elliptic method;
//   it is orthogonal in the rho-weighted inner product, so it never
//   increases the kinetic energy.
// ============================================================================

#include "nsch/constitutive.hpp"
#include "nsch/elliptic.hpp"
#include "nsch/grid.hpp"

namespace nsch {

enum class ConvectionForm { advective, conservative };

struct MomentumStepConfig {
    double dt = 1e-3;
    double eps0 = 1.0;
    double mobility = 1.0;
    ConvectionForm convection_form = ConvectionForm::advective;
    int picard_max_iter = 30;
    double picard_tol = 1e-9;          // relative change of the frozen coefficient
    EllipticSolverConfig projection;   // pressure Poisson solve
    double viscous_rel_tol = 1e-11;    // CG tolerance for the implicit solve
    int viscous_max_iter = 2000;
};

struct MomentumStepResult {
    VectorField v;
    ScalarField pi;               // zero-mean pressure
    int picard_iterations = 0;    // == number of linear viscous solves
    double picard_change = 0.0;   // final relative coefficient change
    int viscous_cg_iterations = 0;
    int projection_iterations = 0;
    double div_residual = 0.0;    // |div v^{n+1}|_2
};

/// Capillary force eps0 * mu grad phi sampled on faces (mu averaged onto
/// faces, phi differenced).  For constant phi this is identically zero.
VectorField capillary_force(const ScalarField& phi, const ScalarField& mu, double eps0);

/// One projection step of the momentum equation (see header comment).
MomentumStepResult momentum_step(const VectorField& v_n, const VectorField& W,
                                 const ScalarField& phi_new, const ScalarField& mu_new,
                                 const FluidParams& fp, const DensityLaw& law,
                                 const MomentumStepConfig& cfg);

/// Symmetric viscous operator out = -div( a D u ) assembled from frozen
/// coefficients given at cells (a_c) and corners (a_n); exposed for the
/// operator-symmetry tests and the Newtonian cross-check.
VectorField viscous_apply(const VectorField& u, const ScalarField& a_c, const CornerField& a_n);

/// Explicit convection term with momentum flux c on faces and mass source R
/// at cells: (c . grad) v + R v / 2 (advective form) or div(v x c) - R v / 2
/// (conservative form).  Exposed so the discrete transport identity
/// <conv(v), v> ~= <c, grad |v|^2> / 2 + <R, |v|^2> / 2 can be pinned.
VectorField convection_term(const VectorField& v_n, const VectorField& c_flux,
                            const ScalarField& R, ConvectionForm form);

// ---------------------------------------------------------------------------
// Weak-form residual
// ---------------------------------------------------------------------------

/// A sampled trajectory of the coupled system on uniform times.
struct SampledTrajectory {
    std::vector<double> times;
    std::vector<ScalarField> phi;
    std::vector<ScalarField> mu;
    std::vector<VectorField> v;
};

/// Assemble the momentum weak form against a divergence-free space-time
/// test field eta(t) (with eta(T) = 0):
///
///   sum_k dt [ -<rho v, d_t^+ eta> - <v x (rho v + J), grad eta>
///              - <R v / 2, eta> + <S(phi, Dv), D eta>
///              - eps0 <grad phi x grad phi, grad eta> ]  -  <rho0 v0, eta(0)>
///
/// returned as |residual| (absolute).  For an exact weak solution this is
/// zero; for trajectories produced by the coupled scheme it decays at
/// O(dt + dx^2) (+ O(eps) from the mollifier).
double weak_form_residual(const SampledTrajectory& traj,
                          const std::function<VectorField(double)>& eta, const FluidParams& fp,
                          const DensityLaw& law, const PotentialSpec& pot, double eps0,
                          double mobility);

} // namespace nsch
