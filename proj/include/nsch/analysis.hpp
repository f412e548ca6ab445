#pragma once
// ============================================================================
// Verification-side constructions: the bounded-gradient truncation family,
// the parabolic pressure decomposition, and a divergence-equation solver on
// a disc.
//
// Truncation family
// -----------------
//   psi      : C^2 cutoff, == 1 on [0,1], == 0 on [2,inf), 0 <= -psi' <= 2
//              (quintic transition, max slope 15/8).
//   Upsilon_L(s) = sum_{l=1..L} psi(2^{-l} s): a staircase that equals L on
//              [0,2] and vanishes for s >= 2^{L+1}; 0 <= Upsilon_L <= L.
//   h_L(s)   = int_0^s Upsilon_L(theta) theta dtheta  (closed form), and
//   H_L(xi)  = h_L(|xi|).
//   truncated_field(q, L): faces scaled by Upsilon_L(|q|); equals L * q
//              wherever |q| <= 1 and vanishes wherever |q| >= 2^{L+1}.
//   truncation_gradient_bound: measures
//              max | grad(Upsilon_L(|q|)) (x) q | / (|grad q| + tiny),
//              the constant with which the *cutoff* gradient is controlled
//              by the field gradient; bounded uniformly in L because each
//              point sees at most one active transition band.
//
// Pressure decomposition
// ----------------------
// Given sampled u(t) on faces and a flux tensor H(t) (staggered layout)
// with  <u(t_k) - u(0), eta> = <K_k, grad eta>,  K_k = trapezoid int_0^t H,
// for all solenoidal eta, the decomposition produces
//   pi_h,k    :  Lap pi_h = -div(u_k - u_0), zero mean ("harmonic" part),
//   pi~0,k    = Lap ( BiLapInv divdiv K_k )  (time-integrated pressure),
//   pi_0,k    = backward difference of pi~0 (the distributional pressure),
//   pi_1/pi_2 : same construction applied to a supplied split H = H1 + H2.
// All solvers are linear and deterministic, so the decomposition is
// additive under splitting of H to solver precision.
//
// Divergence equation on a disc
// -----------------------------
// bogovskii_solve finds a face field w, supported in a disc, with
// div w = f on the disc's cells and w = 0 on/outside its boundary, by
// minimising |grad w|^2 subject to the divergence constraint (saddle-point
// system, sparse LU).  Reports the constraint residual and the H^1 ratio.
// ============================================================================

#include <cmath>
#include <vector>

#include "nsch/elliptic.hpp"
#include "nsch/grid.hpp"

namespace nsch {

// ---------------------------------------------------------------------------
// Truncation family
// ---------------------------------------------------------------------------

double truncation_psi(double s);
double truncation_psi_d(double s);
double truncation_upsilon(double s, int L);
double truncation_h(double s, int L);              // closed form
inline double truncation_H(double xi_norm, int L) { return truncation_h(std::abs(xi_norm), L); }

/// Componentwise scaling of q by Upsilon_L(|q|); |q| at a face uses the
/// stored component and the 4-point average of the transverse one.
VectorField truncated_field(const VectorField& q, int L);

struct TruncationLevelReport {
    int level = 0;           // l
    double fraction = 0.0;   // fraction of cells with 2^l < |q| <= 2^{l+1}
};

struct TruncationGradientReport {
    double constant = 0.0;               // measured bound constant
    double max_upsilon = 0.0;            // max Upsilon_L(|q|) over cells
    std::vector<TruncationLevelReport> occupancy;
};

/// Measure max over cells of |grad(Upsilon_L(|q|))| |q| / (|grad q| + tiny)
/// plus the level-set occupancy of the dyadic bands.
TruncationGradientReport truncation_gradient_bound(const VectorField& q, int L);

// ---------------------------------------------------------------------------
// Staggered tensor (analysis-internal layout)
// ---------------------------------------------------------------------------

/// Non-symmetric 2x2 tensor with row-x components (xx at cells, xy at
/// corners) and row-y components (yx at corners, yy at cells), so that
/// div T lands on faces with compact centred stencils.
struct MacTensor {
    Grid grid;
    Array2 xx, yy;  // cells
    Array2 xy, yx;  // corners

    MacTensor() = default;
    explicit MacTensor(const Grid& g)
        : grid(g), xx(g.nx, g.ny), yy(g.nx, g.ny),
          xy(g.corner_nx(), g.corner_ny()), yx(g.corner_nx(), g.corner_ny()) {}
};

/// Face divergence of a staggered tensor.
VectorField mac_tensor_divergence(const MacTensor& T);

/// Cell field div div T (composition of the two centred divergences).
ScalarField mac_tensor_divdiv(const MacTensor& T);

/// Duality pairing <T, grad eta> (exact adjoint of -mac_tensor_divergence
/// against face fields with zero normal trace / periodic).
double mac_tensor_dot_grad(const MacTensor& T, const VectorField& eta);

// ---------------------------------------------------------------------------
// Pressure decomposition
// ---------------------------------------------------------------------------

struct PressureInput {
    std::vector<double> times;       // strictly increasing, size K+1
    std::vector<VectorField> u;      // momentum-type face field, size K+1
    std::vector<MacTensor> H;        // flux tensor, size K+1
    // Optional split H = H1 + H2 (e.g. stress part vs the rest); same size.
    std::vector<MacTensor> H1, H2;
};

struct PressureOptions {
    EllipticSolverConfig poisson;      // for the pi_h solves
    bool check_relation = true;        // verify <u_k - u_0, eta> = <K_k, grad eta>
    int relation_probes = 4;           // random solenoidal probe fields
    double relation_tol = 1e-6;        // relative tolerance of the check
    unsigned long long probe_seed = 2026;
};

struct PressureResult {
    std::vector<double> times;           // == input times
    std::vector<ScalarField> pi_h;       // size K+1 (pi_h[0] == 0)
    std::vector<ScalarField> pi0_tilde;  // size K+1 (pi0_tilde[0] == 0)
    std::vector<ScalarField> pi0;        // size K (backward differences, k >= 1)
    std::vector<ScalarField> pi1, pi2;   // size K if split given, else empty
    double relation_residual = 0.0;      // worst relative probe residual
    // Bound witnesses.
    double sup_pi_h = 0.0;               // sup_k |pi_h,k|_2
    double sup_u_diff = 0.0;             // sup_k |u_k - u_0|_2
    double norm_pi0 = 0.0;               // l2-in-time of |pi_0|_2
    double norm_H = 0.0;                 // l2-in-time of |H|_2
};

PressureResult pressure_decompose(const PressureInput& in, const PressureOptions& opt);

// ---------------------------------------------------------------------------
// Divergence equation on a disc
// ---------------------------------------------------------------------------

struct BogovskiiResult {
    VectorField w;
    double div_residual = 0.0;   // |div w - f|_2 on the disc
    double h1_norm = 0.0;        // |grad w|_2
    double data_norm = 0.0;      // |f|_2
};

/// Solve div w = f on the disc |x - centre| < radius with w = 0 outside.
/// f must have zero mean over the disc's cells (SolverError otherwise).
BogovskiiResult bogovskii_solve(const ScalarField& f, double cx, double cy, double radius);

} // namespace nsch
