#pragma once
// ============================================================================
// Discrete differential operators on the MAC grid.
//
// Ghost conventions (applied on the fly, no ghost storage):
//   * periodic  : all indices wrap.
//   * physical  : scalars mirror evenly across walls (homogeneous Neumann);
//                 normal velocity components are stored on the wall and
//                 pinned to zero; tangential components reflect oddly
//                 (no-slip).
//
// Key exact identities maintained by construction (and pinned by tests):
//   * laplacian(f) == divergence(gradient(f))          (same code path)
//   * <gradient(f), u>_faces == -<f, divergence(u)>_cells   (summation by
//     parts; exact when u has zero normal trace / periodic)
//   * divergence(curl_stream(psi)) == 0                 (telescoping)
// ============================================================================

#include "nsch/grid.hpp"

namespace nsch {

// ---------------------------------------------------------------------------
// Ghost-aware element access
// ---------------------------------------------------------------------------

/// Cell value with wrap (periodic) or even mirror (physical) ghosts.
double cell_at(const ScalarField& f, int i, int j);

/// x-face value with wrap or odd tangential reflection; physical normal
/// (i out of [0,nx]) never occurs because walls are stored.
double ux_at(const VectorField& u, int i, int j);
double uy_at(const VectorField& u, int i, int j);

/// Corner value with wrap; physical corners are all stored.
double corner_at(const CornerField& f, int i, int j);

// ---------------------------------------------------------------------------
// First-order operators
// ---------------------------------------------------------------------------

/// Cell-centred divergence of a face vector field.
ScalarField divergence(const VectorField& u);

/// Face gradient of a cell scalar.  Physical mode: wall faces get 0
/// (consistent with the even mirror ghost).
VectorField gradient(const ScalarField& f);

/// Five-point Laplacian, implemented as divergence(gradient(f)).
ScalarField laplacian(const ScalarField& f);

/// Cell-centred symmetric gradient D(u) = (grad u + grad u^T)/2.
/// Diagonal entries are natural at centres; the off-diagonal entry is
/// computed at corners and averaged onto centres.
TensorField sym_gradient(const VectorField& u);

/// Off-diagonal rate of strain (u_y,x + u_x,y)/2 at corners (the natural
/// staggered location; used by the viscous operator and analysis tensors).
CornerField shear_at_corners(const VectorField& u);

/// Full velocity-gradient entries that live at corners: du_x/dy and du_y/dx.
void corner_cross_derivatives(const VectorField& u, CornerField& dudy, CornerField& dvdx);

/// Exactly divergence-free field from a corner stream function:
/// u = (d psi/dy, -d psi/dx).
VectorField curl_stream(const CornerField& psi);

// ---------------------------------------------------------------------------
// Interpolation
// ---------------------------------------------------------------------------

/// Arithmetic two-point average of a cell scalar onto both face sets.
/// Physical wall faces take the adjacent cell value (mirror ghost).
VectorField cells_to_faces(const ScalarField& c);

/// Four-point average of a cell scalar onto corners.
CornerField cells_to_corners(const ScalarField& c);

/// Transverse velocity interpolation: u_y at an x-face location (4-point
/// average) and vice versa.
double uy_at_xface(const VectorField& u, int i, int j);
double ux_at_yface(const VectorField& u, int i, int j);

/// Average the two face values of one vector component back onto a cell.
void faces_to_cells(const VectorField& u, ScalarField& ux_c, ScalarField& uy_c);

// ---------------------------------------------------------------------------
// Quadrature / inner products (deterministic reductions)
// ---------------------------------------------------------------------------

double dot_cells(const ScalarField& a, const ScalarField& b);
double sum_cells(const ScalarField& a);                       // integral / (dx dy)
double dot_faces(const VectorField& a, const VectorField& b); // both components
double norm2_cells(const ScalarField& a);                     // sqrt(<a,a>)
double norm2_faces(const VectorField& a);
double max_abs_cells(const ScalarField& a);
double max_abs_faces(const VectorField& a);

/// Trapezoid corner quadrature weight (1 interior; physical: 1/2 edge,
/// 1/4 corner of the domain).
double corner_weight(const Grid& g, int i, int j);

// ---------------------------------------------------------------------------
// Whole-field helpers
// ---------------------------------------------------------------------------

void axpy_cells(double alpha, const ScalarField& x, ScalarField& y); // y += alpha x
void axpy_faces(double alpha, const VectorField& x, VectorField& y);
void scale_faces(double alpha, VectorField& u);
double mean_cells(const ScalarField& a);
void subtract_mean_cells(ScalarField& a);

} // namespace nsch
