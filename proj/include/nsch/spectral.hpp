#pragma once
// ============================================================================
// Fast trigonometric transforms that diagonalise the constant-coefficient
// grid operators exactly.
//
// Each stored degree-of-freedom family has a transform basis in which the
// three-point second difference (with this library's ghost conventions) is
// diagonal:
//
//   kind          dof layout                        eigenvalue, size n, spacing h
//   ------------  --------------------------------  ---------------------------------
//   periodic      any periodic line                 -(4/h^2) sin^2(pi k / n)
//   cos_cell      cells, even mirror (Neumann)      -(4/h^2) sin^2(pi k / (2n))
//   sin_cell      cells, odd mirror (no-slip)       -(4/h^2) sin^2(pi (k+1) / (2n))
//   sin_node      interior nodes, Dirichlet ends    -(4/h^2) sin^2(pi (k+1) / (2(n+1)))
//
// modal_filter applies out = T^{-1}[ g(lambda_x + lambda_y) . T[in] ], i.e.
// any rational function of the separable Laplacian, to machine precision.
// Plans use FFTW_ESTIMATE only (deterministic plan choice) and are cached.
// ============================================================================

#include <functional>

#include "nsch/grid.hpp"

namespace nsch {

enum class Tkind { periodic, cos_cell, sin_cell, sin_node };

/// In-place modal multiplier: a <- T^{-1} diag(g(lambda_x + lambda_y)) T a.
/// hx, hy are the grid spacings entering the eigenvalue formulas.
void modal_filter(Array2& a, Tkind kx, Tkind ky, double hx, double hy,
                  const std::function<double(double)>& g);

/// Eigenvalue of the 1-D second difference for the given transform kind,
/// mode index k, line size n, spacing h (exposed for tests/oracles).
double modal_eigenvalue(Tkind kind, int k, int n, double h);

/// Solve (c0 + c2 L + c4 L^2) phi = rhs on cell scalars, where L is the
/// five-point Laplacian with the grid's scalar ghost convention
/// (periodic/Neumann).  Exact per-mode division; c0 must keep the constant
/// mode nonsingular (c0 != 0) or rhs must be zero-mean with c0 == 0.
void cell_helmholtz_biharmonic_solve(const Grid& g, const Array2& rhs,
                                     double c0, double c2, double c4, Array2& out);

/// Solve (I - eps L) w = u componentwise on a MAC vector field, where L is
/// the vector Laplacian with the grid's velocity ghost conventions
/// (periodic, or no-slip walls in physical mode).  Used by the mollifier.
void face_helmholtz_solve(const VectorField& u, double eps, VectorField& out);

} // namespace nsch
