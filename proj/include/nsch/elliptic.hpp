#pragma once
// ============================================================================
// Iterative elliptic solvers on cell scalars, the weighted Leray projection,
// and the Stokes-type velocity mollifier.
//
// poisson_solve handles div(beta grad p) = rhs with the grid's natural
// scalar boundary condition (periodic, or homogeneous Neumann at walls),
// beta given on faces.  Two interchangeable methods are provided:
//   * conjugate-gradient (Jacobi preconditioned), and
//   * geometric multigrid (V(2,2), red-black Gauss-Seidel smoothing,
//     bilinear prolongation, cell-average restriction, rediscretised
//     coarse operators).
// Both are deterministic: fixed sweep orders, fixed-order reductions.
//
// helmholtz_project removes the beta-weighted gradient part of a face
// field: q solves div(beta grad q) = div u, and the projection returns
// u - beta grad q.  With beta = dt/rho this is the variable-density
// pressure projection; with beta = 1 it is the Leray projection, which is
// orthogonal in the face inner product (norm splitting is exact up to the
// solver tolerance).
//
// stokes_mollify(u, eps) = project( (I - eps L)^{-1} project(u) ): a
// divergence-free smoothing of u that contracts the L2 norm and converges
// to the Leray projection of u as eps -> 0.  The Helmholtz inverse is
// applied in transform space (exact for the discrete operator).
// ============================================================================

#include "nsch/grid.hpp"

namespace nsch {

struct EllipticSolverConfig {
    enum class Method { multigrid, conjugate_gradient };
    Method method = Method::multigrid;
    double rel_tol = 1e-10;
    int max_iter = 400; // V-cycles or CG iterations
};

struct EllipticReport {
    int iterations = 0;
    double rel_residual = 0.0;
};

/// Solve div(beta grad p) = rhs, zero-mean p.  beta lives on faces and must
/// be strictly positive; pass nullptr for beta == 1.  The mean of rhs (pure
/// roundoff for discrete-divergence data) is projected out; mean-dominated
/// rhs — essentially a nonzero constant — raises SolverError, as do
/// non-convergence and NaN breakdown.
ScalarField poisson_solve(const ScalarField& rhs, const EllipticSolverConfig& cfg,
                          const VectorField* beta = nullptr, EllipticReport* report = nullptr);

/// Constant-coefficient convenience wrapper (beta == 1): the scalar Poisson
/// problem with the grid's natural boundary condition.
ScalarField poisson_solve_neumann(const ScalarField& rhs, const EllipticSolverConfig& cfg,
                                  EllipticReport* report = nullptr);

/// Weighted Leray projection (see header comment).  q_out, if given,
/// receives the zero-mean potential.
VectorField helmholtz_project(const VectorField& u, const EllipticSolverConfig& cfg,
                              const VectorField* beta = nullptr, ScalarField* q_out = nullptr,
                              EllipticReport* report = nullptr);

/// Divergence-free mollification of u with smoothing scale eps > 0.
VectorField stokes_mollify(const VectorField& u, double eps, const EllipticSolverConfig& cfg);

} // namespace nsch
