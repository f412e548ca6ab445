#pragma once
// ============================================================================
// Clamped biharmonic solver on cell-centred scalars.
//
// Solves  Lap^2 w = f  with clamped boundary conditions (w = dw/dn = 0) on
// the physical domain.  The discrete operator is the 13-point square of the
// five-point Laplacian; near walls the two ghost layers are eliminated with
// a one-sided quartic closure that is exact for polynomials up to degree 4
// satisfying w = w' = 0 at the wall:
//
//   w(-1/2 h)  ~  3 w(1/2 h) - w(3/2 h)/3  + w(5/2 h)/25
//   w(-3/2 h)  ~ 54 w(1/2 h) - 8 w(3/2 h) + (27/25) w(5/2 h)
//
// The matrix is factorised once per grid (sparse LU) and reused; solves are
// followed by iterative refinement to push the algebraic residual to
// ~1e-13 * |f|, which the exactness and additivity properties of the
// pressure decomposition rely on.
//
// biharmonic_apply exposes the same matrix as an operator, so
// solve(apply(w)) == w holds to refinement precision, and apply(solve(f))
// reproduces f exactly for data supported two or more cells away from the
// walls (where the closure never activates).
// ============================================================================

#include <memory>

#include "nsch/grid.hpp"

namespace nsch {

class BiharmonicSolver {
public:
    /// Factorises the clamped 13-point operator for this grid (physical
    /// boundary handling; a periodic grid uses wrap ghosts instead and
    /// requires zero-mean data).
    explicit BiharmonicSolver(const Grid& g);
    ~BiharmonicSolver();

    BiharmonicSolver(BiharmonicSolver&&) noexcept;
    BiharmonicSolver& operator=(BiharmonicSolver&&) noexcept;

    const Grid& grid() const;

    /// Solve Lap^2 w = f.  Periodic grids require zero-mean f (and return
    /// zero-mean w); the clamped (physical) operator is nonsingular.
    ScalarField solve(const ScalarField& f) const;

    /// Apply the discrete operator: out = Lap^2 w (same closure as solve).
    ScalarField apply(const ScalarField& w) const;

    /// Laplacian with the clamped ghost closure (first ghost layer only);
    /// used to evaluate Lap of a clamped solution consistently.
    ScalarField laplacian_clamped(const ScalarField& w) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace nsch
