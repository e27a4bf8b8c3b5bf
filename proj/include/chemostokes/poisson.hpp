#pragma once

#include "chemostokes/grid.hpp"

#include <memory>

namespace chemostokes {

struct PoissonResult {
    ScalarField q;               // mean-zero solution of  lap q = rhs - mean(rhs)
    double compatibility_shift;  // the subtracted mean of rhs
    double rel_residual;         // ||lap q - (rhs - mean)||_2 / ||rhs - mean||_2
};

/// Direct solver for the cell-centered Neumann Poisson problem. The 5-point
/// mirror-ghost Laplacian diagonalizes in the tensor-product cosine basis, so
/// the solve is two dense basis multiplies per direction (exact up to
/// round-off, deterministic). Bases are cached per grid.
class NeumannPoissonSolver {
public:
    explicit NeumannPoissonSolver(const GridSpec& g);
    ~NeumannPoissonSolver();
    NeumannPoissonSolver(NeumannPoissonSolver&&) noexcept;
    NeumannPoissonSolver& operator=(NeumannPoissonSolver&&) noexcept;

    PoissonResult solve(const ScalarField& rhs, double tol) const;
    const GridSpec& grid() const { return g_; }

private:
    GridSpec g_;
    struct Basis;
    std::unique_ptr<Basis> basis_;
};

/// One-shot convenience wrapper around NeumannPoissonSolver.
PoissonResult poisson_neumann(const ScalarField& rhs, const GridSpec& g, double tol);

/// Discrete Leray projection: v minus the face gradient of a pressure
/// corrector, leaving per-cell divergence below tol/h. Boundary faces stay 0.
VectorField project(const VectorField& v, const GridSpec& g, double dt, double tol,
                    const NeumannPoissonSolver& solver);
VectorField project(const VectorField& v, const GridSpec& g, double dt, double tol);

}  // namespace chemostokes
