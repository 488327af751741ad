#pragma once

#include "perfhom/grid.hpp"
#include "perfhom/krylov.hpp"
#include "perfhom/mac_ops.hpp"

namespace perfhom {

/// Generalized Stokes saddle problem on a masked MAC grid:
///
///     (shift + viscosity * A) u + grad p = rhs_velocity
///                                  div u = rhs_divergence
///
/// with u = 0 on solid faces and the closure of the grid (periodic or
/// walls).  A is the velocity Laplacian of MacOps::viscous.  Both
/// right-hand sides must be masked (exact zeros outside the fluid), and
/// rhs_divergence must sum to zero over fluid cells, otherwise the
/// problem is incompatible with the divergence constraint.
struct SaddleSystem {
    const Mask* mask = nullptr;
    FaceField rhs_velocity;
    CellField rhs_divergence;
    double viscosity = 1.0;
    double shift = 0.0;

    SaddleSystem(const Mask& m, double visc = 1.0, double sh = 0.0);

    /// Throws precondition_error for unmasked data, compatibility_error
    /// for divergence data with nonzero fluid sum.
    void validate() const;
};

struct SaddleOptions {
    double rel_tol = 1e-10;       // outer Schur residual, relative to its rhs
    int max_outer = 500;
    double inner_rel_tol = 1e-12; // velocity solves inside the Schur operator
    int max_inner = 200000;
    /// Optional starting pressure for the outer Schur iteration (projected
    /// to zero fluid mean internally); must live on the system grid.  Time
    /// steppers pass the previous step's pressure here.
    const CellField* pressure_guess = nullptr;
};

struct SaddleSolution {
    FaceField velocity;
    CellField pressure;          // zero fluid mean
    KrylovResult outer;
    int inner_iterations_total = 0;
    double momentum_residual = 0.0;   // ||(shift+visc A)u + grad p - f|| / ||f||
    double divergence_residual = 0.0; // ||div u - g|| absolute
};

/// Schur-complement conjugate gradients (Uzawa): outer CG on
/// D (shift + visc A)^{-1} D^T over zero-mean pressures, inner CG for each
/// velocity solve.  A zero right-hand side returns the zero solution after
/// zero iterations.  Throws convergence_error when either loop stalls.
SaddleSolution solve_saddle(const SaddleSystem& sys, const SaddleOptions& opt = {});

} // namespace perfhom
