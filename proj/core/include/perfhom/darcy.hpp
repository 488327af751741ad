#pragma once

#include <functional>

#include "perfhom/cell_problem.hpp"
#include "perfhom/grid.hpp"
#include "perfhom/krylov.hpp"

namespace perfhom {

/// Steady filtration problem on an unperforated box:
///
///     viscosity * u = A (f - grad p),  div u = 0,  u . n = 0 on walls,
///
/// discretized cell-centered with two-point normal and averaged tangential
/// pressure differences.  The forcing is sampled analytically at face
/// centers, so the discrete right-hand side div(A f) is compatible with
/// the no-flux closure by construction.
struct DarcyProblem {
    int dim = 0;
    Box box;
    int resolution = 0;
    Tensor permeability; // SPD
    double viscosity = 1.0;
    std::function<void(const std::array<double, 3>&, std::array<double, 3>&)> forcing;

    void validate() const;
};

struct DarcySolution {
    Grid grid;
    CellField pressure; // zero mean
    FaceField flux;     // u at faces, zero on walls
    double max_div = 0.0;
    KrylovResult stats;
};

/// Conjugate gradients when the permeability is diagonal, BiCGStab
/// otherwise (the averaged cross-flux stencil is not exactly symmetric
/// next to walls).  Throws convergence_error on stall.
DarcySolution solve_darcy(const DarcyProblem& prob, double rel_tol = 1e-11, int max_iter = 200000);

/// Dense reference solve of the same discrete system (probed operator,
/// pressure-mean border, full-pivot elimination).  Limited to 5000 cells.
DarcySolution dense_darcy_oracle(const DarcyProblem& prob);

} // namespace perfhom
