#pragma once

#include "perfhom/saddle.hpp"

namespace perfhom {

struct DenseOracleResult {
    FaceField velocity;
    CellField pressure;       // zero fluid mean
    double residual = 0.0;    // ||K x - b|| / ||b|| of the bordered system
};

/// Direct reference solve of the same saddle problem by dense elimination.
/// The matrix is assembled by probing the production stencils with unit
/// vectors on the fluid unknowns, bordered with a pressure-mean row, and
/// factored with full pivoting.  Intended for cross-checking the iterative
/// path on small grids; throws precondition_error above 5000 unknowns and
/// compatibility_error when the system is singular and the data does not
/// lie in its range.
DenseOracleResult dense_solve_saddle(const SaddleSystem& sys);

} // namespace perfhom
