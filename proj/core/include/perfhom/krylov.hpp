#pragma once

#include <functional>
#include <vector>

#include "perfhom/grid.hpp"

namespace perfhom {

/// Outcome of an iterative solve.  `history` holds the relative residual
/// after each iteration; callers that treat non-convergence as fatal wrap
/// it in a convergence_error.
struct KrylovResult {
    int iterations = 0;
    double relative_residual = 0.0;
    std::vector<double> history;
    bool converged = false;
};

using CellOp = std::function<void(const CellField&, CellField&)>;
using FaceOp = std::function<void(const FaceField&, FaceField&)>;

/// Conjugate gradients for a symmetric positive (semi-)definite operator in
/// the plain Euclidean inner product.  Stops when ||r|| <= rel_tol * ||b||.
/// A zero right-hand side returns x = 0 after zero iterations.  The initial
/// guess is taken from x.
KrylovResult cg(const CellOp& apply, const CellField& rhs, CellField& x, double rel_tol, int max_iter);
KrylovResult cg(const FaceOp& apply, const FaceField& rhs, FaceField& x, double rel_tol, int max_iter);

/// BiCGStab for nonsymmetric operators.  Same stopping rule as cg; reports
/// converged = false on breakdown.
KrylovResult bicgstab(const CellOp& apply, const CellField& rhs, CellField& x, double rel_tol, int max_iter);
KrylovResult bicgstab(const FaceOp& apply, const FaceField& rhs, FaceField& x, double rel_tol, int max_iter);

} // namespace perfhom
