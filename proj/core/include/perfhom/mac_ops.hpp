#pragma once

#include "perfhom/grid.hpp"

// Finite-difference operators bound to a mask.  Conventions:
//  - inputs are assumed masked (zero at non-fluid slots); outputs are masked;
//  - the viscous block couples each velocity component to its 2*dim
//    same-component neighbours with weight 1/h^2, reading zeros from solid
//    faces, wall slots and past-the-wall ghosts, so <A u, u> is exactly the
//    sum of squared masked face differences;
//  - divergence and gradient are exact negative adjoints of each other in
//    the plain (unweighted) inner product.

namespace perfhom {

class MacOps {
public:
    explicit MacOps(const Mask& mask);

    const Mask& mask() const { return *mask_; }
    const Grid& grid() const { return mask_->grid; }

    /// out = (shift + visc * A) u, A the Dirichlet face Laplacian.
    void viscous(const FaceField& u, FaceField& out, double visc = 1.0, double shift = 0.0) const;

    /// Independent route to <A u, u>: explicit sum over links of squared
    /// differences (with zeros at Dirichlet neighbours), times h^(d-2).
    /// Equals dot(viscous(u), u) * h^d up to roundoff.
    double dirichlet_energy(const FaceField& u) const;

    void divergence(const FaceField& u, CellField& out) const;
    void gradient(const CellField& p, FaceField& out) const;

    /// Cell-centered Neumann Laplacian sum_faces (p_nbr - p_c)/h^2 with
    /// no-flux closure at solid faces and walls (equals div(grad p)).
    void cell_laplacian(const CellField& p, CellField& out) const;

    /// Scalar Dirichlet Laplacian on fluid cells for eigenvalue work: the
    /// boundary sits on the wall/solid interface half a cell away, so
    /// Dirichlet links carry weight 2/h^2.
    void scalar_dirichlet(const CellField& u, CellField& out) const;

    /// Divergence-form transport B(u)w (advecting field u frozen) or its
    /// exact transpose.  Centered interpolation to cell centers and edges.
    void transport(const FaceField& u, const FaceField& w, FaceField& out, bool transpose) const;

    /// Skew-symmetric convection 1/2 (B - B^T) w; <conv w, w> = 0 exactly.
    void convection(const FaceField& u, const FaceField& w, FaceField& out) const;

    void mask_faces(FaceField& u) const;
    void mask_cells(CellField& p) const;
    /// Subtract the fluid-cell mean (pressure gauge).
    void project_zero_mean(CellField& p) const;
    double fluid_mean(const CellField& p) const;

    std::size_t fluid_cells() const { return fluid_cells_; }

private:
    const Mask* mask_;
    double h_;
    std::size_t fluid_cells_;
};

} // namespace perfhom
