#pragma once

#include <array>
#include <vector>

#include "perfhom/geometry.hpp"
#include "perfhom/saddle.hpp"

namespace perfhom {

/// Small symmetric tensor on the flow dimension.
struct Tensor {
    int dim = 0;
    std::array<std::array<double, 3>, 3> m{};

    static Tensor zero(int d) {
        Tensor t;
        t.dim = d;
        return t;
    }
    double& operator()(int i, int j) { return m[i][j]; }
    double operator()(int i, int j) const { return m[i][j]; }
};

Tensor symmetrized(const Tensor& t);
double max_entry_gap(const Tensor& a, const Tensor& b);
bool is_spd(const Tensor& t);
void apply(const Tensor& t, const std::array<double, 3>& in, std::array<double, 3>& out);

struct CellOptions {
    SaddleOptions saddle{};
    /// Forcing scale of the unit-cell problem; <= 0 selects the dimension
    /// default (sqrt(eta) in 3d, 1/sqrt(|log eta|) in 2d).
    double c = 0.0;
    double form_gap_tol = 1e-6;
};

/// One directional solve of the obstacle problem on the periodic unit cell:
///     -Laplace(w) + grad q = c^2 e_dir,  div w = 0,  w = 0 on the obstacle.
struct CellSolution {
    FaceField w;
    CellField q;          // zero fluid mean
    double c = 0.0;
    double grad_energy = 0.0;     // integral of |grad w|^2
    std::array<double, 3> mean{}; // integral of each component, zero extended
    int outer_iterations = 0;
    int inner_iterations = 0;
    double momentum_residual = 0.0;
    double divergence_residual = 0.0;
};

CellSolution solve_cell(const CellGeometry& geom, int direction, const CellOptions& opt = {});

/// Permeability evaluated at one obstacle size, through both discrete
/// routes.  energy_form(i,j) = <A w_i, w_j> / c^2, mean_form(i,j) =
/// integral of component i of w_j; the two agree up to solver residuals
/// and a gap beyond form_gap_tol raises consistency_error.
struct EtaPermeability {
    double eta = 0.0;
    double c = 0.0;
    Tensor energy_form;
    Tensor mean_form;
    Tensor tensor;        // symmetrized energy form
    double form_gap = 0.0;
    double fluid_fraction = 0.0;
    int outer_iterations = 0;
    int inner_iterations = 0;
};

EtaPermeability permeability_at_eta(const CellGeometry& geom, const CellOptions& opt = {});

/// Extrapolation of the permeability to vanishing obstacle size.  Each
/// entry is fitted as limit + b * x^p in x = c(eta)^2 over the three
/// smallest obstacle sizes; entries whose increments are below noise are
/// taken from the smallest eta directly.  `reliable` is cleared when a
/// diagonal entry could not be fitted or the extrapolated correction is a
/// large fraction of the value.
struct PermeabilityLimit {
    Tensor tensor;
    double est_error = 0.0;  // largest extrapolated correction on the diagonal
    double rate = 0.0;       // fitted decay exponent, averaged over the diagonal
    bool reliable = true;
    std::vector<EtaPermeability> table;
};

PermeabilityLimit permeability_limit(int dim, CellShape shape, int resolution,
                                     const std::vector<double>& etas, const CellOptions& opt = {});

/// Norm diagnostics of a directional cell solve, in the scalings that stay
/// bounded as the obstacle shrinks.
struct CellNorms {
    double grad_ratio = 0.0; // ||grad w|| / c
    double w_norm = 0.0;     // ||w||
    double q_ratio = 0.0;    // ||q|| / c
};

CellNorms cell_norm_report(const CellGeometry& geom, const CellSolution& sol);

} // namespace perfhom
