#include "perfhom/saddle.hpp"

#include <cmath>

#include "perfhom/errors.hpp"
#include "perfhom/parallel.hpp"

namespace perfhom {

SaddleSystem::SaddleSystem(const Mask& m, double visc, double sh)
    : mask(&m),
      rhs_velocity(FaceField::zeros(m.grid)),
      rhs_divergence(CellField::zeros(m.grid)),
      viscosity(visc),
      shift(sh) {}

void SaddleSystem::validate() const {
    if (!mask) throw precondition_error("saddle system has no mask");
    if (viscosity <= 0.0) throw precondition_error("saddle viscosity must be positive");
    if (shift < 0.0) throw precondition_error("saddle shift must be nonnegative");
    const Grid& g = mask->grid;
    if (!rhs_velocity.grid.same_layout(g) || !rhs_divergence.grid.same_layout(g))
        throw precondition_error("saddle right-hand sides live on a different grid");
    for (int a = 0; a < g.dim; ++a) {
        const auto& fm = mask->face[a];
        const auto& arr = rhs_velocity.comp[a];
        for (std::size_t f = 0; f < arr.size(); ++f)
            if (!fm[f] && arr[f] != 0.0)
                throw precondition_error("velocity right-hand side is nonzero outside the fluid");
    }
    for (std::size_t c = 0; c < rhs_divergence.v.size(); ++c)
        if (!mask->cell[c] && rhs_divergence.v[c] != 0.0)
            throw precondition_error("divergence data is nonzero outside the fluid");
    const double s = par::sum(rhs_divergence.v.data(), rhs_divergence.v.size());
    const double scale = std::max(1.0, norm2(rhs_divergence));
    if (std::abs(s) > 1e-12 * scale)
        throw compatibility_error("divergence data must sum to zero over the fluid");
}

SaddleSolution solve_saddle(const SaddleSystem& sys, const SaddleOptions& opt) {
    sys.validate();
    const Mask& mask = *sys.mask;
    const Grid& g = mask.grid;
    MacOps ops(mask);

    SaddleSolution sol{FaceField::zeros(g), CellField::zeros(g), {}, 0, 0.0, 0.0};

    const double fnorm = norm2(sys.rhs_velocity);
    const double gnorm = norm2(sys.rhs_divergence);
    if (fnorm == 0.0 && gnorm == 0.0) {
        sol.outer.converged = true;
        return sol;
    }

    auto velocity_solve = [&](const FaceField& rhs, FaceField& x, const char* what) {
        FaceOp op = [&](const FaceField& v, FaceField& out) {
            ops.viscous(v, out, sys.viscosity, sys.shift);
        };
        KrylovResult r = cg(op, rhs, x, opt.inner_rel_tol, opt.max_inner);
        sol.inner_iterations_total += r.iterations;
        if (!r.converged)
            throw convergence_error(std::string("saddle velocity solve stalled: ") + what,
                                    std::move(r.history));
    };

    // b_s = g - D A^{-1} f
    FaceField u0 = FaceField::zeros(g);
    velocity_solve(sys.rhs_velocity, u0, "rhs reduction");
    CellField bs = CellField::zeros(g);
    ops.divergence(u0, bs);
    axpby(1.0, sys.rhs_divergence, -1.0, bs);
    ops.project_zero_mean(bs);

    if (opt.pressure_guess) {
        if (!opt.pressure_guess->grid.same_layout(g))
            throw precondition_error("saddle pressure guess lives on a different grid");
        copy_into(*opt.pressure_guess, sol.pressure);
        ops.mask_cells(sol.pressure);
        ops.project_zero_mean(sol.pressure);
    }

    // S p = b_s with S = D (shift + visc A)^{-1} D^T, kept on zero-mean pressures
    FaceField grad_p = FaceField::zeros(g);
    FaceField w = FaceField::zeros(g);
    CellOp schur = [&](const CellField& p, CellField& out) {
        ops.gradient(p, grad_p);
        scale(-1.0, grad_p); // D^T = -G
        fill(w, 0.0);
        velocity_solve(grad_p, w, "Schur apply");
        ops.divergence(w, out);
        ops.project_zero_mean(out);
    };
    sol.outer = cg(schur, bs, sol.pressure, opt.rel_tol, opt.max_outer);
    if (!sol.outer.converged)
        throw convergence_error("saddle Schur iteration stalled",
                                std::vector<double>(sol.outer.history));
    ops.project_zero_mean(sol.pressure);

    // recover u = A^{-1} (f - grad p)
    ops.gradient(sol.pressure, grad_p);
    FaceField rhs_u = sys.rhs_velocity;
    axpy(-1.0, grad_p, rhs_u);
    velocity_solve(rhs_u, sol.velocity, "velocity recovery");

    // full-system residuals on the way out
    FaceField mom = FaceField::zeros(g);
    ops.viscous(sol.velocity, mom, sys.viscosity, sys.shift);
    axpy(1.0, grad_p, mom);
    axpy(-1.0, sys.rhs_velocity, mom);
    sol.momentum_residual = norm2(mom) / std::max(fnorm, 1e-300);
    CellField dv = CellField::zeros(g);
    ops.divergence(sol.velocity, dv);
    axpy(-1.0, sys.rhs_divergence, dv);
    sol.divergence_residual = norm2(dv);
    return sol;
}

} // namespace perfhom
