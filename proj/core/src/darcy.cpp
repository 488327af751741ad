#include "perfhom/darcy.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "perfhom/errors.hpp"
#include "perfhom/mac_ops.hpp"
#include "field_walk.hpp"

namespace perfhom {

using detail::mask_at;
using detail::walk;

void DarcyProblem::validate() const {
    if (dim != 2 && dim != 3) throw precondition_error("filtration problem needs dim 2 or 3");
    if (resolution < 2) throw precondition_error("filtration resolution must be at least 2");
    if (!(viscosity > 0.0)) throw precondition_error("filtration viscosity must be positive");
    if (permeability.dim != dim) throw precondition_error("permeability dimension mismatch");
    if (!is_spd(permeability)) throw precondition_error("permeability must be positive definite");
    if (!forcing) throw precondition_error("filtration forcing is not set");
}

namespace {

struct Setup {
    Grid grid;
    Mask mask;
    FaceField F; // A f sampled at interior face centers
};

Setup make_setup(const DarcyProblem& prob) {
    Setup s{Grid::box_domain(prob.dim, prob.box, prob.resolution), {}, {}};
    s.mask = Mask::all_fluid(s.grid);
    s.F = FaceField::zeros(s.grid);
    const Grid& g = s.grid;
    for (int a = 0; a < g.dim; ++a) {
        const auto ext = g.face_extent(a);
        const auto& fm = s.mask.face[a];
        auto& Fa = s.F.comp[a];
        walk(ext, [&](std::size_t f, int i, int j, int k) {
            if (!fm[f]) return; // wall slots carry no flux
            std::array<double, 3> x{0.0, 0.0, 0.0};
            const int idx[3] = {i, j, k};
            for (int b = 0; b < g.dim; ++b)
                x[b] = (b == a) ? g.face_coord(b, idx[b]) : g.center_coord(b, idx[b]);
            std::array<double, 3> fv{0.0, 0.0, 0.0};
            prob.forcing(x, fv);
            double acc = 0.0;
            for (int b = 0; b < g.dim; ++b) acc += prob.permeability(a, b) * fv[b];
            Fa[f] = acc;
        });
    }
    return s;
}

/// A grad p at interior faces, zero on walls.  Normal part is the two-point
/// difference; tangential parts average the up-to-four neighbouring
/// differences, dropping the ones that would cross a wall.
void flux_of_gradient(const Setup& s, const Tensor& A, const CellField& p, FaceField& out) {
    const Grid& g = s.grid;
    const double ih = 1.0 / g.h;
    std::array<std::array<int, 3>, 3> fext;
    for (int a = 0; a < g.dim; ++a) fext[a] = g.face_extent(a);
    for (int a = 0; a < g.dim; ++a) {
        const auto ext = fext[a];
        const auto& fm = s.mask.face[a];
        auto& dst = out.comp[a];
        walk(ext, [&](std::size_t f, int i, int j, int k) {
            if (!fm[f]) {
                dst[f] = 0.0;
                return;
            }
            const int li = i - (a == 0), lj = j - (a == 1), lk = k - (a == 2);
            double acc = A(a, a) * (p.at(i, j, k) - p.at(li, lj, lk)) * ih;
            for (int b = 0; b < g.dim; ++b) {
                if (b == a || A(a, b) == 0.0) continue;
                double sum = 0.0;
                int kept = 0;
                const int cells2[2][3] = {{li, lj, lk}, {i, j, k}};
                for (const auto& J : cells2) {
                    for (int side = 0; side <= 1; ++side) {
                        // b-face of cell J on the given side
                        const int fi = J[0] + (side == 1 && b == 0);
                        const int fj = J[1] + (side == 1 && b == 1);
                        const int fk = J[2] + (side == 1 && b == 2);
                        if (!mask_at(g, s.mask.face[b], fext[b], fi, fj, fk)) continue;
                        const int ni = J[0] + (side == 1 ? (b == 0) : -(b == 0));
                        const int nj = J[1] + (side == 1 ? (b == 1) : -(b == 1));
                        const int nk = J[2] + (side == 1 ? (b == 2) : -(b == 2));
                        const double diff = side == 1 ? p.at(ni, nj, nk) - p.at(J[0], J[1], J[2])
                                                     : p.at(J[0], J[1], J[2]) - p.at(ni, nj, nk);
                        sum += diff * ih;
                        ++kept;
                    }
                }
                if (kept > 0) acc += A(a, b) * (sum / kept);
            }
            dst[f] = acc;
        });
    }
}

bool is_diagonal(const Tensor& A) {
    for (int i = 0; i < A.dim; ++i)
        for (int j = 0; j < A.dim; ++j)
            if (i != j && A(i, j) != 0.0) return false;
    return true;
}

} // namespace

DarcySolution solve_darcy(const DarcyProblem& prob, double rel_tol, int max_iter) {
    prob.validate();
    Setup s = make_setup(prob);
    const Grid& g = s.grid;
    MacOps ops(s.mask);

    CellField rhs = CellField::zeros(g);
    ops.divergence(s.F, rhs);
    scale(-1.0, rhs); // (-L) p = -div(A f)
    ops.project_zero_mean(rhs);

    FaceField scratch = FaceField::zeros(g);
    CellOp op = [&](const CellField& v, CellField& out) {
        flux_of_gradient(s, prob.permeability, v, scratch);
        ops.divergence(scratch, out);
        scale(-1.0, out);
        ops.project_zero_mean(out);
    };

    DarcySolution sol{g, CellField::zeros(g), FaceField::zeros(g), 0.0, {}};
    sol.stats = is_diagonal(prob.permeability) ? cg(op, rhs, sol.pressure, rel_tol, max_iter)
                                               : bicgstab(op, rhs, sol.pressure, rel_tol, max_iter);
    if (!sol.stats.converged)
        throw convergence_error("filtration pressure solve stalled",
                                std::vector<double>(sol.stats.history));
    ops.project_zero_mean(sol.pressure);

    flux_of_gradient(s, prob.permeability, sol.pressure, sol.flux);
    axpby(1.0, s.F, -1.0, sol.flux); // A f - A grad p
    scale(1.0 / prob.viscosity, sol.flux);
    ops.mask_faces(sol.flux);

    CellField dv = CellField::zeros(g);
    ops.divergence(sol.flux, dv);
    sol.max_div = max_abs(dv);
    return sol;
}

DarcySolution dense_darcy_oracle(const DarcyProblem& prob) {
    prob.validate();
    Setup s = make_setup(prob);
    const Grid& g = s.grid;
    MacOps ops(s.mask);
    const std::size_t nc = g.cell_count();
    if (nc + 1 > 5001) throw precondition_error("dense filtration oracle limited to 5000 cells");

    CellField rhs = CellField::zeros(g);
    ops.divergence(s.F, rhs);
    scale(-1.0, rhs);

    const std::size_t n = nc + 1;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    CellField e = CellField::zeros(g), col = CellField::zeros(g);
    FaceField scratch = FaceField::zeros(g);
    for (std::size_t c = 0; c < nc; ++c) {
        e.v[c] = 1.0;
        flux_of_gradient(s, prob.permeability, e, scratch);
        ops.divergence(scratch, col);
        for (std::size_t r = 0; r < nc; ++r) K(r, c) = -col.v[r];
        K(nc, c) = 1.0;
        e.v[c] = 0.0;
    }
    for (std::size_t r = 0; r < nc; ++r) K(r, nc) = 1.0;
    for (std::size_t c = 0; c < nc; ++c) b(c) = rhs.v[c];

    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    Eigen::VectorXd x = lu.solve(b);
    const double bnorm = b.norm();
    if ((K * x - b).norm() > 1e-8 * (bnorm > 0.0 ? bnorm : 1.0))
        throw compatibility_error("filtration data incompatible with the no-flux closure");

    DarcySolution sol{g, CellField::zeros(g), FaceField::zeros(g), 0.0, {}};
    for (std::size_t c = 0; c < nc; ++c) sol.pressure.v[c] = x(c);
    ops.project_zero_mean(sol.pressure);
    flux_of_gradient(s, prob.permeability, sol.pressure, sol.flux);
    axpby(1.0, s.F, -1.0, sol.flux);
    scale(1.0 / prob.viscosity, sol.flux);
    ops.mask_faces(sol.flux);
    CellField dv = CellField::zeros(g);
    ops.divergence(sol.flux, dv);
    sol.max_div = max_abs(dv);
    return sol;
}

} // namespace perfhom
