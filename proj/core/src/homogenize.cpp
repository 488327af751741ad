#include "perfhom/homogenize.hpp"

#include <cmath>

#include "perfhom/errors.hpp"
#include "perfhom/mac_ops.hpp"
#include "perfhom/parallel.hpp"
#include "field_walk.hpp"

namespace perfhom {

using detail::walk;

std::array<double, 3> ForcingSpec::eval(const Box& box, double t, const std::array<double, 3>& x) const {
    const double ramp = ramp_tau > 0.0 ? 1.0 - std::exp(-t / ramp_tau) : 1.0;
    const double a = amplitude * ramp;
    switch (kind) {
        case ForcingKind::zero:
            return {0.0, 0.0, 0.0};
        case ForcingKind::uniform:
            return {a * direction[0], a * direction[1], a * direction[2]};
        case ForcingKind::rotational: {
            const double cx = 0.5 * (box.lo[0] + box.hi[0]);
            const double cy = 0.5 * (box.lo[1] + box.hi[1]);
            return {-a * (x[1] - cy), a * (x[0] - cx), 0.0};
        }
    }
    return {0.0, 0.0, 0.0};
}

namespace {

/// Evaluates fn(a, x) at every face center of component a.
template <class Fn>
void sample_faces(const Grid& g, FaceField& f, Fn&& fn) {
    for (int a = 0; a < g.dim; ++a) {
        const auto ext = g.face_extent(a);
        auto& arr = f.comp[a];
        walk(ext, [&](std::size_t s, int i, int j, int k) {
            std::array<double, 3> x{0.0, 0.0, 0.0};
            const int idx[3] = {i, j, k};
            for (int b = 0; b < g.dim; ++b)
                x[b] = (b == a) ? g.face_coord(b, idx[b]) : g.center_coord(b, idx[b]);
            arr[s] = fn(a, x);
        });
    }
}

} // namespace

std::function<void(double, FaceField&)> make_face_forcing(const ForcingSpec& spec, const Grid& grid) {
    if (spec.kind == ForcingKind::zero) return {};
    const Box box = grid.box;
    return [spec, box](double t, FaceField& f) {
        sample_faces(f.grid, f, [&](int a, const std::array<double, 3>& x) {
            return spec.eval(box, t, x)[a];
        });
    };
}

std::function<void(const std::array<double, 3>&, std::array<double, 3>&)>
make_point_forcing(const ForcingSpec& spec, const Box& box, double t) {
    return [spec, box, t](const std::array<double, 3>& x, std::array<double, 3>& out) {
        out = spec.eval(box, t, x);
    };
}

FaceField build_initial(const InitialSpec& spec, const Grid& grid) {
    FaceField u = FaceField::zeros(grid);
    switch (spec.kind) {
        case InitialKind::zero:
            break;
        case InitialKind::uniform:
            for (int a = 0; a < grid.dim; ++a) {
                const double v = spec.amplitude * spec.direction[a];
                for (double& e : u.comp[a]) e = v;
            }
            break;
        case InitialKind::vortex: {
            const Box box = grid.box;
            const double cx = 0.5 * (box.lo[0] + box.hi[0]);
            const double cy = 0.5 * (box.lo[1] + box.hi[1]);
            sample_faces(grid, u, [&](int a, const std::array<double, 3>& x) {
                if (a == 0) return -spec.amplitude * (x[1] - cy);
                if (a == 1) return spec.amplitude * (x[0] - cx);
                return 0.0;
            });
            break;
        }
    }
    return u;
}

namespace {

struct SpaceTimeError {
    std::vector<double> t, err2, ref2;

    void sample(double time, double e2, double r2) {
        t.push_back(time);
        err2.push_back(e2);
        ref2.push_back(r2);
    }
    double relative() const {
        const double e = trapezoid(t, err2);
        const double r = trapezoid(t, ref2);
        return r > 0.0 ? std::sqrt(e / r) : std::sqrt(e);
    }
    double reference_norm() const { return std::sqrt(trapezoid(t, ref2)); }
};

// Means of each face component over period-sized blocks (cpp cells across),
// one value per block and component.  Wall and solid slots enter as zeros,
// so the mean is the zero-extended integral over the block; along its own
// axis a face sits on the block whose left boundary it is, which counts
// every face exactly once.
void period_average(const Grid& g, const FaceField& f, int cpp, std::vector<double>& out) {
    const int dim = g.dim;
    std::array<int, 3> nb{1, 1, 1};
    for (int a = 0; a < dim; ++a) nb[a] = g.cells[a] / cpp;
    const std::size_t nblocks = static_cast<std::size_t>(nb[0]) * nb[1] * nb[2];
    out.assign(static_cast<std::size_t>(dim) * nblocks, 0.0);
    double w = 1.0;
    for (int a = 0; a < dim; ++a) w /= cpp;
    for (int a = 0; a < dim; ++a) {
        const auto ext = g.face_extent(a);
        const std::vector<double>& comp = f.comp[a];
        double* acc = out.data() + static_cast<std::size_t>(a) * nblocks;
        for (int k = 0; k < ext[2]; ++k)
            for (int j = 0; j < ext[1]; ++j)
                for (int i = 0; i < ext[0]; ++i) {
                    std::array<int, 3> idx{i, j, k};
                    if (idx[a] >= g.cells[a]) continue; // top wall slot, zero
                    const std::size_t b =
                        (static_cast<std::size_t>(idx[2] / (g.dim > 2 ? cpp : 1)) * nb[1] +
                         idx[1] / cpp) *
                            nb[0] +
                        idx[0] / cpp;
                    acc[b] += comp[flat_index(ext, i, j, k)] * w;
                }
    }
}

PerforationSpec make_spec(int dim, double eps, double alpha, double delta, double delta3,
                          CellShape shape) {
    PerforationSpec spec;
    spec.dim = dim;
    spec.eps = eps;
    spec.a_eps = 0.0; // derived as eps^alpha
    spec.alpha = alpha;
    spec.shape = shape;
    spec.delta = delta;
    spec.delta3 = delta3;
    return spec;
}

int period_resolution(double eps, int cells_per_period) {
    const double r = cells_per_period / eps;
    const int R = static_cast<int>(std::lround(r));
    if (std::abs(r - R) > 1e-9 * r)
        throw precondition_error("1/eps must be an integer multiple of the period resolution");
    return R;
}

} // namespace

std::vector<SmallSweepRow> run_small_holes_sweep(const SmallSweepConfig& cfg) {
    const bool alpha_mode = !cfg.alphas.empty();
    if (alpha_mode && !cfg.epsilons.empty())
        throw precondition_error("sweep rows can vary alpha or eps, not both");
    if (!alpha_mode && cfg.epsilons.empty())
        throw precondition_error("sweep has no rows");

    std::vector<std::pair<double, double>> params; // (alpha, eps)
    if (alpha_mode)
        for (double a : cfg.alphas) params.emplace_back(a, cfg.eps);
    else
        for (double e : cfg.epsilons) params.emplace_back(cfg.alpha, e);

    std::vector<SmallSweepRow> rows;
    rows.reserve(params.size());
    for (auto [alpha, eps] : params) {
        SmallSweepRow row;
        row.alpha = alpha;
        row.eps = eps;
        PerforationSpec spec = make_spec(cfg.dim, eps, alpha, cfg.delta, cfg.delta3, cfg.shape);
        PerforatedMask pm = build_perforated_mask(spec, cfg.resolution);
        row.a_eps = spec.resolved_a();
        row.sigma = sigma_eps(cfg.dim, eps, row.a_eps);
        row.regime = classify_regime(cfg.dim, alpha);
        row.hole_count = pm.hole_count;
        row.vanished_holes = pm.vanished_holes;
        row.porosity = pm.porosity;
        row.sigma2_used = cfg.sigma2_override > 0.0 ? cfg.sigma2_override : row.sigma * row.sigma;

        const Grid& grid = pm.mask.grid;
        const double hd = grid.cell_volume();
        const Mask ref_mask = Mask::all_fluid(grid);
        row.degenerate = pm.mask.fluid_cell_count() == grid.cell_count();

        TimeControls tc;
        tc.t_end = cfg.flow.t_end;
        tc.dt_max = cfg.flow.dt;
        tc.fixed_dt = true;
        tc.solver_tol = cfg.flow.solver_tol;

        auto make_problem = [&](const Mask& m) {
            FlowProblem fp(m);
            fp.sigma2 = row.sigma2_used;
            fp.viscosity = cfg.flow.viscosity;
            fp.forcing = make_face_forcing(cfg.flow.forcing, grid);
            fp.initial = build_initial(cfg.flow.initial, grid);
            return fp;
        };

        SpaceTimeError st;
        row.min_slack = 0.0;
        row.max_div = 0.0;
        if (row.degenerate) {
            // the perforated and reference runs coincide bit for bit
            FlowProblem fr = make_problem(ref_mask);
            NseStepper sr(fr, tc);
            st.sample(0.0, 0.0, dot(sr.velocity(), sr.velocity()) * hd);
            while (!sr.finished()) {
                LedgerRow lr = sr.step(sr.suggest_dt());
                row.min_slack = std::min(row.min_slack, lr.slack);
                row.max_div = std::max(row.max_div, lr.max_div);
                st.sample(sr.time(), 0.0, dot(sr.velocity(), sr.velocity()) * hd);
                ++row.steps;
            }
            row.error_rel = 0.0;
        } else {
            FlowProblem fpp = make_problem(pm.mask);
            FlowProblem fpr = make_problem(ref_mask);
            NseStepper sp(fpp, tc);
            NseStepper sr(fpr, tc);
            FaceField diff = FaceField::zeros(grid);
            auto record = [&]() {
                copy_into(sp.velocity(), diff);
                axpy(-1.0, sr.velocity(), diff);
                st.sample(sr.time(), dot(diff, diff) * hd, dot(sr.velocity(), sr.velocity()) * hd);
            };
            record();
            while (!sr.finished()) {
                const double dt = sr.suggest_dt();
                LedgerRow lp = sp.step(dt);
                sr.step(dt);
                row.min_slack = std::min(row.min_slack, lp.slack);
                row.max_div = std::max(row.max_div, lp.max_div);
                record();
                ++row.steps;
            }
            row.error_rel = st.relative();
        }
        row.ref_norm = st.reference_norm();
        rows.push_back(std::move(row));
    }
    return rows;
}

LargeSweepResult run_large_holes_sweep(const LargeSweepConfig& cfg) {
    if (cfg.epsilons.empty()) throw precondition_error("sweep has no rows");
    if (classify_regime(cfg.dim, cfg.alpha) != Regime::large_holes)
        throw precondition_error("filtration sweep requires the large-holes regime");

    LargeSweepResult out;
    if (cfg.alpha == 1.0) {
        // fixed-geometry unit cell at the physical obstacle size
        const double eta = 2.0 * cfg.delta;
        CellGeometry geom = build_cell_geometry(cfg.dim, eta, cfg.shape, cfg.cell_resolution);
        CellOptions copt;
        copt.c = 1.0;
        EtaPermeability ep = permeability_at_eta(geom, copt);
        out.permeability = ep.tensor;
        out.perm_est_error = 0.0;
        out.perm_reliable = true;
    } else {
        PermeabilityLimit pl = permeability_limit(cfg.dim, cfg.shape, cfg.cell_resolution,
                                                 cfg.cell_etas, {});
        out.permeability = pl.tensor;
        out.perm_est_error = pl.est_error;
        out.perm_reliable = pl.reliable;
    }

    for (double eps : cfg.epsilons) {
        LargeSweepRow row;
        row.eps = eps;
        row.resolution = period_resolution(eps, cfg.cells_per_period);
        PerforationSpec spec = make_spec(cfg.dim, eps, cfg.alpha, cfg.delta, cfg.delta3, cfg.shape);
        PerforatedMask pm = build_perforated_mask(spec, row.resolution);
        row.a_eps = spec.resolved_a();
        const double sigma = sigma_eps(cfg.dim, eps, row.a_eps);
        row.sigma2 = sigma * sigma;
        if (!(row.sigma2 > 0.0))
            throw precondition_error("physical time scale degenerates (sigma_eps = 0) at eps " +
                                     std::to_string(eps) + ", this happens for d = 2 holes of "
                                     "full period size");
        row.hole_count = pm.hole_count;
        row.vanished_holes = pm.vanished_holes;
        row.porosity = pm.porosity;

        const Grid& grid = pm.mask.grid;
        const double hd = grid.cell_volume();

        FlowProblem fp(pm.mask);
        fp.sigma2 = row.sigma2;
        fp.viscosity = cfg.flow.viscosity;
        fp.forcing = make_face_forcing(cfg.flow.forcing, grid);
        fp.initial = build_initial(cfg.flow.initial, grid);

        TimeControls tc;
        tc.t_end = cfg.flow.t_end;
        tc.dt_max = cfg.flow.dt;
        tc.fixed_dt = true;
        tc.solver_tol = cfg.flow.solver_tol;
        // sigma2 ~ eps^2 makes the viscous relaxation time ~ sigma2^2 here,
        // far below any affordable dt; the projection splitting's relaxed
        // state is biased at such step sizes, so the filtration rows step
        // the coupled saddle system instead.
        tc.scheme = TimeScheme::coupled;

        DarcyProblem dp;
        dp.dim = cfg.dim;
        dp.box = grid.box;
        dp.resolution = row.resolution;
        dp.permeability = out.permeability;
        dp.viscosity = cfg.flow.viscosity;

        FaceField diff = FaceField::zeros(grid);
        std::vector<double> ubar, dbar;
        double blockvol = 1.0;
        for (int a = 0; a < cfg.dim; ++a) blockvol *= eps;
        SpaceTimeError st, st_fine;
        auto compare = [&](const FaceField& u, double t) {
            dp.forcing = make_point_forcing(cfg.flow.forcing, grid.box, t);
            DarcySolution ds = solve_darcy(dp, cfg.flow.solver_tol);
            copy_into(u, diff);
            scale(1.0 / row.sigma2, diff);
            axpy(-1.0, ds.flux, diff);
            st_fine.sample(t, dot(diff, diff) * hd, dot(ds.flux, ds.flux) * hd);
            period_average(grid, u, cfg.cells_per_period, ubar);
            period_average(grid, ds.flux, cfg.cells_per_period, dbar);
            double e2 = 0.0, r2 = 0.0;
            for (std::size_t m = 0; m < ubar.size(); ++m) {
                const double du = ubar[m] / row.sigma2 - dbar[m];
                e2 += du * du;
                r2 += dbar[m] * dbar[m];
            }
            st.sample(t, e2 * blockvol, r2 * blockvol);
        };

        NseStepper sim(fp, tc);
        compare(sim.velocity(), 0.0);
        int since_sample = 0;
        while (!sim.finished()) {
            LedgerRow lr = sim.step(sim.suggest_dt());
            ++row.steps;
            row.min_slack = std::min(row.min_slack, lr.slack);
            row.max_div = std::max(row.max_div, lr.max_div);
            row.kinetic_final = lr.kinetic;
            row.dissipation_total += lr.dissipation_inc;
            if (++since_sample >= cfg.flow.compare_stride || sim.finished()) {
                compare(sim.velocity(), sim.time());
                since_sample = 0;
            }
        }
        row.error_rel = st.relative();
        row.fine_error_rel = st_fine.relative();
        row.darcy_norm = st.reference_norm();
        out.rows.push_back(std::move(row));
    }
    return out;
}

PoincareResult poincare_constant(const Mask& mask, double rel_tol, int max_iter) {
    const Grid& g = mask.grid;
    MacOps ops(mask);
    CellField x = CellField::zeros(g);
    for (std::size_t c = 0; c < x.v.size(); ++c)
        if (mask.cell[c]) x.v[c] = 1.0;
    const double n0 = norm2(x);
    if (n0 == 0.0) throw precondition_error("no fluid cells");
    scale(1.0 / n0, x);

    CellOp op = [&](const CellField& v, CellField& out) { ops.scalar_dirichlet(v, out); };
    CellField y = CellField::zeros(g);
    PoincareResult res;
    double lambda_old = 0.0;
    // Inexact inverse iteration: the inner solves start loose and tighten
    // with the observed eigenvalue gap, warm-started from x / lambda once an
    // estimate exists.  The stopping test only fires on a floor-tight solve
    // so a sloppy Rayleigh quotient cannot end the loop.
    const double inner_floor = std::min(1e-8, 0.01 * rel_tol);
    double inner_tol = 1e-4;
    for (int it = 1; it <= max_iter; ++it) {
        if (it == 1)
            fill(y, 0.0);
        else {
            copy_into(x, y);
            scale(1.0 / lambda_old, y);
        }
        const bool tight = inner_tol <= inner_floor * 1.0001;
        KrylovResult kr = cg(op, x, y, inner_tol, 200000);
        if (!kr.converged)
            throw convergence_error("inverse iteration solve stalled", std::move(kr.history));
        const double lambda = dot(y, x) / dot(y, y); // Rayleigh quotient of y
        res.lambda_min = lambda;
        res.iterations = it;
        scale(1.0 / norm2(y), y);
        copy_into(y, x);
        if (it >= 2) {
            const double gap_rel = std::abs(lambda - lambda_old) / lambda;
            if (tight && gap_rel <= rel_tol) break;
            inner_tol = std::clamp(0.02 * gap_rel, inner_floor, 1e-4);
        }
        lambda_old = lambda;
    }
    res.constant = 1.0 / std::sqrt(res.lambda_min);
    return res;
}

std::vector<PoincareRow> poincare_sweep(int dim, double alpha, double delta, double delta3,
                                        CellShape shape, const std::vector<double>& epsilons,
                                        int cells_per_period) {
    std::vector<PoincareRow> rows;
    rows.reserve(epsilons.size());
    for (double eps : epsilons) {
        PoincareRow row;
        row.eps = eps;
        row.resolution = period_resolution(eps, cells_per_period);
        PerforationSpec spec = make_spec(dim, eps, alpha, delta, delta3, shape);
        PerforatedMask pm = build_perforated_mask(spec, row.resolution);
        row.sigma = sigma_eps(dim, eps, spec.resolved_a());
        row.constant = poincare_constant(pm.mask).constant;
        row.ratio = row.constant / row.sigma;
        rows.push_back(row);
    }
    return rows;
}

ConvergenceReport manufactured_convergence(int base_resolution, double base_dt, int levels,
                                           double t_end, double sigma2, double viscosity) {
    if (levels < 2) throw precondition_error("convergence study needs at least two levels");
    const double pi = 3.14159265358979323846;
    auto gfun = [](double t) { return std::exp(-0.5 * t); };
    auto gdot = [&](double t) { return -0.5 * gfun(t); };
    auto exact = [&](int a, double t, const std::array<double, 3>& x) {
        const double sx = std::sin(pi * x[0]), cx = std::cos(pi * x[0]);
        const double sy = std::sin(pi * x[1]), cy = std::cos(pi * x[1]);
        if (a == 0) return 2.0 * pi * sx * sx * sy * cy * gfun(t);
        return -2.0 * pi * sx * cx * sy * sy * gfun(t);
    };
    auto force = [&](int a, double t, const std::array<double, 3>& x) {
        const double sx = std::sin(pi * x[0]), cx = std::cos(pi * x[0]);
        const double sy = std::sin(pi * x[1]), cy = std::cos(pi * x[1]);
        const double g = gfun(t), gd = gdot(t), p3 = pi * pi * pi;
        if (a == 0)
            return sigma2 * gd * 2.0 * pi * sx * sx * sy * cy +
                   4.0 * p3 * g * g * sx * sx * sx * cx * sy * sy -
                   viscosity * 4.0 * p3 * g * (cx * cx - 3.0 * sx * sx) * sy * cy;
        return -sigma2 * gd * 2.0 * pi * sx * cx * sy * sy +
               4.0 * p3 * g * g * sx * sx * sy * sy * sy * cy +
               viscosity * 4.0 * p3 * g * sx * cx * (cy * cy - 3.0 * sy * sy);
    };

    ConvergenceReport report;
    for (int level = 0; level < levels; ++level) {
        const int res = base_resolution << level;
        const double dt = base_dt / (1 << level);
        Grid grid = Grid::box_domain(2, Box{}, res);
        Mask mask = Mask::all_fluid(grid);

        FlowProblem fp(mask);
        fp.sigma2 = sigma2;
        fp.viscosity = viscosity;
        fp.forcing = [&](double t, FaceField& f) {
            sample_faces(grid, f, [&](int a, const std::array<double, 3>& x) { return force(a, t, x); });
        };
        sample_faces(grid, fp.initial, [&](int a, const std::array<double, 3>& x) { return exact(a, 0.0, x); });

        TimeControls tc;
        tc.t_end = t_end;
        tc.dt_max = dt;
        tc.fixed_dt = true;
        tc.solver_tol = 1e-11;
        Trajectory tr = simulate(fp, tc);

        FaceField ue = FaceField::zeros(grid);
        sample_faces(grid, ue, [&](int a, const std::array<double, 3>& x) { return exact(a, t_end, x); });
        MacOps(mask).mask_faces(ue);
        FaceField diff = tr.velocities.back();
        axpy(-1.0, ue, diff);

        ConvergenceCase cs;
        cs.resolution = res;
        cs.dt = dt;
        cs.error = norm2(diff) / norm2(ue);
        cs.steps = static_cast<int>(tr.ledger.size());
        report.cases.push_back(cs);
    }
    for (std::size_t l = 0; l + 1 < report.cases.size(); ++l)
        report.ratios.push_back(report.cases[l].error / report.cases[l + 1].error);
    return report;
}

} // namespace perfhom
