#include "perfhom/cell_problem.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "perfhom/errors.hpp"
#include "perfhom/parallel.hpp"

namespace perfhom {

Tensor symmetrized(const Tensor& t) {
    Tensor s = Tensor::zero(t.dim);
    for (int i = 0; i < t.dim; ++i)
        for (int j = 0; j < t.dim; ++j)
            s(i, j) = 0.5 * (t(i, j) + t(j, i));
    return s;
}

double max_entry_gap(const Tensor& a, const Tensor& b) {
    double gap = 0.0;
    for (int i = 0; i < a.dim; ++i)
        for (int j = 0; j < a.dim; ++j)
            gap = std::max(gap, std::abs(a(i, j) - b(i, j)));
    return gap;
}

bool is_spd(const Tensor& t) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    for (int i = 0; i < t.dim; ++i)
        for (int j = 0; j < t.dim; ++j)
            m(i, j) = 0.5 * (t(i, j) + t(j, i));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
    return es.eigenvalues().minCoeff() > 0.0;
}

void apply(const Tensor& t, const std::array<double, 3>& in, std::array<double, 3>& out) {
    for (int i = 0; i < t.dim; ++i) {
        double acc = 0.0;
        for (int j = 0; j < t.dim; ++j) acc += t(i, j) * in[j];
        out[i] = acc;
    }
}

CellSolution solve_cell(const CellGeometry& geom, int direction, const CellOptions& opt) {
    const Mask& mask = geom.mask;
    const Grid& g = mask.grid;
    if (direction < 0 || direction >= g.dim)
        throw precondition_error("cell problem direction out of range");
    const double c = opt.c > 0.0 ? opt.c : c_eta(g.dim, geom.eta);

    SaddleSystem sys(mask);
    const auto& fm = mask.face[direction];
    auto& rhs = sys.rhs_velocity.comp[direction];
    const double c2 = c * c;
    for (std::size_t f = 0; f < rhs.size(); ++f)
        if (fm[f]) rhs[f] = c2;

    SaddleSolution s = solve_saddle(sys, opt.saddle);

    MacOps ops(mask);
    CellSolution out;
    out.w = std::move(s.velocity);
    out.q = std::move(s.pressure);
    out.c = c;
    out.grad_energy = ops.dirichlet_energy(out.w);
    const double vol = g.cell_volume();
    for (int a = 0; a < g.dim; ++a)
        out.mean[a] = par::sum(out.w.comp[a].data(), out.w.comp[a].size()) * vol;
    out.outer_iterations = s.outer.iterations;
    out.inner_iterations = s.inner_iterations_total;
    out.momentum_residual = s.momentum_residual;
    out.divergence_residual = s.divergence_residual;
    return out;
}

EtaPermeability permeability_at_eta(const CellGeometry& geom, const CellOptions& opt) {
    const Grid& g = geom.mask.grid;
    const int d = g.dim;
    MacOps ops(geom.mask);
    const double vol = g.cell_volume();

    EtaPermeability out;
    out.eta = geom.eta;
    out.fluid_fraction = geom.fluid_fraction;
    out.energy_form = Tensor::zero(d);
    out.mean_form = Tensor::zero(d);

    std::vector<CellSolution> sols;
    sols.reserve(d);
    for (int i = 0; i < d; ++i) {
        sols.push_back(solve_cell(geom, i, opt));
        out.outer_iterations += sols.back().outer_iterations;
        out.inner_iterations += sols.back().inner_iterations;
    }
    out.c = sols.front().c;
    const double ic2 = 1.0 / (out.c * out.c);

    FaceField Aw = FaceField::zeros(g);
    for (int i = 0; i < d; ++i) {
        ops.viscous(sols[i].w, Aw, 1.0, 0.0);
        for (int j = 0; j < d; ++j) {
            out.energy_form(i, j) = dot(Aw, sols[j].w) * vol * ic2;
            out.mean_form(i, j) = sols[j].mean[i];
        }
    }
    out.form_gap = max_entry_gap(out.energy_form, out.mean_form);
    if (out.form_gap > opt.form_gap_tol)
        throw consistency_error("energy and mean permeability forms disagree beyond tolerance");
    out.tensor = symmetrized(out.energy_form);
    if (!is_spd(out.tensor))
        throw consistency_error("permeability tensor is not positive definite");
    return out;
}

namespace {

struct EntryFit {
    double limit = 0.0;
    double rate = 0.0;
    double correction = 0.0;
    bool fitted = false;
};

/// Fit v = limit + b x^p through three points with x1 > x2 > x3 > 0.
EntryFit fit_power(double x1, double x2, double x3, double v1, double v2, double v3, double noise) {
    EntryFit out;
    const double d1 = v1 - v2;
    const double d2 = v2 - v3;
    out.limit = v3;
    out.correction = std::abs(d2);
    if (std::abs(d1) <= noise || std::abs(d2) <= noise || d1 * d2 <= 0.0) {
        out.correction = std::min(out.correction, noise);
        return out;
    }
    const double r = d1 / d2;
    auto ratio = [&](double p) {
        return (std::pow(x1, p) - std::pow(x2, p)) / (std::pow(x2, p) - std::pow(x3, p));
    };
    double plo = 0.05, phi = 8.0;
    double rlo = ratio(plo), rhi = ratio(phi);
    if ((r - rlo) * (r - rhi) > 0.0) return out; // outside the model family
    for (int it = 0; it < 200; ++it) {
        const double pm = 0.5 * (plo + phi);
        const double rm = ratio(pm);
        if ((rm - rlo) * (r - rlo) >= 0.0 && rm != r) {
            plo = pm;
            rlo = rm;
        } else {
            phi = pm;
        }
    }
    const double p = 0.5 * (plo + phi);
    const double b = d2 / (std::pow(x2, p) - std::pow(x3, p));
    out.limit = v3 - b * std::pow(x3, p);
    out.rate = p;
    out.correction = std::abs(out.limit - v3);
    out.fitted = true;
    return out;
}

} // namespace

PermeabilityLimit permeability_limit(int dim, CellShape shape, int resolution,
                                     const std::vector<double>& etas, const CellOptions& opt) {
    if (etas.size() < 3)
        throw precondition_error("permeability extrapolation needs at least three obstacle sizes");
    for (std::size_t k = 0; k + 1 < etas.size(); ++k)
        if (!(etas[k] > etas[k + 1]))
            throw precondition_error("obstacle sizes must decrease strictly");

    PermeabilityLimit out;
    out.table.reserve(etas.size());
    for (double eta : etas) {
        CellGeometry geom = build_cell_geometry(dim, eta, shape, resolution);
        out.table.push_back(permeability_at_eta(geom, opt));
    }

    const std::size_t n = out.table.size();
    const EtaPermeability &p1 = out.table[n - 3], &p2 = out.table[n - 2], &p3 = out.table[n - 1];
    const double x1 = p1.c * p1.c, x2 = p2.c * p2.c, x3 = p3.c * p3.c;

    double scale = 0.0;
    for (int i = 0; i < dim; ++i) scale = std::max(scale, std::abs(p3.tensor(i, i)));
    const double noise = std::max(1e-12, 1e-9 * scale);

    out.tensor = Tensor::zero(dim);
    double rate_sum = 0.0;
    int rate_count = 0;
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            EntryFit f = fit_power(x1, x2, x3, p1.tensor(i, j), p2.tensor(i, j), p3.tensor(i, j), noise);
            out.tensor(i, j) = f.limit;
            if (i == j) {
                out.est_error = std::max(out.est_error, f.correction);
                if (!f.fitted && f.correction > noise) out.reliable = false;
                if (f.correction > 0.2 * std::max(std::abs(f.limit), 1e-300)) out.reliable = false;
                if (f.fitted) {
                    rate_sum += f.rate;
                    ++rate_count;
                }
            }
        }
    }
    if (rate_count > 0) out.rate = rate_sum / rate_count;
    out.tensor = symmetrized(out.tensor);
    if (!is_spd(out.tensor))
        throw consistency_error("extrapolated permeability is not positive definite");
    return out;
}

CellNorms cell_norm_report(const CellGeometry& geom, const CellSolution& sol) {
    const Grid& g = geom.mask.grid;
    const double vol = g.cell_volume();
    CellNorms n;
    n.grad_ratio = std::sqrt(sol.grad_energy) / sol.c;
    n.w_norm = norm2(sol.w) * std::sqrt(vol);
    n.q_ratio = norm2(sol.q) * std::sqrt(vol) / sol.c;
    return n;
}

} // namespace perfhom
