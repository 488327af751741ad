// End-to-end acceptance checks, one printed line per criterion and exit 0
// only when every line says pass.  Tolerances and wall budgets are fixed
// here and are not configurable on purpose.  argv[1] names the command-line
// binary; only the determinism check shells out to it, everything else runs
// in process.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "perfhom/cell_problem.hpp"
#include "perfhom/dense_oracle.hpp"
#include "perfhom/geometry.hpp"
#include "perfhom/homogenize.hpp"
#include "perfhom/nse.hpp"
#include "perfhom/report_io.hpp"
#include "perfhom/saddle.hpp"

namespace fs = std::filesystem;
using namespace perfhom;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// uniform in [-1, 1), reproducible across platforms (no distribution objects)
double uniform_pm1(std::mt19937& rng) {
    return 2.0 * (static_cast<double>(rng()) / 4294967296.0) - 1.0;
}

// ---------------------------------------------------------------------------
// criterion 1: iterative saddle solves against dense elimination on random
// connected masks

bool fluid_connected(const Mask& m) {
    const Grid& g = m.grid;
    std::vector<char> seen(g.cell_count(), 0);
    std::size_t fluid = 0, start = g.cell_count();
    for (std::size_t c = 0; c < g.cell_count(); ++c)
        if (m.cell[c]) {
            ++fluid;
            if (start == g.cell_count()) start = c;
        }
    if (fluid == 0) return false;
    std::queue<std::size_t> q;
    q.push(start);
    seen[start] = 1;
    std::size_t reached = 1;
    const int nx = g.cells[0], ny = g.cells[1];
    while (!q.empty()) {
        const std::size_t c = q.front();
        q.pop();
        const int i = static_cast<int>(c) % nx, j = static_cast<int>(c) / nx;
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int n = 0; n < 4; ++n) {
            const int ii = i + di[n], jj = j + dj[n];
            if (ii < 0 || ii >= nx || jj < 0 || jj >= ny) continue;
            const std::size_t cc = cell_index(g, ii, jj, 0);
            if (m.cell[cc] && !seen[cc]) {
                seen[cc] = 1;
                ++reached;
                q.push(cc);
            }
        }
    }
    return reached == fluid;
}

Mask random_connected_mask(int n, std::mt19937& rng) {
    Mask m = Mask::all_fluid(Grid::box_domain(2, Box{}, n));
    const int flips = n * n / 4;
    for (int f = 0; f < flips; ++f) {
        const int i = static_cast<int>(rng() % n), j = static_cast<int>(rng() % n);
        const std::size_t c = cell_index(m.grid, i, j, 0);
        if (!m.cell[c]) continue;
        m.cell[c] = 0;
        if (m.fluid_cell_count() < 2 || !fluid_connected(m)) m.cell[c] = 1;
    }
    m.derive_faces();
    return m;
}

Outcome criterion_saddle_oracle() {
    std::mt19937 rng(20250823u);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 8 + static_cast<int>(rng() % 5u);
        Mask m = random_connected_mask(n, rng);
        SaddleSystem sys(m, 0.5 + 0.75 * (uniform_pm1(rng) + 1.0), trial % 2 ? 1.0 : 0.0);
        for (int a = 0; a < 2; ++a)
            for (std::size_t s = 0; s < sys.rhs_velocity.comp[a].size(); ++s)
                if (m.face[a][s]) sys.rhs_velocity.comp[a][s] = uniform_pm1(rng);
        double gsum = 0.0;
        for (std::size_t c = 0; c < sys.rhs_divergence.v.size(); ++c)
            if (m.cell[c]) {
                sys.rhs_divergence.v[c] = 0.1 * uniform_pm1(rng);
                gsum += sys.rhs_divergence.v[c];
            }
        const double shiftg = gsum / static_cast<double>(m.fluid_cell_count());
        for (std::size_t c = 0; c < sys.rhs_divergence.v.size(); ++c)
            if (m.cell[c]) sys.rhs_divergence.v[c] -= shiftg;

        SaddleOptions opt;
        opt.rel_tol = 1e-12;
        SaddleSolution it = solve_saddle(sys, opt);
        DenseOracleResult dn = dense_solve_saddle(sys);

        double num = 0.0, den = 0.0;
        for (int a = 0; a < 2; ++a)
            for (std::size_t s = 0; s < it.velocity.comp[a].size(); ++s) {
                const double d = it.velocity.comp[a][s] - dn.velocity.comp[a][s];
                num += d * d;
                den += dn.velocity.comp[a][s] * dn.velocity.comp[a][s];
            }
        for (std::size_t c = 0; c < it.pressure.v.size(); ++c) {
            const double d = it.pressure.v[c] - dn.pressure.v[c];
            num += d * d;
            den += dn.pressure.v[c] * dn.pressure.v[c];
        }
        worst = std::max(worst, std::sqrt(num / den));
    }
    return {worst <= 1e-7, "20 systems, worst rel gap " + fmt(worst)};
}

// ---------------------------------------------------------------------------
// criterion 2: energy and mean forms of the unit-cell tensor

Outcome criterion_cell_identity() {
    double worst_gap = 0.0, worst_asym = 0.0;
    bool all_spd = true;
    for (double eta : {0.4, 0.3, 0.2}) {
        CellGeometry geom = build_cell_geometry(2, eta, CellShape{}, 64);
        EtaPermeability p = permeability_at_eta(geom);
        const double scale = std::max(p.tensor(0, 0), p.tensor(1, 1));
        worst_gap = std::max(worst_gap, p.form_gap / scale);
        worst_asym =
            std::max(worst_asym, std::abs(p.energy_form(0, 1) - p.energy_form(1, 0)) / scale);
        all_spd = all_spd && is_spd(p.tensor);
    }
    const bool pass = worst_gap <= 1e-6 && worst_asym <= 1e-6 && all_spd;
    return {pass, "worst rel form gap " + fmt(worst_gap) + ", asym " + fmt(worst_asym) +
                      (all_spd ? ", spd" : ", NOT spd")};
}

// ---------------------------------------------------------------------------
// criterion 3: scaled cell norms stay within a fixed band as the obstacle
// shrinks

Outcome criterion_cell_bands() {
    const std::vector<double> etas{0.4, 0.3, 0.25, 0.2};
    double lo = 1.0, hi = 1.0;
    for (int dir = 0; dir < 3; ++dir) {
        CellNorms base{};
        for (std::size_t e = 0; e < etas.size(); ++e) {
            CellGeometry geom = build_cell_geometry(3, etas[e], CellShape{}, 32);
            CellSolution sol = solve_cell(geom, dir);
            CellNorms n = cell_norm_report(geom, sol);
            if (e == 0) {
                base = n;
                continue;
            }
            for (double r : {n.grad_ratio / base.grad_ratio, n.w_norm / base.w_norm,
                             n.q_ratio / base.q_ratio}) {
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
        }
    }
    return {lo >= 1.0 / 3.0 && hi <= 3.0,
            "ratio band [" + fmt(lo) + ", " + fmt(hi) + "] against eta 0.4"};
}

// ---------------------------------------------------------------------------
// criterion 4: discrete energy inequality over a long forced run

Outcome criterion_energy_inequality() {
    PerforationSpec spec;
    spec.dim = 2;
    spec.eps = 0.25;
    spec.alpha = 1.0;
    PerforatedMask pm = build_perforated_mask(spec, 64);
    FlowProblem prob(pm.mask);
    prob.sigma2 = 1.0 / 16.0; // the d = 2, alpha = 1 scale degenerates; pin it
    prob.viscosity = 1.0;
    ForcingSpec f;
    f.kind = ForcingKind::rotational;
    prob.forcing = make_face_forcing(f, pm.mask.grid);
    TimeControls ctrl;
    ctrl.t_end = 0.25;
    ctrl.dt_max = 1.25e-3;
    ctrl.fixed_dt = true;
    Trajectory traj = simulate(prob, ctrl);
    double peak = traj.kinetic0;
    for (const LedgerRow& row : traj.ledger) peak = std::max(peak, row.kinetic);
    const double slack = min_slack(traj);
    const bool pass = traj.ledger.size() >= 200 && peak > 0.0 && slack >= -1e-8 * peak;
    return {pass, std::to_string(traj.ledger.size()) + " steps, min slack " + fmt(slack) +
                      " vs peak kinetic " + fmt(peak)};
}

// ---------------------------------------------------------------------------
// criterion 5: Poincare constant tracks the sigma scale on self-similar
// perforations, and hits the closed form on the open square

Outcome criterion_poincare_scaling() {
    auto rows = poincare_sweep(3, 1.0, 0.25, 0.4, CellShape{}, {0.25, 0.125, 0.0625}, 8);
    double lo = rows.front().ratio, hi = rows.front().ratio;
    for (const PoincareRow& r : rows) {
        lo = std::min(lo, r.ratio);
        hi = std::max(hi, r.ratio);
    }
    const bool band = hi <= 2.0 * lo;
    PoincareResult sq = poincare_constant(Mask::all_fluid(Grid::box_domain(2, Box{}, 64)));
    const double exact = 1.0 / std::sqrt(2.0 * M_PI * M_PI);
    const double sq_err = std::abs(sq.constant - exact) / exact;
    return {band && sq_err <= 0.02, "ratio band [" + fmt(lo) + ", " + fmt(hi) +
                                        "], square constant off by " + fmt(sq_err)};
}

// ---------------------------------------------------------------------------
// criterion 6: rescaled perforated flow approaches the filtration flux as
// the period shrinks

LargeSweepConfig darcy_shadow_config() {
    LargeSweepConfig cfg;
    cfg.dim = 3;
    cfg.alpha = 1.0;
    cfg.epsilons = {0.25, 0.125};
    cfg.cells_per_period = 8;
    cfg.cell_resolution = 8;
    cfg.flow.t_end = 0.25;
    cfg.flow.dt = 0.01;
    cfg.flow.compare_stride = 5;
    cfg.flow.forcing.kind = ForcingKind::rotational;
    cfg.flow.forcing.amplitude = 1.0;
    cfg.flow.forcing.ramp_tau = 0.05;
    return cfg;
}

Outcome criterion_darcy_shadow() {
    LargeSweepResult res = run_large_holes_sweep(darcy_shadow_config());
    if (res.rows.size() != 2) return {false, "expected 2 rows"};
    const double e0 = res.rows[0].error_rel, e1 = res.rows[1].error_rel;
    const bool pass = e0 > 0.0 && e1 > 0.0 && e1 < e0;
    return {pass, "period-mean error " + fmt(e0) + " (eps 1/4) -> " + fmt(e1) + " (eps 1/8)"};
}

// ---------------------------------------------------------------------------
// criterion 7: faster hole decay brings the perforated run closer to the
// obstacle-free one, at one fixed eps the grid can resolve

Outcome criterion_small_holes_proxy() {
    SmallSweepConfig cfg;
    cfg.dim = 3;
    cfg.eps = 0.25;
    cfg.alphas = {1.5, 2.0, 3.0, 4.0};
    cfg.delta = 0.8;
    cfg.delta3 = 0.4;
    cfg.resolution = 80;
    cfg.sigma2_override = 1.0;
    cfg.flow.t_end = 0.15;
    cfg.flow.dt = 0.0125;
    cfg.flow.forcing.kind = ForcingKind::rotational;
    cfg.flow.forcing.amplitude = 1.0;
    cfg.flow.forcing.ramp_tau = 0.05;
    auto rows = run_small_holes_sweep(cfg);
    if (rows.size() != 4) return {false, "expected 4 rows"};
    bool monotone = true;
    std::string seq;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i) {
            monotone = monotone && rows[i].error_rel < rows[i - 1].error_rel;
            seq += " > ";
        }
        seq += fmt(rows[i].error_rel);
    }
    // the asymptotic statement itself is out of reach at this scale and the
    // report must say so
    const bool scoped =
        small_sweep_json(cfg, rows).find("outside desk-scale resolution") != std::string::npos;
    return {monotone && scoped, "errors " + seq + (scoped ? ", scope noted" : ", scope MISSING")};
}

// ---------------------------------------------------------------------------
// criterion 8: closed-form solution error contracts under joint h, dt
// halving

Outcome criterion_manufactured() {
    ConvergenceReport rep = manufactured_convergence(32, 1.0 / 128.0, 3, 0.125, 1.0, 1.0);
    if (rep.ratios.size() != 2) return {false, "expected 2 contraction ratios"};
    const bool pass = rep.ratios[0] >= 1.7 && rep.ratios[1] >= 1.7;
    return {pass, "errors " + fmt(rep.cases[0].error) + " / " + fmt(rep.cases[1].error) + " / " +
                      fmt(rep.cases[2].error) + ", ratios " + fmt(rep.ratios[0]) + ", " +
                      fmt(rep.ratios[1])};
}

// ---------------------------------------------------------------------------
// criterion 9: thread count must not leak into any report

int run_cli(const std::string& cli, const fs::path& cfg, const fs::path& out, int threads) {
    std::ostringstream cmd;
    cmd << "\"" << cli << "\" -c \"" << cfg.string() << "\" -o \"" << out.string() << "\" -t "
        << threads << " > /dev/null 2>&1";
    const int rc = std::system(cmd.str().c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion_determinism(const std::string& cli) {
    const fs::path base = "acceptance_det";
    std::error_code ec;
    fs::remove_all(base, ec);
    fs::create_directories(base);

    std::ofstream(base / "perm.ini") << "[permeability]\n"
                                        "dim = 2\n"
                                        "resolution = 64\n"
                                        "etas = 0.4, 0.3, 0.2\n";
    std::ofstream(base / "sweep.ini") << "[sweep-large]\n"
                                         "dim = 3\n"
                                         "alpha = 1\n"
                                         "epsilons = 0.25, 0.125\n"
                                         "cells_per_period = 8\n"
                                         "cell_resolution = 8\n"
                                         "t_end = 0.25\n"
                                         "dt = 0.01\n"
                                         "compare_stride = 5\n"
                                         "forcing = rotational\n"
                                         "forcing_amplitude = 1\n"
                                         "forcing_ramp_tau = 0.05\n";

    struct Job {
        const char* cfg;
        std::vector<const char*> files;
    };
    const std::vector<Job> jobs{{"perm.ini", {"permeability.json", "permeability.csv"}},
                                {"sweep.ini", {"sweep_large.json", "sweep_large.csv"}}};
    for (const Job& job : jobs) {
        const fs::path out1 = base / (std::string(job.cfg) + ".t1");
        const fs::path out8 = base / (std::string(job.cfg) + ".t8");
        const int rc1 = run_cli(cli, base / job.cfg, out1, 1);
        const int rc8 = run_cli(cli, base / job.cfg, out8, 8);
        if (rc1 != rc8 || (rc1 != 0 && rc1 != 5))
            return {false, std::string(job.cfg) + " exit codes " + std::to_string(rc1) + " / " +
                               std::to_string(rc8)};
        for (const char* f : job.files) {
            const std::string a = slurp(out1 / f), b = slurp(out8 / f);
            if (a.empty()) return {false, std::string(f) + " missing or empty"};
            if (a != b) return {false, std::string(f) + " differs between 1 and 8 threads"};
        }
    }
    return {true, "permeability and filtration sweep reports byte-identical at 1 and 8 threads"};
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <path to perfhom binary>\n", argv[0]);
        return 2;
    }
    const std::string cli = argv[1];

    struct Entry {
        const char* label;
        double budget; // seconds, 0 = none
        std::function<Outcome()> fn;
    };
    const std::vector<Entry> entries{
        {"saddle solves match the dense oracle", 10.0, criterion_saddle_oracle},
        {"unit-cell tensor forms agree and are spd", 120.0, criterion_cell_identity},
        {"scaled cell norms stay in the band", 600.0, criterion_cell_bands},
        {"forced run keeps the energy inequality", 120.0, criterion_energy_inequality},
        {"poincare constant follows the sigma scale", 300.0, criterion_poincare_scaling},
        {"rescaled flow approaches the filtration flux", 1800.0, criterion_darcy_shadow},
        {"faster hole decay shrinks the proxy error", 1800.0, criterion_small_holes_proxy},
        {"manufactured error contracts at least 1.7x", 300.0, criterion_manufactured},
        {"reports are identical across thread counts", 0.0,
         [&cli] { return criterion_determinism(cli); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = entries[i].fn();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = seconds_since(t0);
        if (entries[i].budget > 0.0 && secs > entries[i].budget) {
            out.pass = false;
            out.detail += ", over the " + fmt(entries[i].budget) + " s budget";
        }
        if (!out.pass) ++failures;
        std::printf("criterion %zu: %s: %s (%s; %.1f s)\n", i + 1, entries[i].label,
                    out.pass ? "pass" : "FAIL", out.detail.c_str(), secs);
        std::fflush(stdout);
    }
    if (failures) std::printf("%d of 9 criteria failed\n", failures);
    else std::printf("all 9 criteria passed\n");
    return failures ? 1 : 0;
}
