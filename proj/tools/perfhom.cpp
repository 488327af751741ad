// Command-line front end: one INI config in, one output directory of
// deterministic reports out.  Exit codes: 0 ok, 2 bad config, 3 infeasible
// input data, 4 solver failure, 5 run finished but flagged unreliable.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <unistd.h>

#include <CLI11.hpp>

#include "perfhom/config.hpp"
#include "perfhom/dense_oracle.hpp"
#include "perfhom/errors.hpp"
#include "perfhom/parallel.hpp"
#include "perfhom/report_io.hpp"

namespace fs = std::filesystem;
using namespace perfhom;

namespace {

// One run per output directory; the lock file is created O_EXCL and
// removed on scope exit.
struct RunLock {
    fs::path path;
    bool held = false;

    explicit RunLock(const fs::path& dir) : path(dir / ".lock") {
        int fd = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0)
            throw precondition_error("output directory " + dir.string() +
                                     " is locked by another run (stale .lock?)");
        ::close(fd);
        held = true;
    }
    ~RunLock() {
        if (held) {
            std::error_code ec;
            fs::remove(path, ec);
        }
    }
};

int pick_threads(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("PERFHOM_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

const char* axis_name(int a) { return a == 0 ? "x" : (a == 1 ? "y" : "z"); }

void run_cell(const CellParams& p, const fs::path& out) {
    CellGeometry geom = build_cell_geometry(p.dim, p.eta, p.shape, p.resolution);
    CellOptions opt;
    opt.c = p.c;
    opt.form_gap_tol = p.form_gap_tol;
    opt.saddle.rel_tol = p.rel_tol;
    EtaPermeability perm = permeability_at_eta(geom, opt);
    write_text(out / "cell.json", eta_permeability_json(perm));
    dump_mask(out / "mask", geom.mask);
    if (p.dump_fields)
        for (int a = 0; a < p.dim; ++a) {
            CellSolution sol = solve_cell(geom, a, opt);
            dump_field(out / (std::string("w_") + axis_name(a)), sol.w, geom.mask, 0.0);
            dump_field(out / (std::string("q_") + axis_name(a)), sol.q, geom.mask, 0.0);
        }
}

bool run_permeability(const PermeabilityParams& p, const fs::path& out) {
    CellOptions opt;
    opt.form_gap_tol = p.form_gap_tol;
    opt.saddle.rel_tol = p.rel_tol;
    PermeabilityLimit lim = permeability_limit(p.dim, p.shape, p.resolution, p.etas, opt);
    write_text(out / "permeability.json", permeability_report_json(lim));
    write_text(out / "permeability.csv", permeability_table_csv(lim));
    return !lim.reliable;
}

void run_simulate(const SimulateParams& p, const fs::path& out) {
    Mask mask;
    double sigma2 = p.sigma2;
    if (p.perforated) {
        PerforationSpec spec;
        spec.dim = p.dim;
        spec.eps = p.eps;
        spec.alpha = p.alpha;
        spec.a_eps = p.a_eps;
        spec.delta = p.delta;
        spec.delta3 = p.delta3;
        spec.shape = p.shape;
        PerforatedMask pm = build_perforated_mask(spec, p.resolution);
        mask = std::move(pm.mask);
        if (sigma2 <= 0.0) {
            double s = sigma_eps(p.dim, spec.eps, spec.resolved_a());
            sigma2 = s * s;
            if (sigma2 <= 0.0)
                throw precondition_error(
                    "physical time scale degenerates for this geometry (sigma_eps = 0), "
                    "set sigma2 explicitly");
        }
    } else {
        mask = Mask::all_fluid(Grid::box_domain(p.dim, Box{}, p.resolution));
        if (sigma2 <= 0.0)
            throw precondition_error("unperforated runs need an explicit sigma2");
    }

    FlowProblem prob(mask);
    prob.sigma2 = sigma2;
    prob.viscosity = p.viscosity;
    prob.forcing = make_face_forcing(p.forcing, mask.grid);
    prob.initial = build_initial(p.initial, mask.grid);

    TimeControls ctrl;
    ctrl.t_end = p.t_end;
    ctrl.dt_max = p.dt_max;
    ctrl.cfl = p.cfl;
    ctrl.fixed_dt = p.fixed_dt;
    ctrl.solver_tol = p.solver_tol;
    ctrl.snapshot_stride = p.snapshot_stride;

    Trajectory traj = simulate(prob, ctrl);
    write_text(out / "ledger.csv", ledger_csv(traj.ledger));
    write_text(out / "summary.json", trajectory_summary_json(traj));
    dump_mask(out / "mask", mask);
    if (p.dump_fields)
        for (std::size_t i = 0; i < traj.snapshot_times.size(); ++i) {
            std::string tag = std::to_string(i);
            dump_field(out / ("velocity_" + tag), traj.velocities[i], mask,
                       traj.snapshot_times[i]);
            dump_field(out / ("pressure_" + tag), traj.pressures[i], mask,
                       traj.snapshot_times[i]);
        }
}

void run_darcy(const DarcyParams& p, const fs::path& out) {
    DarcyProblem dp;
    dp.dim = p.dim;
    dp.resolution = p.resolution;
    dp.permeability = p.permeability;
    dp.viscosity = p.viscosity;
    dp.forcing = make_point_forcing(p.forcing, dp.box, p.time);
    DarcySolution sol = solve_darcy(dp);
    write_text(out / "darcy.json", darcy_summary_json(sol));
    if (p.dump_fields) {
        Mask mask = Mask::all_fluid(sol.grid);
        dump_field(out / "pressure", sol.pressure, mask, p.time);
        dump_field(out / "flux", sol.flux, mask, p.time);
    }
}

void run_sweep_small(const SmallSweepConfig& cfg, const fs::path& out) {
    auto rows = run_small_holes_sweep(cfg);
    write_text(out / "sweep_small.json", small_sweep_json(cfg, rows));
    write_text(out / "sweep_small.csv", small_sweep_csv(rows));
}

bool run_sweep_large(const LargeSweepConfig& cfg, const fs::path& out) {
    LargeSweepResult res = run_large_holes_sweep(cfg);
    write_text(out / "sweep_large.json", large_sweep_json(cfg, res));
    write_text(out / "sweep_large.csv", large_sweep_csv(res));
    return !res.perm_reliable;
}

void run_poincare(const PoincareParams& p, const fs::path& out) {
    std::vector<PoincareRow> rows;
    if (p.perforated) {
        rows = poincare_sweep(p.dim, p.alpha, p.delta, p.delta3, p.shape, p.epsilons,
                              p.cells_per_period);
    } else {
        Mask mask = Mask::all_fluid(Grid::box_domain(p.dim, Box{}, p.resolution));
        PoincareResult pr = poincare_constant(mask);
        PoincareRow row;
        row.resolution = p.resolution;
        row.constant = pr.constant;
        rows.push_back(row);
    }
    write_text(out / "poincare.json", poincare_json(rows));
    write_text(out / "poincare.csv", poincare_csv(rows));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"perforated-domain flow toolkit"};
    std::string config_path;
    std::string output = "out";
    int threads = 0;
    bool validate_only = false;
    app.add_option("-c,--config", config_path, "run configuration (INI)")->required();
    app.add_option("-o,--output", output, "output directory (default: out)");
    app.add_option("-t,--threads", threads,
                   "worker threads (default: PERFHOM_THREADS, then all cores)");
    app.add_flag("--validate-only", validate_only, "check the config and exit");
    CLI11_PARSE(app, argc, argv);

    try {
        std::string config_text;
        {
            std::ifstream in(config_path, std::ios::binary);
            if (!in) throw config_error("cannot open config file " + config_path);
            std::stringstream buf;
            buf << in.rdbuf();
            config_text = buf.str();
        }
        Config cfg = parse_config(config_text);
        auto advisories = validate_config(cfg);
        if (validate_only) {
            for (const auto& a : advisories) std::cout << "advisory: " << a << "\n";
            std::cout << "config ok: [" << to_string(cfg.command) << "]"
                      << (advisories.empty() ? "" : " with advisories") << "\n";
            return 0;
        }
        for (const auto& a : advisories) std::cerr << "advisory: " << a << "\n";

        par::set_threads(pick_threads(threads));
        fs::path out(output);
        fs::create_directories(out);
        RunLock lock(out);
        write_text(out / "config.ini", config_text);

        auto t0 = std::chrono::steady_clock::now();
        bool degraded = false;
        switch (cfg.command) {
        case Command::cell: run_cell(cfg.cell, out); break;
        case Command::permeability: degraded = run_permeability(cfg.permeability, out); break;
        case Command::simulate: run_simulate(cfg.simulate, out); break;
        case Command::darcy: run_darcy(cfg.darcy, out); break;
        case Command::sweep_small: run_sweep_small(cfg.sweep_small, out); break;
        case Command::sweep_large: degraded = run_sweep_large(cfg.sweep_large, out); break;
        case Command::poincare: run_poincare(cfg.poincare, out); break;
        }
        double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_text(out / "meta.json", meta_json(to_string(cfg.command), par::threads(), wall));
        if (degraded) std::cerr << "run finished but is flagged unreliable\n";
        return degraded ? 5 : 0;
    } catch (const config_error& e) {
        std::cerr << "config error";
        if (e.line_number > 0) std::cerr << " (line " << e.line_number << ")";
        std::cerr << ": " << e.what() << "\n";
        return 2;
    } catch (const convergence_error& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 4;
    } catch (const consistency_error& e) {
        std::cerr << "consistency failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
