#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "perfhom/cell_problem.hpp"
#include "perfhom/geometry.hpp"
#include "perfhom/homogenize.hpp"

namespace perfhom {

// Run configuration in a small INI dialect: exactly one [section] naming
// the command, then key = value lines; '#' and ';' start comments.  Every
// key must be known to its command and parse cleanly, otherwise parsing
// throws config_error carrying the offending line number.

enum class Command { cell, permeability, simulate, darcy, sweep_small, sweep_large, poincare };

const char* to_string(Command c);

struct CellParams {
    int dim = 3;
    double eta = 0.25;
    CellShape shape;
    int resolution = 32;
    double c = 0.0; // 0 = dimension default
    double rel_tol = 1e-10;
    double form_gap_tol = 1e-6;
    bool dump_fields = false;
};

struct PermeabilityParams {
    int dim = 3;
    CellShape shape;
    int resolution = 32;
    std::vector<double> etas{0.4, 0.3, 0.2};
    double rel_tol = 1e-10;
    double form_gap_tol = 1e-6;
};

struct SimulateParams {
    int dim = 2;
    int resolution = 64;
    bool perforated = true;
    double eps = 0.25;
    double alpha = 1.0;
    double a_eps = 0.0; // 0 = eps^alpha
    double delta = 0.25;
    double delta3 = 0.4;
    CellShape shape;
    double sigma2 = 0.0; // 0 = physical sigma_eps^2
    double viscosity = 1.0;
    double t_end = 0.25;
    double dt_max = 1e-2;
    double cfl = 0.4;
    bool fixed_dt = false;
    double solver_tol = 1e-10;
    ForcingSpec forcing;
    InitialSpec initial;
    int snapshot_stride = 0;
    bool dump_fields = false;
};

struct DarcyParams {
    int dim = 3;
    int resolution = 32;
    Tensor permeability; // from a11... keys; diagonal required
    double viscosity = 1.0;
    ForcingSpec forcing;
    double time = 0.0; // forcing evaluation time
    bool dump_fields = false;
};

struct PoincareParams {
    bool perforated = true;
    int dim = 3;
    double alpha = 1.0;
    double delta = 0.25;
    double delta3 = 0.4;
    CellShape shape;
    std::vector<double> epsilons{0.25};
    int cells_per_period = 8;
    int resolution = 64; // unperforated mode
};

struct Config {
    Command command = Command::cell;
    CellParams cell;
    PermeabilityParams permeability;
    SimulateParams simulate;
    DarcyParams darcy;
    SmallSweepConfig sweep_small;
    LargeSweepConfig sweep_large;
    PoincareParams poincare;
};

Config parse_config(const std::string& text);
Config load_config(const std::filesystem::path& path);

/// Feasibility advisories for a parsed config (holes thinner than two
/// cells, holes below the grid, sweeps in an unsupported regime, hole
/// touching the unit-cell margin).  An empty list means no concerns.
std::vector<std::string> validate_config(const Config& cfg);

} // namespace perfhom
