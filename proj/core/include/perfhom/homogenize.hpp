#pragma once

#include <array>
#include <functional>
#include <vector>

#include "perfhom/cell_problem.hpp"
#include "perfhom/darcy.hpp"
#include "perfhom/geometry.hpp"
#include "perfhom/nse.hpp"

namespace perfhom {

// Analytic forcing and initial-state presets shared by the evolutionary
// solver (sampled on faces) and the filtration limit (sampled at points),
// so both sides of a comparison see the same field.

enum class ForcingKind { zero, uniform, rotational };
enum class InitialKind { zero, uniform, vortex };

struct ForcingSpec {
    ForcingKind kind = ForcingKind::zero;
    std::array<double, 3> direction{1.0, 0.0, 0.0}; // uniform only
    double amplitude = 1.0;
    /// Smooth switch-on factor 1 - exp(-t/ramp_tau); 0 disables the ramp.
    double ramp_tau = 0.0;

    std::array<double, 3> eval(const Box& box, double t, const std::array<double, 3>& x) const;
};

struct InitialSpec {
    InitialKind kind = InitialKind::zero;
    std::array<double, 3> direction{1.0, 0.0, 0.0};
    double amplitude = 1.0;
};

std::function<void(double, FaceField&)> make_face_forcing(const ForcingSpec& spec, const Grid& grid);
std::function<void(const std::array<double, 3>&, std::array<double, 3>&)>
make_point_forcing(const ForcingSpec& spec, const Box& box, double t);

/// Face-sampled initial state; the integrator masks and projects it.
FaceField build_initial(const InitialSpec& spec, const Grid& grid);

/// Time-stepping knobs shared by the sweep drivers.  Sweeps always run
/// with the fixed step dt so that paired runs share identical time grids.
struct SweepFlow {
    double t_end = 0.25;
    double dt = 1e-2;
    double viscosity = 1.0;
    double solver_tol = 1e-10;
    /// Sampling stride (in steps) of the comparison quadrature.
    int compare_stride = 1;
    ForcingSpec forcing;
    InitialSpec initial;
};

// ---------------------------------------------------------------------------
// Shrinking-holes sweep: perforated flow against the flow on the
// unperforated box, same grid, same steps.  Rows vary either the decay
// exponent alpha at fixed eps or eps at fixed alpha.  The reported error is
// the relative space-time L2 distance of the zero-extended velocity from
// the reference velocity.

struct SmallSweepConfig {
    int dim = 3;
    double eps = 0.25;
    std::vector<double> alphas; // alpha mode: varies alpha at fixed eps
    double alpha = 4.0;
    std::vector<double> epsilons; // eps mode: varies eps at fixed alpha
    double delta = 0.25;
    double delta3 = 0.4;
    CellShape shape{};
    int resolution = 32;
    /// Positive value pins the time-scale factor for every row; 0 uses the
    /// physical value sigma_eps^2 of each row.
    double sigma2_override = 0.0;
    SweepFlow flow;
};

struct SmallSweepRow {
    double alpha = 0.0;
    double eps = 0.0;
    double a_eps = 0.0;
    double sigma = 0.0;
    double sigma2_used = 0.0;
    Regime regime = Regime::unsupported;
    int hole_count = 0;
    int vanished_holes = 0;
    double porosity = 0.0;
    double error_rel = 0.0;
    double ref_norm = 0.0; // space-time L2 of the reference run
    double min_slack = 0.0;
    double max_div = 0.0;
    int steps = 0;
    /// All holes fell below the grid, so the two runs coincide and the
    /// error is exactly zero.
    bool degenerate = false;
};

std::vector<SmallSweepRow> run_small_holes_sweep(const SmallSweepConfig& cfg);

// ---------------------------------------------------------------------------
// Darcy-regime sweep: the rescaled perforated velocity u / sigma^2 against
// the filtration flux computed from the homogenized permeability.  The two
// fields are averaged over one lattice period before the distance is taken:
// the sub-period part of the flow has an O(1) pointwise variance that does
// not shrink with eps (its block mean is the filtration flux, the field
// itself is not), so only period means can converge.  The raw pointwise
// distance is kept in fine_error_rel for reference.

struct LargeSweepConfig {
    int dim = 3;
    double alpha = 1.0;
    std::vector<double> epsilons;
    /// Grid cells across one lattice period; the row resolution is
    /// cells_per_period / eps.
    int cells_per_period = 8;
    double delta = 0.25;
    double delta3 = 0.4;
    CellShape shape{};
    /// Resolution of the unit-cell solves behind the permeability.
    int cell_resolution = 8;
    /// Obstacle sizes of the vanishing-size extrapolation (alpha > 1 only;
    /// alpha = 1 uses the fixed-geometry cell problem at eta = 2 delta).
    std::vector<double> cell_etas{0.4, 0.3, 0.2};
    SweepFlow flow;
};

struct LargeSweepRow {
    double eps = 0.0;
    double a_eps = 0.0;
    double sigma2 = 0.0;
    int resolution = 0;
    int hole_count = 0;
    int vanished_holes = 0;
    double porosity = 0.0;
    double error_rel = 0.0;      // period means compared
    double fine_error_rel = 0.0; // pointwise, saturates at the oscillation
    double darcy_norm = 0.0;     // space-time L2 of the filtration flux means
    double min_slack = 0.0;
    double max_div = 0.0;
    double kinetic_final = 0.0;
    double dissipation_total = 0.0;
    int steps = 0;
};

struct LargeSweepResult {
    Tensor permeability;
    double perm_est_error = 0.0;
    bool perm_reliable = true;
    std::vector<LargeSweepRow> rows;
};

LargeSweepResult run_large_holes_sweep(const LargeSweepConfig& cfg);

// ---------------------------------------------------------------------------
// Smallest Dirichlet eigenvalue of the scalar Laplacian on the fluid, via
// inverse power iteration; constant = lambda_min^{-1/2} is the sharpest
// factor in ||u|| <= constant ||grad u||.

struct PoincareResult {
    double constant = 0.0;
    double lambda_min = 0.0;
    int iterations = 0;
};

PoincareResult poincare_constant(const Mask& mask, double rel_tol = 1e-6, int max_iter = 200);

struct PoincareRow {
    double eps = 0.0;
    double sigma = 0.0;
    int resolution = 0;
    double constant = 0.0;
    double ratio = 0.0; // constant / sigma
};

/// Scaling table of the constant across self-similar perforations (fixed
/// cells per period, shrinking eps).
std::vector<PoincareRow> poincare_sweep(int dim, double alpha, double delta, double delta3,
                                        CellShape shape, const std::vector<double>& epsilons,
                                        int cells_per_period);

// ---------------------------------------------------------------------------
// Self-checking accuracy study on a closed-form unsteady solution
// (stream function sin^2(pi x) sin^2(pi y) exp(-t/2) on the walled unit
// square, forcing assembled analytically).  Each level halves the spacing
// and the step together.

struct ConvergenceCase {
    int resolution = 0;
    double dt = 0.0;
    double error = 0.0; // relative L2 velocity error at the final time
    int steps = 0;
};

struct ConvergenceReport {
    std::vector<ConvergenceCase> cases;
    std::vector<double> ratios; // error contraction between consecutive levels
};

ConvergenceReport manufactured_convergence(int base_resolution, double base_dt, int levels,
                                           double t_end, double sigma2, double viscosity);

} // namespace perfhom
