#pragma once

#include <functional>
#include <vector>

#include "perfhom/grid.hpp"
#include "perfhom/krylov.hpp"
#include "perfhom/mac_ops.hpp"

namespace perfhom {

/// Incompressible flow on a masked domain in the accelerated time scale:
///
///     sigma2 * du/dt + (u . grad) u - viscosity * Lap(u) + grad p = f
///     div u = 0,  u = 0 on solid faces and walls.
struct FlowProblem {
    const Mask* mask = nullptr;
    double sigma2 = 1.0;
    double viscosity = 1.0;
    /// Writes the forcing at time t into a zeroed face field; the result is
    /// masked by the integrator.
    std::function<void(double, FaceField&)> forcing;
    FaceField initial; // masked and projected to divergence-free on entry

    explicit FlowProblem(const Mask& m);
    void validate() const;
};

/// Treatment of the linear (viscous + pressure) part of a step.
///
/// projection: implicit viscous solve, then a pressure projection.  Cheap,
/// with nonnegative energy slack by construction, but the splitting biases
/// the relaxed state once viscosity*dt exceeds sigma2 times the slowest
/// viscous relaxation time: the stationary point drifts from the coupled
/// momentum balance toward "unconstrained viscous solve, then project".
///
/// coupled: one implicit solve of the constrained system
///     (sigma2/dt + viscosity*A) u + grad p = (sigma2/dt) u_a + f,  div u = 0
/// per step through the saddle solver.  Stationary points satisfy the
/// discrete momentum balance exactly at any dt, so stiff quasi-static runs
/// stay on the correct manifold; each step costs a Schur iteration (warm
/// started from the previous pressure).
enum class TimeScheme { projection, coupled };

struct TimeControls {
    double t_end = 1.0;
    double dt_max = 1e-2;
    double cfl = 0.4;
    /// Ignore the CFL suggestion and always take dt_max (clipped at t_end),
    /// so that runs over the same horizon share identical time grids.
    bool fixed_dt = false;
    double solver_tol = 1e-10;
    int max_iter = 200000;
    int snapshot_stride = 0; // 0 keeps only first and last
    TimeScheme scheme = TimeScheme::projection;
};

/// Energy bookkeeping of one step.  kinetic is sigma2/2 ||u||^2 after the
/// step, the increments are the dissipated and injected energy over the
/// step, and slack closes the discrete balance
///     kinetic_new - kinetic_old = work_inc - dissipation_inc - slack.
/// The splitting makes slack nonnegative up to solver tolerances.
struct LedgerRow {
    double t = 0.0;
    double dt = 0.0;
    double kinetic = 0.0;
    double dissipation_inc = 0.0;
    double work_inc = 0.0;
    double slack = 0.0;
    double max_div = 0.0;
    int convection_iterations = 0;
    int viscous_iterations = 0;
    int pressure_iterations = 0;
};

/// One-step driver.  Per step from u^n:
///   1. convection by a Cayley half-step of the skew transport frozen at
///      u^n, which preserves the velocity norm exactly,
///   2. the linear part per TimeControls::scheme: either an implicit
///      viscous solve followed by a (non-incremental) pressure projection,
///      or one coupled implicit viscous-pressure saddle solve.
class NseStepper {
public:
    NseStepper(const FlowProblem& prob, const TimeControls& ctrl);

    const FaceField& velocity() const { return u_; }
    const CellField& pressure() const { return p_; }
    double time() const { return t_; }
    double kinetic() const;
    /// CFL-limited step suggestion, never exceeding dt_max or overshooting
    /// t_end.
    double suggest_dt() const;
    LedgerRow step(double dt);
    bool finished() const;

private:
    const FlowProblem* prob_;
    TimeControls ctrl_;
    MacOps ops_;
    FaceField u_;
    CellField p_;
    double t_ = 0.0;
    double hd_ = 0.0; // cell volume
    // scratch
    FaceField ua_, ustar_, f_, t1_, t2_;
    CellField rhs_p_, phi_;
};

struct Trajectory {
    std::vector<double> snapshot_times;
    std::vector<FaceField> velocities;
    std::vector<CellField> pressures;
    std::vector<LedgerRow> ledger;
    double kinetic0 = 0.0;
};

/// Runs the stepper to t_end, collecting the ledger and snapshots (first,
/// every snapshot_stride-th step, last).
Trajectory simulate(const FlowProblem& prob, const TimeControls& ctrl);

/// Integrity of a recorded ledger: |K_N - K_0 - sum(work - diss - slack)|,
/// which vanishes to rounding when rows were produced by the stepper.
double energy_residual(const Trajectory& traj);

/// Most negative slack over the run (0 for an empty ledger).
double min_slack(const Trajectory& traj);

/// Extension by zero from the fluid to the full grid.  Fields here store
/// explicit zeros at solid slots already, so this is a masked copy; it
/// exists to make the extension step of domain comparisons explicit.
void zero_extend(const Mask& mask, const FaceField& in, FaceField& out);

/// Trapezoid rule over a sampled scalar series.
double trapezoid(const std::vector<double>& t, const std::vector<double>& v);

} // namespace perfhom
