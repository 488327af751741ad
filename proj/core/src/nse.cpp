#include "perfhom/nse.hpp"

#include <cmath>

#include "perfhom/errors.hpp"
#include "perfhom/parallel.hpp"
#include "perfhom/saddle.hpp"

namespace perfhom {

FlowProblem::FlowProblem(const Mask& m) : mask(&m), initial(FaceField::zeros(m.grid)) {}

void FlowProblem::validate() const {
    if (!mask) throw precondition_error("flow problem has no mask");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
        throw precondition_error("time-scale factor sigma2 must be positive and finite");
    if (!(viscosity > 0.0) || !std::isfinite(viscosity))
        throw precondition_error("viscosity must be positive and finite");
    if (!initial.grid.same_layout(mask->grid))
        throw precondition_error("initial velocity lives on a different grid");
}

NseStepper::NseStepper(const FlowProblem& prob, const TimeControls& ctrl)
    : prob_(&prob),
      ctrl_(ctrl),
      ops_(*prob.mask),
      u_(prob.initial),
      p_(CellField::zeros(prob.mask->grid)),
      ua_(FaceField::zeros(prob.mask->grid)),
      ustar_(FaceField::zeros(prob.mask->grid)),
      f_(FaceField::zeros(prob.mask->grid)),
      t1_(FaceField::zeros(prob.mask->grid)),
      t2_(FaceField::zeros(prob.mask->grid)),
      rhs_p_(CellField::zeros(prob.mask->grid)),
      phi_(CellField::zeros(prob.mask->grid)) {
    prob.validate();
    if (!(ctrl_.t_end > 0.0) || !(ctrl_.dt_max > 0.0) || !(ctrl_.cfl > 0.0))
        throw precondition_error("time controls must be positive");
    hd_ = prob.mask->grid.cell_volume();

    // admissible initial state: supported on the fluid and divergence free
    ops_.mask_faces(u_);
    ops_.divergence(u_, rhs_p_);
    if (norm2(rhs_p_) > 0.0) {
        scale(-1.0, rhs_p_);
        ops_.project_zero_mean(rhs_p_);
        CellOp lap = [this](const CellField& v, CellField& out) {
            ops_.cell_laplacian(v, out);
            scale(-1.0, out);
            ops_.project_zero_mean(out);
        };
        fill(phi_, 0.0);
        KrylovResult r = cg(lap, rhs_p_, phi_, ctrl_.solver_tol, ctrl_.max_iter);
        if (!r.converged)
            throw convergence_error("initial projection stalled", std::move(r.history));
        ops_.gradient(phi_, t1_);
        axpy(-1.0, t1_, u_);
        fill(phi_, 0.0);
    }
}

double NseStepper::kinetic() const {
    const double n2 = dot(u_, u_);
    return 0.5 * prob_->sigma2 * n2 * hd_;
}

double NseStepper::suggest_dt() const {
    const double remaining = ctrl_.t_end - t_;
    if (remaining <= 0.0) return 0.0;
    double dt = ctrl_.dt_max;
    if (!ctrl_.fixed_dt) {
        const double umax = max_abs(u_);
        if (umax > 0.0) {
            const double h = prob_->mask->grid.h;
            dt = std::min(dt, ctrl_.cfl * h / umax);
            dt = std::min(dt, ctrl_.cfl * h * prob_->sigma2 / umax);
        }
    }
    return std::min(dt, remaining);
}

bool NseStepper::finished() const {
    return t_ >= ctrl_.t_end - 1e-12 * std::max(1.0, ctrl_.t_end);
}

LedgerRow NseStepper::step(double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw precondition_error("step size must be positive");
    const double s2 = prob_->sigma2;
    const double mu = prob_->viscosity;
    const double lam = dt / (2.0 * s2);

    LedgerRow row;
    row.dt = dt;
    const double k_old = kinetic();

    // Cayley convection: (I + lam S) u_a = (I - lam S) u^n with S = skew
    // transport frozen at u^n, solved through the normal operator
    // (I - lam^2 S^2) u_a = (I - lam S)^2 u^n.
    {
        ops_.convection(u_, u_, t1_);
        copy_into(u_, f_);
        axpy(-lam, t1_, f_);
        ops_.convection(u_, f_, t1_);
        axpy(-lam, t1_, f_);
        FaceOp normal = [&](const FaceField& v, FaceField& out) {
            ops_.convection(u_, v, t1_);
            ops_.convection(u_, t1_, t2_);
            copy_into(v, out);
            axpy(-lam * lam, t2_, out);
        };
        copy_into(u_, ua_);
        KrylovResult r = cg(normal, f_, ua_, ctrl_.solver_tol, ctrl_.max_iter);
        if (!r.converged)
            throw convergence_error("convection substep stalled", std::move(r.history));
        row.convection_iterations = r.iterations;
    }

    fill(f_, 0.0);
    if (prob_->forcing) prob_->forcing(t_ + 0.5 * dt, f_);
    ops_.mask_faces(f_);

    if (ctrl_.scheme == TimeScheme::coupled) {
        // one implicit solve of the constrained linear part,
        //   (s2/dt + mu A) u1 + grad p = (s2/dt) u_a + f,  div u1 = 0,
        // so the stationary state carries the exact momentum balance at any
        // dt.  The ledger evaluates dissipation and work at u1; pairing the
        // update with u1 leaves slack = (s2/2) ||u1 - u_a||^2 >= 0.
        SaddleSystem sys(*prob_->mask, mu, s2 / dt);
        copy_into(ua_, sys.rhs_velocity);
        scale(s2 / dt, sys.rhs_velocity);
        axpy(1.0, f_, sys.rhs_velocity);
        ops_.mask_faces(sys.rhs_velocity);
        SaddleOptions sopt;
        sopt.rel_tol = ctrl_.solver_tol;
        sopt.inner_rel_tol = 1e-2 * ctrl_.solver_tol;
        sopt.max_outer = ctrl_.max_iter;
        sopt.max_inner = ctrl_.max_iter;
        sopt.pressure_guess = &p_;
        SaddleSolution ss = solve_saddle(sys, sopt);
        row.viscous_iterations = ss.inner_iterations_total;
        row.pressure_iterations = ss.outer.iterations;
        copy_into(ss.velocity, u_);
        copy_into(ss.pressure, p_);
        copy_into(u_, ustar_);
    } else {
        // implicit viscous solve at the half-step forcing
        {
            copy_into(ua_, t1_);
            scale(s2 / dt, t1_);
            axpy(1.0, f_, t1_);
            FaceOp helm = [&](const FaceField& v, FaceField& out) {
                ops_.viscous(v, out, mu, s2 / dt);
            };
            copy_into(ua_, ustar_);
            KrylovResult r = cg(helm, t1_, ustar_, ctrl_.solver_tol, ctrl_.max_iter);
            if (!r.converged)
                throw convergence_error("viscous substep stalled", std::move(r.history));
            row.viscous_iterations = r.iterations;
        }

        // pressure projection, non-incremental: -L phi = -(s2/dt) div u*
        {
            ops_.divergence(ustar_, rhs_p_);
            scale(-s2 / dt, rhs_p_);
            ops_.project_zero_mean(rhs_p_);
            CellOp lap = [this](const CellField& v, CellField& out) {
                ops_.cell_laplacian(v, out);
                scale(-1.0, out);
                ops_.project_zero_mean(out);
            };
            copy_into(p_, phi_);
            KrylovResult r = cg(lap, rhs_p_, phi_, ctrl_.solver_tol, ctrl_.max_iter);
            if (!r.converged)
                throw convergence_error("pressure projection stalled", std::move(r.history));
            row.pressure_iterations = r.iterations;
            ops_.gradient(phi_, t1_);
            copy_into(ustar_, u_);
            axpy(-dt / s2, t1_, u_);
            copy_into(phi_, p_);
        }
    }

    t_ += dt;
    row.t = t_;
    ops_.viscous(ustar_, t2_, 1.0, 0.0);
    row.dissipation_inc = dt * mu * dot(t2_, ustar_) * hd_;
    row.work_inc = dt * dot(f_, ustar_) * hd_;
    row.kinetic = kinetic();
    row.slack = k_old - row.kinetic + row.work_inc - row.dissipation_inc;
    ops_.divergence(u_, rhs_p_);
    row.max_div = max_abs(rhs_p_);
    return row;
}

Trajectory simulate(const FlowProblem& prob, const TimeControls& ctrl) {
    NseStepper stepper(prob, ctrl);
    Trajectory traj;
    traj.kinetic0 = stepper.kinetic();
    traj.snapshot_times.push_back(stepper.time());
    traj.velocities.push_back(stepper.velocity());
    traj.pressures.push_back(stepper.pressure());

    long step_index = 0;
    while (!stepper.finished()) {
        if (++step_index > 10000000)
            throw convergence_error("time stepping stalled below the horizon", {});
        const double dt = stepper.suggest_dt();
        traj.ledger.push_back(stepper.step(dt));
        if (ctrl.snapshot_stride > 0 && step_index % ctrl.snapshot_stride == 0 && !stepper.finished()) {
            traj.snapshot_times.push_back(stepper.time());
            traj.velocities.push_back(stepper.velocity());
            traj.pressures.push_back(stepper.pressure());
        }
    }
    traj.snapshot_times.push_back(stepper.time());
    traj.velocities.push_back(stepper.velocity());
    traj.pressures.push_back(stepper.pressure());
    return traj;
}

double energy_residual(const Trajectory& traj) {
    if (traj.ledger.empty()) return 0.0;
    double acc = traj.kinetic0;
    for (const LedgerRow& r : traj.ledger) acc += r.work_inc - r.dissipation_inc - r.slack;
    return std::abs(traj.ledger.back().kinetic - acc);
}

double min_slack(const Trajectory& traj) {
    double m = 0.0;
    for (const LedgerRow& r : traj.ledger) m = std::min(m, r.slack);
    return m;
}

void zero_extend(const Mask& mask, const FaceField& in, FaceField& out) {
    if (!in.grid.same_layout(mask.grid) || !out.grid.same_layout(mask.grid))
        throw precondition_error("zero extension requires matching grids");
    copy_into(in, out);
    MacOps(mask).mask_faces(out);
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
    if (t.size() != v.size() || t.empty())
        throw precondition_error("trapezoid rule needs matching nonempty samples");
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
        acc += 0.5 * (v[i] + v[i + 1]) * (t[i + 1] - t[i]);
    return acc;
}

} // namespace perfhom
