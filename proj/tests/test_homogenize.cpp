#include <doctest.h>

#include <cmath>

#include "perfhom/errors.hpp"
#include "perfhom/homogenize.hpp"

using namespace perfhom;

TEST_CASE("poincare constant of the walled unit square") {
    Mask m = Mask::all_fluid(Grid::box_domain(2, Box{}, 64));
    PoincareResult r = poincare_constant(m);
    const double exact = 1.0 / std::sqrt(2.0 * M_PI * M_PI);
    CHECK(r.constant == doctest::Approx(exact).epsilon(5e-3));
    CHECK(r.lambda_min == doctest::Approx(1.0 / (r.constant * r.constant)).epsilon(1e-12));
}

TEST_CASE("poincare constant of the walled unit cube") {
    Mask m = Mask::all_fluid(Grid::box_domain(3, Box{}, 32));
    PoincareResult r = poincare_constant(m);
    CHECK(r.constant == doctest::Approx(1.0 / std::sqrt(3.0 * M_PI * M_PI)).epsilon(5e-3));
}

TEST_CASE("an obstacle shrinks the poincare constant") {
    Mask open = Mask::all_fluid(Grid::box_domain(2, Box{}, 48));
    Mask holed = open;
    for (int j = 18; j < 30; ++j)
        for (int i = 18; i < 30; ++i) holed.cell[cell_index(holed.grid, i, j, 0)] = 0;
    holed.derive_faces();
    PoincareResult a = poincare_constant(open);
    PoincareResult b = poincare_constant(holed);
    CHECK(b.constant < a.constant);
}

TEST_CASE("forcing and initial presets sample the advertised fields") {
    Grid g = Grid::box_domain(2, Box{}, 8);
    ForcingSpec spec;
    spec.kind = ForcingKind::uniform;
    spec.direction = {2.0, -1.0, 0.0};
    spec.amplitude = 3.0;
    spec.ramp_tau = 0.5;
    auto forcing = make_face_forcing(spec, g);
    FaceField f = FaceField::zeros(g);
    forcing(1.0, f);
    const double expect = 3.0 * (1.0 - std::exp(-2.0));
    CHECK(f.comp[0][flat_index(g.face_extent(0), 3, 4, 0)] == doctest::Approx(2.0 * expect));
    CHECK(f.comp[1][flat_index(g.face_extent(1), 3, 4, 0)] == doctest::Approx(-expect));

    spec.kind = ForcingKind::rotational;
    spec.ramp_tau = 0.0;
    forcing = make_face_forcing(spec, g);
    forcing(0.3, f);
    // x-component is -amplitude (y - 1/2), sampled at the cell-center y
    const double y = g.center_coord(1, 6);
    CHECK(f.comp[0][flat_index(g.face_extent(0), 2, 6, 0)] == doctest::Approx(-3.0 * (y - 0.5)));

    InitialSpec init;
    init.kind = InitialKind::vortex;
    init.amplitude = 2.0;
    FaceField u = build_initial(init, g);
    CHECK(u.comp[1][flat_index(g.face_extent(1), 5, 3, 0)] ==
          doctest::Approx(2.0 * (g.center_coord(0, 5) - 0.5)));

    ForcingSpec none;
    CHECK(!make_face_forcing(none, g));
}

TEST_CASE("holes below the grid leave the sweep row degenerate") {
    SmallSweepConfig cfg;
    cfg.dim = 2;
    cfg.eps = 0.25;
    cfg.alphas = {1.5, 4.0};
    cfg.resolution = 32;
    cfg.sigma2_override = 1.0;
    cfg.flow.t_end = 0.02;
    cfg.flow.dt = 0.01;
    cfg.flow.forcing.kind = ForcingKind::rotational;
    cfg.flow.forcing.amplitude = 1.0;
    auto rows = run_small_holes_sweep(cfg);
    REQUIRE(rows.size() == 2);

    // alpha = 1.5: holes of width 2 * 0.25 * eps^1.5 = 2 h are resolved
    CHECK(!rows[0].degenerate);
    CHECK(rows[0].hole_count == 9);
    CHECK(rows[0].vanished_holes == 0);
    CHECK(rows[0].error_rel > 0.0);
    CHECK(rows[0].ref_norm > 0.0);
    CHECK(rows[0].steps == 2);
    CHECK(rows[0].min_slack >= -1e-10);

    // alpha = 4: width eps^4 / 2 sits far below h, the mask is the open box
    CHECK(rows[1].degenerate);
    CHECK(rows[1].vanished_holes == rows[1].hole_count);
    CHECK(rows[1].error_rel == 0.0);

    CHECK(rows[0].error_rel > rows[1].error_rel);
}

TEST_CASE("filtration sweep rows carry a clean ledger and finite errors") {
    // 2d with alpha > 1 keeps sigma positive, so one cheap row covers the
    // whole pipeline: extrapolated tensor, coupled time stepping, block
    // comparison.  The d = 2 extrapolation is honestly unreliable, which the
    // flag must keep reporting.
    LargeSweepConfig cfg;
    cfg.dim = 2;
    cfg.alpha = 2.0;
    cfg.epsilons = {0.25};
    cfg.cells_per_period = 16;
    cfg.delta = 0.45;
    cfg.cell_resolution = 32;
    cfg.cell_etas = {0.4, 0.3, 0.2};
    cfg.flow.t_end = 0.06;
    cfg.flow.dt = 0.01;
    cfg.flow.compare_stride = 2;
    cfg.flow.forcing.kind = ForcingKind::rotational;
    cfg.flow.forcing.amplitude = 1.0;
    cfg.flow.forcing.ramp_tau = 0.02;
    LargeSweepResult res = run_large_holes_sweep(cfg);

    REQUIRE(res.rows.size() == 1);
    const LargeSweepRow& row = res.rows.front();
    CHECK(row.steps == 6);
    CHECK(row.sigma2 == doctest::Approx(0.0625 * std::log(4.0)).epsilon(1e-12));
    CHECK(row.hole_count == 9);
    CHECK(row.vanished_holes == 0);
    CHECK(std::isfinite(row.error_rel));
    CHECK(row.error_rel > 0.0);
    CHECK(row.darcy_norm > 0.0);
    CHECK(row.fine_error_rel >= row.error_rel * 0.1);
    CHECK(row.min_slack >= -1e-10);
    CHECK(row.max_div < 1e-6);
    CHECK_FALSE(res.perm_reliable);
}

TEST_CASE("degenerate time scale in the filtration sweep is rejected") {
    // d = 2 with alpha = 1 has holes of full period size: sigma_eps = 0
    LargeSweepConfig cfg;
    cfg.dim = 2;
    cfg.alpha = 1.0;
    cfg.epsilons = {0.25};
    cfg.cells_per_period = 8;
    cfg.cell_resolution = 16;
    cfg.flow.t_end = 0.02;
    cfg.flow.dt = 0.01;
    CHECK_THROWS_AS(run_large_holes_sweep(cfg), precondition_error);
}

TEST_CASE("manufactured solution contracts under joint refinement") {
    ConvergenceReport rep = manufactured_convergence(16, 1.0 / 64.0, 2, 0.125, 1.0, 1.0);
    REQUIRE(rep.cases.size() == 2);
    REQUIRE(rep.ratios.size() == 1);
    CHECK(rep.cases[0].error > rep.cases[1].error);
    CHECK(rep.ratios[0] > 1.5);
    CHECK(rep.cases[0].steps == 8);
    CHECK(rep.cases[1].steps == 16);
}
