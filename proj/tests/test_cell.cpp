#include <doctest.h>

#include <cmath>

#include "perfhom/cell_problem.hpp"
#include "perfhom/errors.hpp"
#include "perfhom/geometry.hpp"

using namespace perfhom;

TEST_CASE("tensor helpers") {
    Tensor t = Tensor::zero(2);
    t(0, 0) = 2.0;
    t(1, 1) = 3.0;
    t(0, 1) = 0.5;
    t(1, 0) = 0.1;
    Tensor s = symmetrized(t);
    CHECK(s(0, 1) == doctest::Approx(0.3));
    CHECK(s(1, 0) == doctest::Approx(0.3));
    CHECK(max_entry_gap(t, s) == doctest::Approx(0.2));
    CHECK(is_spd(s));

    Tensor bad = Tensor::zero(2);
    bad(0, 0) = 1.0;
    bad(1, 1) = 1.0;
    bad(0, 1) = bad(1, 0) = 2.0; // eigenvalues -1 and 3
    CHECK(!is_spd(bad));

    std::array<double, 3> in{1.0, 2.0, 0.0}, out{};
    apply(s, in, out);
    CHECK(out[0] == doctest::Approx(2.0 + 0.6));
    CHECK(out[1] == doctest::Approx(0.3 + 6.0));
}

TEST_CASE("both permeability forms agree on a resolved disc") {
    CellGeometry geom = build_cell_geometry(2, 0.3, CellShape{}, 32);
    EtaPermeability p = permeability_at_eta(geom);
    CHECK(p.form_gap < 1e-10 * p.tensor(0, 0));
    CHECK(is_spd(p.tensor));
    // disc obstacle: axis swap is a symmetry of the voxel mask, so the two
    // diagonal entries agree to solver accuracy and cross terms are noise
    CHECK(p.tensor(0, 0) == doctest::Approx(p.tensor(1, 1)).epsilon(1e-8));
    CHECK(std::abs(p.tensor(0, 1)) < 1e-8 * p.tensor(0, 0));
    CHECK(std::abs(p.energy_form(0, 1) - p.energy_form(1, 0)) < 1e-8 * p.tensor(0, 0));
}

TEST_CASE("doubling the forcing scale rescales both forms exactly") {
    CellGeometry geom = build_cell_geometry(2, 0.35, CellShape{}, 16);
    CellOptions one, two;
    one.c = 1.0;
    two.c = 2.0;
    EtaPermeability a = permeability_at_eta(geom, one);
    EtaPermeability b = permeability_at_eta(geom, two);
    // every float op in the solve is homogeneous, and scaling by a power of
    // two is exact, so the c^2 factor comes out bitwise
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CHECK(b.energy_form(i, j) == 4.0 * a.energy_form(i, j));
            CHECK(b.mean_form(i, j) == 4.0 * a.mean_form(i, j));
        }
}

TEST_CASE("rotating an ellipse permutes the tensor diagonal") {
    CellShape along_x;
    along_x.kind = HoleShape::ellipsoid;
    along_x.major_axis = 0;
    CellShape along_y = along_x;
    along_y.major_axis = 1;
    EtaPermeability px = permeability_at_eta(build_cell_geometry(2, 0.35, along_x, 32));
    EtaPermeability py = permeability_at_eta(build_cell_geometry(2, 0.35, along_y, 32));
    CHECK(px.tensor(0, 0) == doctest::Approx(py.tensor(1, 1)).epsilon(1e-8));
    CHECK(px.tensor(1, 1) == doctest::Approx(py.tensor(0, 0)).epsilon(1e-8));
    // the long axis blocks its own direction less than the short axis does
    CHECK(px.tensor(0, 0) != doctest::Approx(px.tensor(1, 1)).epsilon(1e-3));
}

TEST_CASE("directional solve satisfies the energy identity") {
    CellGeometry geom = build_cell_geometry(2, 0.3, CellShape{}, 32);
    CellSolution sol = solve_cell(geom, 0);
    // pair the momentum equation with w: pressure drops out at div w = 0,
    // leaving  integral |grad w|^2 = c^2 * integral w_0
    CHECK(sol.grad_energy == doctest::Approx(sol.c * sol.c * sol.mean[0]).epsilon(1e-8));
    CellNorms n = cell_norm_report(geom, sol);
    CHECK(n.grad_ratio > 0.0);
    CHECK(n.w_norm > 0.0);
    CHECK(n.q_ratio > 0.0);
    CHECK(n.grad_ratio == doctest::Approx(std::sqrt(sol.grad_energy) / sol.c));
}

TEST_CASE("extrapolated limit is stable against the eta sampling") {
    const int res = 16;
    PermeabilityLimit a = permeability_limit(3, CellShape{}, res, {0.4, 0.3, 0.2});
    PermeabilityLimit b = permeability_limit(3, CellShape{}, res, {0.35, 0.3, 0.25, 0.2});
    REQUIRE(a.table.size() == 3);
    REQUIRE(b.table.size() == 4);
    for (int i = 0; i < 3; ++i) {
        CHECK(a.tensor(i, i) > 0.0);
        CHECK(a.tensor(i, i) == doctest::Approx(b.tensor(i, i)).epsilon(0.05));
    }
    CHECK(is_spd(a.tensor));
    // permeability grows as the obstacle shrinks, so the limit sits above
    // every sampled value
    for (const EtaPermeability& row : a.table)
        CHECK(a.tensor(0, 0) > 0.99 * row.tensor(0, 0));
}

TEST_CASE("form agreement is structural, the guard still honors its tolerance") {
    CellGeometry geom = build_cell_geometry(2, 0.3, CellShape{}, 16);
    // even a sloppy solve keeps the two forms together: on the diagonal the
    // outer residual is orthogonal to the Krylov space holding the pressure
    // iterate, and the cross terms cancel by reflection parity of the shape
    CellOptions sloppy;
    sloppy.saddle.rel_tol = 1e-2;
    sloppy.form_gap_tol = 1e9;
    EtaPermeability p = permeability_at_eta(geom, sloppy);
    CHECK(p.form_gap < 1e-12 * p.tensor(0, 0));

    CellOptions zero;
    zero.form_gap_tol = 0.0; // below any achievable gap
    CHECK_THROWS_AS(permeability_at_eta(geom, zero), consistency_error);
}

TEST_CASE("obstacle outside the admissible size range is rejected") {
    CHECK_THROWS_AS(build_cell_geometry(2, 0.97, CellShape{}, 32), geometry_error);
    CHECK_THROWS_AS(build_cell_geometry(2, 0.04, CellShape{}, 32), geometry_error);
    CHECK_THROWS_AS(permeability_limit(2, CellShape{}, 32, {0.4, 0.3}), precondition_error);
    CHECK_THROWS_AS(permeability_limit(2, CellShape{}, 32, {0.3, 0.4, 0.2}), precondition_error);
}
