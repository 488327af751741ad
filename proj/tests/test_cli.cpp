#include <doctest.h>

#include <string>

#include "perfhom/config.hpp"
#include "perfhom/errors.hpp"
#include "perfhom/report_io.hpp"

using namespace perfhom;

namespace {

int thrown_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const config_error& e) {
        return e.line_number;
    }
    return -1;
}

} // namespace

TEST_CASE("each command parses with its keys applied") {
    Config c = parse_config("[cell]\n"
                            "dim = 2\n"
                            "eta = 0.3\n"
                            "resolution = 48\n"
                            "shape = ellipsoid\n"
                            "major_axis = 1\n"
                            "dump_fields = yes\n");
    CHECK(c.command == Command::cell);
    CHECK(c.cell.dim == 2);
    CHECK(c.cell.eta == 0.3);
    CHECK(c.cell.resolution == 48);
    CHECK(c.cell.shape.kind == HoleShape::ellipsoid);
    CHECK(c.cell.shape.major_axis == 1);
    CHECK(c.cell.dump_fields);

    c = parse_config("[permeability]\netas = 0.4, 0.3, 0.25, 0.2\nresolution = 24\n");
    CHECK(c.command == Command::permeability);
    CHECK(c.permeability.etas == std::vector<double>{0.4, 0.3, 0.25, 0.2});

    c = parse_config("[simulate]\n"
                     "perforated = no\n"
                     "dim = 2\n"
                     "resolution = 32\n"
                     "sigma2 = 0.0625\n"
                     "forcing = rotational\n"
                     "forcing_amplitude = 2\n"
                     "initial = vortex\n"
                     "t_end = 0.5\n"
                     "fixed_dt = true\n");
    CHECK(!c.simulate.perforated);
    CHECK(c.simulate.sigma2 == 0.0625);
    CHECK(c.simulate.forcing.kind == ForcingKind::rotational);
    CHECK(c.simulate.forcing.amplitude == 2.0);
    CHECK(c.simulate.initial.kind == InitialKind::vortex);
    CHECK(c.simulate.fixed_dt);

    c = parse_config("[darcy]\n"
                     "dim = 2\n"
                     "a11 = 0.5\n"
                     "a22 = 0.25\n"
                     "a12 = 0.05\n"
                     "forcing = rotational\n"
                     "time = 0.1\n");
    CHECK(c.darcy.permeability(0, 0) == 0.5);
    CHECK(c.darcy.permeability(0, 1) == 0.05);
    CHECK(c.darcy.permeability(1, 0) == 0.05);
    CHECK(c.darcy.time == 0.1);

    c = parse_config("[sweep-large]\n"
                     "alpha = 1\n"
                     "epsilons = 0.25, 0.125\n"
                     "cells_per_period = 8\n"
                     "cell_resolution = 8\n"
                     "t_end = 0.25\n"
                     "dt = 0.01\n");
    CHECK(c.sweep_large.epsilons == std::vector<double>{0.25, 0.125});
    CHECK(c.sweep_large.flow.dt == 0.01);

    c = parse_config("[poincare]\nperforated = no\ndim = 2\nresolution = 48\n");
    CHECK(!c.poincare.perforated);

    c = parse_config("# leading comment\n\n[sweep-small]\n"
                     "alphas = 1.5, 2, 3\n"
                     "sigma2_override = 1 ; trailing comment\n");
    CHECK(c.sweep_small.alphas == std::vector<double>{1.5, 2.0, 3.0});
    CHECK(c.sweep_small.sigma2_override == 1.0);
}

TEST_CASE("parse errors carry the offending line") {
    CHECK(thrown_line("[cell]\neta = 0.3\nwidth = 2\n") == 3); // unknown key
    CHECK(thrown_line("[cell]\neta = 0.3\neta = 0.2\n") == 3); // duplicate
    CHECK(thrown_line("[cell]\neta = fast\n") == 2);           // not a number
    CHECK(thrown_line("[cell]\neta 0.3\n") == 2);              // missing '='
    CHECK(thrown_line("eta = 0.3\n[cell]\n") == 1);            // key before section
    CHECK(thrown_line("[cell]\n[darcy]\n") == 2);              // second section
    CHECK(thrown_line("[melt]\n") == 1);                       // unknown command
    CHECK(thrown_line("[cell]\neta =\n") == 2);                // empty value
    CHECK(thrown_line("[cell]\nresolution = 32.5\n") == 2);    // not an integer
    CHECK(thrown_line("[cell]\ndump_fields = maybe\n") == 2);  // not a bool
    CHECK(thrown_line("[simulate]\nforcing = sideways\n") == 2);
    CHECK_THROWS_AS(parse_config("eta = 1\n"), config_error);
    CHECK_THROWS_AS(parse_config(""), config_error); // no section at all
    CHECK_THROWS_AS(parse_config("[darcy]\ndim = 2\na11 = 1\nforcing = uniform\n"),
                    config_error); // a22 missing
    CHECK_THROWS_AS(load_config("/nonexistent/path.ini"), config_error);
}

TEST_CASE("feasibility advisories") {
    // well formed: nothing to say
    Config ok = parse_config("[cell]\ndim = 2\neta = 0.3\nresolution = 32\n");
    CHECK(validate_config(ok).empty());

    // hole thinner than two cells at the configured resolution
    Config thin = parse_config("[simulate]\n"
                               "dim = 2\neps = 0.25\nalpha = 3\nresolution = 32\nsigma2 = 1\n");
    CHECK(!validate_config(thin).empty());

    // vanishing-size sweep pointed at the wrong regime
    Config wrong = parse_config("[sweep-large]\n"
                                "dim = 3\nalpha = 4\nepsilons = 0.25\n"
                                "cells_per_period = 8\ncell_resolution = 16\n");
    bool mentions_regime = false;
    for (const std::string& s : validate_config(wrong))
        if (s.find("regime") != std::string::npos) mentions_regime = true;
    CHECK(mentions_regime);
}

TEST_CASE("reports are byte-deterministic functions of their inputs") {
    PermeabilityLimit lim;
    lim.tensor = Tensor::zero(2);
    lim.tensor(0, 0) = 0.031;
    lim.tensor(1, 1) = 0.032;
    lim.est_error = 1e-4;
    lim.rate = 1.1;
    EtaPermeability row;
    row.eta = 0.3;
    row.c = 0.5;
    row.energy_form = lim.tensor;
    row.mean_form = lim.tensor;
    row.tensor = lim.tensor;
    lim.table.push_back(row);
    CHECK(permeability_report_json(lim) == permeability_report_json(lim));
    CHECK(permeability_table_csv(lim) == permeability_table_csv(lim));
    // shortest round-trip printing keeps odd doubles exact
    lim.est_error = 0.1 + 0.2;
    const std::string j = permeability_report_json(lim);
    CHECK(j.find("0.30000000000000004") != std::string::npos);
}
