#include <benchmark/benchmark.h>

#include <random>

#include "perfhom/geometry.hpp"
#include "perfhom/krylov.hpp"
#include "perfhom/mac_ops.hpp"

using namespace perfhom;

namespace {

PerforatedMask make_domain(int dim, int res) {
    PerforationSpec spec;
    spec.dim = dim;
    spec.eps = 0.25;
    spec.alpha = 1.0;
    return build_perforated_mask(spec, res);
}

FaceField random_velocity(const Mask& m, unsigned seed) {
    std::mt19937 rng(seed);
    FaceField u = FaceField::zeros(m.grid);
    for (int a = 0; a < m.grid.dim; ++a)
        for (std::size_t s = 0; s < u.comp[a].size(); ++s)
            if (m.face[a][s]) u.comp[a][s] = 2.0 * (rng() / 4294967296.0) - 1.0;
    return u;
}

void bm_viscous(benchmark::State& state) {
    PerforatedMask pm = make_domain(3, static_cast<int>(state.range(0)));
    MacOps ops(pm.mask);
    FaceField u = random_velocity(pm.mask, 3), out = FaceField::zeros(pm.mask.grid);
    for (auto _ : state) {
        ops.viscous(u, out);
        benchmark::DoNotOptimize(out.comp[0].data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(pm.mask.fluid_face_count()));
}

void bm_convection(benchmark::State& state) {
    PerforatedMask pm = make_domain(3, static_cast<int>(state.range(0)));
    MacOps ops(pm.mask);
    FaceField u = random_velocity(pm.mask, 5), w = random_velocity(pm.mask, 7);
    FaceField out = FaceField::zeros(pm.mask.grid);
    for (auto _ : state) {
        ops.convection(u, w, out);
        benchmark::DoNotOptimize(out.comp[0].data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(pm.mask.fluid_face_count()));
}

void bm_pressure_solve(benchmark::State& state) {
    PerforatedMask pm = make_domain(2, static_cast<int>(state.range(0)));
    MacOps ops(pm.mask);
    FaceField u = random_velocity(pm.mask, 11);
    CellField rhs = CellField::zeros(pm.mask.grid);
    ops.divergence(u, rhs);
    ops.project_zero_mean(rhs);
    CellOp lap = [&ops](const CellField& p, CellField& out) {
        ops.cell_laplacian(p, out);
        scale(-1.0, out);
        ops.project_zero_mean(out);
    };
    for (auto _ : state) {
        CellField phi = CellField::zeros(pm.mask.grid);
        KrylovResult r = cg(lap, rhs, phi, 1e-8, 20000);
        benchmark::DoNotOptimize(r.iterations);
    }
}

void bm_mask_build(benchmark::State& state) {
    for (auto _ : state) {
        PerforatedMask pm = make_domain(3, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(pm.porosity);
    }
}

} // namespace

BENCHMARK(bm_viscous)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_convection)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_pressure_solve)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_mask_build)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
