#include "perfhom/grid.hpp"

#include <cmath>
#include <string>

#include "perfhom/parallel.hpp"

namespace perfhom {

Grid Grid::periodic_cell(int dim, int res) {
    if (dim != 2 && dim != 3)
        throw precondition_error("grid: dim must be 2 or 3, got " + std::to_string(dim));
    if (res < 4)
        throw precondition_error("grid: periodic cell needs at least 4 cells per axis");
    Grid g;
    g.dim = dim;
    g.closure = Closure::periodic;
    g.box.lo = {-0.5, -0.5, -0.5};
    g.box.hi = {0.5, 0.5, 0.5};
    if (dim == 2) {
        g.box.lo[2] = 0.0;
        g.box.hi[2] = 0.0;
    }
    g.h = 1.0 / res;
    for (int a = 0; a < dim; ++a) g.cells[a] = res;
    return g;
}

Grid Grid::box_domain(int dim, const Box& box, int res) {
    if (dim != 2 && dim != 3)
        throw precondition_error("grid: dim must be 2 or 3, got " + std::to_string(dim));
    if (res < 2) throw precondition_error("grid: resolution must be >= 2");
    double longest = 0.0;
    for (int a = 0; a < dim; ++a) {
        const double side = box.hi[a] - box.lo[a];
        if (!(side > 0.0)) throw precondition_error("grid: box sides must be positive");
        longest = std::max(longest, side);
    }
    Grid g;
    g.dim = dim;
    g.closure = Closure::walls;
    g.box = box;
    g.h = longest / res;
    for (int a = 0; a < dim; ++a) {
        const double side = box.hi[a] - box.lo[a];
        const double n = side / g.h;
        const int ni = static_cast<int>(std::lround(n));
        if (std::fabs(n - ni) > 1e-9 * std::max(1.0, n) || ni < 1)
            throw precondition_error("grid: box side along axis " + std::to_string(a) +
                                     " is not an integer multiple of the spacing");
        g.cells[a] = ni;
    }
    if (dim == 2) {
        g.box.lo[2] = 0.0;
        g.box.hi[2] = 0.0;
    }
    return g;
}

Mask Mask::all_fluid(const Grid& g) {
    Mask m;
    m.grid = g;
    m.cell.assign(g.cell_count(), 1);
    m.derive_faces();
    return m;
}

void Mask::derive_faces() {
    const Grid& g = grid;
    for (int a = 0; a < g.dim; ++a) {
        const auto ext = g.face_extent(a);
        face[a].assign(g.face_count(a), 0);
        for (int k = 0; k < ext[2]; ++k)
            for (int j = 0; j < ext[1]; ++j)
                for (int i = 0; i < ext[0]; ++i) {
                    std::array<int, 3> right{i, j, k};
                    std::array<int, 3> left = right;
                    left[a] -= 1;
                    if (g.periodic()) {
                        left[a] = wrap_index(left[a], g.cells[a]);
                    } else {
                        // wall slots stay solid
                        if (right[a] == 0 || right[a] == g.cells[a]) continue;
                    }
                    const bool fl = cell[cell_index(g, left[0], left[1], left[2])] != 0;
                    const bool fr = cell[cell_index(g, right[0], right[1], right[2])] != 0;
                    face[a][flat_index(ext, i, j, k)] = (fl && fr) ? 1 : 0;
                }
    }
}

std::size_t Mask::fluid_cell_count() const {
    std::size_t n = 0;
    for (auto c : cell) n += c;
    return n;
}

std::size_t Mask::fluid_face_count() const {
    std::size_t n = 0;
    for (int a = 0; a < grid.dim; ++a)
        for (auto f : face[a]) n += f;
    return n;
}

double Mask::porosity() const {
    return static_cast<double>(fluid_cell_count()) / static_cast<double>(grid.cell_count());
}

void Mask::validate() const {
    const Grid& g = grid;
    if (cell.size() != g.cell_count())
        throw consistency_error("mask: cell array size does not match grid");
    for (int a = 0; a < g.dim; ++a) {
        if (face[a].size() != g.face_count(a))
            throw consistency_error("mask: face array size does not match grid");
        const auto ext = g.face_extent(a);
        for (int k = 0; k < ext[2]; ++k)
            for (int j = 0; j < ext[1]; ++j)
                for (int i = 0; i < ext[0]; ++i) {
                    const bool fluid = face[a][flat_index(ext, i, j, k)] != 0;
                    std::array<int, 3> right{i, j, k};
                    std::array<int, 3> left = right;
                    left[a] -= 1;
                    if (!g.periodic() && (right[a] == 0 || right[a] == g.cells[a])) {
                        if (fluid) throw consistency_error("mask: fluid face on a wall slot");
                        continue;
                    }
                    if (g.periodic()) left[a] = wrap_index(left[a], g.cells[a]);
                    const bool fl = cell[cell_index(g, left[0], left[1], left[2])] != 0;
                    const bool fr = cell[cell_index(g, right[0], right[1], right[2])] != 0;
                    if (fluid && !(fl && fr))
                        throw consistency_error("mask: orphan fluid face next to a solid cell");
                    if (!fluid && fl && fr)
                        throw consistency_error("mask: solid face between two fluid cells");
                }
    }
}

std::uint64_t Mask::hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t byte) {
        h ^= byte;
        h *= 1099511628211ull;
    };
    mix(static_cast<std::uint64_t>(grid.dim));
    mix(grid.periodic() ? 1 : 0);
    for (int a = 0; a < 3; ++a) mix(static_cast<std::uint64_t>(grid.cells[a]) & 0xff),
        mix((static_cast<std::uint64_t>(grid.cells[a]) >> 8) & 0xff);
    for (auto c : cell) mix(c);
    return h;
}

namespace {

template <class F>
void for_each_component(const FaceField& x, F&& f) {
    for (int a = 0; a < x.grid.dim; ++a) f(a);
}

} // namespace

void fill(CellField& x, double value) {
    par::parallel_for(x.v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) x.v[i] = value;
    });
}

void fill(FaceField& x, double value) {
    for_each_component(x, [&](int a) {
        par::parallel_for(x.comp[a].size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) x.comp[a][i] = value;
        });
    });
}

void copy_into(const CellField& src, CellField& dst) {
    dst.grid = src.grid;
    dst.v = src.v;
}

void copy_into(const FaceField& src, FaceField& dst) {
    dst.grid = src.grid;
    dst.comp = src.comp;
}

void axpy(double a, const CellField& x, CellField& y) {
    par::parallel_for(x.v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) y.v[i] += a * x.v[i];
    });
}

void axpy(double a, const FaceField& x, FaceField& y) {
    for_each_component(x, [&](int c) {
        par::parallel_for(x.comp[c].size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) y.comp[c][i] += a * x.comp[c][i];
        });
    });
}

void axpby(double a, const CellField& x, double b, CellField& y) {
    par::parallel_for(x.v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) y.v[i] = a * x.v[i] + b * y.v[i];
    });
}

void axpby(double a, const FaceField& x, double b, FaceField& y) {
    for_each_component(x, [&](int c) {
        par::parallel_for(x.comp[c].size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) y.comp[c][i] = a * x.comp[c][i] + b * y.comp[c][i];
        });
    });
}

void scale(double a, CellField& x) {
    par::parallel_for(x.v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) x.v[i] *= a;
    });
}

void scale(double a, FaceField& x) {
    for_each_component(x, [&](int c) {
        par::parallel_for(x.comp[c].size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) x.comp[c][i] *= a;
        });
    });
}

double dot(const CellField& x, const CellField& y) {
    return par::dot(x.v.data(), y.v.data(), x.v.size());
}

double dot(const FaceField& x, const FaceField& y) {
    double s = 0.0;
    for (int a = 0; a < x.grid.dim; ++a)
        s += par::dot(x.comp[a].data(), y.comp[a].data(), x.comp[a].size());
    return s;
}

double norm2(const CellField& x) { return std::sqrt(par::sum_sq(x.v.data(), x.v.size())); }

double norm2(const FaceField& x) {
    double s = 0.0;
    for (int a = 0; a < x.grid.dim; ++a) s += par::sum_sq(x.comp[a].data(), x.comp[a].size());
    return std::sqrt(s);
}

double max_abs(const CellField& x) { return par::max_abs(x.v.data(), x.v.size()); }

double max_abs(const FaceField& x) {
    double m = 0.0;
    for (int a = 0; a < x.grid.dim; ++a)
        m = std::max(m, par::max_abs(x.comp[a].data(), x.comp[a].size()));
    return m;
}

} // namespace perfhom
