#include "perfhom/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "perfhom/parallel.hpp"

namespace perfhom {

const char* to_string(HoleShape s) {
    switch (s) {
        case HoleShape::ball: return "ball";
        case HoleShape::ellipsoid: return "ellipsoid";
        case HoleShape::box: return "box";
    }
    return "?";
}

const char* to_string(Regime r) {
    switch (r) {
        case Regime::small_holes: return "small-holes";
        case Regime::critical: return "critical";
        case Regime::large_holes: return "large-holes";
        case Regime::unsupported: return "unsupported";
    }
    return "?";
}

double sigma_eps(int dim, double eps, double a_eps) {
    if (dim != 2 && dim != 3)
        throw precondition_error("sigma_eps: dim must be 2 or 3");
    if (!(eps > 0.0) || eps > 1.0)
        throw precondition_error("sigma_eps: need 0 < eps <= 1");
    if (!(a_eps > 0.0) || a_eps > eps)
        throw precondition_error("sigma_eps: need 0 < a_eps <= eps");
    if (dim == 2) return eps * std::sqrt(std::fabs(std::log(a_eps / eps)));
    return std::sqrt(eps * eps * eps / a_eps);
}

double c_eta(int dim, double eta) {
    if (dim != 2 && dim != 3)
        throw precondition_error("c_eta: dim must be 2 or 3");
    if (!(eta > 0.0)) throw precondition_error("c_eta: need eta > 0");
    if (dim == 2) {
        if (!(eta < 1.0))
            throw precondition_error("c_eta: the 2d log scale needs eta < 1");
        return 1.0 / std::sqrt(std::fabs(std::log(eta)));
    }
    if (eta > 1.0) throw precondition_error("c_eta: need eta <= 1");
    return std::sqrt(eta);
}

Regime classify_regime(int dim, double alpha) {
    if ((dim != 2 && dim != 3) || !(alpha >= 1.0)) return Regime::unsupported;
    if (dim == 2) {
        // polynomially scaled holes keep sigma -> 0 in two dimensions; the
        // alpha = 1 case uses the classical fixed-geometry cell problem
        return Regime::large_holes;
    }
    if (alpha > 3.0) return Regime::small_holes;
    if (alpha == 3.0) return Regime::critical;
    return Regime::large_holes;
}

double CellShape::inner_ratio(int dim) const {
    switch (kind) {
        case HoleShape::ball: return 1.0;
        case HoleShape::ellipsoid: return 0.5;
        case HoleShape::box: return 1.0 / std::sqrt(static_cast<double>(dim));
    }
    return 1.0;
}

bool CellShape::contains(int dim, const std::array<double, 3>& y, double scale) const {
    const double r = 0.5 * scale; // circumscribed radius
    switch (kind) {
        case HoleShape::ball: {
            double s = 0.0;
            for (int a = 0; a < dim; ++a) s += y[a] * y[a];
            return s <= r * r;
        }
        case HoleShape::ellipsoid: {
            double s = 0.0;
            for (int a = 0; a < dim; ++a) {
                const double semi = (a == major_axis) ? r : 0.5 * r;
                s += (y[a] / semi) * (y[a] / semi);
            }
            return s <= 1.0;
        }
        case HoleShape::box: {
            const double half = r / std::sqrt(static_cast<double>(dim));
            for (int a = 0; a < dim; ++a)
                if (std::fabs(y[a]) > half) return false;
            return true;
        }
    }
    return false;
}

double PerforationSpec::resolved_a() const {
    if (a_eps > 0.0) return a_eps;
    return std::pow(eps, alpha);
}

void PerforationSpec::validate() const {
    if (dim != 2 && dim != 3)
        throw precondition_error("perforation: dim must be 2 or 3");
    if (!(eps > 0.0) || eps > 1.0)
        throw precondition_error("perforation: need 0 < eps <= 1");
    if (a_eps == 0.0 && !(alpha >= 1.0))
        throw precondition_error("perforation: need alpha >= 1 when a_eps is derived");
    const double a = resolved_a();
    if (!(a > 0.0) || a > eps * (1.0 + 1e-12))
        throw precondition_error("perforation: need 0 < a_eps <= eps");
    if (!(delta > 0.0))
        throw precondition_error("perforation: hole radius ratio must be positive");
    if (!(delta3 > 0.0) || !(delta3 < 0.5))
        throw precondition_error("perforation: need 0 < delta3 < 1/2 so holes stay inside their cells");
    if (delta * a > delta3 * eps * (1.0 + 1e-12))
        throw precondition_error("perforation: hole radius " + std::to_string(delta * a) +
                                 " exceeds the delta3 safety ball " + std::to_string(delta3 * eps));
    for (int aidx = 0; aidx < dim; ++aidx)
        if (!(omega.hi[aidx] - omega.lo[aidx] > 0.0))
            throw precondition_error("perforation: omega sides must be positive");
    if (shape.major_axis < 0 || shape.major_axis >= dim)
        throw precondition_error("perforation: ellipsoid major axis outside [0, dim)");
}

// --- exact lattice inclusion ------------------------------------------------

namespace {

struct ScaledInt {
    __int128 m = 0; // value = m * 2^e
    int e = 0;
};

ScaledInt decompose(double x) {
    if (x == 0.0) return {0, 0};
    int e = 0;
    const double mant = std::frexp(x, &e);
    const double mi = std::ldexp(mant, 53); // 53-bit integer, exact
    return {static_cast<__int128>(mi), e - 53};
}

int sign_of(__int128 v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

/// Exact three-way comparison of a*2^ea vs b*2^eb.
int compare_scaled(ScaledInt A, ScaledInt B) {
    if (A.m == 0 && B.m == 0) return 0;
    if (A.m == 0) return -sign_of(B.m);
    if (B.m == 0) return sign_of(A.m);
    const int sa = sign_of(A.m), sb = sign_of(B.m);
    if (sa != sb) return sa > sb ? 1 : -1;
    // same sign; align exponents by shifting the larger-exponent operand
    auto dominates = [](__int128 m, int shift) {
        // would m * 2^shift exceed the magnitude of any 127-bit value?
        __int128 mag = m < 0 ? -m : m;
        int bits = 0;
        while (mag > 0) {
            mag >>= 1;
            ++bits;
        }
        return bits + shift > 126;
    };
    if (A.e >= B.e) {
        const int s = A.e - B.e;
        if (dominates(A.m, s)) return sa; // |A| overwhelms |B|
        const __int128 as = A.m << s;
        return as > B.m ? 1 : (as < B.m ? -1 : 0);
    }
    const int s = B.e - A.e;
    if (dominates(B.m, s)) return -sb;
    const __int128 bs = B.m << s;
    return A.m > bs ? 1 : (A.m < bs ? -1 : 0);
}

ScaledInt times_odd(ScaledInt x, long long odd) {
    x.m *= odd;
    return x;
}

} // namespace

bool lattice_cell_inside(double eps, long k, double lo, double hi) {
    // lo < eps*(k - 1/2)  and  eps*(k + 1/2) < hi, i.e. compare
    // eps*(2k -+ 1) against 2*lo and 2*hi without rounding.
    const ScaledInt se = decompose(eps);
    ScaledInt two_lo = decompose(lo);
    two_lo.e += 1;
    ScaledInt two_hi = decompose(hi);
    two_hi.e += 1;
    const ScaledInt left = times_odd(se, 2 * static_cast<long long>(k) - 1);
    const ScaledInt right = times_odd(se, 2 * static_cast<long long>(k) + 1);
    return compare_scaled(two_lo, left) < 0 && compare_scaled(right, two_hi) < 0;
}

// --- voxelizers -------------------------------------------------------------

namespace {

std::vector<long> lattice_range(double eps, double lo, double hi) {
    std::vector<long> ks;
    const long k0 = static_cast<long>(std::floor(lo / eps)) - 2;
    const long k1 = static_cast<long>(std::ceil(hi / eps)) + 2;
    for (long k = k0; k <= k1; ++k)
        if (lattice_cell_inside(eps, k, lo, hi)) ks.push_back(k);
    return ks;
}

} // namespace

PerforatedMask build_perforated_mask(const PerforationSpec& spec, int resolution) {
    spec.validate();
    const Grid grid = Grid::box_domain(spec.dim, spec.omega, resolution);
    const double h = grid.h;
    const double a = spec.resolved_a();
    const double scale = 2.0 * spec.delta * a; // circumscribed hole diameter

    PerforatedMask out;
    out.spec = spec;
    out.resolution = resolution;
    out.mask.grid = grid;
    out.mask.cell.assign(grid.cell_count(), 1);

    // lattice points whose closed eps-cell fits in the open box
    std::vector<std::vector<long>> per_axis(spec.dim);
    for (int ax = 0; ax < spec.dim; ++ax)
        per_axis[ax] = lattice_range(spec.eps, spec.omega.lo[ax], spec.omega.hi[ax]);
    std::vector<std::array<long, 3>> lattice;
    if (spec.dim == 2) {
        for (long kj : per_axis[1])
            for (long ki : per_axis[0]) lattice.push_back({ki, kj, 0});
    } else {
        for (long kk : per_axis[2])
            for (long kj : per_axis[1])
                for (long ki : per_axis[0]) lattice.push_back({ki, kj, kk});
    }
    out.hole_count = lattice.size();
    out.lattice = lattice;

    const double min_width = scale * ((spec.shape.kind == HoleShape::ellipsoid)  ? 0.5
                                      : (spec.shape.kind == HoleShape::box)      ? 1.0 / std::sqrt(double(spec.dim))
                                                                                 : 1.0);
    std::vector<std::size_t> captured(lattice.size(), 0);
    par::parallel_for(lattice.size(), [&](std::size_t lo_idx, std::size_t hi_idx) {
        for (std::size_t n = lo_idx; n < hi_idx; ++n) {
            std::array<double, 3> c{0, 0, 0};
            for (int ax = 0; ax < spec.dim; ++ax) c[ax] = spec.eps * static_cast<double>(lattice[n][ax]);
            std::array<int, 3> ilo{0, 0, 0}, ihi{0, 0, 0};
            for (int ax = 0; ax < spec.dim; ++ax) {
                const double r = 0.5 * scale;
                ilo[ax] = std::max(0, static_cast<int>(std::floor((c[ax] - r - grid.box.lo[ax]) / h - 0.5)));
                ihi[ax] = std::min(grid.cells[ax] - 1,
                                   static_cast<int>(std::ceil((c[ax] + r - grid.box.lo[ax]) / h + 0.5)));
            }
            std::size_t hits = 0;
            for (int k = ilo[2]; k <= (spec.dim == 3 ? ihi[2] : 0); ++k)
                for (int j = ilo[1]; j <= ihi[1]; ++j)
                    for (int i = ilo[0]; i <= ihi[0]; ++i) {
                        const std::array<double, 3> y{grid.center_coord(0, i) - c[0],
                                                      grid.center_coord(1, j) - c[1],
                                                      spec.dim == 3 ? grid.center_coord(2, k) - c[2] : 0.0};
                        if (spec.shape.contains(spec.dim, y, scale)) {
                            out.mask.cell[cell_index(grid, i, j, k)] = 0;
                            ++hits;
                        }
                    }
            captured[n] = hits;
        }
    });

    for (std::size_t n = 0; n < lattice.size(); ++n) {
        if (captured[n] == 0) {
            ++out.vanished_holes;
        } else if (min_width < 2.0 * h * (1.0 - 1e-9)) {
            throw geometry_error("perforation: hole spans fewer than two cells across its narrowest width (" +
                                 std::to_string(min_width / h) + " cells); refine the grid or drop the row");
        }
    }

    if (out.mask.fluid_cell_count() == 0)
        throw geometry_error("perforation: no fluid cells remain");

    out.mask.derive_faces();
    out.porosity = out.mask.porosity();
    return out;
}

CellGeometry build_cell_geometry(int dim, double eta, const CellShape& shape, int resolution) {
    if (dim != 2 && dim != 3)
        throw precondition_error("cell geometry: dim must be 2 or 3");
    if (!(eta > 0.0) || !(eta < 1.0))
        throw precondition_error("cell geometry: need 0 < eta < 1 (hole diameter relative to the cell)");
    const Grid grid = Grid::periodic_cell(dim, resolution);
    const double h = grid.h;
    // two fluid cell layers between the hole and the cell boundary keep the
    // velocity stencil away from the periodic wrap of the hole
    if (eta > 1.0 - 4.0 * h + 1e-12)
        throw geometry_error("cell geometry: hole of diameter " + std::to_string(eta) +
                             " leaves less than a two-cell fluid margin at resolution " +
                             std::to_string(resolution));

    CellGeometry out;
    out.dim = dim;
    out.eta = eta;
    out.shape = shape;
    out.resolution = resolution;
    out.mask.grid = grid;
    out.mask.cell.assign(grid.cell_count(), 1);

    std::size_t solid = 0;
    for (int k = 0; k < grid.cells[2]; ++k)
        for (int j = 0; j < grid.cells[1]; ++j)
            for (int i = 0; i < grid.cells[0]; ++i) {
                const std::array<double, 3> y{grid.center_coord(0, i), grid.center_coord(1, j),
                                              dim == 3 ? grid.center_coord(2, k) : 0.0};
                if (shape.contains(dim, y, eta)) {
                    out.mask.cell[cell_index(grid, i, j, k)] = 0;
                    ++solid;
                }
            }

    if (solid == 0)
        throw geometry_error("cell geometry: hole captured no cells; the obstacle-free periodic "
                             "problem is singular");
    // narrowest width: ball eta, ellipsoid eta/2, box eta/sqrt(d)
    const double width = (shape.kind == HoleShape::ball)        ? eta
                         : (shape.kind == HoleShape::ellipsoid) ? 0.5 * eta
                                                                : eta / std::sqrt(double(dim));
    if (width < 2.0 * h * (1.0 - 1e-9))
        throw geometry_error("cell geometry: hole spans fewer than two cells across its narrowest width");

    out.mask.derive_faces();
    out.fluid_fraction = out.mask.porosity();
    return out;
}

} // namespace perfhom
