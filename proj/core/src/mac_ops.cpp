#include "perfhom/mac_ops.hpp"

#include <cmath>

#include "perfhom/parallel.hpp"
#include "field_walk.hpp"

namespace perfhom {

using detail::at_or_zero;
using detail::mask_at;
using detail::walk;

MacOps::MacOps(const Mask& mask) : mask_(&mask), h_(mask.grid.h), fluid_cells_(mask.fluid_cell_count()) {}

void MacOps::viscous(const FaceField& u, FaceField& out, double visc, double shift) const {
    const Grid& g = grid();
    const double ih2 = visc / (h_ * h_);
    const int twod = 2 * g.dim;
    for (int a = 0; a < g.dim; ++a) {
        const auto ext = g.face_extent(a);
        const auto& src = u.comp[a];
        auto& dst = out.comp[a];
        const auto& fm = mask_->face[a];
        const std::size_t sx = 1;
        const std::size_t sy = static_cast<std::size_t>(ext[0]);
        const std::size_t sz = static_cast<std::size_t>(ext[0]) * ext[1];
        walk(ext, [&](std::size_t f, int i, int j, int k) {
            if (!fm[f]) {
                dst[f] = 0.0;
                return;
            }
            bool border = (i == 0 || i == ext[0] - 1 || j == 0 || j == ext[1] - 1);
            if (g.dim == 3) border = border || (k == 0 || k == ext[2] - 1);
            double acc;
            if (!border) {
                acc = twod * src[f] - src[f - sx] - src[f + sx] - src[f - sy] - src[f + sy];
                if (g.dim == 3) acc -= src[f - sz] + src[f + sz];
            } else {
                acc = twod * src[f];
                acc -= at_or_zero(g, src, ext, i - 1, j, k) + at_or_zero(g, src, ext, i + 1, j, k);
                acc -= at_or_zero(g, src, ext, i, j - 1, k) + at_or_zero(g, src, ext, i, j + 1, k);
                if (g.dim == 3)
                    acc -= at_or_zero(g, src, ext, i, j, k - 1) + at_or_zero(g, src, ext, i, j, k + 1);
            }
            dst[f] = ih2 * acc + shift * src[f];
        });
    }
}

double MacOps::dirichlet_energy(const FaceField& u) const {
    const Grid& g = grid();
    double total = 0.0;
    double hpow = 1.0; // h^(d-2)
    for (int a = 0; a < g.dim - 2; ++a) hpow *= h_;
    for (int a = 0; a < g.dim; ++a) {
        const auto ext = g.face_extent(a);
        const auto& src = u.comp[a];
        const auto& fm = mask_->face[a];
        std::vector<double> contrib(src.size(), 0.0);
        walk(ext, [&](std::size_t f, int i, int j, int k) {
            if (!fm[f]) return;
            const double uf = src[f];
            double acc = 0.0;
            for (int b = 0; b < g.dim; ++b) {
                for (int s = -1; s <= 1; s += 2) {
                    const int ni = i + (b == 0 ? s : 0);
                    const int nj = j + (b == 1 ? s : 0);
                    const int nk = k + (b == 2 ? s : 0);
                    const double d = uf - at_or_zero(g, src, ext, ni, nj, nk);
                    // fluid-fluid links are visited from both ends
                    acc += mask_at(g, fm, ext, ni, nj, nk) ? 0.5 * d * d : d * d;
                }
            }
            contrib[f] = acc;
        });
        total += par::sum(contrib.data(), contrib.size());
    }
    return total * hpow;
}

void MacOps::divergence(const FaceField& u, CellField& out) const {
    const Grid& g = grid();
    const double ih = 1.0 / h_;
    const auto& cm = mask_->cell;
    std::array<std::array<int, 3>, 3> fext;
    for (int a = 0; a < g.dim; ++a) fext[a] = g.face_extent(a);
    walk(g.cells, [&](std::size_t c, int i, int j, int k) {
        if (!cm[c]) {
            out.v[c] = 0.0;
            return;
        }
        double acc = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            const int ri = i + (a == 0), rj = j + (a == 1), rk = k + (a == 2);
            acc += at_or_zero(g, u.comp[a], fext[a], ri, rj, rk) -
                   u.comp[a][flat_index(fext[a], i, j, k)];
        }
        out.v[c] = acc * ih;
    });
}

void MacOps::gradient(const CellField& p, FaceField& out) const {
    const Grid& g = grid();
    const double ih = 1.0 / h_;
    for (int a = 0; a < g.dim; ++a) {
        const auto ext = g.face_extent(a);
        const auto& fm = mask_->face[a];
        auto& dst = out.comp[a];
        walk(ext, [&](std::size_t f, int i, int j, int k) {
            if (!fm[f]) {
                dst[f] = 0.0;
                return;
            }
            const int li = i - (a == 0), lj = j - (a == 1), lk = k - (a == 2);
            dst[f] = (p.v[cell_index(g, i, j, k)] -
                      at_or_zero(g, p.v, g.cells, li, lj, lk)) * ih;
            // fluid faces always have both cells inside, so at_or_zero only
            // wraps the periodic left neighbour
        });
    }
}

void MacOps::cell_laplacian(const CellField& p, CellField& out) const {
    const Grid& g = grid();
    const double ih2 = 1.0 / (h_ * h_);
    const auto& cm = mask_->cell;
    std::array<std::array<int, 3>, 3> fext;
    for (int a = 0; a < g.dim; ++a) fext[a] = g.face_extent(a);
    walk(g.cells, [&](std::size_t c, int i, int j, int k) {
        if (!cm[c]) {
            out.v[c] = 0.0;
            return;
        }
        const double pc = p.v[c];
        double acc = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            // left face (a; i,j,k), right face (a; +e_a)
            if (mask_at(g, mask_->face[a], fext[a], i, j, k)) {
                const int li = i - (a == 0), lj = j - (a == 1), lk = k - (a == 2);
                acc += at_or_zero(g, p.v, g.cells, li, lj, lk) - pc;
            }
            const int ri = i + (a == 0), rj = j + (a == 1), rk = k + (a == 2);
            if (mask_at(g, mask_->face[a], fext[a], ri, rj, rk)) {
                acc += at_or_zero(g, p.v, g.cells, ri, rj, rk) - pc;
            }
        }
        out.v[c] = acc * ih2;
    });
}

void MacOps::scalar_dirichlet(const CellField& u, CellField& out) const {
    const Grid& g = grid();
    const double ih2 = 1.0 / (h_ * h_);
    const auto& cm = mask_->cell;
    walk(g.cells, [&](std::size_t c, int i, int j, int k) {
        if (!cm[c]) {
            out.v[c] = 0.0;
            return;
        }
        const double uc = u.v[c];
        double acc = 0.0;
        for (int b = 0; b < g.dim; ++b) {
            for (int s = -1; s <= 1; s += 2) {
                const int ni = i + (b == 0 ? s : 0);
                const int nj = j + (b == 1 ? s : 0);
                const int nk = k + (b == 2 ? s : 0);
                if (mask_at(g, cm, g.cells, ni, nj, nk)) {
                    acc += uc - at_or_zero(g, u.v, g.cells, ni, nj, nk);
                } else {
                    // boundary on the interface half a cell away
                    acc += 2.0 * uc;
                }
            }
        }
        out.v[c] = acc * ih2;
    });
}

void MacOps::transport(const FaceField& u, const FaceField& w, FaceField& out, bool transpose) const {
    const Grid& g = grid();
    const double ih = 1.0 / h_;
    std::array<std::array<int, 3>, 3> fext;
    for (int a = 0; a < g.dim; ++a) fext[a] = g.face_extent(a);

    // interpolants of the frozen advecting field:
    //   ubar_a at cell J       = (u_a(J) + u_a(J+e_a)) / 2
    //   ubar_b at corner K(a,b) = (u_b(K - e_a) + u_b(K)) / 2
    auto ubar_cell = [&](int a, int i, int j, int k) {
        const int ri = i + (a == 0), rj = j + (a == 1), rk = k + (a == 2);
        return 0.5 * (at_or_zero(g, u.comp[a], fext[a], i, j, k) +
                      at_or_zero(g, u.comp[a], fext[a], ri, rj, rk));
    };
    auto ubar_corner = [&](int a, int b, int i, int j, int k) {
        const int li = i - (a == 0), lj = j - (a == 1), lk = k - (a == 2);
        return 0.5 * (at_or_zero(g, u.comp[b], fext[b], li, lj, lk) +
                      at_or_zero(g, u.comp[b], fext[b], i, j, k));
    };

    for (int a = 0; a < g.dim; ++a) {
        const auto ext = fext[a];
        const auto& wa = w.comp[a];
        auto& dst = out.comp[a];
        if (!transpose) {
            // divergence form: d/dx_b of (ubar_b * wbar_a) gathered per face
            auto wbar_cell = [&](int i, int j, int k) {
                const int ri = i + (a == 0), rj = j + (a == 1), rk = k + (a == 2);
                return 0.5 * (at_or_zero(g, wa, ext, i, j, k) + at_or_zero(g, wa, ext, ri, rj, rk));
            };
            auto wbar_corner = [&](int b, int i, int j, int k) {
                const int li = i - (b == 0), lj = j - (b == 1), lk = k - (b == 2);
                return 0.5 * (at_or_zero(g, wa, ext, li, lj, lk) + at_or_zero(g, wa, ext, i, j, k));
            };
            walk(ext, [&](std::size_t f, int i, int j, int k) {
                double acc = 0.0;
                {
                    // along the component's own axis: cell-centered fluxes
                    const int li = i - (a == 0), lj = j - (a == 1), lk = k - (a == 2);
                    acc += ubar_cell(a, i, j, k) * wbar_cell(i, j, k) -
                           ubar_cell(a, li, lj, lk) * wbar_cell(li, lj, lk);
                }
                for (int b = 0; b < g.dim; ++b) {
                    if (b == a) continue;
                    const int ri = i + (b == 0), rj = j + (b == 1), rk = k + (b == 2);
                    acc += ubar_corner(a, b, ri, rj, rk) * wbar_corner(b, ri, rj, rk) -
                           ubar_corner(a, b, i, j, k) * wbar_corner(b, i, j, k);
                }
                dst[f] = acc * ih;
            });
        } else {
            // exact transpose of the divergence form, assembled factor by factor
            auto tcell = [&](int i, int j, int k) {
                const int ri = i + (a == 0), rj = j + (a == 1), rk = k + (a == 2);
                return ubar_cell(a, i, j, k) *
                       (at_or_zero(g, wa, ext, i, j, k) - at_or_zero(g, wa, ext, ri, rj, rk)) * ih;
            };
            auto scorner = [&](int b, int i, int j, int k) {
                const int li = i - (b == 0), lj = j - (b == 1), lk = k - (b == 2);
                return ubar_corner(a, b, i, j, k) *
                       (at_or_zero(g, wa, ext, li, lj, lk) - at_or_zero(g, wa, ext, i, j, k)) * ih;
            };
            walk(ext, [&](std::size_t f, int i, int j, int k) {
                double acc = 0.0;
                {
                    const int li = i - (a == 0), lj = j - (a == 1), lk = k - (a == 2);
                    acc += 0.5 * (tcell(li, lj, lk) + tcell(i, j, k));
                }
                for (int b = 0; b < g.dim; ++b) {
                    if (b == a) continue;
                    const int ri = i + (b == 0), rj = j + (b == 1), rk = k + (b == 2);
                    acc += 0.5 * (scorner(b, i, j, k) + scorner(b, ri, rj, rk));
                }
                dst[f] = acc;
            });
        }
    }
    mask_faces(out);
}

void MacOps::convection(const FaceField& u, const FaceField& w, FaceField& out) const {
    FaceField bt = FaceField::zeros(grid());
    transport(u, w, out, false);
    transport(u, w, bt, true);
    axpby(-0.5, bt, 0.5, out);
    mask_faces(out);
}

void MacOps::mask_faces(FaceField& u) const {
    const Grid& g = grid();
    for (int a = 0; a < g.dim; ++a) {
        const auto& fm = mask_->face[a];
        auto& arr = u.comp[a];
        par::parallel_for(arr.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t f = lo; f < hi; ++f)
                if (!fm[f]) arr[f] = 0.0;
        });
    }
}

void MacOps::mask_cells(CellField& p) const {
    const auto& cm = mask_->cell;
    par::parallel_for(p.v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t c = lo; c < hi; ++c)
            if (!cm[c]) p.v[c] = 0.0;
    });
}

double MacOps::fluid_mean(const CellField& p) const {
    // relies on p being masked (zero at solid cells)
    return par::sum(p.v.data(), p.v.size()) / static_cast<double>(fluid_cells_);
}

void MacOps::project_zero_mean(CellField& p) const {
    const double m = fluid_mean(p);
    const auto& cm = mask_->cell;
    par::parallel_for(p.v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t c = lo; c < hi; ++c)
            if (cm[c]) p.v[c] -= m;
    });
}

} // namespace perfhom
