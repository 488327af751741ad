#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "perfhom/errors.hpp"

// Staggered marker-and-cell layout on a uniform box.  Pressure and other
// scalars live at cell centers; velocity component a lives on the faces
// orthogonal to axis a.  Face slot i along its own axis is the LEFT face of
// cell i, so a periodic axis with n cells carries n faces and a walled axis
// carries n+1 (slots 0 and n are the walls).
//
// Obstacles are voxelized: a cell is solid or fluid, and a face is a fluid
// unknown only when both adjacent cells are fluid.  All fields keep
// full-grid storage with zeros at non-fluid slots, which makes zero
// extension to the unperforated box a plain copy.

namespace perfhom {

enum class Closure { periodic, walls };

struct Box {
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{1.0, 1.0, 1.0};
};

struct Grid {
    int dim = 2;
    Closure closure = Closure::walls;
    std::array<int, 3> cells{1, 1, 1};
    double h = 0.0;
    Box box;

    /// Periodic unit cell Q0 = (-1/2,1/2)^dim with res cells per axis.
    static Grid periodic_cell(int dim, int res);

    /// Walled axis-aligned box; res counts cells along the longest side and
    /// every side must be an integer multiple of the resulting spacing.
    static Grid box_domain(int dim, const Box& box, int res);

    bool periodic() const { return closure == Closure::periodic; }
    std::size_t cell_count() const {
        return static_cast<std::size_t>(cells[0]) * cells[1] * cells[2];
    }
    std::array<int, 3> face_extent(int axis) const {
        std::array<int, 3> e = cells;
        if (!periodic() && axis < dim) e[axis] += 1;
        return e;
    }
    std::size_t face_count(int axis) const {
        const auto e = face_extent(axis);
        return static_cast<std::size_t>(e[0]) * e[1] * e[2];
    }
    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= h;
        return v;
    }
    double center_coord(int axis, int i) const { return box.lo[axis] + (i + 0.5) * h; }
    double face_coord(int axis, int i) const { return box.lo[axis] + i * h; }

    bool same_layout(const Grid& o) const {
        return dim == o.dim && closure == o.closure && cells == o.cells;
    }
};

inline int wrap_index(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

inline std::size_t flat_index(const std::array<int, 3>& ext, int i, int j, int k) {
    return (static_cast<std::size_t>(k) * ext[1] + j) * ext[0] + i;
}

inline std::size_t cell_index(const Grid& g, int i, int j, int k) {
    return flat_index(g.cells, i, j, k);
}

struct CellField {
    Grid grid;
    std::vector<double> v;

    static CellField zeros(const Grid& g) { return CellField{g, std::vector<double>(g.cell_count(), 0.0)}; }
    double& at(int i, int j, int k) { return v[cell_index(grid, i, j, k)]; }
    double at(int i, int j, int k) const { return v[cell_index(grid, i, j, k)]; }
    std::size_t size() const { return v.size(); }
};

struct FaceField {
    Grid grid;
    std::array<std::vector<double>, 3> comp;

    static FaceField zeros(const Grid& g) {
        FaceField f;
        f.grid = g;
        for (int a = 0; a < g.dim; ++a) f.comp[a].assign(g.face_count(a), 0.0);
        return f;
    }
    std::size_t total_size() const {
        std::size_t n = 0;
        for (int a = 0; a < grid.dim; ++a) n += comp[a].size();
        return n;
    }
};

/// Cell and face fluid masks (1 = fluid unknown, 0 = solid/wall).
struct Mask {
    Grid grid;
    std::vector<std::uint8_t> cell;
    std::array<std::vector<std::uint8_t>, 3> face;

    static Mask all_fluid(const Grid& g);

    /// Recomputes face masks from cell masks: a face is fluid iff both
    /// adjacent cells are fluid; wall slots are always solid.
    void derive_faces();

    std::size_t fluid_cell_count() const;
    std::size_t fluid_face_count() const;
    double porosity() const;

    /// Cross-checks the stored face masks against the cell masks.
    /// Throws consistency_error on any orphan fluid face.
    void validate() const;

    /// FNV-1a over dims, closure and the cell bytes; used to tie field dumps
    /// to the geometry they were computed on.
    std::uint64_t hash() const;
};

// Elementwise helpers.  All reductions go through perfhom::par and are
// bit-reproducible for any thread count.

void fill(CellField& x, double value);
void fill(FaceField& x, double value);
void copy_into(const CellField& src, CellField& dst);
void copy_into(const FaceField& src, FaceField& dst);
void axpy(double a, const CellField& x, CellField& y);   // y += a*x
void axpy(double a, const FaceField& x, FaceField& y);
void axpby(double a, const CellField& x, double b, CellField& y); // y = a*x + b*y
void axpby(double a, const FaceField& x, double b, FaceField& y);
void scale(double a, CellField& x);
void scale(double a, FaceField& x);

double dot(const CellField& x, const CellField& y);      // plain l2, no h^d
double dot(const FaceField& x, const FaceField& y);
double norm2(const CellField& x);
double norm2(const FaceField& x);
double max_abs(const CellField& x);
double max_abs(const FaceField& x);

} // namespace perfhom
