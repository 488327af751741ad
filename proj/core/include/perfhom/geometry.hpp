#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "perfhom/grid.hpp"

// Perforated-domain geometry.  The domain is an axis-aligned box Omega
// minus a periodic array of holes: one hole of size a <= eps centered at
// eps*k for every lattice point k whose closed eps-cell lies inside Omega.
// Holes that are not strictly inside are simply omitted.
//
// The rescaled single-hole problem lives on the periodic unit cell
// Q0 = (-1/2,1/2)^d with a centered hole of relative diameter eta.
//
// The contrast number sigma decides which limit system governs eps -> 0:
//   d >= 3:  sigma = (eps^d / a^(d-2))^(1/2)
//   d == 2:  sigma = eps * |log(a/eps)|^(1/2)
// and c_eta = eps / sigma is the natural forcing scale of the cell problem.

namespace perfhom {

enum class HoleShape { ball, ellipsoid, box };
enum class Regime { small_holes, critical, large_holes, unsupported };

const char* to_string(HoleShape s);
const char* to_string(Regime r);

double sigma_eps(int dim, double eps, double a_eps);

/// c_eta from the hole-to-period ratio alone: eta^((d-2)/2) for d = 3,
/// |log eta|^(-1/2) for d = 2.
double c_eta(int dim, double eta);

/// Regime for holes scaling like a = eps^alpha (alpha >= 1).  Returns
/// unsupported rather than throwing for arguments outside the map.
Regime classify_regime(int dim, double alpha);

/// Hole shape descriptor used by both voxelizers.  The unit form has
/// circumscribed diameter 1: ball of radius 1/2, 2:1 ellipsoid with semi-axes
/// (1/2, 1/4), cube inscribed in the 1/2-ball.
struct CellShape {
    HoleShape kind = HoleShape::ball;
    int major_axis = 0; // ellipsoid orientation

    /// Ratio of the inscribed ball radius to the circumscribed radius.
    double inner_ratio(int dim) const;
    /// Membership test for the closed unit form, y relative to the center.
    bool contains(int dim, const std::array<double, 3>& y, double scale) const;
};

struct PerforationSpec {
    int dim = 3;
    Box omega;
    double eps = 0.25;
    /// Hole size; if zero it is resolved as eps^alpha.
    double a_eps = 0.0;
    double alpha = 0.0;
    CellShape shape;
    /// Outer hole radius as a fraction of a_eps (the delta2 ratio); the
    /// inscribed-ball ratio delta0 follows from the shape.
    double delta = 0.25;
    /// Safety ratio bounding the hole inside its eps-cell: the circumscribed
    /// delta*a ball must fit inside the delta3*eps ball, delta3 < 1/2.
    double delta3 = 0.4;

    double resolved_a() const;
    double hole_radius() const { return delta * resolved_a(); }
    void validate() const;
};

struct PerforatedMask {
    Mask mask;
    PerforationSpec spec;
    int resolution = 0;
    std::size_t hole_count = 0;     // lattice points with their cell inside Omega
    std::size_t vanished_holes = 0; // holes that captured no cell centers
    double porosity = 1.0;
    std::vector<std::array<long, 3>> lattice;
};

/// Voxelizes the perforated domain at the given resolution (cells along the
/// longest side).  A cell is solid when its center lies in a closed hole.
/// Throws geometry_error when a hole is captured but spans fewer than two
/// cells across its narrowest diameter, or when no fluid remains; holes
/// that captured nothing are counted in vanished_holes and left fluid.
PerforatedMask build_perforated_mask(const PerforationSpec& spec, int resolution);

struct CellGeometry {
    Mask mask; // periodic on Q0
    int dim = 0;
    double eta = 0.0;
    CellShape shape;
    int resolution = 0;
    double fluid_fraction = 1.0;
};

/// Voxelizes Q0 minus the centered hole eta*T0.  Requires 0 < eta < 1 and a
/// two-cell fluid margin between the hole and the cell boundary; the hole
/// must capture at least one cell (no-obstacle geometries are rejected
/// because the periodic viscous block would be singular).
CellGeometry build_cell_geometry(int dim, double eta, const CellShape& shape, int resolution);

/// Exact inclusion test of the closed scaled cube eps*[k-1/2, k+1/2]^d in the
/// open box, evaluated in integer arithmetic on the binary representations
/// (no rounding).  Exposed for the lattice-count property tests.
bool lattice_cell_inside(double eps, long k, double lo, double hi);

} // namespace perfhom
