#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace perfhom {

/// Input data violates a documented precondition (bad parameter ranges,
/// inconsistent grids, geometry that cannot be represented).
class precondition_error : public std::invalid_argument {
public:
    explicit precondition_error(const std::string& what)
        : std::invalid_argument(what) {}
};

/// Geometry cannot be voxelized under the requested resolution
/// (under-resolved holes, hole touching the cell boundary, empty fluid).
class geometry_error : public precondition_error {
public:
    explicit geometry_error(const std::string& what)
        : precondition_error(what) {}
};

/// Right-hand side is incompatible with the operator's kernel or range
/// (e.g. nonzero-mean divergence data, forcing not orthogonal to a
/// singular system's null space).
class compatibility_error : public std::invalid_argument {
public:
    explicit compatibility_error(const std::string& what)
        : std::invalid_argument(what) {}
};

/// An iterative solver failed to reach its tolerance.  Carries the residual
/// history so callers can report how the iteration stalled.
class convergence_error : public std::runtime_error {
public:
    convergence_error(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), residual_history(std::move(history)) {}

    std::vector<double> residual_history;
};

/// Two supposedly equivalent evaluations of the same quantity disagree
/// beyond the admissible tolerance band.
class consistency_error : public std::runtime_error {
public:
    explicit consistency_error(const std::string& what)
        : std::runtime_error(what) {}
};

/// Config file cannot be parsed or contains unknown/ill-typed keys.
class config_error : public std::runtime_error {
public:
    config_error(const std::string& what, int line = 0)
        : std::runtime_error(what), line_number(line) {}

    int line_number = 0;
};

} // namespace perfhom
