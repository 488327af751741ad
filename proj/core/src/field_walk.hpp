#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "perfhom/grid.hpp"
#include "perfhom/parallel.hpp"

namespace perfhom::detail {

/// Parallel sweep over a flat (i,j,k) index space in storage order.
template <class Body>
void walk(const std::array<int, 3>& ext, Body&& body) {
    const std::size_t n = static_cast<std::size_t>(ext[0]) * ext[1] * ext[2];
    par::parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        int i = static_cast<int>(lo % ext[0]);
        int j = static_cast<int>((lo / ext[0]) % ext[1]);
        int k = static_cast<int>(lo / (static_cast<std::size_t>(ext[0]) * ext[1]));
        for (std::size_t f = lo; f < hi; ++f) {
            body(f, i, j, k);
            if (++i == ext[0]) {
                i = 0;
                if (++j == ext[1]) {
                    j = 0;
                    ++k;
                }
            }
        }
    });
}

/// Read with closure semantics: periodic wraps, walls read zero outside.
inline double at_or_zero(const Grid& g, const std::vector<double>& arr, const std::array<int, 3>& ext,
                         int i, int j, int k) {
    std::array<int, 3> c{i, j, k};
    for (int b = 0; b < g.dim; ++b) {
        if (g.periodic())
            c[b] = wrap_index(c[b], ext[b]);
        else if (c[b] < 0 || c[b] >= ext[b])
            return 0.0;
    }
    return arr[flat_index(ext, c[0], c[1], c[2])];
}

inline bool mask_at(const Grid& g, const std::vector<std::uint8_t>& arr, const std::array<int, 3>& ext,
                    int i, int j, int k) {
    std::array<int, 3> c{i, j, k};
    for (int b = 0; b < g.dim; ++b) {
        if (g.periodic())
            c[b] = wrap_index(c[b], ext[b]);
        else if (c[b] < 0 || c[b] >= ext[b])
            return false;
    }
    return arr[flat_index(ext, c[0], c[1], c[2])] != 0;
}

} // namespace perfhom::detail
