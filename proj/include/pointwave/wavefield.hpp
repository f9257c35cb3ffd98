#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pointwave/vec3.hpp"

namespace pointwave {

/// Uniform axis-aligned lattice of cell centers.
struct GridBox {
    Vec3 origin;                  // center of cell (0,0,0)
    double h = 0.0;
    std::array<int, 3> dims{0, 0, 0};

    size_t size() const { return size_t(dims[0]) * dims[1] * dims[2]; }
    size_t index(int i, int j, int k) const {
        return (size_t(i) * dims[1] + j) * dims[2] + k;
    }
    Vec3 center(int i, int j, int k) const {
        return origin + Vec3{double(i), double(j), double(k)} * h;
    }
};

/// Box symmetric about the origin with an even cell count per axis, so no
/// cell center sits exactly at the origin.
GridBox centered_box(double half_width, double h);

/// Scalar field samples on a grid at a set of times.
struct WaveField {
    GridBox box;
    std::vector<double> times;
    std::vector<std::vector<double>> data; // [time][cell]
    std::vector<std::uint8_t> mask;        // empty, or per-cell 1 = valid

    bool masked(size_t cell) const { return !mask.empty() && mask[cell] == 0; }
};

} // namespace pointwave
