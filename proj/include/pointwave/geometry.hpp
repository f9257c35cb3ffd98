#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "pointwave/vec3.hpp"

namespace pointwave {

enum class Shape { ball, box, ellipsoid };

std::string to_string(Shape s);
Shape shape_from_string(const std::string& s);

/// Analytic inclusion shape Omega: open, bounded, connected, containing
/// its center point y0.
struct DomainSpec {
    Shape shape = Shape::ball;
    Vec3 center{0, 0, 0};
    double radius = 1.0;                  // ball
    Vec3 half_widths{0.5, 0.5, 0.5};      // box
    Vec3 semi_axes{1.0, 0.8, 0.6};        // ellipsoid

    bool contains(const Vec3& x) const;
    double diameter() const;
    double volume() const; // exact analytic volume
    /// Half-widths of the axis-aligned bounding box about center.
    Vec3 bounding_half_widths() const;
};

/// Cell-center voxelization of Omega on an axis-aligned lattice of pitch h.
/// Cell centers sit at center + (i + 1/2) h, so the lattice is symmetric
/// about the domain center. All weights equal h^3.
struct DomainGrid {
    double h = 0.0;
    Vec3 lattice_origin;                       // position of integer cell (0,0,0)
    std::vector<std::array<int, 3>> coords;    // lattice coordinates per cell
    std::vector<Vec3> centers;
    double weight = 0.0;                       // h^3, uniform
    std::array<int, 3> min_coord{0, 0, 0};     // bounding lattice extents
    std::array<int, 3> dims{0, 0, 0};

    size_t size() const { return centers.size(); }
    double volume() const { return weight * double(centers.size()); }
};

/// resolution = cells per diameter; requires resolution >= 8.
DomainGrid voxelize(const DomainSpec& spec, int resolution);

/// Membership predicate for the rescaled inclusion
/// Omega_eps = { y0 + eps (x - y0) : x in Omega }, 0 < eps < 1.
std::function<bool(const Vec3&)> scale_membership(const DomainSpec& spec, double eps);

} // namespace pointwave
