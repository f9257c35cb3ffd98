#include "pointwave/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pointwave/errors.hpp"

namespace pointwave {

std::string to_string(Shape s) {
    switch (s) {
        case Shape::ball: return "ball";
        case Shape::box: return "box";
        case Shape::ellipsoid: return "ellipsoid";
    }
    return "?";
}

Shape shape_from_string(const std::string& s) {
    if (s == "ball") return Shape::ball;
    if (s == "box") return Shape::box;
    if (s == "ellipsoid") return Shape::ellipsoid;
    throw ValidationError("unknown shape '" + s + "' (expected ball|box|ellipsoid)");
}

bool DomainSpec::contains(const Vec3& x) const {
    const Vec3 d = x - center;
    switch (shape) {
        case Shape::ball:
            return d.norm2() < radius * radius;
        case Shape::box:
            return std::abs(d.x) < half_widths.x && std::abs(d.y) < half_widths.y &&
                   std::abs(d.z) < half_widths.z;
        case Shape::ellipsoid: {
            const double s = d.x * d.x / (semi_axes.x * semi_axes.x) +
                             d.y * d.y / (semi_axes.y * semi_axes.y) +
                             d.z * d.z / (semi_axes.z * semi_axes.z);
            return s < 1.0;
        }
    }
    return false;
}

double DomainSpec::diameter() const {
    switch (shape) {
        case Shape::ball:
            return 2.0 * radius;
        case Shape::box:
            return 2.0 * std::sqrt(half_widths.norm2());
        case Shape::ellipsoid:
            return 2.0 * std::max({semi_axes.x, semi_axes.y, semi_axes.z});
    }
    return 0.0;
}

double DomainSpec::volume() const {
    switch (shape) {
        case Shape::ball:
            return 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
        case Shape::box:
            return 8.0 * half_widths.x * half_widths.y * half_widths.z;
        case Shape::ellipsoid:
            return 4.0 / 3.0 * std::numbers::pi * semi_axes.x * semi_axes.y * semi_axes.z;
    }
    return 0.0;
}

Vec3 DomainSpec::bounding_half_widths() const {
    switch (shape) {
        case Shape::ball:
            return {radius, radius, radius};
        case Shape::box:
            return half_widths;
        case Shape::ellipsoid:
            return semi_axes;
    }
    return {};
}

DomainGrid voxelize(const DomainSpec& spec, int resolution) {
    if (resolution < 8)
        throw ValidationError("voxelize: resolution must be >= 8 cells per diameter");
    DomainGrid grid;
    grid.h = spec.diameter() / resolution;
    grid.weight = grid.h * grid.h * grid.h;
    grid.lattice_origin = spec.center + Vec3{0.5, 0.5, 0.5} * grid.h;

    const Vec3 bb = spec.bounding_half_widths();
    const int nx = int(std::ceil(bb.x / grid.h)) + 1;
    const int ny = int(std::ceil(bb.y / grid.h)) + 1;
    const int nz = int(std::ceil(bb.z / grid.h)) + 1;

    std::array<int, 3> lo{1 << 30, 1 << 30, 1 << 30};
    std::array<int, 3> hi{-(1 << 30), -(1 << 30), -(1 << 30)};
    for (int i = -nx; i < nx; ++i)
        for (int j = -ny; j < ny; ++j)
            for (int k = -nz; k < nz; ++k) {
                const Vec3 c = grid.lattice_origin + Vec3{double(i), double(j), double(k)} * grid.h;
                if (!spec.contains(c)) continue;
                grid.coords.push_back({i, j, k});
                grid.centers.push_back(c);
                lo = {std::min(lo[0], i), std::min(lo[1], j), std::min(lo[2], k)};
                hi = {std::max(hi[0], i), std::max(hi[1], j), std::max(hi[2], k)};
            }
    if (grid.centers.empty())
        throw ValidationError("voxelize: degenerate domain, no cell center lies inside");
    grid.min_coord = lo;
    grid.dims = {hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1};
    return grid;
}

std::function<bool(const Vec3&)> scale_membership(const DomainSpec& spec, double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw ValidationError("scale_membership: eps must lie in (0,1)");
    const DomainSpec s = spec;
    return [s, eps](const Vec3& x) {
        return s.contains(s.center + (x - s.center) / eps);
    };
}

} // namespace pointwave
