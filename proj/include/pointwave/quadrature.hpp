#pragma once

#include <functional>
#include <vector>

#include "pointwave/vec3.hpp"

namespace pointwave {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussRule gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
GaussRule gauss_legendre(int n, double a, double b);

/// Unit-sphere quadrature exact for spherical harmonics of degree <= order.
/// Weights are normalized to sum to 1, so applying the rule yields a
/// spherical mean; multiply by 4*pi*r^2 for surface integrals.
struct SphereRule {
    int order = 0;
    std::vector<Vec3> dirs;
    std::vector<double> weights;

    /// Mean of f over the sphere of given radius about center.
    double mean(const std::function<double(const Vec3&)>& f,
                const Vec3& center, double radius) const;

    /// Same rule applied in a frame whose polar axis is `axis`. For
    /// integrands that are axisymmetric about that direction (means of
    /// radial data seen from off-center) this puts the Gauss nodes across
    /// the support cap instead of spreading them over the whole sphere.
    double mean_axis(const std::function<double(const Vec3&)>& f, const Vec3& center,
                     double radius, const Vec3& axis) const;
};

/// Product rule: Gauss-Legendre in cos(theta) x uniform azimuth.
SphereRule sphere_rule(int order);

/// Tensor rule over the ball B_R: Gauss-Legendre radial nodes on [0, R]
/// against a sphere rule. The r^2 Jacobian is applied inside integrate(),
/// which also absorbs the removable 1/|y| factor of retarded integrands.
struct BallQuadrature {
    double radius = 0.0;
    std::vector<double> rnodes;
    std::vector<double> rweights; // plain GL weights on [0, R]
    SphereRule sphere;

    double integrate(const std::function<double(const Vec3&)>& f) const;
    double integrate(const std::function<double(const Vec3&)>& f,
                     const Vec3& center) const;
};

BallQuadrature ball_quadrature(double radius, int radial_order, int sphere_order);

} // namespace pointwave
