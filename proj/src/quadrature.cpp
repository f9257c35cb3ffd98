#include "pointwave/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "pointwave/errors.hpp"

namespace pointwave {

GaussRule gauss_legendre(int n) {
    if (n < 1) throw ValidationError("gauss_legendre: order must be >= 1");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // Newton iteration on P_n from the Chebyshev-like initial guess; the
    // recurrence evaluates P_n and P_n' together.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

GaussRule gauss_legendre(int n, double a, double b) {
    GaussRule rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = mid + half * rule.nodes[i];
        rule.weights[i] *= half;
    }
    return rule;
}

double SphereRule::mean(const std::function<double(const Vec3&)>& f,
                        const Vec3& center, double radius) const {
    if (radius == 0.0) return f(center);
    double acc = 0.0;
    for (size_t i = 0; i < dirs.size(); ++i)
        acc += weights[i] * f(center + radius * dirs[i]);
    return acc;
}

double SphereRule::mean_axis(const std::function<double(const Vec3&)>& f,
                             const Vec3& center, double radius, const Vec3& axis) const {
    if (radius == 0.0) return f(center);
    const double an = axis.norm();
    if (an < 1e-14) return mean(f, center, radius);
    const Vec3 e3 = axis / an;
    const Vec3 helper = std::abs(e3.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    Vec3 e1{helper.y * e3.z - helper.z * e3.y, helper.z * e3.x - helper.x * e3.z,
            helper.x * e3.y - helper.y * e3.x};
    e1 = e1 / e1.norm();
    const Vec3 e2{e3.y * e1.z - e3.z * e1.y, e3.z * e1.x - e3.x * e1.z,
                  e3.x * e1.y - e3.y * e1.x};
    double acc = 0.0;
    for (size_t i = 0; i < dirs.size(); ++i) {
        const Vec3& d = dirs[i];
        const Vec3 rotated = e1 * d.x + e2 * d.y + e3 * d.z;
        acc += weights[i] * f(center + radius * rotated);
    }
    return acc;
}

SphereRule sphere_rule(int order) {
    if (order < 1) throw ValidationError("sphere_rule: order must be >= 1");
    SphereRule rule;
    rule.order = order;
    const int ntheta = (order + 2) / 2; // GL of n points is exact to degree 2n-1
    const int nphi = order + 1;
    GaussRule gl = gauss_legendre(ntheta); // nodes are cos(theta)
    const double wphi = 1.0 / nphi;
    rule.dirs.reserve(size_t(ntheta) * nphi);
    rule.weights.reserve(size_t(ntheta) * nphi);
    for (int i = 0; i < ntheta; ++i) {
        const double ct = gl.nodes[i];
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int j = 0; j < nphi; ++j) {
            const double phi = 2.0 * std::numbers::pi * j / nphi;
            rule.dirs.push_back({st * std::cos(phi), st * std::sin(phi), ct});
            rule.weights.push_back(0.5 * gl.weights[i] * wphi);
        }
    }
    return rule;
}

double BallQuadrature::integrate(const std::function<double(const Vec3&)>& f) const {
    return integrate(f, Vec3{});
}

double BallQuadrature::integrate(const std::function<double(const Vec3&)>& f,
                                 const Vec3& center) const {
    double acc = 0.0;
    for (size_t i = 0; i < rnodes.size(); ++i) {
        const double r = rnodes[i];
        double shell = sphere.mean(f, center, r);
        acc += rweights[i] * 4.0 * std::numbers::pi * r * r * shell;
    }
    return acc;
}

BallQuadrature ball_quadrature(double radius, int radial_order, int sphere_order) {
    if (radius <= 0.0) throw ValidationError("ball_quadrature: radius must be positive");
    if (radial_order < 1 || sphere_order < 1)
        throw ValidationError("ball_quadrature: orders must be >= 1");
    BallQuadrature q;
    q.radius = radius;
    GaussRule gl = gauss_legendre(radial_order, 0.0, radius);
    q.rnodes = gl.nodes;
    q.rweights = gl.weights;
    q.sphere = sphere_rule(sphere_order);
    return q;
}

} // namespace pointwave
