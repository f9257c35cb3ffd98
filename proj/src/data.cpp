#include "pointwave/data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pointwave/errors.hpp"

namespace pointwave {

EvenPoly radial_laplacian(const EvenPoly& p) {
    EvenPoly out;
    if (p.c.size() <= 1) {
        out.c = {0.0};
        return out;
    }
    out.c.assign(p.c.size() - 1, 0.0);
    for (size_t j = 1; j < p.c.size(); ++j)
        out.c[j - 1] = p.c[j] * double(2 * j) * double(2 * j + 1);
    return out;
}

EvenPoly derivative_over_r(const EvenPoly& p) {
    EvenPoly out;
    if (p.c.size() <= 1) {
        out.c = {0.0};
        return out;
    }
    out.c.assign(p.c.size() - 1, 0.0);
    for (size_t j = 1; j < p.c.size(); ++j)
        out.c[j - 1] = p.c[j] * double(2 * j);
    return out;
}

EvenPoly radial_primitive(const EvenPoly& p) {
    EvenPoly out;
    out.c.assign(p.c.size() + 1, 0.0);
    for (size_t j = 0; j < p.c.size(); ++j)
        out.c[j + 1] = p.c[j] / double(2 * j + 2);
    return out;
}

EvenPoly bump_poly(double amp, double R, int p) {
    if (R <= 0.0) throw ValidationError("bump radius must be positive");
    if (p < 1) throw ValidationError("bump smoothness exponent must be >= 1");
    EvenPoly out;
    out.c.assign(p + 1, 0.0);
    double binom = 1.0;
    const double q = -1.0 / (R * R);
    double qj = 1.0;
    for (int j = 0; j <= p; ++j) {
        out.c[j] = amp * binom * qj;
        binom = binom * double(p - j) / double(j + 1);
        qj *= q;
    }
    return out;
}

double DataComponent::eval(const Vec3& x) const {
    const double r2 = (x - center).norm2();
    return supported_at(r2) ? val.eval_r2(r2) : 0.0;
}

Vec3 DataComponent::grad(const Vec3& x) const {
    const Vec3 d = x - center;
    const double r2 = d.norm2();
    if (!supported_at(r2)) return {};
    return d * grad_over_r.eval_r2(r2);
}

double DataComponent::lap_eval(const Vec3& x) const {
    const double r2 = (x - center).norm2();
    return supported_at(r2) ? lap.eval_r2(r2) : 0.0;
}

double DataComponent::lap2_eval(const Vec3& x) const {
    const double r2 = (x - center).norm2();
    return supported_at(r2) ? lap2.eval_r2(r2) : 0.0;
}

double DataComponent::prim_eval(const EvenPoly& prim, double s) const {
    const double a = std::min(std::abs(s), radius);
    return prim.eval(a);
}

double DataComponent::mean_about(const Vec3& o, double t, Stack which) const {
    const EvenPoly& g = which == Stack::value ? val : which == Stack::lap ? lap : lap2;
    const EvenPoly& prim =
        which == Stack::value ? prim_val : which == Stack::lap ? prim_lap : prim_lap2;
    const double d = (center - o).norm();
    if (t < 0.0) return 0.0;
    if (d < 1e-14) // concentric: the profile is already radial about o
        return t < radius ? g.eval(t) : 0.0;
    if (t < 1e-14) {
        const double r2 = d * d;
        return supported_at(r2) ? g.eval_r2(r2) : 0.0;
    }
    const double lo = std::abs(t - d);
    if (lo >= radius) return 0.0;
    const double hi = t + d;
    return (prim_eval(prim, hi) - prim_eval(prim, lo)) / (2.0 * t * d);
}

DataComponent make_bump(const Vec3& center, double radius, double amplitude, int smoothness) {
    DataComponent c;
    c.center = center;
    c.radius = radius;
    c.smoothness = smoothness;
    c.val = bump_poly(amplitude, radius, smoothness);
    c.grad_over_r = derivative_over_r(c.val);
    c.lap = radial_laplacian(c.val);
    c.lap2 = radial_laplacian(c.lap);
    c.prim_val = radial_primitive(c.val);
    c.prim_lap = radial_primitive(c.lap);
    c.prim_lap2 = radial_primitive(c.lap2);
    c.stacks = 2;
    return c;
}

TimeProfile make_time_bump(double t0, double width, double amplitude, int smoothness) {
    TimeProfile tp;
    tp.t0 = t0;
    tp.width = width;
    tp.p = bump_poly(amplitude, width, smoothness);
    return tp;
}

namespace {
template <class F>
void for_each_component(const CauchyBundle& b, F&& f) {
    for (const auto& c : b.phi) f(c);
    for (const auto& c : b.psi) f(c);
    for (const auto& s : b.sources) f(s.spatial);
}
} // namespace

double CauchyBundle::rho_min() const {
    double m = std::numeric_limits<double>::infinity();
    for_each_component(*this, [&](const DataComponent& c) {
        m = std::min(m, c.center.norm() - c.radius);
    });
    return m;
}

double CauchyBundle::rho_max() const {
    double m = 0.0;
    for_each_component(*this, [&](const DataComponent& c) {
        m = std::max(m, c.center.norm() + c.radius);
    });
    return m;
}

double CauchyBundle::source_end() const {
    double m = 0.0;
    for (const auto& s : sources) m = std::max(m, s.time.t0 + s.time.width);
    return m;
}

int CauchyBundle::phi_stacks() const {
    int m = 2;
    for (const auto& c : phi) m = std::min(m, c.stacks);
    return m;
}

int CauchyBundle::psi_stacks() const {
    int m = 2;
    for (const auto& c : psi) m = std::min(m, c.stacks);
    return m;
}

int CauchyBundle::source_stacks() const {
    int m = 2;
    for (const auto& s : sources) m = std::min(m, s.spatial.stacks);
    return m;
}

double CauchyBundle::eval_phi(const Vec3& x) const {
    double acc = 0.0;
    for (const auto& c : phi) acc += c.eval(x);
    return acc;
}

Vec3 CauchyBundle::grad_phi(const Vec3& x) const {
    Vec3 acc;
    for (const auto& c : phi) acc += c.grad(x);
    return acc;
}

double CauchyBundle::lap_phi(const Vec3& x) const {
    double acc = 0.0;
    for (const auto& c : phi) acc += c.lap_eval(x);
    return acc;
}

double CauchyBundle::lap2_phi(const Vec3& x) const {
    double acc = 0.0;
    for (const auto& c : phi) acc += c.lap2_eval(x);
    return acc;
}

double CauchyBundle::eval_psi(const Vec3& x) const {
    double acc = 0.0;
    for (const auto& c : psi) acc += c.eval(x);
    return acc;
}

double CauchyBundle::lap_psi(const Vec3& x) const {
    double acc = 0.0;
    for (const auto& c : psi) acc += c.lap_eval(x);
    return acc;
}

double CauchyBundle::eval_f(double t, const Vec3& x) const {
    double acc = 0.0;
    for (const auto& s : sources) acc += s.eval(t, x);
    return acc;
}

double CauchyBundle::lap_f(double t, const Vec3& x) const {
    double acc = 0.0;
    for (const auto& s : sources) acc += s.lap_eval(t, x);
    return acc;
}

void CauchyBundle::validate() const {
    if (empty()) return;
    if (!(rho_min() > 0.0))
        throw ValidationError(
            "data support must stay clear of the scatterer location (rho_min > 0)");
}

} // namespace pointwave
