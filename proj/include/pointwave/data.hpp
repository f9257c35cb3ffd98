#pragma once

#include <optional>
#include <vector>

#include "pointwave/vec3.hpp"

namespace pointwave {

/// Polynomial in r^2: p(r) = sum_j c[j] r^(2j). The radial Laplacian
/// g'' + 2g'/r maps this family to itself, which is what keeps every
/// Laplacian stack of the data analytic.
struct EvenPoly {
    std::vector<double> c;

    double eval_r2(double r2) const {
        double acc = 0.0;
        for (size_t j = c.size(); j-- > 0;) acc = acc * r2 + c[j];
        return acc;
    }
    double eval(double r) const { return eval_r2(r * r); }
};

/// Delta applied to an even radial polynomial: c_j r^(2j) -> 2j(2j+1) c_j r^(2j-2).
EvenPoly radial_laplacian(const EvenPoly& p);

/// p'(r)/r = sum_j 2j c_j r^(2j-2); gradient of p(|x-c|) is (p'/r)(x-c).
EvenPoly derivative_over_r(const EvenPoly& p);

/// P(s) = int_0^s sigma p(sigma) d sigma, again an even polynomial.
EvenPoly radial_primitive(const EvenPoly& p);

/// amp * (1 - (r/R)^2)^p on [0, R); C^(p-1) across r = R.
EvenPoly bump_poly(double amp, double R, int p);

/// One smooth compactly supported radial datum translated to `center`,
/// with its Laplacian stacks precomputed symbolically.
struct DataComponent {
    Vec3 center;
    double radius = 0.0;
    int smoothness = 7; // bump exponent p; component is C^(p-1)

    EvenPoly val;          // g
    EvenPoly grad_over_r;  // g'/r
    EvenPoly lap;          // Delta g
    EvenPoly lap2;         // Delta^2 g
    EvenPoly prim_val;     // int_0^s sigma g
    EvenPoly prim_lap;     // int_0^s sigma Delta g
    EvenPoly prim_lap2;    // int_0^s sigma Delta^2 g

    /// How deep the provided stack goes: 0 value only, 1 adds Delta, 2 adds Delta^2.
    int stacks = 2;

    bool supported_at(double r2) const { return r2 < radius * radius; }

    double eval(const Vec3& x) const;
    Vec3 grad(const Vec3& x) const;
    double lap_eval(const Vec3& x) const;
    double lap2_eval(const Vec3& x) const;

    enum class Stack { value, lap, lap2 };

    /// Exact spherical mean of a stack of this component over the sphere
    /// |x - o| = t:
    ///   (1/(2 t d)) int_{|t-d|}^{t+d} s g(s) ds,  d = |center - o|,
    /// evaluated through the matching primitive.
    double mean_about(const Vec3& o, double t, Stack which) const;

    /// Value of the clamped primitive P(min(|s|, R)); even in s.
    double prim_eval(const EvenPoly& prim, double s) const;
};

DataComponent make_bump(const Vec3& center, double radius, double amplitude, int smoothness);

/// Smooth compactly supported window in time, (1 - ((t-t0)/w)^2)^p on
/// |t - t0| < w.
struct TimeProfile {
    double t0 = 0.0;
    double width = 0.0;
    EvenPoly p;
    double eval(double t) const {
        const double u = t - t0;
        return (u * u < width * width) ? p.eval(u) : 0.0;
    }
};

TimeProfile make_time_bump(double t0, double width, double amplitude, int smoothness);

/// f(t, x) = g(t) * F(x) with F a radial bump; Delta f = g(t) * Delta F.
struct SeparableSource {
    TimeProfile time;
    DataComponent spatial;
    double eval(double t, const Vec3& x) const { return time.eval(t) * spatial.eval(x); }
    double lap_eval(double t, const Vec3& x) const { return time.eval(t) * spatial.lap_eval(x); }
};

/// Initial data (phi, psi) and optional source f, all with analytic
/// Laplacian stacks and support disjoint from a ball about the origin.
struct CauchyBundle {
    std::vector<DataComponent> phi;
    std::vector<DataComponent> psi;
    std::vector<SeparableSource> sources;

    bool empty() const { return phi.empty() && psi.empty() && sources.empty(); }
    bool has_source() const { return !sources.empty(); }

    /// Clearance: distance from the origin to the closest support point.
    double rho_min() const;
    /// Outer radius of the union of supports about the origin.
    double rho_max() const;
    /// Latest time at which any source is active.
    double source_end() const;

    int phi_stacks() const;
    int psi_stacks() const;
    int source_stacks() const;

    double eval_phi(const Vec3& x) const;
    Vec3 grad_phi(const Vec3& x) const;
    double lap_phi(const Vec3& x) const;
    double lap2_phi(const Vec3& x) const;
    double eval_psi(const Vec3& x) const;
    double lap_psi(const Vec3& x) const;
    double eval_f(double t, const Vec3& x) const;
    double lap_f(double t, const Vec3& x) const;

    /// Checks support clearance (rho_min > 0) and throws otherwise.
    void validate() const;
};

} // namespace pointwave
