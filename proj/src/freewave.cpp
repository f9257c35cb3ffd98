#include "pointwave/freewave.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pointwave/errors.hpp"

namespace pointwave {

namespace {

// sphere of radius t about x misses the support ball of component c
bool misses(const DataComponent& c, double t, const Vec3& x) {
    return std::abs((x - c.center).norm() - t) >= c.radius;
}

enum class Integrand { value, lap, lap2, grad_dot_omega };

// Sphere mean of one component stack about x. Seen from x, the component is
// axisymmetric, so the azimuth integrates out exactly and the mean reduces
// to a polar integral in mu = cos(theta). On the support cap the integrand
// is a polynomial in mu (s^2 is linear in mu), so Gauss nodes restricted to
// the cap integrate it exactly; the rule order fixes the node count.
double component_mean(const DataComponent& c, Integrand which, const Vec3& x, double r,
                      const SphereRule& rule) {
    if (r <= 0.0) {
        const double r2 = (x - c.center).norm2();
        if (!c.supported_at(r2)) return 0.0;
        switch (which) {
            case Integrand::value: return c.val.eval_r2(r2);
            case Integrand::lap: return c.lap.eval_r2(r2);
            case Integrand::lap2: return c.lap2.eval_r2(r2);
            case Integrand::grad_dot_omega: return 0.0; // direction-free limit
        }
    }
    if (misses(c, r, x)) return 0.0;
    const double d = (c.center - x).norm();
    const double R = c.radius;
    if (d < 1e-14) {
        // concentric: the profile itself is the mean
        if (!c.supported_at(r * r)) return 0.0;
        switch (which) {
            case Integrand::value: return c.val.eval(r);
            case Integrand::lap: return c.lap.eval(r);
            case Integrand::lap2: return c.lap2.eval(r);
            case Integrand::grad_dot_omega: return r * c.grad_over_r.eval(r);
        }
    }
    // support cap: s(mu)^2 = r^2 + d^2 - 2 r d mu < R^2
    const double mu_lo = std::max(-1.0, (r * r + d * d - R * R) / (2.0 * r * d));
    const int ntheta = std::max(8, (rule.order + 2) / 2);
    GaussRule gl = gauss_legendre(ntheta, mu_lo, 1.0);
    double acc = 0.0;
    for (int i = 0; i < ntheta; ++i) {
        const double mu = gl.nodes[i];
        const double s2 = std::max(0.0, r * r + d * d - 2.0 * r * d * mu);
        if (s2 >= R * R) continue;
        double f = 0.0;
        switch (which) {
            case Integrand::value: f = c.val.eval_r2(s2); break;
            case Integrand::lap: f = c.lap.eval_r2(s2); break;
            case Integrand::lap2: f = c.lap2.eval_r2(s2); break;
            case Integrand::grad_dot_omega:
                f = c.grad_over_r.eval_r2(s2) * (r - d * mu);
                break;
        }
        acc += gl.weights[i] * f;
    }
    return 0.5 * acc;
}

} // namespace

double spherical_mean(const FieldFn& f, const Vec3& center, double radius,
                      const SphereRule& rule) {
    if (radius < 0.0) throw ValidationError("spherical_mean: radius must be >= 0");
    return rule.mean(f, center, radius);
}

double kirchhoff_eval(const CauchyBundle& data, double t, const Vec3& x,
                      const SphereRule& rule) {
    if (t < 0.0) throw ValidationError("kirchhoff_eval: t must be >= 0");
    if (t == 0.0) return data.eval_phi(x);
    double acc = 0.0;
    for (const auto& c : data.phi) {
        // d/dt(t M phi) in gradient form: M phi + t M(grad phi . omega)
        acc += component_mean(c, Integrand::value, x, t, rule) +
               t * component_mean(c, Integrand::grad_dot_omega, x, t, rule);
    }
    for (const auto& c : data.psi)
        acc += t * component_mean(c, Integrand::value, x, t, rule);
    return acc;
}

double duhamel_eval(const CauchyBundle& data, double t, const Vec3& x, double ds,
                    const SphereRule& rule) {
    if (t < 0.0) throw ValidationError("duhamel_eval: t must be >= 0");
    if (!(ds > 0.0)) throw ValidationError("duhamel_eval: ds must be positive");
    if (!data.has_source() || t == 0.0) return 0.0;
    int n = int(std::ceil(t / ds));
    n += n % 2; // Simpson needs an even interval count
    n = std::max(n, 2);
    const double step = t / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double s = i * step;
        const double radius = t - s;
        double shell = 0.0;
        for (const auto& src : data.sources) {
            const double g = src.time.eval(s);
            if (g == 0.0) continue;
            shell += g * component_mean(src.spatial, Integrand::value, x, radius, rule);
        }
        const double wgt = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += wgt * radius * shell;
    }
    return acc * step / 3.0;
}

namespace {

// t * M[lap phi](t), odd in t; evaluated with the sphere rule
double t_mean_lap_phi(const CauchyBundle& data, double t, const SphereRule& rule) {
    const double r = std::abs(t);
    double m = 0.0;
    for (const auto& c : data.phi) m += component_mean(c, Integrand::lap, Vec3{}, r, rule);
    return t * m;
}

double source_term(const CauchyBundle& data, double t, const SphereRule& rule, double ds) {
    if (!data.has_source() || t == 0.0) return 0.0;
    int n = int(std::ceil(t / ds));
    n += n % 2;
    n = std::max(n, 2);
    const double step = t / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double s = i * step;
        const double radius = t - s;
        double shell = 0.0;
        for (const auto& src : data.sources) {
            const double g = src.time.eval(s);
            if (g == 0.0) continue;
            shell += g * component_mean(src.spatial, Integrand::lap, Vec3{}, radius, rule);
        }
        const double wgt = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += wgt * radius * shell;
    }
    return acc * step / 3.0;
}

} // namespace

ForcingSignal forcing_signal(const CauchyBundle& data, double dt, double T,
                             const SphereRule& rule, const ForcingOptions& opts) {
    if (!(dt > 0.0) || !(T > 0.0))
        throw ValidationError("forcing_signal: dt and T must be positive");
    data.validate();
    if (!data.empty() && dt > data.rho_min() / 8.0)
        throw ValidationError("forcing_signal: dt must be <= rho_min/8 to resolve the "
                              "wavefront arrival");
    if (!data.phi.empty() && data.phi_stacks() < 1)
        throw CapabilityError("forcing_signal: phi lacks its Laplacian stack");
    if (!data.psi.empty() && data.psi_stacks() < 1)
        throw CapabilityError("forcing_signal: psi lacks its Laplacian stack");
    if (data.has_source() && data.source_stacks() < 1)
        throw CapabilityError("forcing_signal: source lacks its Laplacian stack");

    ForcingSignal sig;
    sig.dt = dt;
    const int n = int(std::ceil(T / dt - 1e-12));
    const double delta = dt / opts.deriv_refine;
    const double source_ds = opts.source_ds > 0.0 ? opts.source_ds : dt;
    sig.t.resize(n + 1);
    sig.h.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double t = i * dt;
        sig.t[i] = t;
        double h = 0.0;
        if (!data.phi.empty()) {
            // 4th-order central differences of the odd function t M[lap phi](t)
            const double fm2 = t_mean_lap_phi(data, t - 2 * delta, rule);
            const double fm1 = t_mean_lap_phi(data, t - delta, rule);
            const double fp1 = t_mean_lap_phi(data, t + delta, rule);
            const double fp2 = t_mean_lap_phi(data, t + 2 * delta, rule);
            h += (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * delta);
        }
        if (!data.psi.empty() && t > 0.0) {
            double m = 0.0;
            for (const auto& c : data.psi)
                m += component_mean(c, Integrand::lap, Vec3{}, t, rule);
            h += t * m;
        }
        h += source_term(data, t, rule, source_ds);
        sig.h[i] = h;
    }
    return sig;
}

ForcingSignal forcing_signal_ball_form(const CauchyBundle& data, double dt, double T,
                                       const SphereRule& rule, int radial_order) {
    if (!(dt > 0.0) || !(T > 0.0))
        throw ValidationError("forcing_signal: dt and T must be positive");
    if (!data.phi.empty() && data.phi_stacks() < 2)
        throw CapabilityError("forcing_signal_ball_form: phi lacks the lap^2 stack");
    ForcingSignal sig;
    sig.dt = dt;
    const int n = int(std::ceil(T / dt - 1e-12));
    sig.t.resize(n + 1);
    sig.h.resize(n + 1);
    const double rho_lo = data.empty() ? 0.0 : std::max(0.0, data.rho_min());
    const double rho_hi = data.empty() ? 0.0 : data.rho_max();
    for (int i = 0; i <= n; ++i) {
        const double t = i * dt;
        sig.t[i] = t;
        double h = 0.0;
        if (!data.phi.empty() && t > rho_lo) {
            // int_{|y|<t} lap^2 phi / (4 pi |y|) dy = int r M[lap^2 phi](r) dr
            const double hi = std::min(t, rho_hi);
            GaussRule gl = gauss_legendre(radial_order, rho_lo, hi);
            for (int j = 0; j < radial_order; ++j) {
                const double r = gl.nodes[j];
                double m = 0.0;
                for (const auto& c : data.phi)
                    m += component_mean(c, Integrand::lap2, Vec3{}, r, rule);
                h += gl.weights[j] * r * m;
            }
        }
        if (!data.psi.empty() && t > 0.0) {
            double m = 0.0;
            for (const auto& c : data.psi)
                m += component_mean(c, Integrand::lap, Vec3{}, t, rule);
            h += t * m;
        }
        h += source_term(data, t, rule, dt);
        sig.h[i] = h;
    }
    return sig;
}

namespace {

// clamped s * g(|s|) for the d'Alembert reduction
double odd_profile(const DataComponent& c, double s) {
    const double a = std::abs(s);
    if (a >= c.radius) return 0.0;
    return s * c.val.eval(a);
}

double dalembert_phi(const DataComponent& c, double t, double r) {
    if (r < 1e-9) {
        // lim_{r->0} = d/ds (s g(s)) at s = t
        if (t >= c.radius) return 0.0;
        return c.val.eval(t) + t * t * c.grad_over_r.eval(t);
    }
    return (odd_profile(c, r + t) + odd_profile(c, r - t)) / (2.0 * r);
}

double dalembert_psi(const DataComponent& c, double t, double r) {
    if (r < 1e-9) {
        if (t >= c.radius) return 0.0;
        return t * c.val.eval(t);
    }
    const double hi = c.prim_eval(c.prim_val, r + t);
    const double lo = c.prim_eval(c.prim_val, r - t);
    return (hi - lo) / (2.0 * r);
}

// retarded Duhamel integral for one separable source with exact means;
// the s-integral is split at the kinks of the mean profile
double duhamel_exact(const SeparableSource& src, double t, const Vec3& x) {
    const double lo0 = std::max(0.0, src.time.t0 - src.time.width);
    const double hi0 = std::min(t, src.time.t0 + src.time.width);
    if (lo0 >= hi0) return 0.0;
    const double d = (src.spatial.center - x).norm();
    const double R = src.spatial.radius;
    // kinks where |(t-s) - d| = R or t-s = d + R
    std::vector<double> cuts{lo0, hi0};
    for (double rho : {d - R, d + R, R - d})
        if (rho > 0.0 && t - rho > lo0 && t - rho < hi0) cuts.push_back(t - rho);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
        if (cuts[seg + 1] - cuts[seg] < 1e-15) continue;
        GaussRule gl = gauss_legendre(32, cuts[seg], cuts[seg + 1]);
        for (int i = 0; i < 32; ++i) {
            const double s = gl.nodes[i];
            const double radius = t - s;
            acc += gl.weights[i] * src.time.eval(s) * radius *
                   src.spatial.mean_about(x, radius, DataComponent::Stack::value);
        }
    }
    return acc;
}

} // namespace

double free_field_exact(const CauchyBundle& data, double t, const Vec3& x) {
    double acc = 0.0;
    for (const auto& c : data.phi) acc += dalembert_phi(c, t, (x - c.center).norm());
    for (const auto& c : data.psi) acc += dalembert_psi(c, t, (x - c.center).norm());
    for (const auto& s : data.sources) acc += duhamel_exact(s, t, x);
    return acc;
}

double component_stack_mean(const DataComponent& c, DataComponent::Stack which,
                            const Vec3& x, double r, const SphereRule& rule) {
    switch (which) {
        case DataComponent::Stack::value:
            return component_mean(c, Integrand::value, x, r, rule);
        case DataComponent::Stack::lap:
            return component_mean(c, Integrand::lap, x, r, rule);
        case DataComponent::Stack::lap2:
            return component_mean(c, Integrand::lap2, x, r, rule);
    }
    return 0.0;
}

} // namespace pointwave
