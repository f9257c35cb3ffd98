#include "pointwave/effective.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pointwave/errors.hpp"

namespace pointwave {

double ModulationSignal::eval(double tau) const {
    if (tau <= 0.0) return 0.0;
    if (t.empty() || tau > t.back() + 1e-12)
        throw ValidationError("modulation signal: retarded time beyond the sampled horizon");
    const double pos = std::min(tau, t.back()) / dt;
    const size_t i = std::min(size_t(pos), total.size() - 2);
    const double frac = pos - double(i);
    return total[i] * (1.0 - frac) + total[i + 1] * frac;
}

std::string to_string(ModulationSignal::Route r) {
    return r == ModulationSignal::Route::closed_form ? "closed-form" : "duhamel-ode";
}

namespace {

int resolve_mode_count(const SpectralDecomposition& dec, int K, const char* who) {
    if (K == 0) K = dec.modes();
    if (K < 1 || K > dec.modes())
        throw ValidationError(std::string(who) + ": requested mode count out of range");
    return K;
}

} // namespace

ModulationSignal modulation_closed_form(const SpectralDecomposition& dec,
                                        const CauchyBundle& data, double dt, double T,
                                        int K, const ClosedFormOptions& opts) {
    if (!(dt > 0.0) || !(T > 0.0))
        throw ValidationError("modulation_closed_form: dt and T must be positive");
    K = resolve_mode_count(dec, K, "modulation_closed_form");
    data.validate();
    if (!data.phi.empty() && data.phi_stacks() < 2)
        throw CapabilityError("modulation_closed_form: phi lacks the lap^2 stack");
    if (!data.psi.empty() && data.psi_stacks() < 1)
        throw CapabilityError("modulation_closed_form: psi lacks the Laplacian stack");
    if (data.has_source() && data.source_stacks() < 1)
        throw CapabilityError("modulation_closed_form: source lacks the Laplacian stack");

    const int n = int(std::ceil(T / dt - 1e-12));
    ModulationSignal q;
    q.dt = dt;
    q.route = ModulationSignal::Route::closed_form;
    q.t.resize(n + 1);
    q.per_mode.assign(K, std::vector<double>(n + 1, 0.0));
    q.total.assign(n + 1, 0.0);

    const SphereRule rule = sphere_rule(opts.sphere_order);
    const double rho_lo = data.empty() ? 0.0 : std::max(0.0, data.rho_min());
    const double rho_hi = data.empty() ? 0.0 : data.rho_max();
    const GaussRule conv = gauss_legendre(opts.source_gl);

    std::vector<double> inv_sq(K);
    for (int k = 0; k < K; ++k) inv_sq[k] = 1.0 / std::sqrt(dec.eigenvalues[k]);

    for (int i = 0; i <= n; ++i) {
        const double t = i * dt;
        q.t[i] = t;
        if (data.empty() || t <= rho_lo) continue;
        const double hi = std::min(t, rho_hi);
        GaussRule gl = gauss_legendre(opts.radial_order, rho_lo, hi);
        for (int j = 0; j < opts.radial_order; ++j) {
            const double r = gl.nodes[j];
            const double wr = gl.weights[j] * r;
            double m_phi = 0.0, m_psi = 0.0;
            for (const auto& c : data.phi)
                m_phi += component_stack_mean(c, DataComponent::Stack::lap2, Vec3{}, r, rule);
            for (const auto& c : data.psi)
                m_psi += component_stack_mean(c, DataComponent::Stack::lap, Vec3{}, r, rule);
            for (int k = 0; k < K; ++k) {
                const double arg = (t - r) * inv_sq[k];
                double val = (1.0 - std::cos(arg)) * m_phi + inv_sq[k] * std::sin(arg) * m_psi;
                q.per_mode[k][i] += dec.couplings[k] * wr * val;
            }
            for (const auto& src : data.sources) {
                const double m_f = component_stack_mean(src.spatial, DataComponent::Stack::lap,
                                                        Vec3{}, r, rule);
                if (m_f == 0.0) continue;
                // inner convolution int_0^{t-r} g(s) sin((t-r-s)/sqrt(lam)) ds
                const double tau = t - r;
                const double lo_s = std::max(0.0, src.time.t0 - src.time.width);
                const double hi_s = std::min(tau, src.time.t0 + src.time.width);
                if (lo_s >= hi_s) continue;
                const double mid = 0.5 * (lo_s + hi_s), half = 0.5 * (hi_s - lo_s);
                for (int k = 0; k < K; ++k) {
                    double cv = 0.0;
                    for (size_t a = 0; a < conv.nodes.size(); ++a) {
                        const double s = mid + half * conv.nodes[a];
                        cv += half * conv.weights[a] * src.time.eval(s) *
                              std::sin((tau - s) * inv_sq[k]);
                    }
                    q.per_mode[k][i] += dec.couplings[k] * inv_sq[k] * wr * m_f * cv;
                }
            }
        }
    }
    for (int i = 0; i <= n; ++i) {
        double s = 0.0;
        for (int k = 0; k < K; ++k) s += q.per_mode[k][i];
        q.total[i] = s;
    }
    return q;
}

ModulationSignal modulation_duhamel(const SpectralDecomposition& dec, const ForcingSignal& h,
                                    int K) {
    K = resolve_mode_count(dec, K, "modulation_duhamel");
    if (h.t.size() < 2)
        throw ValidationError("modulation_duhamel: forcing signal too short");
    const double lam_min = dec.eigenvalues[K - 1];
    const double dt_required = std::sqrt(lam_min) / 8.0;
    if (h.dt > dt_required + 1e-15) {
        std::ostringstream os;
        os << "modulation_duhamel: forcing step " << h.dt << " too coarse for mode " << K
           << "; the fastest mode needs dt <= " << dt_required;
        throw ValidationError(os.str());
    }

    const size_t n = h.t.size();
    ModulationSignal q;
    q.dt = h.dt;
    q.t = h.t;
    q.route = ModulationSignal::Route::duhamel_ode;
    q.per_mode.assign(K, std::vector<double>(n, 0.0));
    q.total.assign(n, 0.0);

    for (int k = 0; k < K; ++k) {
        const double lam = dec.eigenvalues[k];
        const double c = dec.couplings[k];
        const double om = 1.0 / std::sqrt(lam);
        const double co = std::cos(om * h.dt), si = std::sin(om * h.dt);
        double qk = 0.0, vk = 0.0;
        auto& out = q.per_mode[k];
        for (size_t i = 0; i + 1 < n; ++i) {
            // exact propagation over one step with h linear in s:
            // q(s) = A cos(om u) + B sin(om u) + c (a + b u),  u = s - t_i
            const double a = h.h[i];
            const double b = (h.h[i + 1] - h.h[i]) / h.dt;
            const double A = qk - c * a;
            const double B = (vk - c * b) / om;
            qk = A * co + B * si + c * h.h[i + 1];
            vk = -A * om * si + B * om * co + c * b;
            out[i + 1] = qk;
        }
    }
    for (size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 0; k < K; ++k) s += q.per_mode[k][i];
        q.total[i] = s;
    }
    return q;
}

std::vector<double> mode_tail_bounds(const SpectralDecomposition& dec,
                                     const CauchyBundle& data,
                                     const ClosedFormOptions& opts) {
    const SphereRule rule = sphere_rule(opts.sphere_order);
    const double rho_lo = data.empty() ? 0.0 : std::max(0.0, data.rho_min());
    const double rho_hi = data.empty() ? 0.0 : data.rho_max();
    double i_phi = 0.0, i_psi = 0.0, i_f = 0.0;
    if (!data.empty() && rho_hi > rho_lo) {
        GaussRule gl = gauss_legendre(opts.radial_order, rho_lo, rho_hi);
        for (int j = 0; j < opts.radial_order; ++j) {
            const double r = gl.nodes[j];
            const double wr = gl.weights[j] * r;
            for (const auto& c : data.phi)
                i_phi += wr * rule.mean_axis(
                                  [&](const Vec3& p) { return std::abs(c.lap2_eval(p)); },
                                  Vec3{}, r, c.center);
            for (const auto& c : data.psi)
                i_psi += wr * rule.mean_axis(
                                  [&](const Vec3& p) { return std::abs(c.lap_eval(p)); },
                                  Vec3{}, r, c.center);
            for (const auto& src : data.sources) {
                const double m = rule.mean_axis(
                    [&](const Vec3& p) { return std::abs(src.spatial.lap_eval(p)); }, Vec3{}, r,
                    src.spatial.center);
                // L1 norm of the time profile bounds the convolution
                GaussRule tg = gauss_legendre(opts.source_gl, src.time.t0 - src.time.width,
                                              src.time.t0 + src.time.width);
                double l1 = 0.0;
                for (size_t a = 0; a < tg.nodes.size(); ++a)
                    l1 += tg.weights[a] * std::abs(src.time.eval(tg.nodes[a]));
                i_f += wr * m * l1;
            }
        }
    }
    std::vector<double> out(dec.modes());
    for (int k = 0; k < dec.modes(); ++k) {
        const double inv_sq = 1.0 / std::sqrt(dec.eigenvalues[k]);
        out[k] = dec.couplings[k] * (2.0 * i_phi + inv_sq * (i_psi + i_f));
    }
    return out;
}

double EffectiveField::correction(double t, const Vec3& x) const {
    const double r = x.norm();
    if (r < 1e-12) return 0.0; // singular point of the spherical profile
    const double tau = t - r;
    if (tau <= 0.0) return 0.0;
    return eps * (eps * eps - 1.0) * q->eval(tau) / (4.0 * std::numbers::pi * r);
}

double EffectiveField::eval(double t, const Vec3& x) const {
    double u = free_field_exact(*data, t, x);
    if (x.norm() >= mask_radius) u += correction(t, x);
    return u;
}

WaveField effective_field(const CauchyBundle& data, const ModulationSignal& q, double eps,
                          const std::vector<double>& times, const GridBox& box,
                          double mask_radius) {
    if (!(eps > 0.0 && eps < 1.0))
        throw ValidationError("effective_field: eps must lie in (0,1)");
    EffectiveField field{eps, &data, &q, mask_radius};
    // coverage check up-front: the largest retarded time over the grid
    double max_tau = 0.0;
    for (double t : times) max_tau = std::max(max_tau, t);
    if (max_tau > q.horizon() + 1e-12)
        throw ValidationError("effective_field: modulation horizon does not cover the "
                              "requested retarded times");
    WaveField out;
    out.box = box;
    out.times = times;
    out.data.assign(times.size(), std::vector<double>(box.size(), 0.0));
    out.mask.assign(box.size(), 1);
    for (size_t ti = 0; ti < times.size(); ++ti) {
        auto& slab = out.data[ti];
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < box.dims[0]; ++i)
            for (int j = 0; j < box.dims[1]; ++j)
                for (int k = 0; k < box.dims[2]; ++k) {
                    const size_t idx = box.index(int(i), j, k);
                    slab[idx] = field.eval(times[ti], box.center(int(i), j, k));
                }
    }
    for (int i = 0; i < box.dims[0]; ++i)
        for (int j = 0; j < box.dims[1]; ++j)
            for (int k = 0; k < box.dims[2]; ++k)
                if (box.center(i, j, k).norm() < mask_radius)
                    out.mask[box.index(i, j, k)] = 0;
    return out;
}

} // namespace pointwave
