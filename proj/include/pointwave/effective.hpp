#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pointwave/data.hpp"
#include "pointwave/freewave.hpp"
#include "pointwave/newton.hpp"
#include "pointwave/wavefield.hpp"

namespace pointwave {

/// Sampled modulation signal q(t) with its per-mode breakdown. The totals
/// are the fixed-order sums of the stored per-mode samples.
struct ModulationSignal {
    enum class Route { closed_form, duhamel_ode };

    double dt = 0.0;
    std::vector<double> t;
    std::vector<std::vector<double>> per_mode; // [mode][sample]
    std::vector<double> total;
    Route route = Route::closed_form;

    int modes() const { return int(per_mode.size()); }
    double horizon() const { return t.empty() ? 0.0 : t.back(); }

    /// Linear interpolation; 0 for tau <= 0. Throws past the horizon.
    double eval(double tau) const;
};

std::string to_string(ModulationSignal::Route r);

struct ClosedFormOptions {
    int radial_order = 48;  // GL nodes on the support shell
    int sphere_order = 47;  // angular rule for the shell means
    int source_gl = 32;     // nodes of the inner time-convolution integral
};

/// q_k(t) = c_k int_{|y|<t} [ (1 - cos((t-|y|)/sqrt(lam_k))) lap^2 phi(y)
///          + lam_k^{-1/2} sin((t-|y|)/sqrt(lam_k)) lap psi(y) ] / (4 pi |y|) dy,
/// plus, per source, the retarded double integral
/// c_k lam_k^{-1/2} int_0^t int_{|y|<t-s} sin((t-s-|y|)/sqrt(lam_k))
///          lap f(s,y) / (4 pi |y|) dy ds,
/// all evaluated by ball quadrature restricted to the data support shell.
ModulationSignal modulation_closed_form(const SpectralDecomposition& dec,
                                        const CauchyBundle& data, double dt, double T,
                                        int K = 0, const ClosedFormOptions& opts = {});

/// q_k from the driven-oscillator Cauchy problem
///   lam_k qdd_k = -q_k + c_k h(t),  q_k(0) = qd_k(0) = 0,
/// integrated with the exact sine kernel against piecewise-linear h;
/// unconditionally stable for the stiff small-lambda modes. Requires the
/// sampling to resolve the fastest requested mode: dt <= sqrt(lam_K)/8.
ModulationSignal modulation_duhamel(const SpectralDecomposition& dec,
                                    const ForcingSignal& h, int K = 0);

/// Per-mode a-priori bound |q_k| <= c_k (2 I_phi + lam_k^{-1/2} (I_psi + I_f)),
/// with I_* the shell integrals of |data| / (4 pi |y|); controls the
/// mode-truncation tail.
std::vector<double> mode_tail_bounds(const SpectralDecomposition& dec,
                                     const CauchyBundle& data,
                                     const ClosedFormOptions& opts = {});

/// u_eff(t,x) = u_free + u_hat_free
///              + eps (eps^2 - 1) H(t-|x|) q(t-|x|) / (4 pi |x|).
struct EffectiveField {
    double eps = 0.0;
    const CauchyBundle* data = nullptr;
    const ModulationSignal* q = nullptr;
    double mask_radius = 0.0; // cells closer to the origin carry no correction

    double correction(double t, const Vec3& x) const;
    double eval(double t, const Vec3& x) const;
};

/// Samples u_eff over a grid at the given times; cells inside the mask
/// radius are flagged in the wave field's mask and hold the free field
/// only. Throws when a retarded time falls past the modulation horizon.
WaveField effective_field(const CauchyBundle& data, const ModulationSignal& q, double eps,
                          const std::vector<double>& times, const GridBox& box,
                          double mask_radius = 0.0);

} // namespace pointwave
