#pragma once

#include <functional>
#include <vector>

#include "pointwave/data.hpp"
#include "pointwave/quadrature.hpp"

namespace pointwave {

using FieldFn = std::function<double(const Vec3&)>;

/// Mu(r) = (1/4 pi r^2) oint_{|x-c|=r} u dsigma; the field value at the
/// center when r = 0.
double spherical_mean(const FieldFn& f, const Vec3& center, double radius,
                      const SphereRule& rule);

/// Free wave field by Kirchhoff's formula,
///   u(t,x) = d/dt ( t M_t phi ) + t M_t psi,
/// with the time derivative realized in gradient form,
///   d/dt ( t M_t phi ) = M_t phi + t M_t ( grad phi . omega ).
double kirchhoff_eval(const CauchyBundle& data, double t, const Vec3& x,
                      const SphereRule& rule);

/// Source response by Duhamel's principle,
///   u_hat(t,x) = int_0^t (t-s) (M f(s))(t-s; x) ds,
/// by composite Simpson with step <= ds in s.
double duhamel_eval(const CauchyBundle& data, double t, const Vec3& x, double ds,
                    const SphereRule& rule);

/// Samples of h(t) = Delta(u_free + u_hat_free)(t, 0) on a uniform grid.
struct ForcingSignal {
    double dt = 0.0;
    std::vector<double> t;
    std::vector<double> h;
    double horizon() const { return t.empty() ? 0.0 : t.back(); }
};

struct ForcingOptions {
    int deriv_refine = 16;   // internal step dt/deriv_refine for d/dt(t M lap phi)
    double source_ds = 0.0;  // Simpson step for the source term; 0 -> dt
};

/// h(t) = d/dt(t M[lap phi](t)) + t M[lap psi](t)
///        + int_0^t (t-s) (M[lap f(s)])(t-s) ds,
/// means about the origin, the derivative by 4th-order central differences
/// on a refined internal grid. Requires dt <= rho_min / 8.
ForcingSignal forcing_signal(const CauchyBundle& data, double dt, double T,
                             const SphereRule& rule, const ForcingOptions& opts = {});

/// Equivalent ball-integral form of the phi term,
///   h(t) = int_{|y|<t} lap^2 phi(y) / (4 pi |y|) dy + t M[lap psi](t) + source term,
/// used as a cross-check of the derivative form. Needs the lap^2 phi stack.
ForcingSignal forcing_signal_ball_form(const CauchyBundle& data, double dt, double T,
                                       const SphereRule& rule, int radial_order = 64);

/// Exact free field for the shipped radial data families: the d'Alembert
/// reduction about each component center plus, for separable sources, the
/// retarded 1-D Duhamel integral with exact spherical means.
double free_field_exact(const CauchyBundle& data, double t, const Vec3& x);

/// Sphere-rule mean of one stack of a component over |p - x| = r, with the
/// rule applied about the component axis.
double component_stack_mean(const DataComponent& c, DataComponent::Stack which,
                            const Vec3& x, double r, const SphereRule& rule);

} // namespace pointwave
