#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "pointwave/effective.hpp"
#include "pointwave/fdtd.hpp"
#include "pointwave/errors.hpp"

using namespace pointwave;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const DomainGrid> ball_grid(int res) {
    DomainSpec ball;
    return std::make_shared<const DomainGrid>(voxelize(ball, res));
}

SpectralDecomposition ball_spectrum(int res = 16, int K = 10) {
    auto op = assemble_newton(ball_grid(res), MatvecPath::automatic);
    return eigensolve(op, K);
}

CauchyBundle shell_psi() {
    CauchyBundle b;
    b.psi.push_back(make_bump({0, 0, 1.0}, 0.5, 1.0, 7));
    return b;
}

// analytic unit-ball modes, for oracle-style constructions
SpectralDecomposition analytic_modes(int count) {
    SpectralDecomposition dec;
    for (int m = 0; m < count; ++m) {
        const double k = (2 * m + 1) * kPi / 2.0;
        dec.eigenvalues.push_back(1.0 / (k * k));
        dec.couplings.push_back(8.0 * kPi / (k * k * k * k));
    }
    dec.domain_volume = 4.0 / 3.0 * kPi;
    return dec;
}

} // namespace

TEST_CASE("modulation: zero forcing gives zero signal") {
    SpectralDecomposition dec = analytic_modes(3);
    ForcingSignal h;
    h.dt = 0.01;
    for (int i = 0; i <= 200; ++i) {
        h.t.push_back(i * 0.01);
        h.h.push_back(0.0);
    }
    ModulationSignal q = modulation_duhamel(dec, h);
    for (double v : q.total) CHECK(v == 0.0);
}

TEST_CASE("modulation: constant forcing solves the oscillator analytically") {
    SpectralDecomposition dec = analytic_modes(1);
    const double lam = dec.eigenvalues[0], c = dec.couplings[0];
    ForcingSignal h;
    h.dt = 0.005;
    const double h0 = 0.7;
    for (int i = 0; i <= 600; ++i) {
        h.t.push_back(i * h.dt);
        h.h.push_back(h0);
    }
    ModulationSignal q = modulation_duhamel(dec, h);
    for (size_t i = 0; i < q.t.size(); i += 37) {
        const double expect = c * h0 * (1.0 - std::cos(q.t[i] / std::sqrt(lam)));
        CHECK(q.total[i] == doctest::Approx(expect).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("modulation: discrete oscillator residual refines at O(dt^2)") {
    SpectralDecomposition dec = analytic_modes(2);
    CauchyBundle b = shell_psi();
    SphereRule rule = sphere_rule(47);
    double prev = 0.0;
    for (double dt : {0.01, 0.005}) {
        ForcingSignal h = forcing_signal(b, dt, 2.0, rule);
        ModulationSignal q = modulation_duhamel(dec, h);
        // lambda qdd + q - c h should vanish at O(dt^2)
        double res = 0.0;
        const auto& qk = q.per_mode[1];
        const double lam = dec.eigenvalues[1], c = dec.couplings[1];
        for (size_t i = 1; i + 1 < qk.size(); ++i) {
            const double qdd = (qk[i + 1] - 2.0 * qk[i] + qk[i - 1]) / (dt * dt);
            res = std::max(res, std::abs(lam * qdd + qk[i] - c * h.h[i]));
        }
        if (prev > 0.0) CHECK(res < 0.35 * prev);
        prev = res;
    }
}

TEST_CASE("modulation rejects a sampling too coarse for the fastest mode") {
    SpectralDecomposition dec = analytic_modes(6); // lambda_6 ~ 3.3e-3
    ForcingSignal h;
    h.dt = 0.05;
    for (int i = 0; i <= 40; ++i) {
        h.t.push_back(i * h.dt);
        h.h.push_back(1.0);
    }
    CHECK_THROWS_WITH_AS(modulation_duhamel(dec, h),
                         doctest::Contains("needs dt <="), ValidationError);
}

TEST_CASE("closed form: support clearance keeps q at zero before arrival") {
    SpectralDecomposition dec = ball_spectrum();
    CauchyBundle b = shell_psi(); // rho_min = 0.5
    ModulationSignal q = modulation_closed_form(dec, b, 0.02, 2.0);
    for (size_t i = 0; i < q.t.size(); ++i)
        if (q.t[i] <= 0.5) CHECK(q.total[i] == 0.0);
    CHECK(std::abs(q.total.back()) > 0.0);
}

TEST_CASE("closed form: thin shell collapses to the analytic profile") {
    // a thin lap-psi density of mass m concentrated at distance a behaves
    // like q_k ~ c_k lam^{-1/2} sin((t-a)/sqrt(lam)) m / (4 pi a); built as
    // a synthetic stack because the Laplacian of any compact datum
    // integrates to zero
    SpectralDecomposition dec = analytic_modes(1);
    const double a = 1.0, w = 0.008;
    DataComponent shell = make_bump({0, 0, a}, w, 1.0, 5);
    shell.lap = shell.val; // inject the bump itself as the lap-psi density
    shell.prim_lap = shell.prim_val;
    CauchyBundle b;
    b.psi.push_back(shell);

    // total mass of the injected density
    GaussRule gl = gauss_legendre(64, 0.0, w);
    double m = 0.0;
    for (int i = 0; i < 64; ++i)
        m += gl.weights[i] * 4.0 * kPi * gl.nodes[i] * gl.nodes[i] *
             shell.val.eval(gl.nodes[i]);

    ClosedFormOptions opts;
    opts.radial_order = 80;
    ModulationSignal q = modulation_closed_form(dec, b, 0.02, 2.4, 0, opts);
    const double lam = dec.eigenvalues[0], c = dec.couplings[0];
    // compare on a window well past the arrival
    double sup_err = 0.0, sup = 0.0;
    for (size_t i = 0; i < q.t.size(); ++i) {
        const double t = q.t[i];
        if (t < a + 3 * w) continue;
        const double collapsed =
            c / std::sqrt(lam) * std::sin((t - a) / std::sqrt(lam)) * m / (4.0 * kPi * a);
        sup_err = std::max(sup_err, std::abs(q.total[i] - collapsed));
        sup = std::max(sup, std::abs(collapsed));
    }
    CHECK(sup_err / sup < 0.02); // thin-shell collapse is first order in w
}

TEST_CASE("route equivalence: closed form vs duhamel on shipped families") {
    SpectralDecomposition dec = ball_spectrum(16, 12);
    SphereRule rule = sphere_rule(47);

    CauchyBundle psi_b = shell_psi();
    CauchyBundle phi_b;
    phi_b.phi.push_back(make_bump({0, 0, 1.0}, 0.5, 0.8, 7));
    CauchyBundle src_b;
    {
        SeparableSource s;
        s.spatial = make_bump({0, 0, 0.95}, 0.4, 1.0, 7);
        s.time = make_time_bump(0.5, 0.35, 1.5, 7);
        src_b.sources.push_back(s);
    }
    CauchyBundle mixed;
    mixed.phi = phi_b.phi;
    mixed.psi = psi_b.psi;
    mixed.sources = src_b.sources;

    for (const CauchyBundle* b : {&psi_b, &phi_b, &src_b, &mixed}) {
        const double dt = 0.004, T = 2.2;
        ForcingSignal h = forcing_signal(*b, dt, T, rule);
        ModulationSignal qa = modulation_closed_form(dec, *b, dt, T);
        ModulationSignal qb = modulation_duhamel(dec, h);
        double sup_err = 0.0, sup = 0.0;
        for (size_t i = 0; i < qa.total.size(); ++i) {
            sup_err = std::max(sup_err, std::abs(qa.total[i] - qb.total[i]));
            sup = std::max(sup, std::abs(qa.total[i]));
        }
        CHECK(sup > 0.0);
        CHECK(sup_err / sup < 1e-3);
    }
}

TEST_CASE("per-mode samples sum to the total exactly") {
    SpectralDecomposition dec = ball_spectrum();
    CauchyBundle b = shell_psi();
    ModulationSignal q = modulation_closed_form(dec, b, 0.02, 1.6);
    for (size_t i = 0; i < q.total.size(); ++i) {
        double s = 0.0;
        for (int k = 0; k < q.modes(); ++k) s += q.per_mode[k][i];
        CHECK(s == q.total[i]);
    }
    CHECK(q.total[0] == 0.0);
    // discrete first derivative vanishes at t=0 to O(dt^2)
    CHECK(std::abs(q.total[1] - q.total[0]) < 1e-6);
}

TEST_CASE("mode truncation tail bound") {
    SpectralDecomposition dec = ball_spectrum(16, 12);
    CauchyBundle b = shell_psi();
    const double dt = 0.005, T = 2.0;
    SphereRule rule = sphere_rule(47);
    ForcingSignal h = forcing_signal(b, dt, T, rule);
    ModulationSignal q_small = modulation_duhamel(dec, h, 4);
    ModulationSignal q_big = modulation_duhamel(dec, h, 12);
    std::vector<double> bounds = mode_tail_bounds(dec, b);
    double tail_bound = 0.0;
    for (int k = 4; k < 12; ++k) tail_bound += bounds[k];
    for (size_t i = 0; i < q_small.total.size(); ++i)
        CHECK(std::abs(q_big.total[i] - q_small.total[i]) <= tail_bound + 1e-12);
}

TEST_CASE("effective field: Heaviside support, eps scaling, retardation") {
    SpectralDecomposition dec = analytic_modes(2);
    CauchyBundle b = shell_psi();
    SphereRule rule = sphere_rule(47);
    ForcingSignal h = forcing_signal(b, 0.005, 3.2, rule);
    ModulationSignal q = modulation_duhamel(dec, h);

    EffectiveField f1{0.2, &b, &q, 0.0};
    EffectiveField f2{0.35, &b, &q, 0.0};

    // outside the scatterer light cone the correction vanishes identically
    CHECK(f1.correction(0.8, {0, 0, -1.2}) == 0.0);
    CHECK(f1.eval(0.8, {0, 0, -1.2}) == free_field_exact(b, 0.8, {0, 0, -1.2}));

    // correction reproduced by hand at a fixed (t, x)
    const Vec3 x{0.4, 0.2, -0.1};
    const double t = 2.0;
    const double expect =
        0.2 * (0.2 * 0.2 - 1.0) * q.eval(t - x.norm()) / (4.0 * kPi * x.norm());
    CHECK(f1.correction(t, x) == doctest::Approx(expect).epsilon(1e-14));

    // parity: correction ratio is exactly eps1(eps1^2-1)/eps2(eps2^2-1)
    const double ratio = f1.correction(t, x) / f2.correction(t, x);
    const double expect_ratio = (0.2 * (0.2 * 0.2 - 1.0)) / (0.35 * (0.35 * 0.35 - 1.0));
    CHECK(std::abs(ratio - expect_ratio) < 1e-12);

    // retardation: shifting time and radius together leaves the scaled
    // correction invariant
    const Vec3 dir = x / x.norm();
    const double s = 0.3;
    const Vec3 x2 = dir * (x.norm() + s);
    const double c1 = f1.correction(t, x) * (4.0 * kPi * x.norm());
    const double c2 = f1.correction(t + s, x2) * (4.0 * kPi * x2.norm());
    CHECK(c1 == doctest::Approx(c2).epsilon(1e-12));
}

TEST_CASE("outside the scatterer light cone u_eff matches u_free in L2 exactly") {
    SpectralDecomposition dec = analytic_modes(1);
    CauchyBundle b = shell_psi();
    SphereRule rule = sphere_rule(47);
    ForcingSignal h = forcing_signal(b, 0.01, 3.0, rule);
    ModulationSignal q = modulation_duhamel(dec, h);
    GridBox box = centered_box(1.0, 0.05);
    const double t = 0.3; // every cell beyond r_excl=0.4 is outside the cone
    WaveField field = effective_field(b, q, 0.25, {t}, box, 0.0);
    auto free_eval = [&](const Vec3& x) { return free_field_exact(b, t, x); };
    CHECK(l2_diff(field, 0, free_eval, 0.95, 0.4) == 0.0);
}

TEST_CASE("effective field sampling masks the exclusion ball") {
    SpectralDecomposition dec = analytic_modes(1);
    CauchyBundle b = shell_psi();
    SphereRule rule = sphere_rule(9);
    ForcingSignal h = forcing_signal(b, 0.01, 3.0, rule);
    ModulationSignal q = modulation_duhamel(dec, h);
    GridBox box = centered_box(0.5, 0.1);
    WaveField f = effective_field(b, q, 0.2, {2.0}, box, 0.15);
    bool any_masked = false;
    for (int i = 0; i < box.dims[0]; ++i)
        for (int j = 0; j < box.dims[1]; ++j)
            for (int k = 0; k < box.dims[2]; ++k) {
                const size_t idx = box.index(i, j, k);
                const Vec3 c = box.center(i, j, k);
                if (c.norm() < 0.15) {
                    CHECK(f.masked(idx));
                    CHECK(f.data[0][idx] == free_field_exact(b, 2.0, c));
                    any_masked = true;
                }
            }
    CHECK(any_masked);

    // coverage error: q horizon shorter than a requested time
    CHECK_THROWS_AS(effective_field(b, q, 0.2, {5.0}, box, 0.0), ValidationError);
}
