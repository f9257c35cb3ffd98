#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <random>

#include "pointwave/errors.hpp"
#include "pointwave/newton.hpp"

using namespace pointwave;

namespace {

constexpr double kPi = std::numbers::pi;
// radial Newton eigenvalues of the unit ball: matching condition k cos k = 0
// gives k = (2m+1) pi/2 and lambda = 1/k^2
const double kLam0 = 4.0 / (kPi * kPi);
const double kLam1 = 4.0 / (9.0 * kPi * kPi);
const double kC0 = 128.0 / (kPi * kPi * kPi);

std::shared_ptr<const DomainGrid> ball_grid(int res) {
    DomainSpec ball;
    return std::make_shared<const DomainGrid>(voxelize(ball, res));
}

// independent oracle: plain power iteration on the matvec
double power_iteration(const NewtonOperator& op, int iters, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::vector<double> v(op.size()), w(op.size());
    for (double& x : v) x = gauss(rng);
    double lam = 0.0;
    for (int it = 0; it < iters; ++it) {
        op.apply(v, w);
        double n2 = 0.0, vw = 0.0, vv = 0.0;
        for (size_t i = 0; i < v.size(); ++i) {
            n2 += w[i] * w[i];
            vw += v[i] * w[i];
            vv += v[i] * v[i];
        }
        lam = vw / vv;
        const double inv = 1.0 / std::sqrt(n2);
        for (size_t i = 0; i < v.size(); ++i) v[i] = w[i] * inv;
    }
    return lam;
}

} // namespace

TEST_CASE("single cell matvec returns the equivalent-ball self term") {
    DomainGrid g;
    g.h = 0.1;
    g.weight = 1e-3;
    g.lattice_origin = {0, 0, 0};
    g.coords = {{0, 0, 0}};
    g.centers = {{0, 0, 0}};
    g.min_coord = {0, 0, 0};
    g.dims = {1, 1, 1};
    auto op = assemble_newton(std::make_shared<const DomainGrid>(g), MatvecPath::direct);
    std::vector<double> u{1.0}, v{0.0};
    op.apply(u, v);
    const double r_eq = 0.1 * std::cbrt(3.0 / (4.0 * kPi));
    CHECK(v[0] == doctest::Approx(0.5 * r_eq * r_eq).epsilon(1e-14));
}

TEST_CASE("two cells couple through the 1/(4 pi d) kernel") {
    DomainGrid g;
    g.h = 0.1;
    g.weight = 1e-3;
    g.lattice_origin = {0, 0, 0};
    g.coords = {{0, 0, 0}, {3, 0, 0}};
    g.centers = {{0, 0, 0}, {0.3, 0, 0}};
    g.min_coord = {0, 0, 0};
    g.dims = {4, 1, 1};
    auto op = assemble_newton(std::make_shared<const DomainGrid>(g), MatvecPath::direct);
    std::vector<double> u{1.0, 0.0}, v(2);
    op.apply(u, v);
    CHECK(v[1] == doctest::Approx(1e-3 / (4.0 * kPi * 0.3)).epsilon(1e-14));
}

TEST_CASE("matvec is symmetric and positive semi-definite on random vectors") {
    auto grid = ball_grid(10);
    auto op = assemble_newton(grid, MatvecPath::direct);
    std::mt19937_64 rng(99);
    std::normal_distribution<double> gauss;
    const size_t n = op.size();
    std::vector<double> u(n), v(n), au(n), av(n);
    for (int rep = 0; rep < 5; ++rep) {
        for (double& x : u) x = gauss(rng);
        for (double& x : v) x = gauss(rng);
        op.apply(u, au);
        op.apply(v, av);
        double uav = 0, vau = 0, uau = 0, unorm = 0, scale = 0;
        for (size_t i = 0; i < n; ++i) {
            uav += u[i] * av[i];
            vau += v[i] * au[i];
            uau += u[i] * au[i];
            unorm += u[i] * u[i];
            scale += std::abs(u[i] * av[i]);
        }
        CHECK(std::abs(uav - vau) <= 1e-12 * scale);
        CHECK(uau >= -1e-10 * unorm);
    }
}

TEST_CASE("fft matvec path is bit-compatible with the direct path") {
    auto grid = ball_grid(14);
    auto op_d = assemble_newton(grid, MatvecPath::direct);
    auto op_f = assemble_newton(grid, MatvecPath::fft);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    const size_t n = op_d.size();
    std::vector<double> u(n), vd(n), vf(n);
    for (double& x : u) x = gauss(rng);
    op_d.apply(u, vd);
    op_f.apply(u, vf);
    double num = 0, den = 0;
    for (size_t i = 0; i < n; ++i) {
        num = std::max(num, std::abs(vd[i] - vf[i]));
        den = std::max(den, std::abs(vd[i]));
    }
    CHECK(num / den < 1e-10);
}

TEST_CASE("unit ball leading eigenvalue within 5% at resolution 24") {
    auto grid = ball_grid(24);
    auto op = assemble_newton(grid, MatvecPath::fft);
    SpectralDecomposition dec = eigensolve(op, 12);
    CHECK(std::abs(dec.eigenvalues[0] - kLam0) / kLam0 < 0.05);
    // eigenvector normalization and orthogonality in the weighted product
    for (int k = 0; k < 3; ++k) {
        double n2 = 0.0;
        for (double x : dec.eigenvectors[k]) n2 += x * x;
        n2 *= dec.cell_weight;
        CHECK(std::abs(n2 - 1.0) < 1e-10);
    }
    double cross = 0.0;
    for (size_t i = 0; i < dec.eigenvectors[0].size(); ++i)
        cross += dec.eigenvectors[0][i] * dec.eigenvectors[1][i];
    CHECK(std::abs(cross * dec.cell_weight) < 1e-8);
}

TEST_CASE("radial sequence contains the second ball eigenvalue") {
    auto grid = ball_grid(24);
    auto op = assemble_newton(grid, MatvecPath::fft);
    SpectralDecomposition dec = eigensolve(op, 16);
    // radial modes are the ones that couple to constants
    double best = 1e9;
    for (int k = 1; k < dec.modes(); ++k)
        if (dec.couplings[k] > 1e-4 * dec.domain_volume)
            best = std::min(best, std::abs(dec.eigenvalues[k] - kLam1) / kLam1);
    CHECK(best < 0.05);
}

TEST_CASE("lanczos matches the power-iteration oracle") {
    auto grid = ball_grid(12);
    auto op = assemble_newton(grid, MatvecPath::direct);
    SpectralDecomposition dec = eigensolve(op, 1);
    const double lam_pi = power_iteration(op, 300, 2024);
    CHECK(std::abs(dec.eigenvalues[0] - lam_pi) / lam_pi < 1e-6);
}

TEST_CASE("lanczos agrees with the dense eigendecomposition at resolution 12") {
    auto grid = ball_grid(12);
    auto op = assemble_newton(grid, MatvecPath::direct);
    EigensolveOptions dense_opts;
    dense_opts.solver = EigensolveOptions::Solver::dense;
    SpectralDecomposition ld = eigensolve(op, 10);
    SpectralDecomposition dd = eigensolve(op, 10, dense_opts);
    for (int k = 0; k < 10; ++k)
        CHECK(ld.eigenvalues[k] ==
              doctest::Approx(dd.eigenvalues[k]).epsilon(1e-8).scale(1.0));
}

TEST_CASE("leading coupling approaches 128/pi^3 and Bessel budget holds") {
    auto grid = ball_grid(24);
    auto op = assemble_newton(grid, MatvecPath::fft);
    SpectralDecomposition dec = eigensolve(op, 12);
    CHECK(std::abs(dec.couplings[0] - kC0) / kC0 < 0.03);
    CHECK(dec.captured_mass() <= dec.domain_volume * (1.0 + 1e-8));
    CHECK(dec.couplings[0] / dec.domain_volume > 0.97);
}

TEST_CASE("antisymmetric vector on a symmetric grid has zero coupling") {
    auto grid = ball_grid(12);
    // coupling of e(x) = x_1 normalized: odd under the lattice symmetry
    SpectralDecomposition dec;
    dec.cell_weight = grid->weight;
    dec.domain_volume = grid->volume();
    std::vector<double> e(grid->size());
    double n2 = 0.0;
    for (size_t i = 0; i < grid->size(); ++i) {
        e[i] = grid->centers[i].x;
        n2 += e[i] * e[i] * grid->weight;
    }
    for (double& x : e) x /= std::sqrt(n2);
    dec.eigenvectors.push_back(e);
    auto c = couplings(dec, *grid);
    CHECK(std::abs(c[0]) < 1e-10 * grid->volume());
}

TEST_CASE("eigenvalue error shrinks from resolution 12 to 24") {
    auto op12 = assemble_newton(ball_grid(12), MatvecPath::direct);
    auto op24 = assemble_newton(ball_grid(24), MatvecPath::fft);
    const double e12 = std::abs(eigensolve(op12, 1).eigenvalues[0] - kLam0);
    const double e24 = std::abs(eigensolve(op24, 1).eigenvalues[0] - kLam0);
    CHECK(e24 < e12);
}

TEST_CASE("coupled-only selection returns the radiating subsequence") {
    auto grid = ball_grid(16);
    auto op = assemble_newton(grid, MatvecPath::fft);
    SpectralDecomposition full = eigensolve(op, 16);
    EigensolveOptions opts;
    opts.start = EigensolveOptions::Start::constant;
    opts.coupled_only = true;
    opts.max_subspace = 160;
    SpectralDecomposition coupled = eigensolve(op, 2, opts);
    // must match the strongly coupled members of the full decomposition
    std::vector<double> expect;
    for (int k = 0; k < full.modes(); ++k)
        if (full.couplings[k] > 1e-4 * full.domain_volume)
            expect.push_back(full.eigenvalues[k]);
    REQUIRE(expect.size() >= 2);
    for (int k = 0; k < 2; ++k)
        CHECK(coupled.eigenvalues[k] ==
              doctest::Approx(expect[k]).epsilon(1e-8).scale(1.0));
    for (double c : coupled.couplings) CHECK(c > 1e-4 * coupled.domain_volume);
}

TEST_CASE("captured-mass truncation picks a small K for the ball") {
    auto grid = ball_grid(16);
    auto op = assemble_newton(grid, MatvecPath::fft);
    SpectralDecomposition dec = eigensolve(op, 16);
    const int K = truncate_by_captured_mass(dec, 0.02);
    CHECK(K >= 1);
    CHECK(K <= 16);
    CHECK(dec.captured_cumulative[K - 1] >= 0.98 * dec.domain_volume);
}

TEST_CASE("resolvent norm: branches of the inverse bound hold exactly") {
    auto grid = ball_grid(10);
    auto op = assemble_newton(grid, MatvecPath::direct);
    SpectralDecomposition dec = eigensolve(op, 6);

    // real z: the supremum sits at the lambda -> 0 accumulation point
    CHECK(resolvent_norm(dec, {2.0, 0.0}) == 1.0);

    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> uc(0.01, 4.0), ug(-6.0, 6.0);
    for (int i = 0; i < 200; ++i) {
        const std::complex<double> z{uc(rng), ug(rng)};
        CHECK(resolvent_norm(dec, z) <= resolvent_norm_bound(z));
    }
    CHECK_THROWS_AS(resolvent_norm(dec, {-1.0, 0.5}), ValidationError);
}

TEST_CASE("eigensolve rejects silly mode counts") {
    auto grid = ball_grid(10);
    auto op = assemble_newton(grid, MatvecPath::direct);
    CHECK_THROWS_AS(eigensolve(op, 0), ValidationError);
    CHECK_THROWS_AS(eigensolve(op, int(op.size()) + 1), ValidationError);
}
