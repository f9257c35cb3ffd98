#include "pointwave/newton.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <fftw3.h>
#include <Eigen/Dense>

#include "pointwave/errors.hpp"

namespace pointwave {

namespace {
constexpr double kFourPi = 4.0 * std::numbers::pi;
// direct path is cheaper below this cell count
constexpr size_t kFftThreshold = 2500;
} // namespace

struct NewtonOperator::FftState {
    std::array<int, 3> pad{0, 0, 0};
    size_t real_size = 0, cplx_size = 0;
    double* in = nullptr;
    fftw_complex* spec = nullptr;
    fftw_complex* kernel_hat = nullptr;
    fftw_plan fwd = nullptr, bwd = nullptr;

    ~FftState() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (in) fftw_free(in);
        if (spec) fftw_free(spec);
        if (kernel_hat) fftw_free(kernel_hat);
    }
};

NewtonOperator::NewtonOperator(std::shared_ptr<const DomainGrid> grid, MatvecPath path)
    : grid_(std::move(grid)), path_(path) {
    if (!grid_ || grid_->size() == 0)
        throw ValidationError("assemble_newton: grid must be non-empty");
    const double h = grid_->h;
    const double r_eq = h * std::cbrt(3.0 / kFourPi);
    self_term_ = 0.5 * r_eq * r_eq;
    MatvecPath effective = path_;
    if (effective == MatvecPath::automatic)
        effective = grid_->size() > kFftThreshold ? MatvecPath::fft : MatvecPath::direct;
    if (effective == MatvecPath::fft) ensure_fft();
}

NewtonOperator::~NewtonOperator() = default;
NewtonOperator::NewtonOperator(NewtonOperator&&) noexcept = default;
NewtonOperator& NewtonOperator::operator=(NewtonOperator&&) noexcept = default;

void NewtonOperator::apply(std::span<const double> u, std::span<double> v) const {
    MatvecPath effective = path_;
    if (effective == MatvecPath::automatic)
        effective = grid_->size() > kFftThreshold ? MatvecPath::fft : MatvecPath::direct;
    if (effective == MatvecPath::fft)
        apply_fft(u, v);
    else
        apply_direct(u, v);
}

void NewtonOperator::apply_direct(std::span<const double> u, std::span<double> v) const {
    const auto& g = *grid_;
    const size_t n = g.size();
    if (u.size() != n || v.size() != n)
        throw ValidationError("newton matvec: size mismatch");
    const double w = g.weight;
    const double self = self_term_;
    const auto& c = g.coords;
    const double h = g.h;
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < (long long)n; ++ii) {
        const size_t i = size_t(ii);
        double acc = self * u[i];
        const int xi = c[i][0], yi = c[i][1], zi = c[i][2];
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dx = double(xi - c[j][0]);
            const double dy = double(yi - c[j][1]);
            const double dz = double(zi - c[j][2]);
            const double d = h * std::sqrt(dx * dx + dy * dy + dz * dz);
            acc += w * u[j] / (kFourPi * d);
        }
        v[i] = acc;
    }
}

void NewtonOperator::ensure_fft() const {
    if (fft_) return;
    auto st = std::make_unique<FftState>();
    const auto& g = *grid_;
    for (int a = 0; a < 3; ++a) st->pad[a] = 2 * g.dims[a];
    const int p0 = st->pad[0], p1 = st->pad[1], p2 = st->pad[2];
    st->real_size = size_t(p0) * p1 * p2;
    st->cplx_size = size_t(p0) * p1 * (p2 / 2 + 1);
    st->in = fftw_alloc_real(st->real_size);
    st->spec = fftw_alloc_complex(st->cplx_size);
    st->kernel_hat = fftw_alloc_complex(st->cplx_size);
    st->fwd = fftw_plan_dft_r2c_3d(p0, p1, p2, st->in, st->spec, FFTW_ESTIMATE);
    st->bwd = fftw_plan_dft_c2r_3d(p0, p1, p2, st->spec, st->in, FFTW_ESTIMATE);

    // kernel over wrapped lattice offsets; value w/(4 pi |d| h), self cell
    // replaced by the equivalent-ball integral
    const double w = g.weight, h = g.h;
    std::fill(st->in, st->in + st->real_size, 0.0);
    for (int i = 0; i < p0; ++i) {
        const int di = i <= p0 / 2 ? i : i - p0;
        for (int j = 0; j < p1; ++j) {
            const int dj = j <= p1 / 2 ? j : j - p1;
            for (int k = 0; k < p2; ++k) {
                const int dk = k <= p2 / 2 ? k : k - p2;
                double val;
                if (di == 0 && dj == 0 && dk == 0) {
                    val = self_term_;
                } else {
                    const double d =
                        h * std::sqrt(double(di) * di + double(dj) * dj + double(dk) * dk);
                    val = w / (kFourPi * d);
                }
                st->in[(size_t(i) * p1 + j) * p2 + k] = val;
            }
        }
    }
    fftw_execute(st->fwd);
    std::memcpy(st->kernel_hat, st->spec, st->cplx_size * sizeof(fftw_complex));
    fft_ = std::move(st);
}

void NewtonOperator::apply_fft(std::span<const double> u, std::span<double> v) const {
    ensure_fft();
    const auto& g = *grid_;
    const size_t n = g.size();
    if (u.size() != n || v.size() != n)
        throw ValidationError("newton matvec: size mismatch");
    auto& st = *fft_;
    const int p1 = st.pad[1], p2 = st.pad[2];
    std::fill(st.in, st.in + st.real_size, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const auto& c = g.coords[i];
        const size_t idx = (size_t(c[0] - g.min_coord[0]) * p1 + (c[1] - g.min_coord[1])) * p2 +
                           (c[2] - g.min_coord[2]);
        st.in[idx] = u[i];
    }
    fftw_execute(st.fwd);
    for (size_t i = 0; i < st.cplx_size; ++i) {
        const double ar = st.spec[i][0], ai = st.spec[i][1];
        const double br = st.kernel_hat[i][0], bi = st.kernel_hat[i][1];
        st.spec[i][0] = ar * br - ai * bi;
        st.spec[i][1] = ar * bi + ai * br;
    }
    fftw_execute(st.bwd);
    const double scale = 1.0 / double(st.real_size);
    for (size_t i = 0; i < n; ++i) {
        const auto& c = g.coords[i];
        const size_t idx = (size_t(c[0] - g.min_coord[0]) * p1 + (c[1] - g.min_coord[1])) * p2 +
                           (c[2] - g.min_coord[2]);
        v[i] = st.in[idx] * scale;
    }
}

NewtonOperator assemble_newton(std::shared_ptr<const DomainGrid> grid, MatvecPath path) {
    return NewtonOperator(std::move(grid), path);
}

namespace {

SpectralDecomposition finalize(const DomainGrid& grid, std::vector<double> vals,
                               std::vector<std::vector<double>> unit_vecs) {
    SpectralDecomposition dec;
    dec.cell_weight = grid.weight;
    dec.domain_volume = grid.volume();
    dec.eigenvalues = std::move(vals);
    const double sw = std::sqrt(grid.weight);
    dec.eigenvectors.resize(unit_vecs.size());
    for (size_t k = 0; k < unit_vecs.size(); ++k) {
        dec.eigenvectors[k] = std::move(unit_vecs[k]);
        for (double& x : dec.eigenvectors[k]) x /= sw; // weighted normalization
    }
    dec.couplings = couplings(dec, grid);
    dec.captured_cumulative.resize(dec.couplings.size());
    double run = 0.0;
    for (size_t k = 0; k < dec.couplings.size(); ++k) {
        run += dec.couplings[k];
        dec.captured_cumulative[k] = run;
    }
    return dec;
}

SpectralDecomposition eigensolve_dense(const NewtonOperator& op, int K) {
    const auto& g = op.grid();
    const size_t n = g.size();
    Eigen::MatrixXd A(n, n);
    const double w = g.weight, h = g.h;
    for (size_t i = 0; i < n; ++i) {
        A(i, i) = op.self_term();
        for (size_t j = i + 1; j < n; ++j) {
            const double dx = double(g.coords[i][0] - g.coords[j][0]);
            const double dy = double(g.coords[i][1] - g.coords[j][1]);
            const double dz = double(g.coords[i][2] - g.coords[j][2]);
            const double d = h * std::sqrt(dx * dx + dy * dy + dz * dz);
            A(i, j) = A(j, i) = w / (kFourPi * d);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    std::vector<double> vals(K);
    std::vector<std::vector<double>> vecs(K, std::vector<double>(n));
    for (int k = 0; k < K; ++k) {
        const int src = int(n) - 1 - k; // Eigen sorts ascending
        vals[k] = es.eigenvalues()(src);
        Eigen::Map<Eigen::VectorXd>(vecs[k].data(), n) = es.eigenvectors().col(src);
    }
    return finalize(g, std::move(vals), std::move(vecs));
}

// Lanczos with full reorthogonalization and deflated restarts. A single
// Krylov space carries one copy of each degenerate eigenvalue, so after a
// cycle converges we restart from a fresh random vector kept orthogonal to
// everything already found; the restarts pick up the remaining copies of
// the multiplets (the ball spectrum is full of them).
SpectralDecomposition eigensolve_lanczos(const NewtonOperator& op, int K,
                                         const EigensolveOptions& opts) {
    const size_t n = op.size();
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
        return acc;
    };

    std::vector<double> found_vals;
    std::vector<std::vector<double>> found_vecs;
    double lam_scale = 0.0;
    double worst_residual = 0.0;

    const int max_cycles = 20;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;

    for (int cycle = 0; cycle < max_cycles && int(found_vals.size()) < K; ++cycle) {
        const int missing = K - int(found_vals.size());
        // a constant start converges a decaying eigenvalue chain, not the
        // top of the spectrum; give its first cycle the whole budget
        const int budget = (cycle == 0 && opts.start == EigensolveOptions::Start::constant)
                               ? opts.max_subspace
                               : std::min(opts.max_subspace, 2 * missing + 60);
        const int m_cap = int(std::min<size_t>(n - found_vals.size(), size_t(budget)));
        if (m_cap < 1) break;

        std::vector<std::vector<double>> V;
        std::vector<double> alpha, beta;
        std::vector<double> work(n);

        std::vector<double> v0(n);
        if (cycle == 0 && opts.start == EigensolveOptions::Start::constant)
            std::fill(v0.begin(), v0.end(), 1.0);
        else
            for (double& x : v0) x = gauss(rng);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& f : found_vecs) {
                const double c = dot(f, v0);
                for (size_t i = 0; i < n; ++i) v0[i] -= c * f[i];
            }
        const double nrm0 = std::sqrt(dot(v0, v0));
        if (nrm0 < 1e-12) continue;
        for (double& x : v0) x /= nrm0;
        V.push_back(std::move(v0));

        int m_final = 0;
        for (int j = 0; j < m_cap; ++j) {
            op.apply(V[j], work);
            if (j > 0)
                for (size_t i = 0; i < n; ++i) work[i] -= beta[j - 1] * V[j - 1][i];
            const double a = dot(V[j], work);
            alpha.push_back(a);
            for (size_t i = 0; i < n; ++i) work[i] -= a * V[j][i];
            // full reorthogonalization against the basis and the deflated
            // eigenvectors, two passes
            for (int pass = 0; pass < 2; ++pass) {
                for (const auto& vk : V) {
                    const double c = dot(vk, work);
                    for (size_t i = 0; i < n; ++i) work[i] -= c * vk[i];
                }
                for (const auto& f : found_vecs) {
                    const double c = dot(f, work);
                    for (size_t i = 0; i < n; ++i) work[i] -= c * f[i];
                }
            }
            const double b = std::sqrt(dot(work, work));
            beta.push_back(b);
            m_final = j + 1;
            if (b < 1e-14) break;
            if (j + 1 < m_cap) {
                std::vector<double> next(n);
                for (size_t i = 0; i < n; ++i) next[i] = work[i] / b;
                V.push_back(std::move(next));
            }
        }

        const int m = m_final;
        if (m == 0) continue;
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        es.compute(T);
        lam_scale = std::max(lam_scale, es.eigenvalues()(m - 1));
        const double beta_last = beta[m - 1];

        int taken = 0;
        worst_residual = 0.0;
        const double vol = op.grid().volume();
        for (int k = 0; k < m && int(found_vals.size()) < K; ++k) {
            const int src = m - 1 - k;
            const double lam = es.eigenvalues()(src);
            if (lam <= opts.tol * lam_scale) break; // into the numerical null space
            const double resid = std::abs(beta_last * es.eigenvectors()(m - 1, src));
            worst_residual = std::max(worst_residual, resid);
            if (resid > opts.tol * lam_scale) continue;
            std::vector<double> y(n, 0.0);
            for (int i = 0; i < m; ++i) {
                const double s = es.eigenvectors()(i, src);
                const auto& vi = V[i];
                for (size_t c = 0; c < n; ++c) y[c] += s * vi[c];
            }
            const double ynrm = std::sqrt(dot(y, y));
            for (double& x : y) x /= ynrm;
            if (opts.coupled_only) {
                double s = 0.0;
                for (double x : y) s += x;
                const double c = op.grid().weight * s * s; // e = y / sqrt(w)
                if (c < opts.coupled_cut * vol) continue;
            }
            found_vals.push_back(lam);
            found_vecs.push_back(std::move(y));
            ++taken;
        }
        if (taken == 0 && beta_last >= 1e-14) break; // no further progress
    }

    if (int(found_vals.size()) < K) {
        std::ostringstream os;
        os << "eigensolve: only " << found_vals.size() << "/" << K
           << " eigenpairs converged (last residual " << worst_residual
           << ", tol " << opts.tol * lam_scale << ")";
        throw QualityError(os.str());
    }

    // sort the union of all cycles by eigenvalue, descending
    std::vector<int> order(found_vals.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return found_vals[a] > found_vals[b]; });
    std::vector<double> vals(K);
    std::vector<std::vector<double>> vecs(K);
    for (int k = 0; k < K; ++k) {
        vals[k] = found_vals[order[k]];
        vecs[k] = std::move(found_vecs[order[k]]);
    }
    return finalize(op.grid(), std::move(vals), std::move(vecs));
}

} // namespace

SpectralDecomposition eigensolve(const NewtonOperator& op, int K, const EigensolveOptions& opts) {
    if (K < 1) throw ValidationError("eigensolve: K must be >= 1");
    if (size_t(K) > op.size())
        throw ValidationError("eigensolve: K exceeds the cell count");
    if (opts.solver == EigensolveOptions::Solver::dense) {
        if (op.size() > 8000)
            throw ValidationError("eigensolve: dense path is limited to n <= 8000 cells");
        return eigensolve_dense(op, K);
    }
    return eigensolve_lanczos(op, K, opts);
}

std::vector<double> couplings(const SpectralDecomposition& dec, const DomainGrid& grid) {
    std::vector<double> out(dec.eigenvectors.size());
    for (size_t k = 0; k < dec.eigenvectors.size(); ++k) {
        double s = 0.0;
        for (double x : dec.eigenvectors[k]) s += x;
        s *= grid.weight; // <e_k, 1>_w
        out[k] = s * s;
    }
    return out;
}

double resolvent_norm(const SpectralDecomposition& dec, std::complex<double> z) {
    if (!(z.real() > 0.0))
        throw ValidationError("resolvent_norm: Re z must be positive");
    if (dec.eigenvalues.empty())
        throw ValidationError("resolvent_norm: empty decomposition");
    const std::complex<double> z2 = z * z;
    double sup = 1.0; // lambda = 0 accumulation point
    for (double lam : dec.eigenvalues)
        sup = std::max(sup, 1.0 / std::abs(1.0 + z2 * lam));
    return sup;
}

double resolvent_norm_bound(std::complex<double> z) {
    const double c = z.real(), g = std::abs(z.imag());
    if (g <= c) return 1.0;
    return std::norm(z) / (2.0 * c * g);
}

int truncate_by_captured_mass(const SpectralDecomposition& dec, double delta) {
    const double target = (1.0 - delta) * dec.domain_volume;
    for (size_t k = 0; k < dec.captured_cumulative.size(); ++k)
        if (dec.captured_cumulative[k] >= target) return int(k) + 1;
    return dec.modes();
}

} // namespace pointwave
