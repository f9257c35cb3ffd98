#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "pointwave/geometry.hpp"

namespace pointwave {

enum class MatvecPath { automatic, direct, fft };

/// Collocation discretization of N0 u(x) = (1/4pi) int_Omega u(y)/|x-y| dy
/// on a DomainGrid. Off-diagonal entries use center-to-center distances;
/// the diagonal is the equivalent-volume ball value R_eq^2 / 2,
/// R_eq = h (3/4pi)^(1/3). The matvec either runs as a direct O(n^2) sum
/// or as a lattice convolution of the 1/|x| kernel via FFT (the two agree
/// to better than 1e-10 relative).
class NewtonOperator {
public:
    NewtonOperator(std::shared_ptr<const DomainGrid> grid, MatvecPath path);
    ~NewtonOperator();
    NewtonOperator(NewtonOperator&&) noexcept;
    NewtonOperator& operator=(NewtonOperator&&) noexcept;
    NewtonOperator(const NewtonOperator&) = delete;
    NewtonOperator& operator=(const NewtonOperator&) = delete;

    const DomainGrid& grid() const { return *grid_; }
    size_t size() const { return grid_->size(); }
    double self_term() const { return self_term_; }
    MatvecPath path() const { return path_; }

    /// v = N0 u. Deterministic; not safe to call concurrently on one instance.
    void apply(std::span<const double> u, std::span<double> v) const;

    void apply_direct(std::span<const double> u, std::span<double> v) const;
    void apply_fft(std::span<const double> u, std::span<double> v) const;

private:
    struct FftState;
    std::shared_ptr<const DomainGrid> grid_;
    double self_term_ = 0.0;
    MatvecPath path_ = MatvecPath::automatic;
    mutable std::unique_ptr<FftState> fft_;
    void ensure_fft() const;
};

NewtonOperator assemble_newton(std::shared_ptr<const DomainGrid> grid,
                               MatvecPath path = MatvecPath::automatic);

/// Leading eigenpairs of the Newton operator. Eigenvectors are stored as
/// per-cell coefficients, orthonormal in the weighted inner product
/// <u,v>_w = w sum_i u_i v_i.
struct SpectralDecomposition {
    std::vector<double> eigenvalues;                 // descending, positive
    std::vector<std::vector<double>> eigenvectors;   // weighted-orthonormal
    std::vector<double> couplings;                   // c_k = |<e_k, 1>_w|^2
    std::vector<double> captured_cumulative;         // running sum of c_k
    double cell_weight = 0.0;
    double domain_volume = 0.0;

    int modes() const { return int(eigenvalues.size()); }
    double captured_mass() const {
        return captured_cumulative.empty() ? 0.0 : captured_cumulative.back();
    }
};

struct EigensolveOptions {
    enum class Solver { lanczos, dense } solver = Solver::lanczos;
    /// Krylov start vector; constant weights the space toward modes coupled
    /// to constants, the natural companion of coupled_only.
    enum class Start { random, constant } start = Start::random;
    /// Keep only eigenpairs whose coupling c_k exceeds
    /// coupled_cut * |Omega_h|: the subsequence that radiates. Cheaper than
    /// ranking the whole spectrum when only those modes are wanted.
    bool coupled_only = false;
    double coupled_cut = 1e-4;
    int max_subspace = 480;    // Lanczos basis cap
    double tol = 1e-9;         // residual tolerance relative to lambda_1
    std::uint64_t seed = 12345;
};

/// Top-K eigenpairs, descending. Lanczos with full reorthogonalization by
/// default; dense path intended for n <= 8000. Deterministic for a fixed
/// seed. Throws QualityError when the requested pairs fail to converge,
/// reporting the residuals.
SpectralDecomposition eigensolve(const NewtonOperator& op, int K,
                                 const EigensolveOptions& opts = {});

/// c_k = (sum_j w e_k(x_j))^2 in volume units for the stored eigenvectors.
std::vector<double> couplings(const SpectralDecomposition& dec, const DomainGrid& grid);

/// sup over {0} union {lambda_k} of 1 / |1 + z^2 lambda|; requires Re z > 0.
/// Including lambda = 0 represents the accumulation point of the compact
/// operator's spectrum.
double resolvent_norm(const SpectralDecomposition& dec, std::complex<double> z);

/// Upper bound of the resolvent norm from the two branches of the inverse
/// bound for 1 + z^2 N0: 1 when |Im z| <= Re z, else |z|^2 / (2 Re z |Im z|).
double resolvent_norm_bound(std::complex<double> z);

/// Smallest K with sum_{k<=K} c_k >= (1 - delta) |Omega_h|; returns all
/// modes when the target is not reached.
int truncate_by_captured_mass(const SpectralDecomposition& dec, double delta);

} // namespace pointwave
