#include "pointwave/fdtd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pointwave/errors.hpp"

namespace pointwave {

GridBox centered_box(double half_width, double h) {
    GridBox box;
    box.h = h;
    int n = int(std::ceil(half_width / h - 1e-12)) * 2;
    box.dims = {n, n, n};
    const double lo = -0.5 * h * (n - 1);
    box.origin = {lo, lo, lo};
    return box;
}

ContrastGrid build_grid(double half_width, double h, double eps, const DomainSpec& spec,
                        int n_min, double cfl, bool blend, BoundaryMode boundary,
                        int sponge_cells) {
    if (!(h > 0.0)) throw ValidationError("build_grid: h must be positive");
    if (!(cfl > 0.0 && cfl <= 0.95))
        throw ValidationError("build_grid: cfl must lie in (0, 0.95]");
    const bool contrast_off = eps == 1.0;
    if (!contrast_off && !(eps > 0.0 && eps < 1.0))
        throw ValidationError("build_grid: eps must lie in (0,1), or exactly 1 for a "
                              "contrast-off run");
    if (!contrast_off) {
        const double h_req = eps * spec.diameter() / n_min;
        if (h > h_req * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "build_grid: inclusion under-resolved; need h <= " << h_req
               << " to place " << n_min << " cells across the rescaled diameter (got " << h
               << ")";
            throw ValidationError(os.str());
        }
    }

    ContrastGrid g;
    g.box = centered_box(half_width, h);
    g.eps = eps;
    g.cfl = cfl;
    g.dt = cfl * h / std::sqrt(3.0);
    g.boundary = boundary;
    g.sponge_cells = boundary == BoundaryMode::sponge ? std::max(sponge_cells, 8) : 0;
    g.inv_rho.assign(g.box.size(), 1.0);
    if (contrast_off) return g;

    auto member = scale_membership(spec, eps);
    const double eps2 = eps * eps;
    const auto& box = g.box;
    // the inclusion only intersects a small sub-box; skip cells outside it
    const Vec3 reach = eps * spec.bounding_half_widths() + Vec3{h, h, h};
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < box.dims[0]; ++i)
        for (int j = 0; j < box.dims[1]; ++j)
            for (int k = 0; k < box.dims[2]; ++k) {
                const Vec3 pos = box.center(int(i), j, k);
                const Vec3 rel = pos - spec.center;
                if (std::abs(rel.x) > reach.x || std::abs(rel.y) > reach.y ||
                    std::abs(rel.z) > reach.z)
                    continue;
                const size_t idx = box.index(int(i), j, k);
                if (!blend) {
                    if (member(pos)) g.inv_rho[idx] = eps2;
                } else {
                    int hits = 0;
                    for (int a = -1; a <= 1; ++a)
                        for (int b = -1; b <= 1; ++b)
                            for (int cc = -1; cc <= 1; ++cc)
                                if (member(pos + Vec3{a / 3.0, b / 3.0, cc / 3.0} * h)) ++hits;
                    if (hits > 0) {
                        const double frac = hits / 27.0;
                        const double rho = frac / eps2 + (1.0 - frac);
                        g.inv_rho[idx] = 1.0 / rho;
                    }
                }
            }
    return g;
}

namespace {

size_t nearest_cell(const GridBox& box, const Vec3& p) {
    auto clampi = [](int v, int n) { return std::clamp(v, 0, n - 1); };
    const int i = clampi(int(std::lround((p.x - box.origin.x) / box.h)), box.dims[0]);
    const int j = clampi(int(std::lround((p.y - box.origin.y) / box.h)), box.dims[1]);
    const int k = clampi(int(std::lround((p.z - box.origin.z) / box.h)), box.dims[2]);
    return box.index(i, j, k);
}

// staggered leapfrog energy: kinetic at n+1/2 plus the product-form
// gradient term, exactly conserved by the scheme with f = 0
double leapfrog_energy(const GridBox& box, const std::vector<double>& inv_rho,
                       const std::vector<double>& uc, const std::vector<double>& un,
                       double dt) {
    const int nx = box.dims[0], ny = box.dims[1], nz = box.dims[2];
    const double h = box.h, h3 = h * h * h;
    std::vector<double> partial(nx, 0.0);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < nx; ++i) {
        double acc = 0.0;
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k) {
                const size_t idx = box.index(int(i), j, k);
                const double dudt = (un[idx] - uc[idx]) / dt;
                acc += 0.5 * (1.0 / inv_rho[idx]) * dudt * dudt;
                if (i + 1 < nx) {
                    const size_t r = box.index(int(i) + 1, j, k);
                    acc += 0.5 * (uc[r] - uc[idx]) * (un[r] - un[idx]) / (h * h);
                }
                if (j + 1 < ny) {
                    const size_t r = box.index(int(i), j + 1, k);
                    acc += 0.5 * (uc[r] - uc[idx]) * (un[r] - un[idx]) / (h * h);
                }
                if (k + 1 < nz) {
                    const size_t r = idx + 1;
                    acc += 0.5 * (uc[r] - uc[idx]) * (un[r] - un[idx]) / (h * h);
                }
            }
        partial[i] = acc;
    }
    double total = 0.0;
    for (double p : partial) total += p; // fixed order: bitwise thread-independent
    return total * h3;
}

double slab_max_abs(const GridBox& box, const std::vector<double>& u) {
    const int nx = box.dims[0];
    std::vector<double> partial(nx, 0.0);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < nx; ++i) {
        double m = 0.0;
        const size_t base = size_t(i) * box.dims[1] * box.dims[2];
        const size_t cnt = size_t(box.dims[1]) * box.dims[2];
        for (size_t s = 0; s < cnt; ++s) m = std::max(m, std::abs(u[base + s]));
        partial[i] = m;
    }
    double m = 0.0;
    for (double p : partial) m = std::max(m, p);
    return m;
}

} // namespace

FdtdResult run(const ContrastGrid& grid, const CauchyBundle& data, double T,
               const FdtdOptions& opts) {
    const GridBox& box = grid.box;
    const int nx = box.dims[0], ny = box.dims[1], nz = box.dims[2];
    const double h = box.h, dt = grid.dt;
    const double dt2 = dt * dt, inv_h2 = 1.0 / (h * h);
    const size_t n = box.size();
    if (!(T > 0.0)) throw ValidationError("fdtd run: T must be positive");
    data.validate();

    // data must sit inside the box with clearance, or the Dirichlet layer
    // would clip it
    const double half = 0.5 * h * std::min({nx, ny, nz});
    if (!data.empty() && data.rho_max() > half - 2.0 * h)
        throw ValidationError("fdtd run: data support reaches the box boundary; enlarge "
                              "the box");

    FdtdResult res;
    res.dt = dt;
    const int nsteps = int(std::ceil(T / dt - 1e-9));

    std::vector<double> up(n, 0.0), uc(n, 0.0), un(n, 0.0);
    const bool has_src = data.has_source();

// u^0 = phi (interior; the outer Dirichlet layer stays pinned at zero)
#pragma omp parallel for schedule(static)
    for (long long i = 1; i < nx - 1; ++i)
        for (int j = 1; j < ny - 1; ++j)
            for (int k = 1; k < nz - 1; ++k)
                up[box.index(int(i), j, k)] = data.eval_phi(box.center(int(i), j, k));

// u^1 = phi + dt psi + dt^2/(2 rho) (lap_h phi + f^0)
#pragma omp parallel for schedule(static)
    for (long long i = 1; i < nx - 1; ++i)
        for (int j = 1; j < ny - 1; ++j)
            for (int k = 1; k < nz - 1; ++k) {
                const size_t idx = box.index(int(i), j, k);
                const Vec3 c = box.center(int(i), j, k);
                const double lap =
                    (up[idx - 1] + up[idx + 1] + up[idx - nz] + up[idx + nz] +
                     up[idx - size_t(ny) * nz] + up[idx + size_t(ny) * nz] - 6.0 * up[idx]) *
                    inv_h2;
                double f0 = has_src ? data.eval_f(0.0, c) : 0.0;
                uc[idx] = up[idx] + dt * data.eval_psi(c) +
                          0.5 * dt2 * grid.inv_rho[idx] * (lap + f0);
            }

    // probes snap to the nearest cell center; the snapped positions are
    // reported so comparisons use the actual sample points
    std::vector<size_t> probe_cells;
    for (const auto& p : opts.probes) {
        const size_t cell = nearest_cell(box, p);
        probe_cells.push_back(cell);
        const int i = int(cell / (size_t(ny) * nz));
        const int j = int((cell / nz) % ny);
        const int k = int(cell % nz);
        res.probe_positions.push_back(box.center(i, j, k));
    }
    res.probe_traces.assign(probe_cells.size(), {});
    auto record_probes = [&](int step, const std::vector<double>& u) {
        res.probe_times.push_back(step * dt);
        for (size_t p = 0; p < probe_cells.size(); ++p)
            res.probe_traces[p].push_back(u[probe_cells[p]]);
    };
    record_probes(0, up);
    record_probes(1, uc);

    // snapshot bookkeeping
    GridBox snap_box = box;
    std::array<int, 3> snap_off{0, 0, 0};
    if (opts.snapshot_half_width > 0.0) {
        int m = std::min(nx / 2, int(std::ceil(opts.snapshot_half_width / h)));
        snap_box.dims = {2 * m, 2 * m, 2 * m};
        for (int a = 0; a < 3; ++a) snap_off[a] = box.dims[a] / 2 - m;
        snap_box.origin = box.center(snap_off[0], snap_off[1], snap_off[2]);
    }
    std::vector<int> snap_steps;
    for (double st : opts.snapshot_times)
        snap_steps.push_back(std::clamp(int(std::lround(st / dt)), 0, nsteps));
    res.snapshots.box = snap_box;
    auto take_snapshot = [&](int step, const std::vector<double>& u) {
        for (size_t si = 0; si < snap_steps.size(); ++si) {
            if (snap_steps[si] != step) continue;
            std::vector<double> slab(snap_box.size());
            for (int i = 0; i < snap_box.dims[0]; ++i)
                for (int j = 0; j < snap_box.dims[1]; ++j)
                    for (int k = 0; k < snap_box.dims[2]; ++k)
                        slab[snap_box.index(i, j, k)] =
                            u[box.index(i + snap_off[0], j + snap_off[1], k + snap_off[2])];
            res.snapshots.times.push_back(step * dt);
            res.snapshots.data.push_back(std::move(slab));
        }
    };
    take_snapshot(0, up);
    take_snapshot(1, uc);

    // sponge profile (per-axis cosine ramp), 1 in the interior
    std::vector<double> ramp;
    if (grid.sponge_cells > 0) {
        ramp.assign(size_t(std::max({nx, ny, nz})), 1.0);
        for (int i = 0; i < int(ramp.size()); ++i) {
            const int dlo = i, dhi = int(ramp.size()) - 1 - i;
            const int d = std::min(dlo, dhi);
            if (d < grid.sponge_cells) {
                const double xi = 1.0 - double(d) / grid.sponge_cells;
                ramp[i] = 1.0 - grid.sponge_strength * 0.5 * (1.0 - std::cos(std::numbers::pi * xi));
            }
        }
    }

    const double amp0 = slab_max_abs(box, up) + slab_max_abs(box, uc) + 1.0;

    if (opts.energy_audit) {
        res.energy_times.push_back(0.5 * dt);
        res.energy.push_back(leapfrog_energy(box, grid.inv_rho, up, uc, dt));
    }

    for (int step = 2; step <= nsteps; ++step) {
        const double t_prev = (step - 1) * dt;
#pragma omp parallel for schedule(static)
        for (long long i = 1; i < nx - 1; ++i)
            for (int j = 1; j < ny - 1; ++j) {
                const size_t row = box.index(int(i), j, 0);
                for (int k = 1; k < nz - 1; ++k) {
                    const size_t idx = row + k;
                    const double lap =
                        (uc[idx - 1] + uc[idx + 1] + uc[idx - nz] + uc[idx + nz] +
                         uc[idx - size_t(ny) * nz] + uc[idx + size_t(ny) * nz] -
                         6.0 * uc[idx]) *
                        inv_h2;
                    double f = 0.0;
                    if (has_src) f = data.eval_f(t_prev, box.center(int(i), j, k));
                    un[idx] = 2.0 * uc[idx] - up[idx] + dt2 * grid.inv_rho[idx] * (lap + f);
                }
            }
        if (!ramp.empty()) {
#pragma omp parallel for schedule(static)
            for (long long i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j)
                    for (int k = 0; k < nz; ++k) {
                        const double s = ramp[i] * ramp[j] * ramp[k];
                        if (s != 1.0) {
                            const size_t idx = box.index(int(i), j, k);
                            un[idx] *= s;
                            uc[idx] *= s;
                        }
                    }
        }
        if (opts.energy_audit && (step % opts.energy_stride == 0)) {
            res.energy_times.push_back((step - 0.5) * dt);
            res.energy.push_back(leapfrog_energy(box, grid.inv_rho, uc, un, dt));
        }
        std::swap(up, uc);
        std::swap(uc, un);
        record_probes(step, uc);
        take_snapshot(step, uc);
        if (step % 32 == 0 && slab_max_abs(box, uc) > 1e9 * amp0) {
            std::ostringstream os;
            os << "fdtd run: instability detected at step " << step << " (t=" << step * dt
               << "); check the CFL number (dt=" << dt << ", h=" << h << ", cfl=" << grid.cfl
               << ")";
            throw QualityError(os.str());
        }
    }
    return res;
}

double l2_diff(const WaveField& a, size_t time_index,
               const std::function<double(const Vec3&)>& b, double region_radius,
               double r_excl) {
    if (time_index >= a.data.size())
        throw ValidationError("l2_diff: snapshot index out of range");
    const GridBox& box = a.box;
    const double half = 0.5 * box.h * std::min({box.dims[0], box.dims[1], box.dims[2]});
    if (region_radius > half + 1e-12)
        throw ValidationError("l2_diff: geometry mismatch, region exceeds the sampled box");
    const auto& u = a.data[time_index];
    double acc = 0.0;
    for (int i = 0; i < box.dims[0]; ++i)
        for (int j = 0; j < box.dims[1]; ++j)
            for (int k = 0; k < box.dims[2]; ++k) {
                const size_t idx = box.index(i, j, k);
                if (a.masked(idx)) continue;
                const Vec3 c = box.center(i, j, k);
                const double r = c.norm();
                if (r > region_radius || r <= r_excl) continue;
                const double d = u[idx] - b(c);
                acc += d * d;
            }
    return std::sqrt(acc * box.h * box.h * box.h);
}

} // namespace pointwave
