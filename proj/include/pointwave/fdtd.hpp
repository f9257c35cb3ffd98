#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pointwave/data.hpp"
#include "pointwave/geometry.hpp"
#include "pointwave/wavefield.hpp"

namespace pointwave {

enum class BoundaryMode { causal_box, sponge };

/// Leapfrog grid for the contrast wave equation
///   (eps^-2 chi_Omega_eps + chi_outside) u_tt = lap u + f.
/// Cells store 1/rho; rho is eps^-2 inside Omega_eps and 1 outside
/// (optionally a 3^3-subsample volume-fraction blend).
struct ContrastGrid {
    GridBox box;
    double eps = 1.0; // 1 means contrast off
    double dt = 0.0;
    double cfl = 0.9;
    BoundaryMode boundary = BoundaryMode::causal_box;
    int sponge_cells = 0;
    double sponge_strength = 0.05;
    std::vector<double> inv_rho;
};

/// Builds the grid. Enforces h <= eps * diam(Omega) / n_min (the inclusion
/// must be resolved) and the CFL bound dt = cfl h / sqrt(3), cfl <= 0.95.
/// eps == 1 switches the contrast off entirely (free medium oracle runs).
ContrastGrid build_grid(double half_width, double h, double eps, const DomainSpec& spec,
                        int n_min = 8, double cfl = 0.9, bool blend = false,
                        BoundaryMode boundary = BoundaryMode::causal_box,
                        int sponge_cells = 0);

struct FdtdOptions {
    std::vector<Vec3> probes;
    std::vector<double> snapshot_times;
    double snapshot_half_width = 0.0; // 0: full box
    bool energy_audit = false;
    int energy_stride = 1;
};

struct FdtdResult {
    double dt = 0.0;
    std::vector<double> probe_times;
    std::vector<Vec3> probe_positions;             // snapped to cell centers
    std::vector<std::vector<double>> probe_traces; // [probe][step]
    WaveField snapshots;                           // times are snapped to steps
    std::vector<double> energy_times;
    std::vector<double> energy; // staggered leapfrog energy E^(n+1/2)
};

/// Leapfrog run to horizon T:
///   rho (u^{n+1} - 2u^n + u^{n-1}) / dt^2 = lap_h u^n + f^n,
///   u^0 = phi,  u^1 = phi + dt psi + (dt^2 / 2 rho)(lap_h phi + f^0),
/// 7-point Laplacian, Dirichlet outer layer (causal box) or an optional
/// cosine-ramp sponge. Detects blow-up and reports a CFL diagnostic.
FdtdResult run(const ContrastGrid& grid, const CauchyBundle& data, double T,
               const FdtdOptions& opts = {});

/// Discrete L2 norm of (a - b) over the centered ball region minus the
/// exclusion ball, weight h^3, at snapshot index time_index.
double l2_diff(const WaveField& a, size_t time_index,
               const std::function<double(const Vec3&)>& b, double region_radius,
               double r_excl);

} // namespace pointwave
