#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pointwave/data.hpp"
#include "pointwave/fdtd.hpp"
#include "pointwave/geometry.hpp"
#include "pointwave/io.hpp"
#include "pointwave/newton.hpp"

namespace pointwave {

/// Full experiment description, read from a strict key = value file.
/// Unknown keys are rejected; every cross-module precondition is checked
/// by validate() before any compute starts.
struct ExperimentConfig {
    DomainSpec domain;

    struct BumpCfg {
        double amplitude = 0.0; // 0 disables the datum
        Vec3 center{0, 0, 1.0};
        double radius = 0.5;
        int smoothness = 7;
    };
    BumpCfg phi, psi;

    struct SourceCfg {
        double amplitude = 0.0;
        Vec3 center{0, 0, 1.0};
        double radius = 0.4;
        int smoothness = 7;
        double time_center = 0.6;
        double time_width = 0.4;
        int time_smoothness = 7;
    };
    SourceCfg source;

    struct SpectralCfg {
        int resolution = 24;
        int modes = 0; // 0: captured-mass criterion picks the truncation
        double captured_mass_deficit = 0.01;
        int max_modes = 110;
        EigensolveOptions::Solver solver = EigensolveOptions::Solver::lanczos;
        MatvecPath matvec = MatvecPath::automatic;
    } spectral;

    struct TimeCfg {
        double horizon = 3.0;
        double step = 0.005;
        bool eps_power = false; // T = eps^-tau instead of the fixed horizon
        double tau = 0.5;
    } time;

    struct FdtdCfg {
        std::vector<double> eps{0.3, 0.2, 0.15, 0.1};
        int n_min = 8;
        double cfl = 0.9;
        BoundaryMode boundary = BoundaryMode::causal_box;
        int sponge_cells = 12;
        bool blend = false;
        bool common_grid = true; // h from the smallest eps for every run
        double box_half_width = 0.0; // 0: auto causal size
        double memory_budget_gb = 8.0;
    } fdtd;

    struct CompareCfg {
        double region_radius = 1.0;
        int r_excl_cells = 2;
        std::vector<double> times{1.0, 1.5, 2.0, 2.5, 3.0};
    } compare;

    struct QualityCfg {
        double route_tol = 1e-3;
    } quality;

    std::string output_dir = "out";
    std::uint64_t seed = 12345;
    int threads = 0;

    int sphere_order = 47;

    CauchyBundle make_bundle() const;
    void validate() const;
    ConfigEcho echo() const;

    /// Grid pitch for one eps run (common-grid mode uses the smallest eps).
    double grid_pitch(double eps) const;
    /// Causal box half-width for the run (auto unless overridden).
    double box_half_width_for(double T) const;
    double horizon_for(double eps) const;
};

struct CliOverrides {
    std::optional<double> eps;
    std::optional<std::string> out_dir;
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
};

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
ExperimentConfig load_config(const std::string& path, const CliOverrides& overrides = {});

} // namespace pointwave
