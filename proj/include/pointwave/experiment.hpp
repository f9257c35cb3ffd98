#pragma once

#include <memory>
#include <string>

#include "pointwave/config.hpp"
#include "pointwave/effective.hpp"
#include "pointwave/fdtd.hpp"
#include "pointwave/io.hpp"

namespace pointwave {

/// Everything the modulation and comparison stages share.
struct ExperimentContext {
    ExperimentConfig cfg;
    std::shared_ptr<const DomainGrid> grid;
    SpectralDecomposition spectrum; // all computed modes
    int truncation = 0;             // modes feeding q (captured-mass criterion)
    CauchyBundle bundle;
    ForcingSignal forcing;
    ModulationSignal q_closed;  // the route feeding u_eff
    ModulationSignal q_duhamel; // the independent cross-check route
    double route_error = 0.0;   // relative sup-norm distance between the routes
};

/// Voxelize, assemble, eigensolve; fills grid/spectrum/truncation.
void compute_spectrum(ExperimentContext& ctx);

/// Forcing signal and both modulation routes; enforces the route-equivalence
/// gate (QualityError past quality.route_tol).
void compute_modulation(ExperimentContext& ctx);

/// Full pipeline up to the modulation signal.
ExperimentContext prepare(const ExperimentConfig& cfg);

/// One FDTD run against the analytic fields: a single report row.
ErrorRow compare_single(const ExperimentContext& ctx, double eps);

/// The eps sweep: per-eps rows plus slope fits; artifacts written to
/// cfg.output_dir.
ErrorReport run_sweep(const ExperimentContext& ctx);

// subcommand pipelines; each writes its artifacts and prints a short summary
int cmd_spectrum(const ExperimentConfig& cfg);
int cmd_forcing(const ExperimentConfig& cfg);
int cmd_modulation(const ExperimentConfig& cfg);
int cmd_effective(const ExperimentConfig& cfg);
int cmd_fdtd(const ExperimentConfig& cfg);
int cmd_compare(const ExperimentConfig& cfg);
int cmd_sweep(const ExperimentConfig& cfg);

} // namespace pointwave
