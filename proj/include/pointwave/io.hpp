#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pointwave/effective.hpp"
#include "pointwave/fdtd.hpp"
#include "pointwave/freewave.hpp"
#include "pointwave/newton.hpp"

namespace pointwave {

/// Shortest representation that parses back to the identical double.
std::string format_double(double v);

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

inline constexpr const char* kVersion = "pointwave 1.0.0";

void ensure_dir(const std::string& path);

/// Comment header carried by every artifact: version plus the resolved config.
std::string artifact_header(const ConfigEcho& echo);

void write_spectrum_csv(const std::string& path, const SpectralDecomposition& dec,
                        const ConfigEcho& echo);
void write_forcing_csv(const std::string& path, const ForcingSignal& sig,
                       const ConfigEcho& echo);
void write_modulation_csv(const std::string& path, const ModulationSignal& q,
                          const ConfigEcho& echo);
void write_probes_csv(const std::string& path, const FdtdResult& res,
                      const ConfigEcho& echo);

/// One row of the sweep error table.
struct ErrorRow {
    double eps = 0.0;
    double e_free = 0.0;
    double e_eff = 0.0;
    double e_free_excl = 0.0;
    double e_eff_excl = 0.0;
    double runtime_sec = 0.0; // oracle run + norms; JSON metadata only
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ci95 = 0.0; // 2 x standard error of the slope
    bool valid = false;
};

struct ErrorReport {
    std::vector<ErrorRow> rows; // eps descending
    SlopeFit s_free, s_eff;     // fitted on the exclusion-ball norms
    double s_free_loo_delta = 0.0; // slope change when the finest eps is dropped
    double s_eff_loo_delta = 0.0;
    double horizon = 0.0;
    std::vector<double> tau_implied; // -ln T / ln eps per row
};

/// Least-squares fit of ln E against ln eps; needs >= 3 rows.
SlopeFit fit_slope(const std::vector<double>& eps, const std::vector<double>& err);

/// Recomputes slopes and diagnostics of a report from its rows.
void refresh_report_fits(ErrorReport& report);

void write_report_csv(const std::string& path, const ErrorReport& report,
                      const ConfigEcho& echo);
ErrorReport read_report_csv(const std::string& path);
void write_report_json(const std::string& path, const ErrorReport& report,
                       const ConfigEcho& echo);

/// gnuplot-compatible script for the error-vs-eps log-log figure.
void write_plot_script(const std::string& path, const std::string& report_csv);

/// Flat binary snapshot (header: dims, h, t) plus a JSON sidecar.
void write_snapshot(const std::string& base_path, const WaveField& field,
                    size_t time_index, const ConfigEcho& echo);
WaveField read_snapshot(const std::string& base_path);

} // namespace pointwave
