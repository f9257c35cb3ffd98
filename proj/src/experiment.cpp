#include "pointwave/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pointwave/errors.hpp"

namespace pointwave {

namespace {

void apply_threads(const ExperimentConfig& cfg) {
#ifdef _OPENMP
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#else
    (void)cfg;
#endif
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
    ensure_dir(cfg.output_dir);
    return cfg.output_dir + "/" + name;
}

} // namespace

void compute_spectrum(ExperimentContext& ctx) {
    const auto& cfg = ctx.cfg;
    auto grid = std::make_shared<DomainGrid>(voxelize(cfg.domain, cfg.spectral.resolution));
    ctx.grid = grid;
    NewtonOperator op = assemble_newton(grid, cfg.spectral.matvec);
    EigensolveOptions opts;
    opts.solver = cfg.spectral.solver;
    opts.seed = cfg.seed;
    const int want = cfg.spectral.modes > 0 ? cfg.spectral.modes : cfg.spectral.max_modes;
    const int K = int(std::min<size_t>(want, grid->size()));
    ctx.spectrum = eigensolve(op, K, opts);
    ctx.truncation = cfg.spectral.modes > 0
                         ? cfg.spectral.modes
                         : truncate_by_captured_mass(ctx.spectrum,
                                                     cfg.spectral.captured_mass_deficit);
}

namespace {

SpectralDecomposition truncated(const SpectralDecomposition& dec, int K) {
    SpectralDecomposition out = dec;
    out.eigenvalues.resize(K);
    out.eigenvectors.resize(K);
    out.couplings.resize(K);
    out.captured_cumulative.resize(K);
    return out;
}

} // namespace

void compute_modulation(ExperimentContext& ctx) {
    const auto& cfg = ctx.cfg;
    ctx.bundle = cfg.make_bundle();
    ctx.bundle.validate();
    double t_max = cfg.time.horizon;
    for (double e : cfg.fdtd.eps) t_max = std::max(t_max, cfg.horizon_for(e));
    // margin: comparison times snap to FDTD steps, which can land past T
    const double T_q = t_max + std::max(0.25, 4.0 * cfg.time.step);
    const SphereRule rule = sphere_rule(cfg.sphere_order);

    ctx.forcing = forcing_signal(ctx.bundle, cfg.time.step, T_q, rule);

    const SpectralDecomposition dec_q = truncated(ctx.spectrum, ctx.truncation);
    ClosedFormOptions cf;
    cf.sphere_order = cfg.sphere_order;
    ctx.q_closed = modulation_closed_form(dec_q, ctx.bundle, cfg.time.step, T_q, 0, cf);
    ctx.q_duhamel = modulation_duhamel(dec_q, ctx.forcing, 0);

    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < ctx.q_closed.total.size() && i < ctx.q_duhamel.total.size(); ++i) {
        num = std::max(num, std::abs(ctx.q_closed.total[i] - ctx.q_duhamel.total[i]));
        den = std::max(den, std::abs(ctx.q_closed.total[i]));
    }
    ctx.route_error = den > 0.0 ? num / den : 0.0;
    if (ctx.route_error > cfg.quality.route_tol) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "route equivalence violated: closed-form vs duhamel modulation "
                      "differ by %.3e relative (gate %.3e)",
                      ctx.route_error, cfg.quality.route_tol);
        throw QualityError(buf);
    }
}

ExperimentContext prepare(const ExperimentConfig& cfg) {
    cfg.validate();
    apply_threads(cfg);
    ExperimentContext ctx;
    ctx.cfg = cfg;
    compute_spectrum(ctx);
    if (!cfg.make_bundle().empty()) compute_modulation(ctx);
    return ctx;
}

namespace {

void require_data(const ExperimentContext& ctx, const char* who) {
    if (ctx.bundle.empty())
        throw ValidationError(std::string(who) +
                              ": the data bundle is empty; set at least one of "
                              "data.phi/psi/source amplitude");
}

} // namespace

ErrorRow compare_single(const ExperimentContext& ctx, double eps) {
    const auto t_start = std::chrono::steady_clock::now();
    const auto& cfg = ctx.cfg;
    const double T = cfg.horizon_for(eps);
    const double h = cfg.grid_pitch(eps);
    const double L = cfg.box_half_width_for(T);
    ContrastGrid grid = build_grid(L, h, eps, cfg.domain, cfg.fdtd.n_min, cfg.fdtd.cfl,
                                   cfg.fdtd.blend, cfg.fdtd.boundary, cfg.fdtd.sponge_cells);

    FdtdOptions opts;
    if (cfg.time.eps_power) {
        for (double f : cfg.compare.times)
            opts.snapshot_times.push_back(f / cfg.time.horizon * T);
    } else {
        opts.snapshot_times = cfg.compare.times;
    }
    opts.snapshot_half_width = cfg.compare.region_radius + 2.0 * h;
    FdtdResult res = run(grid, ctx.bundle, T, opts);

    EffectiveField eff{eps, &ctx.bundle, &ctx.q_closed, 0.0};
    const double r_excl = cfg.compare.r_excl_cells * h;

    ErrorRow row;
    row.eps = eps;
    for (size_t ti = 0; ti < res.snapshots.times.size(); ++ti) {
        const double t = res.snapshots.times[ti];
        auto free_eval = [&](const Vec3& x) { return free_field_exact(ctx.bundle, t, x); };
        auto eff_eval = [&](const Vec3& x) { return eff.eval(t, x); };
        row.e_free = std::max(
            row.e_free, l2_diff(res.snapshots, ti, free_eval, cfg.compare.region_radius, 0.0));
        row.e_eff = std::max(
            row.e_eff, l2_diff(res.snapshots, ti, eff_eval, cfg.compare.region_radius, 0.0));
        row.e_free_excl =
            std::max(row.e_free_excl,
                     l2_diff(res.snapshots, ti, free_eval, cfg.compare.region_radius, r_excl));
        row.e_eff_excl =
            std::max(row.e_eff_excl,
                     l2_diff(res.snapshots, ti, eff_eval, cfg.compare.region_radius, r_excl));
    }
    row.runtime_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return row;
}

ErrorReport run_sweep(const ExperimentContext& ctx) {
    const auto& cfg = ctx.cfg;
    std::vector<double> eps = cfg.fdtd.eps;
    std::sort(eps.begin(), eps.end(), std::greater<>());
    ErrorReport report;
    report.horizon = cfg.time.horizon;
    for (double e : eps) {
        report.rows.push_back(compare_single(ctx, e));
        const auto& r = report.rows.back();
        std::printf("  eps=%-6g  E_free=%.6e  E_eff=%.6e  (excl: %.6e / %.6e)\n", e, r.e_free,
                    r.e_eff, r.e_free_excl, r.e_eff_excl);
        std::fflush(stdout);
    }
    refresh_report_fits(report);
    return report;
}

int cmd_spectrum(const ExperimentConfig& cfg) {
    apply_threads(cfg);
    ExperimentContext ctx;
    ctx.cfg = cfg;
    compute_spectrum(ctx);
    write_spectrum_csv(out_path(cfg, "spectrum.csv"), ctx.spectrum, cfg.echo());
    const auto& dec = ctx.spectrum;
    std::printf("spectrum: %d modes, lambda_1=%.6f, captured mass %.6f of |Omega|=%.6f "
                "(truncation K=%d at deficit %g)\n",
                dec.modes(), dec.eigenvalues.empty() ? 0.0 : dec.eigenvalues[0],
                dec.captured_mass(), dec.domain_volume, ctx.truncation,
                cfg.spectral.captured_mass_deficit);
    return exit_code::ok;
}

int cmd_forcing(const ExperimentConfig& cfg) {
    apply_threads(cfg);
    CauchyBundle bundle = cfg.make_bundle();
    bundle.validate();
    if (bundle.empty()) throw ValidationError("forcing: the data bundle is empty");
    const SphereRule rule = sphere_rule(cfg.sphere_order);
    ForcingSignal sig = forcing_signal(bundle, cfg.time.step, cfg.time.horizon, rule);
    write_forcing_csv(out_path(cfg, "forcing.csv"), sig, cfg.echo());
    double peak = 0.0;
    for (double v : sig.h) peak = std::max(peak, std::abs(v));
    std::printf("forcing: %zu samples to T=%g, sup|h|=%.6e\n", sig.t.size(), cfg.time.horizon,
                peak);
    return exit_code::ok;
}

int cmd_modulation(const ExperimentConfig& cfg) {
    ExperimentContext ctx = prepare(cfg);
    write_modulation_csv(out_path(cfg, "modulation.csv"), ctx.q_closed, cfg.echo());
    write_modulation_csv(out_path(cfg, "modulation_duhamel.csv"), ctx.q_duhamel, cfg.echo());
    write_forcing_csv(out_path(cfg, "forcing.csv"), ctx.forcing, cfg.echo());
    write_spectrum_csv(out_path(cfg, "spectrum.csv"), ctx.spectrum, cfg.echo());
    std::printf("modulation: K=%d modes, route distance %.3e (gate %.3e)\n", ctx.truncation,
                ctx.route_error, cfg.quality.route_tol);
    return exit_code::ok;
}

int cmd_effective(const ExperimentConfig& cfg) {
    ExperimentContext ctx = prepare(cfg);
    require_data(ctx, "effective");
    const double eps = cfg.fdtd.eps.front();
    const double h = cfg.grid_pitch(eps);
    GridBox box = centered_box(cfg.compare.region_radius + 2.0 * h, h);
    const double r_excl = cfg.compare.r_excl_cells * h;
    WaveField field = effective_field(ctx.bundle, ctx.q_closed, eps, cfg.compare.times, box,
                                      r_excl);
    for (size_t ti = 0; ti < field.times.size(); ++ti)
        write_snapshot(out_path(cfg, "effective_t" + std::to_string(ti)), field, ti,
                       cfg.echo());
    write_modulation_csv(out_path(cfg, "modulation.csv"), ctx.q_closed, cfg.echo());
    std::printf("effective: eps=%g, %zu snapshots on %d^3 grid (mask radius %g)\n", eps,
                field.times.size(), box.dims[0], r_excl);
    return exit_code::ok;
}

int cmd_fdtd(const ExperimentConfig& cfg) {
    apply_threads(cfg);
    CauchyBundle bundle = cfg.make_bundle();
    bundle.validate();
    const double eps = cfg.fdtd.eps.front();
    const double T = cfg.horizon_for(eps);
    const double h = cfg.grid_pitch(eps);
    ContrastGrid grid = build_grid(cfg.box_half_width_for(T), h, eps, cfg.domain,
                                   cfg.fdtd.n_min, cfg.fdtd.cfl, cfg.fdtd.blend,
                                   cfg.fdtd.boundary, cfg.fdtd.sponge_cells);
    FdtdOptions opts;
    opts.snapshot_times = cfg.time.eps_power ? std::vector<double>{T} : cfg.compare.times;
    opts.snapshot_half_width = cfg.compare.region_radius + 2.0 * h;
    opts.probes = {{0.5 * cfg.compare.region_radius, 0, 0},
                   {0, 0, -0.5 * cfg.compare.region_radius}};
    FdtdResult res = run(grid, bundle, T, opts);
    write_probes_csv(out_path(cfg, "probes.csv"), res, cfg.echo());
    for (size_t ti = 0; ti < res.snapshots.times.size(); ++ti)
        write_snapshot(out_path(cfg, "fdtd_t" + std::to_string(ti)), res.snapshots, ti,
                       cfg.echo());
    std::printf("fdtd: eps=%g, %d^3 cells, dt=%.5f, %zu snapshots\n", eps, grid.box.dims[0],
                grid.dt, res.snapshots.times.size());
    return exit_code::ok;
}

int cmd_compare(const ExperimentConfig& cfg) {
    ExperimentContext ctx = prepare(cfg);
    require_data(ctx, "compare");
    ErrorReport report;
    report.horizon = cfg.time.horizon;
    for (double e : cfg.fdtd.eps) {
        report.rows.push_back(compare_single(ctx, e));
        const auto& r = report.rows.back();
        std::printf("eps=%g: E_free=%.6e E_eff=%.6e E_free_excl=%.6e E_eff_excl=%.6e "
                    "(tau=%.3f)\n",
                    e, r.e_free, r.e_eff, r.e_free_excl, r.e_eff_excl,
                    -std::log(cfg.horizon_for(e)) / std::log(e));
    }
    refresh_report_fits(report);
    write_report_csv(out_path(cfg, "report.csv"), report, cfg.echo());
    write_report_json(out_path(cfg, "report.json"), report, cfg.echo());
    return exit_code::ok;
}

int cmd_sweep(const ExperimentConfig& cfg) {
    ExperimentContext ctx = prepare(cfg);
    require_data(ctx, "sweep");
    write_spectrum_csv(out_path(cfg, "spectrum.csv"), ctx.spectrum, cfg.echo());
    write_forcing_csv(out_path(cfg, "forcing.csv"), ctx.forcing, cfg.echo());
    write_modulation_csv(out_path(cfg, "modulation.csv"), ctx.q_closed, cfg.echo());
    write_modulation_csv(out_path(cfg, "modulation_duhamel.csv"), ctx.q_duhamel, cfg.echo());
    std::printf("sweep: route distance %.3e, truncation K=%d, starting %zu eps runs\n",
                ctx.route_error, ctx.truncation, cfg.fdtd.eps.size());
    ErrorReport report = run_sweep(ctx);
    write_report_csv(out_path(cfg, "report.csv"), report, cfg.echo());
    write_report_json(out_path(cfg, "report.json"), report, cfg.echo());
    write_plot_script(out_path(cfg, "plot_errors.gp"), "report.csv");
    if (report.s_free.valid)
        std::printf("sweep: s_free=%.3f (+-%.3f), s_eff=%.3f (+-%.3f), loo deltas %.3f/%.3f\n",
                    report.s_free.slope, report.s_free.ci95, report.s_eff.slope,
                    report.s_eff.ci95, report.s_free_loo_delta, report.s_eff_loo_delta);
    return exit_code::ok;
}

} // namespace pointwave
