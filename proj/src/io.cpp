#include "pointwave/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pointwave/errors.hpp"

namespace pointwave {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void ensure_dir(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw IoError("cannot create directory '" + path + "': " + ec.message());
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

} // namespace

std::string artifact_header(const ConfigEcho& echo) {
    std::ostringstream os;
    os << "# " << kVersion << "\n";
    for (const auto& [k, v] : echo) os << "# " << k << " = " << v << "\n";
    return os.str();
}

void write_spectrum_csv(const std::string& path, const SpectralDecomposition& dec,
                        const ConfigEcho& echo) {
    auto out = open_out(path);
    out << artifact_header(echo);
    out << "k,lambda,coupling,captured_mass_cumulative\n";
    for (int k = 0; k < dec.modes(); ++k)
        out << (k + 1) << ',' << format_double(dec.eigenvalues[k]) << ','
            << format_double(dec.couplings[k]) << ','
            << format_double(dec.captured_cumulative[k]) << '\n';
}

void write_forcing_csv(const std::string& path, const ForcingSignal& sig,
                       const ConfigEcho& echo) {
    auto out = open_out(path);
    out << artifact_header(echo);
    out << "t,h\n";
    for (size_t i = 0; i < sig.t.size(); ++i)
        out << format_double(sig.t[i]) << ',' << format_double(sig.h[i]) << '\n';
}

void write_modulation_csv(const std::string& path, const ModulationSignal& q,
                          const ConfigEcho& echo) {
    auto out = open_out(path);
    out << artifact_header(echo);
    out << "# route = " << to_string(q.route) << "\n";
    out << "t,q_total";
    for (int k = 1; k <= q.modes(); ++k) out << ",q_" << k;
    out << '\n';
    for (size_t i = 0; i < q.t.size(); ++i) {
        out << format_double(q.t[i]) << ',' << format_double(q.total[i]);
        for (int k = 0; k < q.modes(); ++k) out << ',' << format_double(q.per_mode[k][i]);
        out << '\n';
    }
}

void write_probes_csv(const std::string& path, const FdtdResult& res,
                      const ConfigEcho& echo) {
    auto out = open_out(path);
    out << artifact_header(echo);
    out << "t";
    for (size_t p = 0; p < res.probe_traces.size(); ++p) out << ",u_probe" << p;
    out << '\n';
    for (size_t i = 0; i < res.probe_times.size(); ++i) {
        out << format_double(res.probe_times[i]);
        for (const auto& trace : res.probe_traces) out << ',' << format_double(trace[i]);
        out << '\n';
    }
}

SlopeFit fit_slope(const std::vector<double>& eps, const std::vector<double>& err) {
    SlopeFit fit;
    const size_t n = eps.size();
    if (n < 3 || err.size() != n) return fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double x = std::log(eps[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double det = double(n) * sxx - sx * sx;
    fit.slope = (double(n) * sxy - sx * sy) / det;
    fit.intercept = (sy * sxx - sx * sxy) / det;
    double ss = 0;
    for (size_t i = 0; i < n; ++i) {
        const double x = std::log(eps[i]), y = std::log(err[i]);
        const double r = y - (fit.slope * x + fit.intercept);
        ss += r * r;
    }
    if (n > 2) {
        const double var = ss / double(n - 2) * double(n) / det;
        fit.ci95 = 2.0 * std::sqrt(std::max(0.0, var));
    }
    fit.valid = true;
    return fit;
}

void refresh_report_fits(ErrorReport& report) {
    std::vector<double> eps, efree, eeff;
    for (const auto& r : report.rows) {
        eps.push_back(r.eps);
        efree.push_back(r.e_free_excl);
        eeff.push_back(r.e_eff_excl);
    }
    report.s_free = fit_slope(eps, efree);
    report.s_eff = fit_slope(eps, eeff);
    report.s_free_loo_delta = 0.0;
    report.s_eff_loo_delta = 0.0;
    if (eps.size() >= 4) {
        // drop the finest (smallest) eps; rows are sorted descending
        std::vector<double> e2(eps.begin(), eps.end() - 1);
        std::vector<double> f2(efree.begin(), efree.end() - 1);
        std::vector<double> g2(eeff.begin(), eeff.end() - 1);
        report.s_free_loo_delta = fit_slope(e2, f2).slope - report.s_free.slope;
        report.s_eff_loo_delta = fit_slope(e2, g2).slope - report.s_eff.slope;
    }
    report.tau_implied.clear();
    for (const auto& r : report.rows)
        report.tau_implied.push_back(report.horizon > 0.0
                                         ? -std::log(report.horizon) / std::log(r.eps)
                                         : 0.0);
}

void write_report_csv(const std::string& path, const ErrorReport& report,
                      const ConfigEcho& echo) {
    auto out = open_out(path);
    out << artifact_header(echo);
    out << "# horizon = " << format_double(report.horizon) << "\n";
    if (report.s_free.valid) {
        out << "# s_free = " << format_double(report.s_free.slope) << " +- "
            << format_double(report.s_free.ci95) << "\n";
        out << "# s_eff = " << format_double(report.s_eff.slope) << " +- "
            << format_double(report.s_eff.ci95) << "\n";
        out << "# s_free_loo_delta = " << format_double(report.s_free_loo_delta) << "\n";
        out << "# s_eff_loo_delta = " << format_double(report.s_eff_loo_delta) << "\n";
    }
    out << "eps,E_free,E_eff,E_free_excl,E_eff_excl\n";
    for (const auto& r : report.rows)
        out << format_double(r.eps) << ',' << format_double(r.e_free) << ','
            << format_double(r.e_eff) << ',' << format_double(r.e_free_excl) << ','
            << format_double(r.e_eff_excl) << '\n';
}

ErrorReport read_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    ErrorReport report;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string key = "# horizon = ";
            if (line.rfind(key, 0) == 0) report.horizon = std::strtod(line.c_str() + key.size(), nullptr);
            continue;
        }
        if (!header_seen) {
            if (line != "eps,E_free,E_eff,E_free_excl,E_eff_excl")
                throw IoError("'" + path + "': unexpected report header '" + line + "'");
            header_seen = true;
            continue;
        }
        ErrorRow row;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &row.eps, &row.e_free,
                        &row.e_eff, &row.e_free_excl, &row.e_eff_excl) != 5)
            throw IoError("'" + path + "': malformed report row '" + line + "'");
        report.rows.push_back(row);
    }
    if (!header_seen) throw IoError("'" + path + "': missing report header");
    refresh_report_fits(report);
    return report;
}

void write_report_json(const std::string& path, const ErrorReport& report,
                       const ConfigEcho& echo) {
    nlohmann::json j;
    j["version"] = kVersion;
    for (const auto& [k, v] : echo) j["config"][k] = v;
    j["horizon"] = report.horizon;
    auto& rows = j["rows"];
    for (size_t i = 0; i < report.rows.size(); ++i) {
        const auto& r = report.rows[i];
        rows.push_back({{"eps", r.eps},
                        {"E_free", r.e_free},
                        {"E_eff", r.e_eff},
                        {"E_free_excl", r.e_free_excl},
                        {"E_eff_excl", r.e_eff_excl},
                        {"runtime_sec", r.runtime_sec},
                        {"tau_implied", report.tau_implied.empty() ? 0.0
                                                                   : report.tau_implied[i]}});
    }
    if (report.s_free.valid) {
        j["fits"]["s_free"] = report.s_free.slope;
        j["fits"]["s_free_ci95"] = report.s_free.ci95;
        j["fits"]["s_eff"] = report.s_eff.slope;
        j["fits"]["s_eff_ci95"] = report.s_eff.ci95;
        j["fits"]["s_free_loo_delta"] = report.s_free_loo_delta;
        j["fits"]["s_eff_loo_delta"] = report.s_eff_loo_delta;
    }
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_plot_script(const std::string& path, const std::string& report_csv) {
    auto out = open_out(path);
    out << "# gnuplot script: error vs eps, log-log\n"
           "set datafile separator ','\n"
           "set logscale xy\n"
           "set xlabel 'eps'\n"
           "set ylabel 'sup_t L2 error'\n"
           "set key left top\n"
           "set terminal pngcairo size 900,700\n"
           "set output 'errors.png'\n"
           "plot '"
        << report_csv
        << "' using 1:4 with linespoints title 'E_free (excl)', \\\n     '" << report_csv
        << "' using 1:5 with linespoints title 'E_eff (excl)'\n";
}

void write_snapshot(const std::string& base_path, const WaveField& field,
                    size_t time_index, const ConfigEcho& echo) {
    if (time_index >= field.data.size())
        throw ValidationError("write_snapshot: time index out of range");
    const std::string bin_path = base_path + ".bin";
    std::ofstream out(bin_path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + bin_path + "' for writing");
    const int32_t dims[3] = {field.box.dims[0], field.box.dims[1], field.box.dims[2]};
    const double meta[5] = {field.box.h, field.times[time_index], field.box.origin.x,
                            field.box.origin.y, field.box.origin.z};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(meta), sizeof(meta));
    const auto& u = field.data[time_index];
    out.write(reinterpret_cast<const char*>(u.data()), std::streamsize(u.size() * sizeof(double)));
    if (!out) throw IoError("failed writing '" + bin_path + "'");

    nlohmann::json j;
    j["version"] = kVersion;
    j["dims"] = {dims[0], dims[1], dims[2]};
    j["h"] = field.box.h;
    j["t"] = field.times[time_index];
    j["origin"] = {field.box.origin.x, field.box.origin.y, field.box.origin.z};
    j["layout"] = "row-major x,y,z; float64; header 3*int32 + 5*float64";
    for (const auto& [k, v] : echo) j["config"][k] = v;
    auto side = open_out(base_path + ".json");
    side << j.dump(2) << '\n';
}

WaveField read_snapshot(const std::string& base_path) {
    const std::string bin_path = base_path + ".bin";
    std::ifstream in(bin_path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + bin_path + "' for reading");
    int32_t dims[3];
    double meta[5];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    in.read(reinterpret_cast<char*>(meta), sizeof(meta));
    WaveField f;
    f.box.dims = {dims[0], dims[1], dims[2]};
    f.box.h = meta[0];
    f.box.origin = {meta[2], meta[3], meta[4]};
    f.times = {meta[1]};
    f.data.assign(1, std::vector<double>(f.box.size()));
    in.read(reinterpret_cast<char*>(f.data[0].data()),
            std::streamsize(f.data[0].size() * sizeof(double)));
    if (!in) throw IoError("truncated snapshot '" + bin_path + "'");
    return f;
}

} // namespace pointwave
