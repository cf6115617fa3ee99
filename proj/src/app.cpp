#include "aftershock/app.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "aftershock/calibration.hpp"
#include "aftershock/errors.hpp"
#include "aftershock/io.hpp"
#include "aftershock/omori.hpp"
#include "aftershock/svg.hpp"

#ifndef AFTERSHOCK_VERSION
#define AFTERSHOCK_VERSION "dev"
#endif

namespace aftershock {

namespace fs = std::filesystem;

namespace {

// FNV-1a over the file contents, recorded for each manifest input.
std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

void require(const std::string& path) {
    if (!fs::exists(path)) throw DependencyError(path);
}

/// Collects what a run read and wrote, then writes the manifest.
class Manifest {
public:
    Manifest(Command command, const RunConfig& config)
        : command_(command), config_(config), start_(std::chrono::steady_clock::now()) {}

    std::string name() const { return "manifest_" + command_name(command_) + ".json"; }
    std::string reference() const { return "manifest: " + name(); }

    void input(const std::string& path) {
        inputs_.push_back({{"path", path}, {"bytes", fs::file_size(path)}, {"fnv1a64", file_digest(path)}});
    }
    void output(const std::string& path) { outputs_.push_back(fs::path(path).filename().string()); }
    void param(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }

    void write(const std::string& dir) const {
        nlohmann::json j;
        j["command"] = command_name(command_);
        j["tool"] = "aftershock";
        j["version"] = AFTERSHOCK_VERSION;
        j["seed"] = config_.seed;
        j["config"] = config_.values;
        j["inputs"] = inputs_;
        j["outputs"] = outputs_;
        j["results"] = extra_;
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        j["finished_utc"] = stamp;
        j["wall_time_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        std::ofstream out(fs::path(dir) / name(), std::ios::binary);
        out << j.dump(2) << '\n';
    }

private:
    Command command_;
    const RunConfig& config_;
    std::chrono::steady_clock::time_point start_;
    nlohmann::json inputs_ = nlohmann::json::array();
    nlohmann::json outputs_ = nlohmann::json::array();
    nlohmann::json extra_ = nlohmann::json::object();
};

std::ofstream open_output(const std::string& path, const Manifest& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << "# " << manifest.reference() << '\n';
    return out;
}

// Minimal CSV table: header names and string cells, '#' lines skipped.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw DataError("column '" + name + "' not found");
    }
    std::vector<double> numbers(const std::string& name) const {
        const std::size_t c = column(name);
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(std::stod(r.at(c)));
        return out;
    }
};

Table read_table(const std::string& path) {
    require(path);
    std::ifstream in(path);
    Table t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (t.header.empty()) {
            t.header = std::move(cells);
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    if (t.header.empty()) throw DataError("empty table " + path);
    return t;
}

void write_svg(const std::string& path, const svg::Plot& plot, const Manifest& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    const std::string doc = svg::render(plot);
    const auto first_line = doc.find('\n');
    out << doc.substr(0, first_line + 1) << "<!-- " << manifest.reference() << " -->\n" << doc.substr(first_line + 1);
}

std::string sigma_label(double s) {
    std::ostringstream os;
    os << "sigma_a=" << s;
    return os.str();
}

// ---- figures rendered from CSV artifacts ----

svg::Plot figure_gamma(const std::string& gamma_csv, const std::string& params_path) {
    const Table t = read_table(gamma_csv);
    const double D = read_params(params_path).D;
    svg::Plot plot{"Scaling exponent: gamma(q)", "q", "gamma(q)", false, false, {}};
    svg::Series pts{"empirical", t.numbers("q"), t.numbers("gamma"), t.numbers("gamma_se"), svg::Style::points, -1};
    svg::Series line{"q D", {0.0}, {0.0}, {}, svg::Style::dashed, -1};
    for (double q : pts.x) {
        line.x.push_back(q);
        line.y.push_back(q * D);
    }
    plot.series = {pts, line};
    return plot;
}

svg::Plot figure_collapse(const std::string& collapse_csv) {
    const Table t = read_table(collapse_csv);
    svg::Plot plot{"Data collapse of aggregate returns", "r / (t+1)^D", "density", false, true, {}};
    const std::size_t ct = t.column("t");
    const std::size_t cx = t.column("x");
    const std::size_t cd = t.column("density");
    const std::size_t cm = t.column("model");
    std::map<std::string, svg::Series> by_t;
    svg::Series model{"fit g", {}, {}, {}, svg::Style::dashed, -1};
    std::vector<std::string> order;
    for (const auto& r : t.rows) {
        if (r[ct] == "all") {
            model.x.push_back(std::stod(r[cx]));
            model.y.push_back(std::stod(r[cm]));
            continue;
        }
        auto [it, inserted] = by_t.try_emplace(r[ct]);
        if (inserted) {
            it->second.label = "t=" + r[ct];
            order.push_back(r[ct]);
        }
        const double d = std::stod(r[cd]);
        if (d > 0.0) {
            it->second.x.push_back(std::stod(r[cx]));
            it->second.y.push_back(d);
        }
    }
    for (const auto& k : order) plot.series.push_back(by_t[k]);
    plot.series.push_back(model);
    return plot;
}

std::vector<std::pair<double, OmoriParams>> read_omori_fits(const std::string& path) {
    const Table t = read_table(path);
    const auto s = t.numbers("sigma_a");
    const auto K = t.numbers("K");
    const auto p = t.numbers("p");
    const auto tau = t.numbers("tau");
    std::vector<std::pair<double, OmoriParams>> out;
    for (std::size_t i = 0; i < s.size(); ++i) out.push_back({s[i], {K[i], p[i], tau[i]}});
    return out;
}

svg::Plot figure_omori(const std::string& empirical_csv, const std::string& fits_csv) {
    svg::Plot plot{"Empirical aftershocks and Omori fits", "t (bars)", "N(t)", false, false, {}};
    const auto curves = read_curves(empirical_csv, CurveKind::empirical);
    const auto fits = read_omori_fits(fits_csv);
    int color = 0;
    for (const auto& c : curves) {
        svg::Series pts{sigma_label(c.sigma_a), {}, c.N, c.se, svg::Style::points, color++};
        for (auto t : c.t) pts.x.push_back(static_cast<double>(t));
        plot.series.push_back(pts);
    }
    color = 0;
    for (const auto& [s, params] : fits) {
        svg::Series line{"Omori " + sigma_label(s), {}, {}, {}, svg::Style::dashed, color++};
        for (int k = 0; k <= 190; ++k) {
            line.x.push_back(k / 10.0);
            line.y.push_back(omori_cumulative(params, k / 10.0));
        }
        plot.series.push_back(line);
    }
    return plot;
}

svg::Plot figure_prediction(const std::string& empirical_csv, const std::string& predicted_csv) {
    svg::Plot plot{"Model prediction vs empirical aftershocks", "t (bars)", "N(t)", false, false, {}};
    int color = 0;
    for (const auto& c : read_curves(empirical_csv, CurveKind::empirical)) {
        svg::Series pts{sigma_label(c.sigma_a), {}, c.N, c.se, svg::Style::points, color++};
        for (auto t : c.t) pts.x.push_back(static_cast<double>(t));
        plot.series.push_back(pts);
    }
    color = 0;
    for (const auto& c : read_curves(predicted_csv, CurveKind::predicted)) {
        svg::Series line{"model " + sigma_label(c.sigma_a), {0.0}, {0.0}, {}, svg::Style::dashed, color++};
        for (std::size_t k = 0; k < c.t.size(); ++k) {
            line.x.push_back(static_cast<double>(c.t[k]));
            line.y.push_back(c.N[k]);
        }
        plot.series.push_back(line);
    }
    return plot;
}

// ---- shared steps ----

struct ShockSelection {
    double sigma_m = 0.0;
    Selection selection;
};

ShockSelection select_for(const Ensemble& ensemble, const RunConfig& cfg) {
    ShockSelection s;
    s.sigma_m = cfg.sigma_m ? *cfg.sigma_m : sigma_m_for_frequency(ensemble, cfg.main_shock_frequency, cfg.sigma_max);
    for (double a : cfg.sigma_a) {
        ShockSpec spec{s.sigma_m, a, cfg.sigma_max};
        spec.validate();
    }
    s.selection = select_main_shocks(ensemble, ShockSpec{s.sigma_m, cfg.sigma_a.front(), cfg.sigma_max});
    if (s.selection.selected.empty()) throw DataError("no main shocks satisfy sigma_m <= |r_0| <= sigma_max");
    return s;
}

std::vector<AftershockCurve> empirical_curves(const Selection& sel, const RunConfig& cfg) {
    std::vector<AftershockCurve> curves;
    for (double a : cfg.sigma_a) curves.push_back(empirical_counts(sel.selected, a));
    return curves;
}

void write_fits(std::ofstream& out, const std::vector<double>& sigma_a, const std::vector<OmoriFit>& fits) {
    out << "sigma_a,K,p,tau\n";
    for (std::size_t i = 0; i < fits.size(); ++i) {
        out << format_double(sigma_a[i]) << ',' << format_double(fits[i].params.K) << ','
            << format_double(fits[i].params.p) << ',' << format_double(fits[i].params.tau) << '\n';
    }
}

void write_fit_diagnostics(std::ofstream& out, const std::vector<double>& sigma_a, const std::vector<OmoriFit>& fits) {
    out << "sigma_a,K_se,p_se,tau_se,chi2,dof,iterations,K_at_bound,p_at_bound,tau_at_bound\n";
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const auto& f = fits[i];
        out << format_double(sigma_a[i]) << ',' << format_double(std::sqrt(f.covariance[0])) << ','
            << format_double(std::sqrt(f.covariance[4])) << ',' << format_double(std::sqrt(f.covariance[8])) << ','
            << format_double(f.chi2) << ',' << f.dof << ',' << f.iterations << ',' << f.at_bound[0] << ','
            << f.at_bound[1] << ',' << f.at_bound[2] << '\n';
    }
}

std::vector<std::string> with_manifest(const Manifest& m, std::vector<std::string> extra = {}) {
    extra.insert(extra.begin(), m.reference());
    return extra;
}

// ---- subcommands ----

void run_ingest(const RunConfig& cfg, Manifest& manifest, std::ostream& log) {
    if (cfg.input.empty()) throw ConfigError("input", "ingest needs a price CSV");
    const PriceFile file = parse_price_file(cfg.input, cfg.grid);
    manifest.input(cfg.input);
    const BuildResult built = build_daily_histories(file, cfg.grid.window_length());

    const std::string ensemble_path = cfg.output("ensemble.csv");
    write_ensemble(ensemble_path, built.ensemble,
                   with_manifest(manifest, {"source: " + cfg.input,
                                            "excluded_incomplete_days: " + std::to_string(built.excluded)}));
    manifest.output(ensemble_path);

    const std::string days_path = cfg.output("ingest_days.csv");
    auto days = open_output(days_path, manifest);
    days << "date,ticks,complete\n";
    for (const auto& d : file.days) days << format_date(d.date) << ',' << d.tick_count << ',' << (d.complete() ? 1 : 0) << '\n';
    manifest.output(days_path);

    manifest.param("histories", built.ensemble.size());
    manifest.param("excluded_incomplete_days", built.excluded);
    log << "ingest: " << built.ensemble.size() << " complete days, " << built.excluded << " incomplete days dropped\n";
}

void run_simulate(const RunConfig& cfg, Manifest& manifest, std::ostream& log) {
    const ModelParams& p = cfg.simulate_params;
    const Ensemble ensemble = sample_ensemble(p, cfg.count, cfg.seed);
    std::ostringstream provenance;
    provenance << "simulated seed=" << cfg.seed << " alpha=" << format_double(p.alpha)
               << " beta=" << format_double(p.beta) << " D=" << format_double(p.D) << " n=" << p.n;
    const std::string path = cfg.output("ensemble.csv");
    write_ensemble(path, ensemble, with_manifest(manifest, {provenance.str()}));
    manifest.output(path);
    manifest.param("alpha", p.alpha);
    manifest.param("beta", p.beta);
    manifest.param("D", p.D);
    manifest.param("n", p.n);
    manifest.param("count", cfg.count);
    log << "simulate: " << cfg.count << " histories (seed " << cfg.seed << ")\n";
}

void run_calibrate(const RunConfig& cfg, Manifest& manifest, std::ostream& log) {
    const std::string input = cfg.ensemble_path();
    const Ensemble ensemble = read_ensemble(input);
    manifest.input(input);
    if (ensemble.empty()) throw DataError("ensemble " + input + " is empty");
    const Calibration cal = calibrate(ensemble, cfg.calibration);

    const std::string params_path = cfg.resolved_params_path();
    {
        std::ofstream out(params_path, std::ios::binary);
        if (!out) throw DataError("cannot write " + params_path);
        write_params(out, cal.params, {manifest.reference()});
    }
    manifest.output(params_path);

    const std::string gamma_path = cfg.output("gamma_q.csv");
    {
        auto out = open_output(gamma_path, manifest);
        out << "# D=" << format_double(cal.scaling.D) << " D_se=" << format_double(cal.scaling.D_se) << '\n';
        out << "q,gamma,gamma_se\n";
        for (std::size_t i = 0; i < cal.scaling.q.size(); ++i) {
            out << format_double(cal.scaling.q[i]) << ',' << format_double(cal.scaling.gamma[i]) << ','
                << format_double(cal.scaling.gamma_se[i]) << '\n';
        }
    }
    manifest.output(gamma_path);

    const std::string moments_path = cfg.output("moments.csv");
    {
        auto out = open_output(moments_path, manifest);
        out << "q,t,m,se\n";
        const auto& m = cal.moments;
        for (std::size_t qi = 0; qi < m.q.size(); ++qi) {
            for (std::size_t ti = 0; ti < m.t.size(); ++ti) {
                out << format_double(m.q[qi]) << ',' << m.t[ti] << ',' << format_double(m.m[qi][ti]) << ','
                    << format_double(m.se[qi][ti]) << '\n';
            }
        }
    }
    manifest.output(moments_path);

    const std::string collapse_path = cfg.output("collapse.csv");
    const auto& h = cal.tail.histogram;
    const auto& fit = cal.tail.fit;
    {
        auto out = open_output(collapse_path, manifest);
        out << "# bin_width=" << format_double(h.bin_width) << '\n';
        out << "t,x,count,density,model\n";
        for (std::size_t b = 0; b < h.centers.size(); ++b) {
            const double lo = h.centers[b] - 0.5 * h.bin_width;
            const double hi = h.centers[b] + 0.5 * h.bin_width;
            const double model = (scaling_function_cdf(hi, fit.alpha, fit.beta) -
                                  scaling_function_cdf(lo, fit.alpha, fit.beta)) / h.bin_width;
            for (std::size_t ti = 0; ti < h.t_values.size(); ++ti) {
                out << h.t_values[ti] << ',' << format_double(h.centers[b]) << ',' << h.counts[ti][b] << ','
                    << format_double(h.density[ti][b]) << ',' << format_double(model) << '\n';
            }
            out << "all," << format_double(h.centers[b]) << ',' << h.pooled_counts[b] << ','
                << format_double(h.pooled_density[b]) << ',' << format_double(model) << '\n';
        }
    }
    manifest.output(collapse_path);

    const std::string diag_path = cfg.output("calibration.txt");
    {
        auto out = open_output(diag_path, manifest);
        out << "D=" << format_double(cal.scaling.D) << '\n'
            << "D_se=" << format_double(cal.scaling.D_se) << '\n'
            << (cfg.calibration.cap_moments ? "D_without_cap=" : "D_with_cap=") << format_double(cal.D_other_cap) << '\n'
            << "alpha=" << format_double(fit.alpha) << '\n'
            << "beta=" << format_double(fit.beta) << '\n'
            << "alpha_se=" << format_double(std::sqrt(fit.covariance[0])) << '\n'
            << "beta_se=" << format_double(std::sqrt(fit.covariance[3])) << '\n'
            << "alpha_beta_cov=" << format_double(fit.covariance[1]) << '\n'
            << "tail_chi2=" << format_double(fit.chi2) << '\n'
            << "tail_bins=" << fit.bins_used << '\n'
            << "mle_alpha_r0=" << format_double(cal.tail.mle_alpha) << '\n'
            << "mle_beta_r0=" << format_double(cal.tail.mle_beta) << '\n'
            << "histories_used=" << cal.moments.histories << '\n';
        for (std::size_t i = 0; i < h.t_values.size(); ++i) {
            for (std::size_t j = i + 1; j < h.t_values.size(); ++j) {
                const auto test = collapse_homogeneity(h, i, j, cfg.calibration.collapse.min_count);
                out << "collapse_p_t" << h.t_values[i] << "_t" << h.t_values[j] << '=' << format_double(test.p_value) << '\n';
            }
        }
    }
    manifest.output(diag_path);

    if (cfg.svg) {
        write_svg(cfg.output("gamma_q.svg"), figure_gamma(gamma_path, params_path), manifest);
        write_svg(cfg.output("collapse.svg"), figure_collapse(collapse_path), manifest);
        manifest.output(cfg.output("gamma_q.svg"));
        manifest.output(cfg.output("collapse.svg"));
    }
    manifest.param("alpha", cal.params.alpha);
    manifest.param("beta", cal.params.beta);
    manifest.param("D", cal.params.D);
    manifest.param("n", cal.params.n);
    log << "calibrate: D=" << cal.params.D << " alpha=" << cal.params.alpha << " beta=" << cal.params.beta << '\n';
}

void write_main_shocks(const RunConfig& cfg, const ShockSelection& s, Manifest& manifest) {
    const std::string path = cfg.output("main_shocks.csv");
    auto out = open_output(path, manifest);
    out << "# sigma_m=" << format_double(s.sigma_m) << " sigma_max=" << format_double(cfg.sigma_max)
        << " above_cap=" << s.selection.above_cap << '\n';
    out << "date,r0\n";
    for (const auto& m : s.selection.selected) out << format_date(m.history.date) << ',' << format_double(m.history.returns[0]) << '\n';
    manifest.output(path);
}

void run_omori(const RunConfig& cfg, Manifest& manifest, std::ostream& log) {
    const std::string input = cfg.ensemble_path();
    const Ensemble ensemble = read_ensemble(input);
    manifest.input(input);
    const ShockSelection s = select_for(ensemble, cfg);
    write_main_shocks(cfg, s, manifest);

    const auto curves = empirical_curves(s.selection, cfg);
    const std::string curves_path = cfg.output("aftershocks_empirical.csv");
    write_curves(curves_path, curves,
                 with_manifest(manifest, {"se: standard error of per-history cumulative counts over the M main shocks"}));
    manifest.output(curves_path);

    std::vector<OmoriFit> fits;
    for (const auto& c : curves) fits.push_back(fit_omori(c, std::nullopt, cfg.fit_max_iterations));
    const std::string fits_path = cfg.output("omori_fits.csv");
    {
        auto out = open_output(fits_path, manifest);
        write_fits(out, cfg.sigma_a, fits);
    }
    manifest.output(fits_path);
    {
        const std::string diag = cfg.output("omori_fit_diagnostics.csv");
        auto out = open_output(diag, manifest);
        write_fit_diagnostics(out, cfg.sigma_a, fits);
        manifest.output(diag);
    }
    if (cfg.svg) {
        write_svg(cfg.output("omori_fits.svg"), figure_omori(curves_path, fits_path), manifest);
        manifest.output(cfg.output("omori_fits.svg"));
    }
    manifest.param("sigma_m", s.sigma_m);
    manifest.param("main_shocks", s.selection.selected.size());
    manifest.param("above_cap", s.selection.above_cap);
    log << "omori: " << s.selection.selected.size() << " main shocks (sigma_m=" << s.sigma_m << ")\n";
}

void run_predict(const RunConfig& cfg, Manifest& manifest, std::ostream& log) {
    const std::string params_path = cfg.resolved_params_path();
    require(params_path);
    const std::string input = cfg.ensemble_path();
    require(input);
    const ModelParams params = read_params(params_path);
    manifest.input(params_path);
    const Ensemble ensemble = read_ensemble(input);
    manifest.input(input);
    if (params.n != ensemble.n()) throw DataError("params window length differs from the ensemble's");

    const ShockSelection s = select_for(ensemble, cfg);
    std::vector<double> r0;
    for (const auto& m : s.selection.selected) r0.push_back(m.magnitude);
    QuadratureOptions quad;
    quad.abs_tol = cfg.quad_tol;

    const auto empirical = empirical_curves(s.selection, cfg);
    std::vector<AftershockCurve> predicted;
    std::vector<OmoriFit> fits;
    for (std::size_t i = 0; i < cfg.sigma_a.size(); ++i) {
        predicted.push_back(predict_average(r0, cfg.sigma_a[i], params, params.n - 1, quad));
        AftershockCurve weighted = predicted.back();
        weighted.se = empirical[i].se;
        fits.push_back(fit_omori(weighted, std::nullopt, cfg.fit_max_iterations));
    }
    const std::string path = cfg.output("aftershocks_predicted.csv");
    write_curves(path, predicted, with_manifest(manifest, {"analytic prediction; se is zero by construction"}));
    manifest.output(path);
    {
        const std::string fits_path = cfg.output("predicted_omori_fits.csv");
        auto out = open_output(fits_path, manifest);
        out << "# weights: se of the empirical curve at the same sigma_a\n";
        write_fits(out, cfg.sigma_a, fits);
        manifest.output(fits_path);
    }
    if (cfg.svg) {
        const std::string emp_path = cfg.output("aftershocks_empirical.csv");
        if (!fs::exists(emp_path)) {
            write_curves(emp_path, empirical, with_manifest(manifest));
            manifest.output(emp_path);
        }
        write_svg(cfg.output("prediction.svg"), figure_prediction(emp_path, path), manifest);
        manifest.output(cfg.output("prediction.svg"));
    }
    manifest.param("sigma_m", s.sigma_m);
    manifest.param("main_shocks", r0.size());
    log << "predict: " << predicted.size() << " curves from " << r0.size() << " main shocks\n";
}

void run_report(const RunConfig& cfg, Manifest& manifest, std::ostream& log) {
    const std::vector<std::string> needed{"params.txt", "gamma_q.csv", "collapse.csv", "aftershocks_empirical.csv",
                                          "aftershocks_predicted.csv", "omori_fits.csv",
                                          "omori_fit_diagnostics.csv"};
    for (const auto& name : needed) require(cfg.output(name));

    const fs::path dir = fs::path(cfg.output_dir) / "report";
    fs::create_directories(dir);
    for (const auto& name : needed) {
        manifest.input(cfg.output(name));
        fs::copy_file(cfg.output(name), dir / name, fs::copy_options::overwrite_existing);
        manifest.output((dir / name).string());
    }
    auto out_path = [&](const char* name) { return (dir / name).string(); };
    write_svg(out_path("fig1_gamma_q.svg"), figure_gamma(cfg.output("gamma_q.csv"), cfg.output("params.txt")), manifest);
    write_svg(out_path("fig2_collapse.svg"), figure_collapse(cfg.output("collapse.csv")), manifest);
    write_svg(out_path("fig3_omori_fits.svg"),
              figure_omori(cfg.output("aftershocks_empirical.csv"), cfg.output("omori_fits.csv")), manifest);
    write_svg(out_path("fig4_prediction.svg"),
              figure_prediction(cfg.output("aftershocks_empirical.csv"), cfg.output("aftershocks_predicted.csv")),
              manifest);
    for (const char* f : {"fig1_gamma_q.svg", "fig2_collapse.svg", "fig3_omori_fits.svg", "fig4_prediction.svg"}) {
        manifest.output(out_path(f));
    }

    const ModelParams params = read_params(cfg.output("params.txt"));
    auto table = open_output(out_path("table1.md"), manifest);
    table << "\nCalibrated model: alpha = " << format_double(params.alpha) << ", beta = " << format_double(params.beta)
          << ", D = " << format_double(params.D) << ", n = " << params.n << "\n\n";
    table << "| sigma_a | K | p | tau | at bound |\n|---|---|---|---|---|\n";
    const Table diag = read_table(cfg.output("omori_fit_diagnostics.csv"));
    const auto fits = read_omori_fits(cfg.output("omori_fits.csv"));
    char row[160];
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const auto& [s, p] = fits[i];
        std::string bound;
        for (const char* name : {"K", "p", "tau"}) {
            if (i < diag.rows.size() && diag.rows[i].at(diag.column(std::string(name) + "_at_bound")) == "1") {
                bound += bound.empty() ? name : std::string(",") + name;
            }
        }
        std::snprintf(row, sizeof row, "| %.3g | %.3f | %.3f | %.3f | %s |\n", s, p.K, p.p, p.tau,
                      bound.empty() ? "-" : bound.c_str());
        table << row;
    }
    manifest.output(out_path("table1.md"));
    log << "report: assembled " << dir.string() << '\n';
}

}  // namespace

std::optional<Command> parse_command(const std::string& name) {
    static const std::map<std::string, Command> commands{
        {"ingest", Command::ingest},   {"calibrate", Command::calibrate}, {"simulate", Command::simulate},
        {"omori", Command::omori},     {"predict", Command::predict},     {"report", Command::report},
    };
    auto it = commands.find(name);
    if (it == commands.end()) return std::nullopt;
    return it->second;
}

std::string command_name(Command command) {
    switch (command) {
        case Command::ingest: return "ingest";
        case Command::calibrate: return "calibrate";
        case Command::simulate: return "simulate";
        case Command::omori: return "omori";
        case Command::predict: return "predict";
        case Command::report: return "report";
    }
    return "unknown";
}

void run_or_throw(Command command, const RunConfig& config, std::ostream& log) {
    fs::create_directories(config.output_dir);
    Manifest manifest(command, config);
    switch (command) {
        case Command::ingest: run_ingest(config, manifest, log); break;
        case Command::calibrate: run_calibrate(config, manifest, log); break;
        case Command::simulate: run_simulate(config, manifest, log); break;
        case Command::omori: run_omori(config, manifest, log); break;
        case Command::predict: run_predict(config, manifest, log); break;
        case Command::report: run_report(config, manifest, log); break;
    }
    const std::string dir = command == Command::report ? (fs::path(config.output_dir) / "report").string()
                                                       : config.output_dir;
    manifest.write(dir);
}

int run(Command command, const RunConfig& config, std::ostream& log, std::ostream& err) {
    try {
        run_or_throw(command, config, log);
        return static_cast<int>(ExitCode::ok);
    } catch (const FitError& e) {
        err << e.what() << '\n';
        if (!e.trace().empty()) err << e.trace();
        return static_cast<int>(e.exit_code());
    } catch (const DependencyError& e) {
        err << "dependency error: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const Error& e) {
        err << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "data error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::data);
    }
}

}  // namespace aftershock
