#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "aftershock/app.hpp"
#include "aftershock/calibration.hpp"
#include "aftershock/errors.hpp"
#include "aftershock/model.hpp"
#include "aftershock/omori.hpp"

namespace py = pybind11;
using namespace aftershock;

namespace {

using Matrix = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Rows become histories dated 1900-01-01 + row index.
Ensemble ensemble_from(const Matrix& returns) {
    if (returns.ndim() != 2) throw DomainError("returns must be a 2-D array (histories x window)");
    const auto rows = static_cast<std::size_t>(returns.shape(0));
    const auto n = static_cast<std::size_t>(returns.shape(1));
    Ensemble e(n);
    const auto r = returns.unchecked<2>();
    const auto origin = std::chrono::sys_days{std::chrono::year{1900} / 1 / 1};
    for (std::size_t k = 0; k < rows; ++k) {
        std::vector<double> h(n);
        for (std::size_t i = 0; i < n; ++i) h[i] = r(k, i);
        e.add({Date{origin + std::chrono::days{static_cast<long>(k)}}, std::move(h)});
    }
    return e;
}

py::array_t<double> matrix_from(const Ensemble& e) {
    py::array_t<double> out({e.size(), e.n()});
    auto w = out.mutable_unchecked<2>();
    for (std::size_t k = 0; k < e.size(); ++k) {
        for (std::size_t i = 0; i < e.n(); ++i) w(k, i) = e[k].returns[i];
    }
    return out;
}

std::vector<MainShock> main_shocks(const Matrix& returns, double sigma_m, double sigma_max) {
    return select_main_shocks(ensemble_from(returns), ShockSpec{sigma_m, sigma_m, sigma_max}).selected;
}

py::dict curve_dict(const AftershockCurve& c) {
    py::dict d;
    d["sigma_a"] = c.sigma_a;
    d["t"] = c.t;
    d["N"] = c.N;
    d["se"] = c.se;
    d["shocks"] = c.shocks;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Omori aftershock model: simulation, calibration and prediction";

    static py::exception<Error> base(m, "AftershockError");
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<DependencyError>(m, "DependencyError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<FitError>(m, "FitError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](double alpha, double beta, double D, std::size_t n) {
                 ModelParams p{alpha, beta, D, n};
                 p.validate();
                 return p;
             }),
             py::arg("alpha") = 3.5, py::arg("beta") = 2.9e-3, py::arg("D") = 0.35, py::arg("n") = 20)
        .def_readwrite("alpha", &ModelParams::alpha)
        .def_readwrite("beta", &ModelParams::beta)
        .def_readwrite("D", &ModelParams::D)
        .def_readwrite("n", &ModelParams::n)
        .def("__repr__", [](const ModelParams& p) {
            std::ostringstream os;
            os << "ModelParams(alpha=" << p.alpha << ", beta=" << p.beta << ", D=" << p.D << ", n=" << p.n << ")";
            return os.str();
        });

    py::class_<OmoriParams>(m, "OmoriParams")
        .def(py::init<double, double, double>(), py::arg("K"), py::arg("p"), py::arg("tau"))
        .def_readwrite("K", &OmoriParams::K)
        .def_readwrite("p", &OmoriParams::p)
        .def_readwrite("tau", &OmoriParams::tau)
        .def("__repr__", [](const OmoriParams& p) {
            std::ostringstream os;
            os << "OmoriParams(K=" << p.K << ", p=" << p.p << ", tau=" << p.tau << ")";
            return os.str();
        });

    m.def("scale_coefficients", &scale_coefficients, py::arg("params"));
    m.def("mixing_density", &mixing_density, py::arg("sigma"), py::arg("params"));
    m.def("joint_logpdf", [](const std::vector<double>& r, const ModelParams& p) { return joint_logpdf(r, p); },
          py::arg("returns"), py::arg("params"));
    m.def("scaling_function_g", &scaling_function_g, py::arg("r"), py::arg("params"));
    m.def("aggregate_pdf", &aggregate_pdf, py::arg("r"), py::arg("t"), py::arg("params"));

    m.def("sample_ensemble",
          [](const ModelParams& p, std::size_t count, std::uint64_t seed) { return matrix_from(sample_ensemble(p, count, seed)); },
          py::arg("params"), py::arg("count"), py::arg("seed"),
          "Simulated returns as a (count, n) array; row k uses the substream (seed, k).");

    m.def(
        "calibrate",
        [](const Matrix& returns, std::optional<double> sigma_max, std::size_t bootstrap, std::uint64_t seed) {
            CalibrationOptions opts;
            opts.moments.sigma_max = sigma_max;
            opts.moments.bootstrap = bootstrap;
            opts.moments.seed = seed;
            opts.collapse.sigma_max = sigma_max;
            const auto cal = calibrate(ensemble_from(returns), opts);
            py::dict d;
            d["params"] = cal.params;
            d["D_se"] = cal.scaling.D_se;
            d["q"] = cal.scaling.q;
            d["gamma"] = cal.scaling.gamma;
            d["gamma_se"] = cal.scaling.gamma_se;
            d["alpha_se"] = std::sqrt(cal.tail.fit.covariance[0]);
            d["beta_se"] = std::sqrt(cal.tail.fit.covariance[3]);
            d["D_other_cap"] = cal.D_other_cap;
            return d;
        },
        py::arg("returns"), py::arg("sigma_max") = 0.02, py::arg("bootstrap") = 200, py::arg("seed") = 1);

    m.def("sigma_m_for_frequency",
          [](const Matrix& returns, double frequency, double sigma_max) {
              return sigma_m_for_frequency(ensemble_from(returns), frequency, sigma_max);
          },
          py::arg("returns"), py::arg("frequency"), py::arg("sigma_max") = 0.02);

    m.def("main_shock_magnitudes",
          [](const Matrix& returns, double sigma_m, double sigma_max) {
              std::vector<double> r0;
              for (const auto& s : main_shocks(returns, sigma_m, sigma_max)) r0.push_back(s.magnitude);
              return r0;
          },
          py::arg("returns"), py::arg("sigma_m"), py::arg("sigma_max") = 0.02);

    m.def("empirical_counts",
          [](const Matrix& returns, double sigma_m, double sigma_a, double sigma_max) {
              ShockSpec{sigma_m, sigma_a, sigma_max}.validate();
              return curve_dict(empirical_counts(main_shocks(returns, sigma_m, sigma_max), sigma_a));
          },
          py::arg("returns"), py::arg("sigma_m"), py::arg("sigma_a"), py::arg("sigma_max") = 0.02,
          "Main shocks are rows with sigma_m <= |r_0| <= sigma_max.");

    m.def("omori_cumulative", &omori_cumulative, py::arg("params"), py::arg("t"));

    m.def(
        "fit_omori",
        [](const std::vector<std::size_t>& t, const std::vector<double>& N, const std::vector<double>& se,
           std::optional<OmoriParams> init) {
            AftershockCurve c;
            c.t = t;
            c.N = N;
            c.se = se;
            if (t.size() != N.size() || t.size() != se.size()) throw DomainError("t, N and se differ in length");
            const auto fit = fit_omori(c, init);
            py::dict d;
            d["params"] = fit.params;
            d["covariance"] = fit.covariance;
            d["chi2"] = fit.chi2;
            d["dof"] = fit.dof;
            d["iterations"] = fit.iterations;
            d["at_bound"] = fit.at_bound;
            return d;
        },
        py::arg("t"), py::arg("N"), py::arg("se"), py::arg("init") = std::nullopt);

    m.def("predict_single",
          [](double r0, double sigma_a, const ModelParams& p, std::size_t t_max) {
              return curve_dict(predict_single(r0, sigma_a, p, t_max));
          },
          py::arg("r0_abs"), py::arg("sigma_a"), py::arg("params"), py::arg("t_max") = 19);
    m.def("predict_average",
          [](const std::vector<double>& r0, double sigma_a, const ModelParams& p, std::size_t t_max) {
              return curve_dict(predict_average(r0, sigma_a, p, t_max));
          },
          py::arg("r0_list"), py::arg("sigma_a"), py::arg("params"), py::arg("t_max") = 19);
    m.def("aftershock_probability_closed_form", &aftershock_probability_closed_form, py::arg("i"), py::arg("r0_abs"),
          py::arg("sigma_a"), py::arg("params"));

    m.def(
        "run",
        [](const std::string& command, const std::map<std::string, std::string>& settings, const std::string& config) {
            const auto c = parse_command(command);
            if (!c) throw ConfigError("command", "unknown command '" + command + "'");
            std::ostringstream log;
            run_or_throw(*c, load_config(config, settings), log);
            return log.str();
        },
        py::arg("command"), py::arg("settings") = std::map<std::string, std::string>{}, py::arg("config") = "",
        "Runs a CLI subcommand in-process; raises on failure and returns its log.");
}
