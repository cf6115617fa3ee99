#include "aftershock/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>

#include "aftershock/errors.hpp"
#include "aftershock/io.hpp"

namespace aftershock {

namespace {

double to_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (text.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        throw ConfigError(key, "expected a number, got '" + text + "'");
    }
    return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const auto* first = text.data();
    const auto* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (text.empty() || ec != std::errc{} || ptr != last) {
        throw ConfigError(key, "expected a non-negative integer, got '" + text + "'");
    }
    return v;
}

double positive(const std::string& key, const std::string& text) {
    const double v = to_double(key, text);
    if (!(v > 0.0)) throw ConfigError(key, "must be positive");
    return v;
}

bool to_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError(key, "expected true/false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto pos = text.find(',', start);
        std::string item = text.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

int clock_minutes(const std::string& key, const std::string& text) {
    int h = 0;
    int m = 0;
    if (text.size() != 5 || text[2] != ':' ||
        std::from_chars(text.data(), text.data() + 2, h).ec != std::errc{} ||
        std::from_chars(text.data() + 3, text.data() + 5, m).ec != std::errc{} || h > 24 || m > 59) {
        throw ConfigError(key, "expected HH:MM, got '" + text + "'");
    }
    return h * 60 + m;
}

int offset_minutes(const std::string& key, const std::string& text) {
    if (text == "Z") return 0;
    if (text.size() != 6 || (text[0] != '+' && text[0] != '-')) {
        throw ConfigError(key, "expected +HH:MM or -HH:MM, got '" + text + "'");
    }
    const int m = clock_minutes(key, text.substr(1));
    return text[0] == '-' ? -m : m;
}

}  // namespace

const std::map<std::string, std::string>& default_config_values() {
    static const std::map<std::string, std::string> defaults{
        {"input", ""},
        {"output_dir", "out"},
        {"params", ""},
        {"session_start", "09:40"},
        {"session_end", "13:00"},
        {"bar_minutes", "10"},
        {"exchange_utc_offset", ""},
        {"sigma_m", ""},
        {"main_shock_frequency", "0.004297310202132739"},
        {"sigma_a", "0.004,0.005,0.006,0.007"},
        {"sigma_max", "0.02"},
        {"q_grid", "0.25,0.5,0.75,1,1.25,1.5,1.75,2"},
        {"t_grid", ""},
        {"collapse_t", "0,4,9,19"},
        {"bin_width", ""},
        {"min_bin_count", "5"},
        {"regressor", "t+1"},
        {"cap_moments", "true"},
        {"bootstrap", "200"},
        {"alpha", "3.5"},
        {"beta", "0.0029"},
        {"D", "0.35"},
        {"count", "6283"},
        {"seed", "42"},
        {"quad_tol", "1e-10"},
        {"fit_max_iterations", "500"},
        {"svg", "true"},
    };
    return defaults;
}

RunConfig config_from_key_values(const std::map<std::string, std::string>& given) {
    const auto& defaults = default_config_values();
    for (const auto& [key, value] : given) {
        if (!defaults.contains(key)) throw ConfigError(key, "unknown configuration key");
    }
    std::map<std::string, std::string> v = defaults;
    for (const auto& [key, value] : given) v[key] = value;

    RunConfig c;
    c.values = v;
    c.input = v["input"];
    c.output_dir = v["output_dir"];
    if (c.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
    c.params_path = v["params"];

    c.grid.start_minute = clock_minutes("session_start", v["session_start"]);
    c.grid.end_minute = clock_minutes("session_end", v["session_end"]);
    c.grid.bar_minutes = static_cast<int>(to_uint("bar_minutes", v["bar_minutes"]));
    if (!v["exchange_utc_offset"].empty()) {
        c.grid.exchange_offset_minutes = offset_minutes("exchange_utc_offset", v["exchange_utc_offset"]);
    }
    c.grid.validate();
    const std::size_t n = c.grid.window_length();

    if (!v["sigma_m"].empty()) c.sigma_m = positive("sigma_m", v["sigma_m"]);
    c.main_shock_frequency = positive("main_shock_frequency", v["main_shock_frequency"]);
    if (c.main_shock_frequency > 1.0) throw ConfigError("main_shock_frequency", "must not exceed 1");
    c.sigma_max = positive("sigma_max", v["sigma_max"]);
    c.sigma_a.clear();
    for (const auto& s : split_list(v["sigma_a"])) {
        const double a = positive("sigma_a", s);
        if (a > c.sigma_max) throw ConfigError("sigma_a", "must not exceed sigma_max");
        if (c.sigma_m && a > *c.sigma_m) throw ConfigError("sigma_a", "must not exceed sigma_m");
        c.sigma_a.push_back(a);
    }
    if (c.sigma_a.empty()) throw ConfigError("sigma_a", "at least one aftershock threshold is required");
    if (c.sigma_m && *c.sigma_m > c.sigma_max) throw ConfigError("sigma_m", "must not exceed sigma_max");

    auto& cal = c.calibration;
    cal.q_grid.clear();
    for (const auto& s : split_list(v["q_grid"])) cal.q_grid.push_back(positive("q_grid", s));
    cal.t_grid.clear();
    for (const auto& s : split_list(v["t_grid"])) {
        const auto t = to_uint("t_grid", s);
        if (t >= n) throw ConfigError("t_grid", "time index beyond the window");
        cal.t_grid.push_back(t);
    }
    cal.collapse.t_set.clear();
    for (const auto& s : split_list(v["collapse_t"])) {
        const auto t = to_uint("collapse_t", s);
        if (t >= n) throw ConfigError("collapse_t", "time index beyond the window");
        cal.collapse.t_set.push_back(t);
    }
    if (cal.collapse.t_set.empty()) throw ConfigError("collapse_t", "at least one time index is required");
    if (!v["bin_width"].empty()) cal.collapse.bin_width = positive("bin_width", v["bin_width"]);
    cal.collapse.min_count = positive("min_bin_count", v["min_bin_count"]);
    cal.collapse.sigma_max = c.sigma_max;
    if (v["regressor"] == "t+1") {
        cal.regressor = Regressor::log_t_plus_one;
    } else if (v["regressor"] == "t") {
        cal.regressor = Regressor::log_t;
    } else {
        throw ConfigError("regressor", "expected 't+1' or 't'");
    }
    cal.cap_moments = to_bool("cap_moments", v["cap_moments"]);
    cal.moments.sigma_max = c.sigma_max;
    cal.moments.bootstrap = to_uint("bootstrap", v["bootstrap"]);

    c.seed = to_uint("seed", v["seed"]);
    cal.moments.seed = c.seed;
    c.count = to_uint("count", v["count"]);
    if (c.count < 1) throw ConfigError("count", "must be at least 1");
    c.simulate_params.alpha = positive("alpha", v["alpha"]);
    c.simulate_params.beta = positive("beta", v["beta"]);
    c.simulate_params.D = to_double("D", v["D"]);
    if (c.simulate_params.D < 0.0) throw ConfigError("D", "must be non-negative");
    c.simulate_params.n = n;

    c.quad_tol = positive("quad_tol", v["quad_tol"]);
    c.fit_max_iterations = to_uint("fit_max_iterations", v["fit_max_iterations"]);
    if (c.fit_max_iterations < 1) throw ConfigError("fit_max_iterations", "must be at least 1");
    c.svg = to_bool("svg", v["svg"]);
    return c;
}

RunConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
    std::map<std::string, std::string> values;
    if (!path.empty()) {
        if (!std::filesystem::exists(path)) throw ConfigError("config", "file not found: " + path);
        values = read_key_values(path);
    }
    for (const auto& [k, v] : overrides) values[k] = v;
    return config_from_key_values(values);
}

std::string RunConfig::output(const std::string& name) const {
    return (std::filesystem::path(output_dir) / name).string();
}

std::string RunConfig::ensemble_path() const { return input.empty() ? output("ensemble.csv") : input; }

std::string RunConfig::resolved_params_path() const {
    return params_path.empty() ? output("params.txt") : params_path;
}

}  // namespace aftershock
