#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aftershock/calibration.hpp"
#include "aftershock/market_data.hpp"
#include "aftershock/model.hpp"

namespace aftershock {

/// Everything a CLI run needs. Built from a flat key=value map in which
/// command-line overrides have already replaced file values.
struct RunConfig {
    std::string input;       // price CSV (ingest) or ensemble CSV
    std::string output_dir = "out";
    std::string params_path;  // defaults to <output_dir>/params.txt

    SessionGrid grid;

    std::optional<double> sigma_m;
    double main_shock_frequency = 27.0 / 6283.0;
    std::vector<double> sigma_a{4e-3, 5e-3, 6e-3, 7e-3};
    double sigma_max = 0.02;

    CalibrationOptions calibration;

    ModelParams simulate_params;
    std::size_t count = 6283;
    std::uint64_t seed = 42;

    double quad_tol = 1e-10;
    std::size_t fit_max_iterations = 500;
    bool svg = true;

    /// Resolved key/value pairs the config was built from (for manifests).
    std::map<std::string, std::string> values;

    std::string ensemble_path() const;
    std::string resolved_params_path() const;
    std::string output(const std::string& name) const;
};

/// Keys understood by from_key_values, with defaults.
const std::map<std::string, std::string>& default_config_values();

/// Throws ConfigError naming the first unknown or invalid key.
RunConfig config_from_key_values(const std::map<std::string, std::string>& values);

/// Loads `path` (when non-empty) and applies `overrides` on top.
RunConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides);

}  // namespace aftershock
