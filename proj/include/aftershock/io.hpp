#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "aftershock/market_data.hpp"
#include "aftershock/model.hpp"
#include "aftershock/omori.hpp"

namespace aftershock {

/// Formats with 17 significant digits (round-trips every double).
std::string format_double(double value);

/// CSV `date,r0,...,r{n-1}`; each entry of `header_comments` becomes a
/// leading `# ...` line.
void write_ensemble(std::ostream& out, const Ensemble& ensemble,
                    const std::vector<std::string>& header_comments = {});
void write_ensemble(const std::string& path, const Ensemble& ensemble,
                    const std::vector<std::string>& header_comments = {});

/// Reads the ensemble CSV; `#` lines are skipped. Throws ParseError/DataError.
Ensemble read_ensemble(std::istream& in);
Ensemble read_ensemble(const std::string& path);

/// Flat `key=value` text; blank lines and `#` comments are ignored.
std::map<std::string, std::string> read_key_values(std::istream& in);
std::map<std::string, std::string> read_key_values(const std::string& path);

void write_params(std::ostream& out, const ModelParams& params,
                  const std::vector<std::string>& header_comments = {});
ModelParams read_params(const std::string& path);
ModelParams params_from_key_values(const std::map<std::string, std::string>& kv);

/// Rows `sigma_a,t,N,se` for each curve.
void write_curves(const std::string& path, const std::vector<AftershockCurve>& curves,
                  const std::vector<std::string>& header_comments = {});
std::vector<AftershockCurve> read_curves(const std::string& path, CurveKind kind);

}  // namespace aftershock
