#include "aftershock/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "aftershock/errors.hpp"

namespace aftershock {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string strip(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& text, std::size_t line) {
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (text.empty() || ec != std::errc{} || ptr != last) {
        throw ParseError(line, "not a number: '" + text + "'");
    }
    return v;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    return out;
}

void write_comments(std::ostream& out, const std::vector<std::string>& comments) {
    for (const auto& c : comments) out << "# " << c << '\n';
}

}  // namespace

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_ensemble(std::ostream& out, const Ensemble& ensemble, const std::vector<std::string>& header_comments) {
    write_comments(out, header_comments);
    out << "date";
    for (std::size_t i = 0; i < ensemble.n(); ++i) out << ",r" << i;
    out << '\n';
    for (const auto& h : ensemble) {
        out << format_date(h.date);
        for (double r : h.returns) out << ',' << format_double(r);
        out << '\n';
    }
}

void write_ensemble(const std::string& path, const Ensemble& ensemble,
                    const std::vector<std::string>& header_comments) {
    auto out = open_out(path);
    write_ensemble(out, ensemble, header_comments);
}

Ensemble read_ensemble(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<Ensemble> ensemble;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip(line);
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split(line, ',');
        if (!ensemble) {
            if (fields.size() < 2 || fields[0] != "date") throw ParseError(line_no, "expected header 'date,r0,...'");
            ensemble.emplace(fields.size() - 1);
            continue;
        }
        if (fields.size() != ensemble->n() + 1) {
            throw ParseError(line_no, "expected " + std::to_string(ensemble->n() + 1) + " fields");
        }
        DailyHistory h;
        try {
            h.date = parse_date(strip(fields[0]));
        } catch (const DataError& e) {
            throw ParseError(line_no, e.what());
        }
        h.returns.reserve(ensemble->n());
        for (std::size_t i = 1; i < fields.size(); ++i) h.returns.push_back(to_double(strip(fields[i]), line_no));
        ensemble->add(std::move(h));
    }
    if (!ensemble) return Ensemble{};
    return std::move(*ensemble);
}

Ensemble read_ensemble(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DependencyError(path);
    return read_ensemble(in);
}

std::map<std::string, std::string> read_key_values(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected key=value");
        const std::string key = strip(line.substr(0, eq));
        if (key.empty()) throw ParseError(line_no, "empty key");
        kv[key] = strip(line.substr(eq + 1));
    }
    return kv;
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DependencyError(path);
    return read_key_values(in);
}

void write_params(std::ostream& out, const ModelParams& params, const std::vector<std::string>& header_comments) {
    write_comments(out, header_comments);
    out << "alpha=" << format_double(params.alpha) << '\n'
        << "beta=" << format_double(params.beta) << '\n'
        << "D=" << format_double(params.D) << '\n'
        << "n=" << params.n << '\n';
}

ModelParams params_from_key_values(const std::map<std::string, std::string>& kv) {
    ModelParams p;
    auto get = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError(key, "missing from params");
        return it->second;
    };
    try {
        p.alpha = std::stod(get("alpha"));
        p.beta = std::stod(get("beta"));
        p.D = std::stod(get("D"));
        p.n = std::stoul(get("n"));
    } catch (const std::logic_error&) {
        throw DataError("params file holds a non-numeric value");
    }
    try {
        p.validate();
    } catch (const DomainError& e) {
        throw DataError(std::string("invalid params: ") + e.what());
    }
    return p;
}

ModelParams read_params(const std::string& path) { return params_from_key_values(read_key_values(path)); }

void write_curves(const std::string& path, const std::vector<AftershockCurve>& curves,
                  const std::vector<std::string>& header_comments) {
    auto out = open_out(path);
    write_comments(out, header_comments);
    out << "sigma_a,t,N,se\n";
    for (const auto& c : curves) {
        for (std::size_t k = 0; k < c.t.size(); ++k) {
            out << format_double(c.sigma_a) << ',' << c.t[k] << ',' << format_double(c.N[k]) << ','
                << format_double(c.se[k]) << '\n';
        }
    }
}

std::vector<AftershockCurve> read_curves(const std::string& path, CurveKind kind) {
    std::ifstream in(path);
    if (!in) throw DependencyError(path);
    std::vector<AftershockCurve> curves;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip(line);
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            if (line != "sigma_a,t,N,se") throw ParseError(line_no, "expected header 'sigma_a,t,N,se'");
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 4) throw ParseError(line_no, "expected 4 fields");
        const double s = to_double(f[0], line_no);
        if (curves.empty() || curves.back().sigma_a != s) {
            curves.emplace_back();
            curves.back().kind = kind;
            curves.back().sigma_a = s;
        }
        curves.back().t.push_back(static_cast<std::size_t>(to_double(f[1], line_no)));
        curves.back().N.push_back(to_double(f[2], line_no));
        curves.back().se.push_back(to_double(f[3], line_no));
    }
    return curves;
}

}  // namespace aftershock
