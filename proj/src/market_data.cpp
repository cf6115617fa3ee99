#include "aftershock/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "aftershock/errors.hpp"

namespace aftershock {

namespace {

bool parse_int(std::string_view text, int& out) {
    if (text.empty()) return false;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

int day_number(const Date& date) {
    return static_cast<int>(std::chrono::sys_days{date}.time_since_epoch().count());
}

}  // namespace

std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

Date parse_date(const std::string& text) {
    int y = 0;
    int m = 0;
    int d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
        !parse_int(std::string_view(text).substr(0, 4), y) ||
        !parse_int(std::string_view(text).substr(5, 2), m) ||
        !parse_int(std::string_view(text).substr(8, 2), d)) {
        throw DataError("malformed date '" + text + "'");
    }
    const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) throw DataError("invalid date '" + text + "'");
    return date;
}

std::int64_t Timestamp::epoch_seconds() const {
    return static_cast<std::int64_t>(day_number(date)) * 86400 + second_of_day -
           static_cast<std::int64_t>(utc_offset_minutes) * 60;
}

Timestamp Timestamp::at_offset(int offset_minutes) const {
    const std::int64_t local = epoch_seconds() + static_cast<std::int64_t>(offset_minutes) * 60;
    auto days = local / 86400;
    auto secs = local % 86400;
    if (secs < 0) {
        secs += 86400;
        --days;
    }
    Timestamp out;
    out.date = Date{std::chrono::sys_days{std::chrono::days{days}}};
    out.second_of_day = static_cast<int>(secs);
    out.utc_offset_minutes = offset_minutes;
    return out;
}

Timestamp parse_timestamp(const std::string& raw) {
    const std::string text = trim(raw);
    // YYYY-MM-DDTHH:MM[:SS[.fff]](Z|+HH:MM|-HH:MM)
    if (text.size() < 17 || (text[10] != 'T' && text[10] != ' ')) {
        throw DataError("malformed timestamp '" + text + "'");
    }
    Timestamp ts;
    ts.date = parse_date(text.substr(0, 10));
    std::string_view rest = std::string_view(text).substr(11);
    std::size_t zone = rest.find_first_of("Z+-");
    if (zone == std::string_view::npos) {
        throw DataError("timestamp without UTC offset '" + text + "'");
    }
    std::string_view clock = rest.substr(0, zone);
    std::string_view offset = rest.substr(zone);

    int hh = 0;
    int mm = 0;
    int ss = 0;
    if (clock.size() < 5 || clock[2] != ':' || !parse_int(clock.substr(0, 2), hh) ||
        !parse_int(clock.substr(3, 2), mm)) {
        throw DataError("malformed time in '" + text + "'");
    }
    if (clock.size() > 5) {
        if (clock[5] != ':' || clock.size() < 8 || !parse_int(clock.substr(6, 2), ss)) {
            throw DataError("malformed seconds in '" + text + "'");
        }
        // fractional seconds are truncated
        if (clock.size() > 8 && clock[8] != '.') throw DataError("malformed time in '" + text + "'");
    }
    if (hh > 23 || mm > 59 || ss > 60) throw DataError("time out of range in '" + text + "'");
    ts.second_of_day = hh * 3600 + mm * 60 + std::min(ss, 59);

    if (offset == "Z") {
        ts.utc_offset_minutes = 0;
    } else {
        int oh = 0;
        int om = 0;
        const bool colon = offset.size() == 6 && offset[3] == ':';
        const bool compact = offset.size() == 5;
        if ((!colon && !compact) || !parse_int(offset.substr(1, 2), oh) ||
            !parse_int(offset.substr(colon ? 4 : 3, 2), om)) {
            throw DataError("malformed UTC offset in '" + text + "'");
        }
        ts.utc_offset_minutes = (offset[0] == '-' ? -1 : 1) * (oh * 60 + om);
    }
    return ts;
}

std::size_t SessionGrid::window_length() const {
    validate();
    return static_cast<std::size_t>((end_minute - start_minute) / bar_minutes);
}

void SessionGrid::validate() const {
    if (bar_minutes <= 0) throw ConfigError("bar_minutes", "must be positive");
    if (start_minute < 0 || end_minute > 24 * 60 || end_minute <= start_minute) {
        throw ConfigError("session", "session window must satisfy 00:00 <= start < end <= 24:00");
    }
    if ((end_minute - start_minute) % bar_minutes != 0) {
        throw ConfigError("bar_minutes", "session length is not a whole number of bars");
    }
}

bool DayGrid::complete() const {
    return std::all_of(prices.begin(), prices.end(), [](const auto& p) { return p.has_value(); });
}

std::vector<Date> PriceFile::incomplete_days() const {
    std::vector<Date> out;
    for (const auto& day : days) {
        if (!day.complete()) out.push_back(day.date);
    }
    return out;
}

PriceFile parse_price_file(const std::string& path, const SessionGrid& grid) {
    std::ifstream in(path);
    if (!in) throw DependencyError(path);
    return parse_price_stream(in, grid);
}

PriceFile parse_price_stream(std::istream& in, const SessionGrid& grid) {
    const std::size_t n = grid.window_length();
    const int bar_seconds = grid.bar_minutes * 60;

    std::map<int, DayGrid> by_day;
    // Latest tick second seen in each grid slot, for the "last tick wins" rule.
    std::map<int, std::vector<int>> slot_time;
    std::optional<std::int64_t> previous_instant;

    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string row = trim(line);
        if (row.empty() || row[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (row.rfind("timestamp", 0) == 0) continue;
        }
        const auto comma = row.find(',');
        if (comma == std::string::npos || row.find(',', comma + 1) != std::string::npos) {
            throw ParseError(line_no, "expected two fields 'timestamp,price'");
        }
        Timestamp ts;
        try {
            ts = parse_timestamp(row.substr(0, comma));
        } catch (const DataError& e) {
            throw ParseError(line_no, e.what());
        }
        const std::string price_text = trim(row.substr(comma + 1));
        double price = 0.0;
        {
            const auto* first = price_text.data();
            const auto* last = first + price_text.size();
            auto [ptr, ec] = std::from_chars(first, last, price);
            if (ec != std::errc{} || ptr != last || price_text.empty()) {
                throw ParseError(line_no, "malformed price '" + price_text + "'");
            }
        }
        if (!(price > 0.0) || !std::isfinite(price)) {
            throw DataError("line " + std::to_string(line_no) + ": non-positive price " + price_text +
                            " on " + format_date(ts.date));
        }

        const std::int64_t instant = ts.epoch_seconds();
        const Timestamp local =
            grid.exchange_offset_minutes ? ts.at_offset(*grid.exchange_offset_minutes) : ts;
        if (previous_instant && instant < *previous_instant) {
            throw DataError("timestamps decrease on " + format_date(local.date) + " (line " +
                            std::to_string(line_no) + ")");
        }
        previous_instant = instant;

        const int key = day_number(local.date);
        auto [it, inserted] = by_day.try_emplace(key);
        DayGrid& day = it->second;
        if (inserted) {
            day.date = local.date;
            day.prices.assign(n + 1, std::nullopt);
            slot_time[key].assign(n + 1, -1);
        }
        ++day.tick_count;

        // Grid point g covers ticks in (g - bar, g].
        const int start = grid.start_minute * 60;
        const int offset = local.second_of_day - start;
        if (offset <= -bar_seconds) continue;
        const int slot = offset <= 0 ? 0 : (offset + bar_seconds - 1) / bar_seconds;
        if (slot > static_cast<int>(n)) continue;
        auto& seen = slot_time[key][static_cast<std::size_t>(slot)];
        if (local.second_of_day >= seen) {
            seen = local.second_of_day;
            day.prices[static_cast<std::size_t>(slot)] = price;
        }
    }

    PriceFile out;
    out.days.reserve(by_day.size());
    for (auto& [key, day] : by_day) out.days.push_back(std::move(day));
    return out;
}

void Ensemble::add(DailyHistory history) {
    if (history.returns.size() != n_) {
        throw DataError("history " + format_date(history.date) + " has " +
                        std::to_string(history.returns.size()) + " returns, expected " +
                        std::to_string(n_));
    }
    if (!day_numbers_.insert(day_number(history.date)).second) {
        throw DataError("duplicate date " + format_date(history.date));
    }
    histories_.push_back(std::move(history));
}

BuildResult build_daily_histories(const PriceFile& file, std::size_t n) {
    if (n < 1) throw ConfigError("n", "window length must be at least 1");
    BuildResult result{Ensemble(n), 0};
    for (const auto& day : file.days) {
        if (day.prices.size() != n + 1 || !day.complete()) {
            ++result.excluded;
            continue;
        }
        DailyHistory h{day.date, std::vector<double>(n)};
        for (std::size_t t = 0; t < n; ++t) {
            h.returns[t] = std::log(*day.prices[t + 1]) - std::log(*day.prices[t]);
        }
        result.ensemble.add(std::move(h));
    }
    return result;
}

std::vector<double> reconstruct_prices(double open, const DailyHistory& history) {
    std::vector<double> prices(history.returns.size() + 1);
    prices[0] = open;
    double cumulative = 0.0;
    for (std::size_t t = 0; t < history.returns.size(); ++t) {
        cumulative += history.returns[t];
        prices[t + 1] = open * std::exp(cumulative);
    }
    return prices;
}

void ShockSpec::validate() const {
    if (!(sigma_a > 0.0)) throw ConfigError("sigma_a", "must be positive");
    if (!(sigma_a <= sigma_m)) throw ConfigError("sigma_m", "must satisfy sigma_a <= sigma_m");
    if (!(sigma_m <= sigma_max)) throw ConfigError("sigma_max", "must satisfy sigma_m <= sigma_max");
}

Selection select_main_shocks(const Ensemble& ensemble, const ShockSpec& spec) {
    if (ensemble.empty()) throw DataError("cannot select main shocks from an empty ensemble");
    if (!(spec.sigma_m >= 0.0) || !(spec.sigma_m <= spec.sigma_max)) {
        throw ConfigError("sigma_m", "must satisfy 0 <= sigma_m <= sigma_max");
    }
    Selection out;
    for (const auto& h : ensemble) {
        const double r0 = std::fabs(h.returns.front());
        if (r0 > spec.sigma_max) {
            ++out.above_cap;
        } else if (r0 < spec.sigma_m) {
            ++out.below_threshold;
        } else {
            out.selected.push_back({h, r0});
        }
    }
    return out;
}

double sigma_m_for_frequency(const Ensemble& ensemble, double frequency, double sigma_max) {
    if (!(frequency > 0.0) || frequency > 1.0) {
        throw ConfigError("main_shock_frequency", "must lie in (0, 1]");
    }
    std::vector<double> magnitudes;
    for (const auto& h : ensemble) {
        const double r0 = std::fabs(h.returns.front());
        if (r0 <= sigma_max) magnitudes.push_back(r0);
    }
    const auto target = static_cast<std::size_t>(
        std::llround(frequency * static_cast<double>(ensemble.size())));
    if (target == 0 || target > magnitudes.size()) {
        throw DataError("main-shock frequency " + std::to_string(frequency) +
                        " is not attainable on this ensemble");
    }
    std::nth_element(magnitudes.begin(), magnitudes.begin() + static_cast<long>(target - 1),
                     magnitudes.end(), std::greater<>());
    return magnitudes[target - 1];
}

}  // namespace aftershock
