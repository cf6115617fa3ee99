#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace aftershock {

using Date = std::chrono::year_month_day;

std::string format_date(const Date& date);
/// Parses YYYY-MM-DD; throws DataError on malformed or invalid dates.
Date parse_date(const std::string& text);

/// Wall-clock reading as printed in the file, with its UTC offset.
struct Timestamp {
    Date date;
    int second_of_day = 0;
    int utc_offset_minutes = 0;

    /// Seconds since the Unix epoch (UTC).
    std::int64_t epoch_seconds() const;
    /// Same instant expressed at another UTC offset.
    Timestamp at_offset(int offset_minutes) const;
};

/// ISO-8601 date-time with explicit offset, e.g. 2008-10-10T09:40:00-05:00 or ...Z.
Timestamp parse_timestamp(const std::string& text);

struct PriceTick {
    Timestamp timestamp;
    double price = 0.0;
};

/// Sampling grid of one trading session. Defaults: 09:40-13:00, ten-minute bars.
struct SessionGrid {
    int start_minute = 9 * 60 + 40;
    int end_minute = 13 * 60;
    int bar_minutes = 10;
    /// When set, timestamps are converted to this offset before snapping;
    /// otherwise each timestamp's own offset defines exchange-local time.
    std::optional<int> exchange_offset_minutes;

    /// Number of returns per session (grid points minus one).
    std::size_t window_length() const;
    void validate() const;
};

/// Ticks of one date snapped to the session grid.
struct DayGrid {
    Date date;
    std::vector<std::optional<double>> prices;  // one slot per grid point
    std::size_t tick_count = 0;

    bool complete() const;
};

struct PriceFile {
    std::vector<DayGrid> days;  // ordered by date

    std::vector<Date> incomplete_days() const;
};

/// Reads CSV `timestamp,price` and snaps each day to `grid`. A grid point
/// takes the last tick in the bar ending at it, (g - bar, g].
PriceFile parse_price_file(const std::string& path, const SessionGrid& grid = {});
PriceFile parse_price_stream(std::istream& in, const SessionGrid& grid = {});

/// One trading day of log-returns: returns[t] = ln S(t+1) - ln S(t).
struct DailyHistory {
    Date date;
    std::vector<double> returns;
};

class Ensemble {
public:
    explicit Ensemble(std::size_t n = 20) : n_(n) {}

    /// Appends a history; throws DataError on wrong length or duplicate date.
    void add(DailyHistory history);

    std::size_t n() const noexcept { return n_; }
    std::size_t size() const noexcept { return histories_.size(); }
    bool empty() const noexcept { return histories_.empty(); }
    const std::vector<DailyHistory>& histories() const noexcept { return histories_; }
    const DailyHistory& operator[](std::size_t i) const { return histories_[i]; }

    auto begin() const noexcept { return histories_.begin(); }
    auto end() const noexcept { return histories_.end(); }

private:
    std::size_t n_;
    std::vector<DailyHistory> histories_;
    std::unordered_set<int> day_numbers_;
};

struct BuildResult {
    Ensemble ensemble;
    std::size_t excluded = 0;
};

/// Converts complete days to histories of n returns; incomplete days are
/// dropped and counted. Throws ConfigError for n < 1.
BuildResult build_daily_histories(const PriceFile& file, std::size_t n);

/// Rebuilds grid prices from an opening price and a history.
std::vector<double> reconstruct_prices(double open, const DailyHistory& history);

/// Main-shock, aftershock and cap thresholds.
struct ShockSpec {
    double sigma_m = 0.0;
    double sigma_a = 0.0;
    double sigma_max = std::numeric_limits<double>::infinity();

    /// 0 < sigma_a <= sigma_m <= sigma_max.
    void validate() const;
};

struct MainShock {
    DailyHistory history;
    double magnitude = 0.0;  // |r_0|
};

struct Selection {
    std::vector<MainShock> selected;
    std::size_t below_threshold = 0;
    std::size_t above_cap = 0;
};

/// Histories with sigma_m <= |r_0| <= sigma_max. Only sigma_m and sigma_max
/// are read from `spec`.
Selection select_main_shocks(const Ensemble& ensemble, const ShockSpec& spec);

/// Smallest sigma_m for which round(frequency * size) histories satisfy
/// sigma_m <= |r_0| <= sigma_max.
double sigma_m_for_frequency(const Ensemble& ensemble, double frequency, double sigma_max);

}  // namespace aftershock
