#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "aftershock/errors.hpp"
#include "aftershock/io.hpp"
#include "aftershock/market_data.hpp"
#include "aftershock/model.hpp"

using namespace aftershock;

namespace {

std::string grid_time(int minute) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d:00", minute / 60, minute % 60);
    return buf;
}

// One row per grid point of the default session; `skip` drops one bar.
std::string day_rows(const std::string& date, double start_price, int skip = -1) {
    std::string rows;
    double price = start_price;
    for (int k = 0, m = 9 * 60 + 40; m <= 13 * 60; ++k, m += 10) {
        price *= 1.0 + 0.001 * ((k % 3) - 1);
        if (k == skip) continue;
        rows += date + "T" + grid_time(m) + "-05:00," + std::to_string(price) + "\n";
    }
    return rows;
}

std::string date_of(int day) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "2008-10-%02d", day);
    return buf;
}

DailyHistory history(const std::string& date, std::vector<double> r) { return {parse_date(date), std::move(r)}; }

}  // namespace

TEST(Timestamp, ParsesOffsetsAndZulu) {
    const auto a = parse_timestamp("2008-10-10T09:40:00-05:00");
    const auto b = parse_timestamp("2008-10-10T14:40:00Z");
    const auto c = parse_timestamp("2008-10-10T15:40:00+0100");
    EXPECT_EQ(a.epoch_seconds(), b.epoch_seconds());
    EXPECT_EQ(a.epoch_seconds(), c.epoch_seconds());
    EXPECT_EQ(a.second_of_day, 9 * 3600 + 40 * 60);
    EXPECT_EQ(a.utc_offset_minutes, -300);
    EXPECT_EQ(b.at_offset(-300).second_of_day, a.second_of_day);
    EXPECT_THROW(parse_timestamp("2008-10-10 09:40"), Error);
    EXPECT_THROW(parse_timestamp("2008-02-30T09:40:00Z"), Error);
}

TEST(ParsePriceFile, CompleteAndIncompleteDays) {
    std::string csv = "timestamp,price\n";
    for (int d = 1; d <= 22; ++d) csv += day_rows(date_of(d), 100.0 + d);
    csv += day_rows(date_of(23), 90.0, 7);
    std::istringstream in(csv);
    const PriceFile file = parse_price_stream(in);
    ASSERT_EQ(file.days.size(), 23u);
    EXPECT_EQ(file.incomplete_days().size(), 1u);
    EXPECT_EQ(format_date(file.incomplete_days().front()), "2008-10-23");

    const BuildResult built = build_daily_histories(file, 20);
    EXPECT_EQ(built.ensemble.size(), 22u);
    EXPECT_EQ(built.excluded, 1u);
}

TEST(ParsePriceFile, EmptyFileGivesEmptyCollection) {
    std::istringstream header_only("timestamp,price\n");
    EXPECT_TRUE(parse_price_stream(header_only).days.empty());
    std::istringstream nothing("");
    EXPECT_TRUE(parse_price_stream(nothing).days.empty());
}

TEST(ParsePriceFile, NonPositivePriceIsDataError) {
    std::istringstream in("timestamp,price\n2008-10-10T09:40:00-05:00,-3.2\n");
    try {
        parse_price_stream(in);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_EQ(e.exit_code(), ExitCode::data);
    }
}

TEST(ParsePriceFile, MalformedRowReportsLine) {
    std::istringstream in("timestamp,price\n2008-10-10T09:40:00-05:00,100\n2008-10-10T09:50:00-05:00;101\n");
    try {
        parse_price_stream(in);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(ParsePriceFile, NonMonotoneTimestampsNameTheDate) {
    std::istringstream in(
        "timestamp,price\n2008-10-10T09:50:00-05:00,100\n2008-10-10T09:40:00-05:00,101\n");
    try {
        parse_price_stream(in);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("2008-10-10"), std::string::npos);
    }
}

TEST(ParsePriceFile, SnapsToLastTickInBar) {
    std::string csv = "timestamp,price\n";
    csv += "2008-10-10T09:35:00-05:00,99\n";
    csv += "2008-10-10T09:38:00-05:00,100\n";  // -> 09:40
    csv += "2008-10-10T09:41:00-05:00,104\n";
    csv += "2008-10-10T09:50:00-05:00,105\n";  // -> 09:50, replaces 104
    std::istringstream in(csv);
    const PriceFile file = parse_price_stream(in);
    ASSERT_EQ(file.days.size(), 1u);
    const auto& p = file.days[0].prices;
    ASSERT_EQ(p.size(), 21u);
    EXPECT_DOUBLE_EQ(*p[0], 100.0);
    EXPECT_DOUBLE_EQ(*p[1], 105.0);
    EXPECT_FALSE(p[2].has_value());
    EXPECT_FALSE(file.days[0].complete());
}

TEST(ParsePriceFile, ExchangeOffsetConvertsTimestamps) {
    SessionGrid grid;
    grid.exchange_offset_minutes = -300;
    std::istringstream in("timestamp,price\n2008-10-10T14:40:00Z,100\n");
    const PriceFile file = parse_price_stream(in, grid);
    ASSERT_EQ(file.days.size(), 1u);
    EXPECT_DOUBLE_EQ(*file.days[0].prices[0], 100.0);
}

TEST(ParsePriceFile, MissingFileIsDependencyError) {
    EXPECT_THROW(parse_price_file("/nonexistent/prices.csv"), DependencyError);
}

TEST(SessionGrid, WindowLengthAndValidation) {
    EXPECT_EQ(SessionGrid{}.window_length(), 20u);
    SessionGrid bad;
    bad.bar_minutes = 7;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(BuildDailyHistories, ConstantPricesGiveZeroReturns) {
    PriceFile file;
    DayGrid day{parse_date("2008-10-10"), std::vector<std::optional<double>>(21, 100.0), 21};
    file.days.push_back(day);
    const auto built = build_daily_histories(file, 20);
    ASSERT_EQ(built.ensemble.size(), 1u);
    for (double r : built.ensemble[0].returns) EXPECT_EQ(r, 0.0);
}

TEST(BuildDailyHistories, SingleReturnIsLogRatio) {
    PriceFile file;
    file.days.push_back({parse_date("2008-10-10"), {100.0, 110.0}, 2});
    const auto built = build_daily_histories(file, 1);
    ASSERT_EQ(built.ensemble.size(), 1u);
    EXPECT_NEAR(built.ensemble[0].returns[0], 0.09531017980432493, 1e-15);
}

TEST(BuildDailyHistories, ShortGroupExcluded) {
    PriceFile file;
    file.days.push_back({parse_date("2008-10-10"), std::vector<std::optional<double>>(20, 100.0), 20});
    const auto built = build_daily_histories(file, 20);
    EXPECT_EQ(built.ensemble.size(), 0u);
    EXPECT_EQ(built.excluded, 1u);
}

TEST(BuildDailyHistories, ZeroWindowIsConfigError) {
    EXPECT_THROW(build_daily_histories(PriceFile{}, 0), ConfigError);
}

TEST(BuildDailyHistories, ReconstructsPrices) {
    std::string csv = "timestamp,price\n";
    for (int d = 1; d <= 5; ++d) csv += day_rows(date_of(d), 1000.0 + 37.5 * d);
    std::istringstream in(csv);
    const PriceFile file = parse_price_stream(in);
    const auto built = build_daily_histories(file, 20);
    ASSERT_EQ(built.ensemble.size(), 5u);
    for (std::size_t d = 0; d < 5; ++d) {
        const auto& grid = file.days[d].prices;
        const auto prices = reconstruct_prices(*grid[0], built.ensemble[d]);
        ASSERT_EQ(prices.size(), grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) {
            EXPECT_LE(std::abs(prices[k] / *grid[k] - 1.0), 1e-12);
        }
    }
}

TEST(BuildDailyHistories, DeterministicSerialisation) {
    std::string csv = "timestamp,price\n";
    for (int d = 1; d <= 4; ++d) csv += day_rows(date_of(d), 500.0 + d);
    auto serialise = [&] {
        std::istringstream in(csv);
        std::ostringstream out;
        write_ensemble(out, build_daily_histories(parse_price_stream(in), 20).ensemble);
        return out.str();
    };
    EXPECT_EQ(serialise(), serialise());
}

TEST(Ensemble, RejectsWrongLengthAndDuplicateDates) {
    Ensemble e(3);
    e.add(history("2008-10-10", {0.0, 0.0, 0.0}));
    EXPECT_THROW(e.add(history("2008-10-11", {0.0, 0.0})), DataError);
    EXPECT_THROW(e.add(history("2008-10-10", {0.1, 0.0, 0.0})), DataError);
    EXPECT_EQ(e.size(), 1u);
}

TEST(ShockSpec, Ordering) {
    EXPECT_NO_THROW((ShockSpec{0.01, 0.005, 0.02}.validate()));
    EXPECT_THROW((ShockSpec{0.01, 0.0, 0.02}.validate()), Error);
    EXPECT_THROW((ShockSpec{0.01, 0.02, 0.03}.validate()), Error);
    EXPECT_THROW((ShockSpec{0.03, 0.005, 0.02}.validate()), Error);
}

TEST(SelectMainShocks, VacuousThresholdsSelectAll) {
    const Ensemble e = sample_ensemble(ModelParams{}, 50, 3);
    const auto sel = select_main_shocks(e, ShockSpec{0.0, 0.0});
    EXPECT_EQ(sel.selected.size(), 50u);
    EXPECT_EQ(sel.above_cap, 0u);
}

TEST(SelectMainShocks, OverCapCounted) {
    Ensemble e(2);
    e.add(history("2008-10-10", {0.025, 0.0}));
    e.add(history("2008-10-13", {-0.015, 0.0}));
    e.add(history("2008-10-14", {0.001, 0.0}));
    const auto sel = select_main_shocks(e, ShockSpec{0.01, 0.004, 0.02});
    ASSERT_EQ(sel.selected.size(), 1u);
    EXPECT_DOUBLE_EQ(sel.selected[0].magnitude, 0.015);
    EXPECT_EQ(sel.above_cap, 1u);
    EXPECT_EQ(sel.below_threshold, 1u);
}

TEST(SelectMainShocks, MatchesBruteForceScan) {
    // 100 histories, exactly 7 with |r_0| in [0.01, 0.02] (including both ends).
    Ensemble e(2);
    const double r0[] = {0.01, -0.02, 0.015, -0.011, 0.0199, 0.012, -0.013};
    std::vector<std::string> expected;
    for (int k = 0; k < 100; ++k) {
        double r = 0.0;
        if (k % 14 == 0 && k / 14 < 7) {
            r = r0[k / 14];
        } else {
            r = (k % 2 ? -1.0 : 1.0) * (k % 3 ? 0.0099 : 0.0201 + 1e-4 * k);
        }
        const Date date = std::chrono::sys_days{std::chrono::year{2000} / 1 / 1} + std::chrono::days{k};
        e.add({date, {r, 0.0}});
    }
    std::vector<std::string> brute;
    for (const auto& h : e) {
        const double m = std::abs(h.returns[0]);
        if (m >= 0.01 && m <= 0.02) brute.push_back(format_date(h.date));
    }
    ASSERT_EQ(brute.size(), 7u);
    const auto sel = select_main_shocks(e, ShockSpec{0.01, 0.004, 0.02});
    std::vector<std::string> got;
    for (const auto& m : sel.selected) got.push_back(format_date(m.history.date));
    EXPECT_EQ(got, brute);
    EXPECT_EQ(sel.selected.size() + sel.below_threshold + sel.above_cap, e.size());
}

TEST(SelectMainShocks, PartitionHoldsForRandomSpecs) {
    const Ensemble e = sample_ensemble(ModelParams{}, 2000, 17);
    for (double sm : {0.0, 0.002, 0.005, 0.01}) {
        for (double cap : {0.005, 0.01, 0.02, 1.0}) {
            if (sm > cap) continue;
            const auto sel = select_main_shocks(e, ShockSpec{sm, sm, cap});
            EXPECT_EQ(sel.selected.size() + sel.below_threshold + sel.above_cap, e.size());
        }
    }
}

TEST(SelectMainShocks, EmptyEnsembleIsDataError) {
    EXPECT_THROW(select_main_shocks(Ensemble(20), ShockSpec{0.01, 0.004, 0.02}), DataError);
}

TEST(SigmaMForFrequency, SelectsRequestedCount) {
    const Ensemble e = sample_ensemble(ModelParams{}, 6283, 42);
    const double sm = sigma_m_for_frequency(e, 27.0 / 6283.0, 0.02);
    const auto sel = select_main_shocks(e, ShockSpec{sm, sm, 0.02});
    EXPECT_EQ(sel.selected.size(), 27u);
}
