#include "satthermo/errors.hpp"
#include "satthermo/timeseries.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace satthermo;
using testing_support::t0;
using testing_support::ts;

namespace {

constexpr Minutes k10{10};
constexpr Minutes k30{30};

RegularSeries series10(std::vector<std::optional<double>> v, Timestamp start = t0()) {
    return RegularSeries(start, k10, std::move(v));
}

// Hand-rolled quartile for the oracle: rank r = p*(n-1), split into whole and fraction.
double oracle_quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double r = p * static_cast<double>(v.size() - 1);
    const double whole = std::floor(r);
    const auto i = static_cast<std::size_t>(whole);
    if (i + 1 >= v.size()) return v.back();
    return v[i] * (1.0 - (r - whole)) + v[i + 1] * (r - whole);
}

}  // namespace

TEST(Timestamp, ParsesUtcAndOffsets) {
    auto a = parse_timestamp("2023-01-01T00:30:00Z");
    ASSERT_TRUE(a);
    EXPECT_EQ(a->utc, ts(2023, 1, 1, 0, 30));
    EXPECT_EQ(a->offset, Minutes{0});

    auto b = parse_timestamp("2023-01-01T02:30+02:00");
    ASSERT_TRUE(b);
    EXPECT_EQ(b->utc, ts(2023, 1, 1, 0, 30));
    EXPECT_EQ(b->offset, Minutes{120});

    auto c = parse_timestamp("2015-01-01 00:00");
    ASSERT_TRUE(c);
    EXPECT_EQ(c->utc, ts(2015, 1, 1));
}

TEST(Timestamp, RejectsMalformed) {
    for (const char* bad : {"", "2023-02-30T00:00Z", "2023-01-01T24:00Z", "2023-01-01T00:00:30Z",
                            "2023/01/01 00:00", "2023-01-01T00:00+25:00", "yesterday", "2023-01-01T00:00Zjunk"}) {
        EXPECT_FALSE(parse_timestamp(bad)) << bad;
    }
}

TEST(Timestamp, CoversTheDecadeAndRoundTrips) {
    for (auto t : {ts(2015, 1, 1), ts(2020, 2, 29, 23, 30), ts(2025, 3, 31, 23, 50)}) {
        auto back = parse_timestamp(format_timestamp(t));
        ASSERT_TRUE(back);
        EXPECT_EQ(back->utc, t);
    }
    EXPECT_EQ(format_timestamp(ts(2024, 7, 9, 5, 7)), "2024-07-09T05:07:00Z");
    EXPECT_EQ(format_date(ts(2024, 7, 9, 5, 7)), "2024-07-09");
}

TEST(Timestamp, InferStepIsGcdOfGaps) {
    std::vector<Timestamp> v{t0(), t0() + k10, t0() + Minutes{40}, t0() + Minutes{50}};
    EXPECT_EQ(infer_step(v), k10);
    std::vector<Timestamp> one{t0()};
    EXPECT_FALSE(infer_step(one));
}

TEST(RegularSeries, FromSamplesFirstWins) {
    std::vector<RegularSeries::Sample> s{{t0(), 1.0}, {t0() + Minutes{3}, 9.0}, {t0() + Minutes{20}, 3.0}};
    auto r = RegularSeries::from_samples(s, k10);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r.start(), t0());
    EXPECT_EQ(r[0], 1.0);
    EXPECT_FALSE(r[1]);
    EXPECT_EQ(r[2], 3.0);
    EXPECT_EQ(r.at(t0() + Minutes{20}), 3.0);
    EXPECT_FALSE(r.at(t0() + Minutes{5}));
}

TEST(ResampleMean, SpecExamples) {
    auto full = resample_mean(series10({10.0, 20.0, 30.0}), k30);
    ASSERT_EQ(full.size(), 1u);
    EXPECT_DOUBLE_EQ(*full[0], 20.0);

    auto gap = resample_mean(series10({5.0, std::nullopt, 7.0}), k30);
    EXPECT_DOUBLE_EQ(*gap[0], 6.0);

    auto empty = resample_mean(series10({std::nullopt, std::nullopt, std::nullopt}), k30);
    ASSERT_EQ(empty.size(), 1u);
    EXPECT_FALSE(empty[0]);
}

TEST(ResampleMean, WindowsAreEpochAlignedAndLabelledByStart) {
    // Starts 10 minutes into a half-hour window: the first window holds two samples.
    auto r = resample_mean(series10({1.0, 2.0, 3.0, 4.0}, t0() + k10), k30);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r.start(), t0());
    EXPECT_DOUBLE_EQ(*r[0], 1.5);
    EXPECT_DOUBLE_EQ(*r[1], 3.5);
}

TEST(ResampleMean, RejectsNonMultiple) {
    EXPECT_THROW(resample_mean(series10({1.0}), Minutes{25}), StepMismatchError);
    EXPECT_THROW(resample_mean(series10({1.0}), Minutes{0}), StepMismatchError);
}

TEST(ResampleMean, SameStepIsIdentity) {
    auto s = series10({1.5, std::nullopt, -2.25, 8.0});
    EXPECT_EQ(resample_mean(s, k10), s);
}

TEST(ResampleMean, PropertyMeanPreservingWeightedByCounts) {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::optional<double>> v(1 + uniform_below(rng, 500));
        for (auto& x : v) {
            if (uniform01(rng) < 0.8) x = 40.0 * uniform01(rng) - 10.0;
        }
        const auto start = t0() + k10 * static_cast<long>(uniform_below(rng, 6));
        auto s = series10(v, start);
        const auto present = s.present_values();
        if (present.empty()) continue;
        double in_mean = 0.0;
        for (double x : present) in_mean += x;
        in_mean /= static_cast<double>(present.size());

        auto out = resample_mean(s, Minutes{60});
        double weighted = 0.0;
        std::size_t total = 0;
        for (std::size_t w = 0; w < out.size(); ++w) {
            if (!out[w]) continue;
            std::size_t count = 0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (s[i] && s.time_at(i) >= out.time_at(w) && s.time_at(i) < out.time_at(w + 1)) ++count;
            }
            weighted += *out[w] * static_cast<double>(count);
            total += count;
        }
        ASSERT_EQ(total, present.size());
        EXPECT_NEAR(weighted / static_cast<double>(total), in_mean, 1e-9);
    }
}

TEST(IqrBounds, OutlierAboveUpperFence) {
    std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 100};
    const auto b = iqr_bounds(v, 1.5);
    const double q1 = oracle_quantile(v, 0.25);
    const double q3 = oracle_quantile(v, 0.75);
    EXPECT_DOUBLE_EQ(b.q1, q1);
    EXPECT_DOUBLE_EQ(b.q3, q3);
    EXPECT_DOUBLE_EQ(b.hi, q3 + 1.5 * (q3 - q1));
    EXPECT_LT(b.hi, 100.0);
    EXPECT_FALSE(b.contains(100.0));
}

TEST(IqrBounds, ConstantSequenceCollapses) {
    std::vector<double> v{5, 5, 5, 5};
    const auto b = iqr_bounds(v, 1.5);
    EXPECT_EQ(b.lo, 5.0);
    EXPECT_EQ(b.hi, 5.0);
}

TEST(IqrBounds, SymmetricAboutMedian) {
    std::vector<double> v{0, 1, 2, 3};
    const auto b = iqr_bounds(v, 1.5);
    EXPECT_DOUBLE_EQ(b.q1, 0.75);
    EXPECT_DOUBLE_EQ(b.q3, 2.25);
    EXPECT_DOUBLE_EQ(1.5 - b.lo, b.hi - 1.5);
    EXPECT_DOUBLE_EQ(b.lo, -1.5);
    EXPECT_DOUBLE_EQ(b.hi, 4.5);
}

TEST(IqrBounds, Preconditions) {
    std::vector<double> three{1, 2, 3};
    EXPECT_THROW(iqr_bounds(three, 1.5), InsufficientDataError);
    std::vector<double> four{1, 2, 3, 4};
    EXPECT_THROW(iqr_bounds(four, 0.0), InvalidParameterError);
    std::vector<double> with_nan{1, 2, 3, std::nan("")};
    EXPECT_THROW(iqr_bounds(with_nan, 1.5), InsufficientDataError);
}

TEST(IqrBounds, PropertyMatchesOracleOnRandomSamples) {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(4 + uniform_below(rng, 60));
        for (auto& x : v) x = 100.0 * standard_normal(rng);
        const auto b = iqr_bounds(v, 2.0);
        EXPECT_NEAR(b.q1, oracle_quantile(v, 0.25), 1e-12);
        EXPECT_NEAR(b.q3, oracle_quantile(v, 0.75), 1e-12);
        EXPECT_LE(b.q1, b.q3);
        EXPECT_DOUBLE_EQ(b.lo, b.q1 - 2.0 * (b.q3 - b.q1));
        EXPECT_DOUBLE_EQ(b.hi, b.q3 + 2.0 * (b.q3 - b.q1));
    }
}

TEST(FilterOutliers, SpecExamples) {
    const IqrBounds b{0.0, 10.0, 1.5, -15.0, 25.0};
    auto inside = series10({1.0, 2.0, 3.0});
    auto r = filter_outliers(inside, b);
    EXPECT_EQ(r.series, inside);
    EXPECT_EQ(r.removed, 0u);

    auto one = filter_outliers(series10({1.0, 30.0, 3.0}), b);
    EXPECT_EQ(one.removed, 1u);
    EXPECT_FALSE(one.series[1]);
    EXPECT_EQ(one.series[0], 1.0);

    auto none = series10({std::nullopt, std::nullopt});
    auto n = filter_outliers(none, b);
    EXPECT_EQ(n.series, none);
    EXPECT_EQ(n.removed, 0u);
}

TEST(FilterOutliers, PropertyIdempotentAndBitPreserving) {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::optional<double>> v(20 + uniform_below(rng, 100));
        for (auto& x : v) {
            if (uniform01(rng) < 0.9) x = std::exp(3.0 * standard_normal(rng));
        }
        auto s = series10(v);
        const auto b = iqr_bounds(s, 1.5);
        const auto once = filter_outliers(s, b);
        const auto twice = filter_outliers(once.series, b);
        EXPECT_EQ(twice.series, once.series);
        EXPECT_EQ(twice.removed, 0u);
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (once.series[i]) {
                EXPECT_EQ(std::bit_cast<std::uint64_t>(*once.series[i]), std::bit_cast<std::uint64_t>(*s[i]));
            }
        }
    }
}

TEST(DailyMean, ConstantDay) {
    RegularSeries s(ts(2023, 5, 1), k30, std::vector<std::optional<double>>(48, 12.0));
    auto d = daily_mean(s);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d.start(), ts(2023, 5, 1));
    EXPECT_EQ(*d[0], 12.0);
}

TEST(DailyMean, ZeroMeanSinusoid) {
    std::vector<std::optional<double>> v(48);
    for (std::size_t i = 0; i < 48; ++i) v[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / 48.0);
    auto d = daily_mean(RegularSeries(ts(2023, 5, 1), k30, v));
    EXPECT_NEAR(*d[0], 0.0, 1e-9);
}

TEST(DailyMean, SingletonAndEmptyDays) {
    std::vector<std::optional<double>> v(96);
    v[10] = 7.3;
    auto d = daily_mean(RegularSeries(ts(2023, 5, 1), k30, v));
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(*d[0], 7.3);
    EXPECT_FALSE(d[1]);
}

TEST(DailyMean, PartialDaysOfConstantSeries) {
    RegularSeries s(ts(2023, 5, 1, 17, 0), k10, std::vector<std::optional<double>>(200, -3.5));
    const auto d = daily_mean(s);
    ASSERT_EQ(d.size(), 3u);
    for (const auto& v : d.values()) EXPECT_EQ(*v, -3.5);
}

TEST(DailyMean, RejectsStepNotDividingDay) {
    RegularSeries s(t0(), Minutes{7 * 60}, std::vector<std::optional<double>>(4, 1.0));
    EXPECT_THROW(daily_mean(s), StepMismatchError);
}

TEST(Align, SpecExamples) {
    auto a = series10({1.0, 2.0, 3.0});
    auto b = series10({4.0, 5.0, 6.0});
    EXPECT_EQ(align(a, b).size(), 3u);

    auto gap = series10({1.0, std::nullopt, 3.0});
    auto rows = align(gap, b);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1].ts, t0() + Minutes{20});
    EXPECT_EQ(rows[1].b, 6.0);

    auto later = series10({1.0, 2.0}, t0() + std::chrono::hours{5});
    EXPECT_TRUE(align(a, later).empty());
}

TEST(Align, StepMismatchAndLengthBound) {
    RegularSeries c(t0(), k30, {1.0});
    EXPECT_THROW(align(series10({1.0}), c), StepMismatchError);

    auto a = series10({1.0, 2.0, 3.0, 4.0, 5.0});
    auto b = series10({1.0, 2.0}, t0() + Minutes{20});
    const auto rows = align(a, b);
    EXPECT_LE(rows.size(), std::min(a.size(), b.size()));
    EXPECT_EQ(rows.size(), 2u);
}
