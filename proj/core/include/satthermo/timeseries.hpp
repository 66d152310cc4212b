#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace satthermo {

using Minutes = std::chrono::minutes;

/// UTC instant at minute resolution.
using Timestamp = std::chrono::sys_time<Minutes>;

/// Parsed ISO 8601 instant plus the UTC offset it was written with.
struct ParsedTimestamp {
    Timestamp utc;
    Minutes offset{0};
};

/// Accepts `YYYY-MM-DD[T| ]HH:MM[:SS][Z|+HH:MM|-HH:MM]`. Seconds, when present,
/// must be zero. A missing zone designator is read as UTC. Returns nullopt for
/// anything else, including impossible calendar dates.
std::optional<ParsedTimestamp> parse_timestamp(std::string_view text);

/// `YYYY-MM-DDTHH:MM:SSZ`
std::string format_timestamp(Timestamp ts);

/// `YYYY-MM-DD`
std::string format_date(Timestamp ts);

/// Floor to a multiple of `step` counted from the Unix epoch.
Timestamp floor_to(Timestamp ts, Minutes step);

/// Largest step dividing every gap between consecutive distinct timestamps.
/// Input must be sorted; returns nullopt when fewer than two distinct values exist.
std::optional<Minutes> infer_step(std::span<const Timestamp> sorted);

/// A regularly sampled signal. The value at index i belongs to start + i*step;
/// missing samples are explicit.
class RegularSeries {
public:
    RegularSeries(Timestamp start, Minutes step, std::vector<std::optional<double>> values = {});

    struct Sample {
        Timestamp ts;
        double value;
    };

    /// Bins samples onto the epoch-aligned grid of `step`. The first sample
    /// landing in a slot wins. An empty input gives an empty series starting at the epoch.
    static RegularSeries from_samples(std::span<const Sample> samples, Minutes step);

    Timestamp start() const noexcept { return start_; }
    Minutes step() const noexcept { return step_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    Timestamp time_at(std::size_t i) const { return start_ + step_ * static_cast<long>(i); }
    /// One past the last slot.
    Timestamp end_time() const { return time_at(values_.size()); }

    const std::optional<double>& operator[](std::size_t i) const { return values_[i]; }
    std::optional<double>& operator[](std::size_t i) { return values_[i]; }

    /// Value at an instant; nullopt when off-grid, out of range or missing.
    std::optional<double> at(Timestamp ts) const;

    const std::vector<std::optional<double>>& values() const noexcept { return values_; }
    std::vector<std::optional<double>>& values() noexcept { return values_; }

    std::size_t count_present() const noexcept;
    std::vector<double> present_values() const;

    friend bool operator==(const RegularSeries&, const RegularSeries&) = default;

private:
    Timestamp start_;
    Minutes step_;
    std::vector<std::optional<double>> values_;
};

/// Outlier fences from the interquartile range.
struct IqrBounds {
    double q1;
    double q3;
    double k;
    double lo;
    double hi;

    bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

/// Quantile by linear interpolation between order statistics at position p*(n-1).
/// `sorted` must be ascending and non-empty.
double quantile_linear(std::span<const double> sorted, double p);

/// Mean over left-closed windows of `target_step`, aligned to the epoch and
/// labelled by their start. Empty windows are missing.
RegularSeries resample_mean(const RegularSeries& series, Minutes target_step);

IqrBounds iqr_bounds(std::span<const double> values, double k = 1.5);
/// Bounds over the present values of a series.
IqrBounds iqr_bounds(const RegularSeries& series, double k = 1.5);

struct FilterResult {
    RegularSeries series;
    std::size_t removed = 0;
};

FilterResult filter_outliers(const RegularSeries& series, const IqrBounds& bounds);

/// One value per UTC calendar day, labelled at midnight.
RegularSeries daily_mean(const RegularSeries& series);

struct AlignedRow {
    Timestamp ts;
    double a;
    double b;

    friend bool operator==(const AlignedRow&, const AlignedRow&) = default;
};

/// Inner join on timestamps, dropping rows with a missing value on either side.
std::vector<AlignedRow> align(const RegularSeries& a, const RegularSeries& b);

}  // namespace satthermo
