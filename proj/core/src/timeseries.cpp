#include "satthermo/timeseries.hpp"

#include "satthermo/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace satthermo {

namespace {

using namespace std::chrono;

bool read_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

long long floor_div(long long a, long long b) {
    long long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

std::optional<ParsedTimestamp> parse_timestamp(std::string_view text) {
    // Trim surrounding blanks.
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
    if (text.size() < 16) return std::nullopt;

    int y, mo, d, h, mi;
    if (!read_int(text.substr(0, 4), y) || text[4] != '-' || !read_int(text.substr(5, 2), mo) ||
        text[7] != '-' || !read_int(text.substr(8, 2), d) ||
        (text[10] != 'T' && text[10] != ' ') || !read_int(text.substr(11, 2), h) ||
        text[13] != ':' || !read_int(text.substr(14, 2), mi)) {
        return std::nullopt;
    }
    std::string_view rest = text.substr(16);
    if (!rest.empty() && rest.front() == ':') {
        int sec;
        if (rest.size() < 3 || !read_int(rest.substr(1, 2), sec)) return std::nullopt;
        if (sec != 0) return std::nullopt;
        rest.remove_prefix(3);
    }
    Minutes offset{0};
    if (rest == "Z" || rest.empty()) {
        // UTC
    } else if (rest.size() == 6 && (rest[0] == '+' || rest[0] == '-') && rest[3] == ':') {
        int oh, om;
        if (!read_int(rest.substr(1, 2), oh) || !read_int(rest.substr(4, 2), om)) return std::nullopt;
        if (oh > 23 || om > 59) return std::nullopt;
        offset = hours{oh} + minutes{om};
        if (rest[0] == '-') offset = -offset;
    } else {
        return std::nullopt;
    }
    if (h > 23 || mi > 59) return std::nullopt;

    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    const Timestamp local = sys_days{ymd} + hours{h} + minutes{mi};
    return ParsedTimestamp{local - offset, offset};
}

std::string format_timestamp(Timestamp ts) {
    const auto day = floor<days>(ts);
    const year_month_day ymd{day};
    const auto tod = ts - day;
    const auto hh = duration_cast<hours>(tod);
    const auto mm = tod - hh;
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:00Z", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                       hh.count(), mm.count());
}

std::string format_date(Timestamp ts) {
    const year_month_day ymd{floor<days>(ts)};
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

Timestamp floor_to(Timestamp ts, Minutes step) {
    const long long m = ts.time_since_epoch().count();
    return Timestamp{Minutes{floor_div(m, step.count()) * step.count()}};
}

std::optional<Minutes> infer_step(std::span<const Timestamp> sorted) {
    long long g = 0;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        const long long gap = (sorted[i] - sorted[i - 1]).count();
        if (gap > 0) g = std::gcd(g, gap);
    }
    if (g == 0) return std::nullopt;
    return Minutes{g};
}

// --- RegularSeries ---------------------------------------------------------

RegularSeries::RegularSeries(Timestamp start, Minutes step, std::vector<std::optional<double>> values)
    : start_(start), step_(step), values_(std::move(values)) {
    if (step_.count() <= 0) throw InvalidParameterError("series step must be positive");
}

RegularSeries RegularSeries::from_samples(std::span<const Sample> samples, Minutes step) {
    if (step.count() <= 0) throw InvalidParameterError("series step must be positive");
    if (samples.empty()) return RegularSeries(Timestamp{}, step);
    auto [lo, hi] = std::minmax_element(samples.begin(), samples.end(),
                                        [](const Sample& a, const Sample& b) { return a.ts < b.ts; });
    const Timestamp first = floor_to(lo->ts, step);
    const auto n = static_cast<std::size_t>((floor_to(hi->ts, step) - first) / step) + 1;
    RegularSeries out(first, step, std::vector<std::optional<double>>(n));
    for (const auto& s : samples) {
        if (!std::isfinite(s.value)) continue;
        auto& slot = out.values_[static_cast<std::size_t>((floor_to(s.ts, step) - first) / step)];
        if (!slot) slot = s.value;
    }
    return out;
}

std::optional<double> RegularSeries::at(Timestamp ts) const {
    if (ts < start_) return std::nullopt;
    const auto offset = ts - start_;
    if (offset % step_ != Minutes{0}) return std::nullopt;
    const auto i = static_cast<std::size_t>(offset / step_);
    if (i >= values_.size()) return std::nullopt;
    return values_[i];
}

std::size_t RegularSeries::count_present() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(values_.begin(), values_.end(), [](const auto& v) { return v.has_value(); }));
}

std::vector<double> RegularSeries::present_values() const {
    std::vector<double> out;
    out.reserve(values_.size());
    for (const auto& v : values_) {
        if (v) out.push_back(*v);
    }
    return out;
}

// --- operations ------------------------------------------------------------

double quantile_linear(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw InsufficientDataError("quantile of an empty sequence");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

RegularSeries resample_mean(const RegularSeries& series, Minutes target_step) {
    if (target_step.count() <= 0 || target_step % series.step() != Minutes{0}) {
        throw StepMismatchError(fmt::format("target step {} min is not a positive multiple of {} min",
                                            target_step.count(), series.step().count()));
    }
    const Timestamp first = floor_to(series.start(), target_step);
    if (series.empty()) return RegularSeries(first, target_step);

    const Timestamp last = floor_to(series.time_at(series.size() - 1), target_step);
    const auto n = static_cast<std::size_t>((last - first) / target_step) + 1;
    std::vector<double> sums(n, 0.0);
    std::vector<std::size_t> counts(n, 0);
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!series[i]) continue;
        const auto w = static_cast<std::size_t>((series.time_at(i) - first) / target_step);
        sums[w] += *series[i];
        ++counts[w];
    }
    std::vector<std::optional<double>> values(n);
    for (std::size_t w = 0; w < n; ++w) {
        if (counts[w] > 0) values[w] = sums[w] / static_cast<double>(counts[w]);
    }
    return RegularSeries(first, target_step, std::move(values));
}

IqrBounds iqr_bounds(std::span<const double> values, double k) {
    if (!(k > 0.0)) throw InvalidParameterError("IQR multiplier must be positive");
    std::vector<double> sorted;
    sorted.reserve(values.size());
    for (double v : values) {
        if (std::isfinite(v)) sorted.push_back(v);
    }
    if (sorted.size() < 4) {
        throw InsufficientDataError(
            fmt::format("IQR needs at least 4 values, got {}", sorted.size()));
    }
    std::sort(sorted.begin(), sorted.end());
    IqrBounds b{};
    b.q1 = quantile_linear(sorted, 0.25);
    b.q3 = quantile_linear(sorted, 0.75);
    b.k = k;
    const double iqr = b.q3 - b.q1;
    b.lo = b.q1 - k * iqr;
    b.hi = b.q3 + k * iqr;
    return b;
}

IqrBounds iqr_bounds(const RegularSeries& series, double k) {
    const auto present = series.present_values();
    return iqr_bounds(present, k);
}

FilterResult filter_outliers(const RegularSeries& series, const IqrBounds& bounds) {
    FilterResult out{series, 0};
    for (auto& v : out.series.values()) {
        if (v && !bounds.contains(*v)) {
            v.reset();
            ++out.removed;
        }
    }
    return out;
}

RegularSeries daily_mean(const RegularSeries& series) {
    constexpr Minutes kDay{24 * 60};
    if (kDay % series.step() != Minutes{0}) {
        throw StepMismatchError(
            fmt::format("step {} min does not divide 24 hours", series.step().count()));
    }
    return resample_mean(series, kDay);
}

std::vector<AlignedRow> align(const RegularSeries& a, const RegularSeries& b) {
    if (a.step() != b.step()) {
        throw StepMismatchError(fmt::format("cannot align steps {} min and {} min",
                                            a.step().count(), b.step().count()));
    }
    std::vector<AlignedRow> rows;
    rows.reserve(std::min(a.size(), b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i]) continue;
        const Timestamp ts = a.time_at(i);
        if (auto vb = b.at(ts)) rows.push_back({ts, *a[i], *vb});
    }
    return rows;
}

}  // namespace satthermo
