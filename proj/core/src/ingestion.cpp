#include "satthermo/ingestion.hpp"

#include "satthermo/csv.hpp"
#include "satthermo/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <tuple>
#include <unordered_set>
#include <variant>

#include <fmt/format.h>

namespace satthermo {

std::string_view to_string(SkipReason r) noexcept {
    switch (r) {
        case SkipReason::field_count: return "field_count";
        case SkipReason::timestamp: return "timestamp";
        case SkipReason::number: return "number";
        case SkipReason::out_of_range: return "out_of_range";
        case SkipReason::probe_id: return "probe_id";
        case SkipReason::depth_set: return "depth_set";
        case SkipReason::enum_value: return "enum_value";
        case SkipReason::duplicate: return "duplicate";
    }
    return "unknown";
}

std::map<std::string, std::size_t> IngestReport::skipped_by_reason() const {
    std::map<std::string, std::size_t> out;
    for (const auto& issue : issues) ++out[std::string(to_string(issue.reason))];
    return out;
}

std::string IngestReport::summary() const {
    std::string s = fmt::format("{}: read {} rows, kept {}, skipped {}\n", source, rows_read,
                                rows_kept, rows_skipped());
    for (const auto& [reason, n] : skipped_by_reason()) s += fmt::format("  skipped[{}] = {}\n", reason, n);
    for (const auto& [offset, n] : utc_offsets) {
        s += fmt::format("  utc_offset[{:+d} min] = {} rows\n", offset, n);
    }
    for (const auto& issue : issues) {
        s += fmt::format("  line {}: {}: {}\n", issue.line, to_string(issue.reason), issue.detail);
    }
    return s;
}

namespace {

struct Reject {
    SkipReason reason;
    std::string detail;
};

template <class Record>
using RowResult = std::variant<Record, Reject>;

std::variant<ParsedTimestamp, Reject> read_ts(std::string_view field) {
    if (auto ts = parse_timestamp(field)) return *ts;
    return Reject{SkipReason::timestamp, fmt::format("unparseable timestamp '{}'", field)};
}

std::variant<double, Reject> read_real(std::string_view field, std::string_view column) {
    auto v = csv::parse_double(field);
    if (!v || !std::isfinite(*v)) {
        return Reject{SkipReason::number, fmt::format("{}: not a finite number '{}'", column, field)};
    }
    return *v;
}

Reject range_violation(std::string_view column, double v, std::string_view band) {
    return Reject{SkipReason::out_of_range, fmt::format("{} = {} outside {}", column, v, band)};
}

/// Shared driver: header check, per-row conversion, duplicate screening,
/// strict-mode promotion, and timestamp ordering.
template <class Record, class Convert, class Key>
Parsed<Record> parse_rows(std::istream& in, std::string source,
                          std::span<const std::string_view> columns, ParseOptions opts,
                          Convert convert, Key key) {
    csv::Reader reader(in, source);
    reader.read_header(columns);

    Parsed<Record> out;
    out.report.source = source;
    std::set<decltype(key(std::declval<const Record&>()))> seen;
    std::vector<int> offsets;

    auto reject = [&](std::size_t line, Reject r) {
        if (opts.strict) {
            throw RowRejectedError(source, line, fmt::format("{}: {}", to_string(r.reason), r.detail));
        }
        out.report.issues.push_back({line, r.reason, std::move(r.detail)});
    };

    while (reader.next()) {
        ++out.report.rows_read;
        const auto line = reader.line_number();
        if (reader.fields().size() != reader.column_count()) {
            reject(line, {SkipReason::field_count,
                          fmt::format("expected {} fields, found {}", reader.column_count(),
                                      reader.fields().size())});
            continue;
        }
        auto ts = read_ts(reader.field(columns[0]));
        if (auto* r = std::get_if<Reject>(&ts)) {
            reject(line, std::move(*r));
            continue;
        }
        const auto& parsed_ts = std::get<ParsedTimestamp>(ts);
        RowResult<Record> row = convert(reader, parsed_ts.utc);
        if (auto* r = std::get_if<Reject>(&row)) {
            reject(line, std::move(*r));
            continue;
        }
        auto& rec = std::get<Record>(row);
        if (!seen.insert(key(rec)).second) {
            reject(line, {SkipReason::duplicate,
                          fmt::format("duplicate key at {}", format_timestamp(rec.ts))});
            continue;
        }
        ++out.report.utc_offsets[static_cast<int>(parsed_ts.offset.count())];
        out.records.push_back(std::move(rec));
    }
    out.report.rows_kept = out.records.size();
    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const Record& a, const Record& b) { return a.ts < b.ts; });
    return out;
}

template <class F>
auto with_file(const std::filesystem::path& path, F f) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    return f(in, path.string());
}

constexpr std::array<std::string_view, 6> kMeteoColumns = {
    "timestamp", "t_ambient_c", "rh_pct", "precip_mm", "wind_speed_ms", "wind_dir_deg"};
constexpr std::array<std::string_view, 4> kProbeColumns = {"timestamp", "probe_id", "depth_cm",
                                                           "temp_c"};
constexpr std::array<std::string_view, 3> kOpsColumns = {"timestamp", "valve_state",
                                                         "water_level_cm"};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

Parsed<MeteoRecord> parse_meteo_csv(std::istream& in, std::string source, ParseOptions opts) {
    auto convert = [](const csv::Reader& r, Timestamp ts) -> RowResult<MeteoRecord> {
        std::array<double, 5> v{};
        for (std::size_t i = 0; i < v.size(); ++i) {
            auto x = read_real(r.field(kMeteoColumns[i + 1]), kMeteoColumns[i + 1]);
            if (auto* rej = std::get_if<Reject>(&x)) return std::move(*rej);
            v[i] = std::get<double>(x);
        }
        MeteoRecord m{ts, v[0], v[1], v[2], v[3], v[4]};
        if (m.t_ambient < -20.0 || m.t_ambient > 60.0) return range_violation("t_ambient_c", m.t_ambient, "[-20, 60]");
        if (m.rh < 0.0 || m.rh > 100.0) return range_violation("rh_pct", m.rh, "[0, 100]");
        if (m.precip < 0.0) return range_violation("precip_mm", m.precip, "[0, inf)");
        if (m.wind_speed < 0.0) return range_violation("wind_speed_ms", m.wind_speed, "[0, inf)");
        if (m.wind_dir < 0.0 || m.wind_dir >= 360.0) return range_violation("wind_dir_deg", m.wind_dir, "[0, 360)");
        return m;
    };
    auto key = [](const MeteoRecord& m) { return m.ts; };
    return parse_rows<MeteoRecord>(in, std::move(source), kMeteoColumns, opts, convert, key);
}

Parsed<MeteoRecord> parse_meteo_csv(const std::filesystem::path& path, ParseOptions opts) {
    return with_file(path, [&](std::istream& in, std::string src) { return parse_meteo_csv(in, std::move(src), opts); });
}

Parsed<ProbeRecord> parse_probe_csv(std::istream& in, std::string source, ParseOptions opts) {
    auto convert = [](const csv::Reader& r, Timestamp ts) -> RowResult<ProbeRecord> {
        const auto id = csv::parse_int(r.field("probe_id"));
        if (!id) return Reject{SkipReason::number, fmt::format("probe_id: not an integer '{}'", r.field("probe_id"))};
        if (*id < 1 || *id > kProbeCount) {
            return Reject{SkipReason::probe_id, fmt::format("probe_id = {} not in {{1, 2, 3}}", *id)};
        }
        const auto depth = csv::parse_int(r.field("depth_cm"));
        if (!depth) return Reject{SkipReason::number, fmt::format("depth_cm: not an integer '{}'", r.field("depth_cm"))};
        if (!is_probe_depth(*depth)) {
            return Reject{SkipReason::depth_set, fmt::format("depth_cm = {} not in {{5, 15, ..., 115}}", *depth)};
        }
        auto temp = read_real(r.field("temp_c"), "temp_c");
        if (auto* rej = std::get_if<Reject>(&temp)) return std::move(*rej);
        ProbeRecord p{ts, static_cast<int>(*id), static_cast<int>(*depth), std::get<double>(temp)};
        if (p.temp < -5.0 || p.temp > 60.0) return range_violation("temp_c", p.temp, "[-5, 60]");
        return p;
    };
    auto key = [](const ProbeRecord& p) { return std::tuple{p.ts, p.probe_id, p.depth_cm}; };
    return parse_rows<ProbeRecord>(in, std::move(source), kProbeColumns, opts, convert, key);
}

Parsed<ProbeRecord> parse_probe_csv(const std::filesystem::path& path, ParseOptions opts) {
    return with_file(path, [&](std::istream& in, std::string src) { return parse_probe_csv(in, std::move(src), opts); });
}

Parsed<OpsRecord> parse_ops_csv(std::istream& in, std::string source, ParseOptions opts) {
    auto convert = [](const csv::Reader& r, Timestamp ts) -> RowResult<OpsRecord> {
        const auto state = lower(r.field("valve_state"));
        ValveState valve;
        if (state == "open") {
            valve = ValveState::open;
        } else if (state == "closed") {
            valve = ValveState::closed;
        } else {
            return Reject{SkipReason::enum_value,
                          fmt::format("valve_state '{}' not in {{open, closed}}", r.field("valve_state"))};
        }
        auto level = read_real(r.field("water_level_cm"), "water_level_cm");
        if (auto* rej = std::get_if<Reject>(&level)) return std::move(*rej);
        const double lv = std::get<double>(level);
        if (lv < 0.0) return range_violation("water_level_cm", lv, "[0, inf)");
        return OpsRecord{ts, valve, lv};
    };
    auto key = [](const OpsRecord& o) { return o.ts; };
    return parse_rows<OpsRecord>(in, std::move(source), kOpsColumns, opts, convert, key);
}

Parsed<OpsRecord> parse_ops_csv(const std::filesystem::path& path, ParseOptions opts) {
    return with_file(path, [&](std::istream& in, std::string src) { return parse_ops_csv(in, std::move(src), opts); });
}

void write_meteo_csv(std::ostream& out, std::span<const MeteoRecord> records) {
    out << "timestamp,t_ambient_c,rh_pct,precip_mm,wind_speed_ms,wind_dir_deg\n";
    for (const auto& m : records) {
        out << format_timestamp(m.ts) << ',' << csv::format_double(m.t_ambient) << ','
            << csv::format_double(m.rh) << ',' << csv::format_double(m.precip) << ','
            << csv::format_double(m.wind_speed) << ',' << csv::format_double(m.wind_dir) << '\n';
    }
}

void write_probe_csv(std::ostream& out, std::span<const ProbeRecord> records) {
    out << "timestamp,probe_id,depth_cm,temp_c\n";
    for (const auto& p : records) {
        out << format_timestamp(p.ts) << ',' << p.probe_id << ',' << p.depth_cm << ','
            << csv::format_double(p.temp) << '\n';
    }
}

void write_ops_csv(std::ostream& out, std::span<const OpsRecord> records) {
    out << "timestamp,valve_state,water_level_cm\n";
    for (const auto& o : records) {
        out << format_timestamp(o.ts) << ',' << (o.valve == ValveState::open ? "open" : "closed")
            << ',' << csv::format_double(o.water_level) << '\n';
    }
}

std::vector<DrainageInterval> identify_drainage_phases(std::span<const OpsRecord> ops,
                                                       double level_floor_cm) {
    std::vector<OpsRecord> sorted(ops.begin(), ops.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const OpsRecord& a, const OpsRecord& b) { return a.ts < b.ts; });

    std::vector<DrainageInterval> out;
    bool draining = false;
    Timestamp start{};
    for (const auto& r : sorted) {
        if (!draining) {
            if (r.valve == ValveState::closed && r.water_level > level_floor_cm) {
                draining = true;
                start = r.ts;
            }
        } else if (r.valve == ValveState::open || r.water_level <= level_floor_cm) {
            if (start < r.ts) out.push_back({start, r.ts});
            draining = false;
        }
    }
    if (draining && start < sorted.back().ts) out.push_back({start, sorted.back().ts});
    return out;
}

bool within_any(std::span<const DrainageInterval> intervals, Timestamp ts) noexcept {
    auto it = std::upper_bound(intervals.begin(), intervals.end(), ts,
                               [](Timestamp t, const DrainageInterval& d) { return t < d.start; });
    if (it == intervals.begin()) return false;
    return std::prev(it)->contains(ts);
}

}  // namespace satthermo
