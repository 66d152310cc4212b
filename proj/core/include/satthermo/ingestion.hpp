#pragma once

#include "satthermo/timeseries.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace satthermo {

struct MeteoRecord {
    Timestamp ts;
    double t_ambient;   // °C
    double rh;          // %
    double precip;      // mm
    double wind_speed;  // m/s
    double wind_dir;    // degrees

    friend bool operator==(const MeteoRecord&, const MeteoRecord&) = default;
};

struct ProbeRecord {
    Timestamp ts;
    int probe_id;  // 1..3
    int depth_cm;  // 5, 15, ..., 115
    double temp;   // °C

    friend bool operator==(const ProbeRecord&, const ProbeRecord&) = default;
};

enum class ValveState { open, closed };

struct OpsRecord {
    Timestamp ts;
    ValveState valve;
    double water_level;  // cm

    friend bool operator==(const OpsRecord&, const OpsRecord&) = default;
};

/// Half-open [start, end).
struct DrainageInterval {
    Timestamp start;
    Timestamp end;

    bool contains(Timestamp ts) const noexcept { return ts >= start && ts < end; }
    friend bool operator==(const DrainageInterval&, const DrainageInterval&) = default;
};

inline constexpr int kProbeCount = 3;
inline constexpr int kDepthCount = 12;
inline constexpr int kSensorCount = kProbeCount * kDepthCount;

/// True for 5 + 10*j cm, j = 0..11.
constexpr bool is_probe_depth(long long depth_cm) noexcept {
    return depth_cm >= 5 && depth_cm <= 115 && (depth_cm - 5) % 10 == 0;
}

enum class SkipReason {
    field_count,
    timestamp,
    number,
    out_of_range,
    probe_id,
    depth_set,
    enum_value,
    duplicate,
};

std::string_view to_string(SkipReason r) noexcept;

struct RowIssue {
    std::size_t line;
    SkipReason reason;
    std::string detail;
};

struct IngestReport {
    std::string source;
    std::size_t rows_read = 0;
    std::size_t rows_kept = 0;
    std::vector<RowIssue> issues;
    /// UTC offset in minutes -> number of kept rows written with that offset.
    std::map<int, std::size_t> utc_offsets;

    std::size_t rows_skipped() const noexcept { return issues.size(); }
    std::map<std::string, std::size_t> skipped_by_reason() const;
    /// Plain-text summary, one issue per line.
    std::string summary() const;
};

template <class Record>
struct Parsed {
    std::vector<Record> records;
    IngestReport report;
};

struct ParseOptions {
    /// Any rejected row raises RowRejectedError instead of being skipped.
    bool strict = false;
};

// Parsers accept header columns in any order; extra columns are ignored.
// Output records are sorted by timestamp (stable), duplicates resolved first-wins.

Parsed<MeteoRecord> parse_meteo_csv(const std::filesystem::path& path, ParseOptions opts = {});
Parsed<MeteoRecord> parse_meteo_csv(std::istream& in, std::string source, ParseOptions opts = {});

Parsed<ProbeRecord> parse_probe_csv(const std::filesystem::path& path, ParseOptions opts = {});
Parsed<ProbeRecord> parse_probe_csv(std::istream& in, std::string source, ParseOptions opts = {});

Parsed<OpsRecord> parse_ops_csv(const std::filesystem::path& path, ParseOptions opts = {});
Parsed<OpsRecord> parse_ops_csv(std::istream& in, std::string source, ParseOptions opts = {});

void write_meteo_csv(std::ostream& out, std::span<const MeteoRecord> records);
void write_probe_csv(std::ostream& out, std::span<const ProbeRecord> records);
void write_ops_csv(std::ostream& out, std::span<const OpsRecord> records);

inline constexpr double kDefaultLevelFloorCm = 1.0;

/// Segments the operations log into drainage phases. A phase opens at a record
/// with the valve closed and the level above `level_floor_cm`, and closes at the
/// next record with the valve open or the level at or below the floor. A phase
/// still open at the end closes at the last record (dropped if that would make
/// it empty). Input is sorted by timestamp internally.
std::vector<DrainageInterval> identify_drainage_phases(std::span<const OpsRecord> ops,
                                                       double level_floor_cm = kDefaultLevelFloorCm);

/// Binary search over sorted, disjoint intervals.
bool within_any(std::span<const DrainageInterval> intervals, Timestamp ts) noexcept;

}  // namespace satthermo
