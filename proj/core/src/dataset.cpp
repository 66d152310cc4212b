#include "satthermo/dataset.hpp"

#include "satthermo/csv.hpp"
#include "satthermo/errors.hpp"
#include "satthermo/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <tuple>
#include <utility>

#include <fmt/format.h>

namespace satthermo {

std::string_view to_string(TargetKind k) noexcept {
    return k == TargetKind::topsoil ? "topsoil" : "profile";
}

std::optional<TargetKind> parse_target_kind(std::string_view s) {
    if (s == "topsoil") return TargetKind::topsoil;
    if (s == "profile") return TargetKind::profile;
    return std::nullopt;
}

std::string_view to_string(SplitMode m) noexcept {
    return m == SplitMode::random ? "random" : "temporal";
}

std::vector<std::string> default_features() {
    return {std::string(kFeatureTemperature), std::string(kFeatureHumidity)};
}

std::vector<std::string> all_features() {
    return {std::string(kFeatureTemperature), std::string(kFeatureHumidity),
            std::string(kFeaturePrecip), std::string(kFeatureWindSpeed),
            std::string(kFeatureWindDir)};
}

// --- targets -----------------------------------------------------------------

namespace {

double sorted_mean(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

}  // namespace

TargetSeries build_targets(std::span<const ProbeRecord> probes, CoverageFloors floors) {
    if (probes.empty()) return {RegularSeries(Timestamp{}, kModelStep), RegularSeries(Timestamp{}, kModelStep)};

    struct Keyed {
        Timestamp slot;
        int probe;
        int depth;
        Timestamp ts;
        double temp;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(probes.size());
    for (const auto& p : probes) {
        keyed.push_back({floor_to(p.ts, kModelStep), p.probe_id, p.depth_cm, p.ts, p.temp});
    }
    std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        return std::tie(a.slot, a.probe, a.depth, a.ts) < std::tie(b.slot, b.probe, b.depth, b.ts);
    });

    const Timestamp first = keyed.front().slot;
    const auto n = static_cast<std::size_t>((keyed.back().slot - first) / kModelStep) + 1;
    TargetSeries out{RegularSeries(first, kModelStep, std::vector<std::optional<double>>(n)),
                     RegularSeries(first, kModelStep, std::vector<std::optional<double>>(n))};

    std::vector<double> top;
    std::vector<double> all;
    std::size_t i = 0;
    while (i < keyed.size()) {
        const Timestamp slot = keyed[i].slot;
        top.clear();
        all.clear();
        while (i < keyed.size() && keyed[i].slot == slot) {
            // One sensor's readings within the slot.
            const int probe = keyed[i].probe;
            const int depth = keyed[i].depth;
            double sum = 0.0;
            std::size_t count = 0;
            while (i < keyed.size() && keyed[i].slot == slot && keyed[i].probe == probe &&
                   keyed[i].depth == depth) {
                sum += keyed[i].temp;
                ++count;
                ++i;
            }
            const double sensor = count == 1 ? sum : sum / static_cast<double>(count);
            all.push_back(sensor);
            if (depth == 5) top.push_back(sensor);
        }
        const auto idx = static_cast<std::size_t>((slot - first) / kModelStep);
        if (static_cast<int>(top.size()) >= std::max(floors.topsoil_min_probes, 1)) {
            out.topsoil[idx] = sorted_mean(top);
        }
        if (static_cast<int>(all.size()) >= std::max(floors.profile_min_sensors, 1)) {
            out.profile[idx] = sorted_mean(all);
        }
    }
    return out;
}

// --- meteorology ---------------------------------------------------------------

const RegularSeries& FeatureSeries::get(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return series[i];
    }
    throw InvalidParameterError(fmt::format("unknown feature '{}'", name));
}

RegularSeries& FeatureSeries::get(std::string_view name) {
    return const_cast<RegularSeries&>(std::as_const(*this).get(name));
}

FeatureSeries meteo_series(std::span<const MeteoRecord> records, Minutes step) {
    FeatureSeries out;
    out.names = all_features();
    if (records.empty()) {
        out.series.assign(out.names.size(), RegularSeries(Timestamp{}, step));
        return out;
    }
    auto [lo, hi] = std::minmax_element(records.begin(), records.end(),
                                        [](const auto& a, const auto& b) { return a.ts < b.ts; });
    const Timestamp first = floor_to(lo->ts, step);
    const auto n = static_cast<std::size_t>((floor_to(hi->ts, step) - first) / step) + 1;
    out.series.assign(out.names.size(),
                      RegularSeries(first, step, std::vector<std::optional<double>>(n)));
    for (const auto& m : records) {
        const auto idx = static_cast<std::size_t>((floor_to(m.ts, step) - first) / step);
        const std::array<double, 5> v{m.t_ambient, m.rh, m.precip, m.wind_speed, m.wind_dir};
        for (std::size_t f = 0; f < v.size(); ++f) {
            auto& slot = out.series[f][idx];
            if (!slot) slot = v[f];
        }
    }
    return out;
}

// --- Dataset -------------------------------------------------------------------

Dataset::Dataset(TargetKind kind, std::vector<std::string> feature_names)
    : kind_(kind), names_(std::move(feature_names)) {}

void Dataset::add_row(Timestamp ts, std::span<const double> features, double target) {
    if (features.size() != names_.size()) {
        throw ShapeError(fmt::format("row has {} features, dataset expects {}", features.size(),
                                     names_.size()));
    }
    timestamps_.push_back(ts);
    features_.insert(features_.end(), features.begin(), features.end());
    targets_.push_back(target);
}

std::vector<double> Dataset::column(std::size_t j) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = feature(i, j);
    return out;
}

std::optional<std::size_t> Dataset::feature_index(std::string_view name) const {
    for (std::size_t j = 0; j < names_.size(); ++j) {
        if (names_[j] == name) return j;
    }
    return std::nullopt;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out(kind_, names_);
    out.timestamps_.reserve(indices.size());
    out.features_.reserve(indices.size() * names_.size());
    out.targets_.reserve(indices.size());
    for (auto i : indices) out.add_row(timestamps_.at(i), row(i), targets_.at(i));
    return out;
}

std::string Dataset::fingerprint() const {
    std::string bytes;
    for (const auto& n : names_) (bytes += n) += ',';
    bytes += '\n';
    for (std::size_t i = 0; i < size(); ++i) {
        bytes += format_timestamp(timestamps_[i]);
        for (double v : row(i)) (bytes += ',') += csv::format_double(v);
        (bytes += ',') += csv::format_double(targets_[i]);
        bytes += '\n';
    }
    return fmt::format("fnv1a64:{:016x}", fnv1a64(bytes));
}

BuildResult assemble_dataset(const FeatureSeries& features, const TargetSeries& targets,
                             std::span<const DrainageInterval> phases, TargetKind kind,
                             std::span<const std::string> feature_names) {
    const RegularSeries& target = kind == TargetKind::topsoil ? targets.topsoil : targets.profile;
    std::vector<const RegularSeries*> cols;
    for (const auto& name : feature_names) {
        const auto& s = features.get(name);
        if (s.step() != target.step()) {
            throw StepMismatchError(fmt::format("feature '{}' has step {} min, target has {} min",
                                                name, s.step().count(), target.step().count()));
        }
        cols.push_back(&s);
    }
    std::vector<DrainageInterval> sorted(phases.begin(), phases.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.start < b.start; });

    BuildResult out{Dataset(kind, {feature_names.begin(), feature_names.end()}), {}};
    std::vector<double> row(cols.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        ++out.report.candidates;
        const Timestamp ts = target.time_at(i);
        if (!within_any(sorted, ts)) {
            ++out.report.outside_drainage;
            continue;
        }
        bool complete = true;
        for (std::size_t j = 0; j < cols.size() && complete; ++j) {
            auto v = cols[j]->at(ts);
            if (v) {
                row[j] = *v;
            } else {
                complete = false;
            }
        }
        if (!complete) {
            ++out.report.missing_feature;
            continue;
        }
        if (!target[i]) {
            ++out.report.missing_target;
            continue;
        }
        out.dataset.add_row(ts, row, *target[i]);
    }
    out.report.rows = out.dataset.size();
    return out;
}

BuildResult build_dataset(const FeatureSeries& features, const TargetSeries& targets,
                          std::span<const DrainageInterval> phases, TargetKind kind,
                          std::span<const std::string> feature_names) {
    auto out = assemble_dataset(features, targets, phases, kind, feature_names);
    if (out.dataset.empty()) {
        throw EmptyDatasetError(fmt::format(
            "no {} rows: {} slots, {} outside drainage, {} missing a feature, {} missing the target",
            to_string(kind), out.report.candidates, out.report.outside_drainage,
            out.report.missing_feature, out.report.missing_target));
    }
    return out;
}

BuildResult build_dataset(const FeatureSeries& features, const TargetSeries& targets,
                          std::span<const DrainageInterval> phases, TargetKind kind) {
    const auto names = default_features();
    return build_dataset(features, targets, phases, kind, names);
}

bool rows_within(const Dataset& ds, std::span<const DrainageInterval> phases) {
    return std::all_of(ds.timestamps().begin(), ds.timestamps().end(), [&](Timestamp ts) {
        return std::any_of(phases.begin(), phases.end(),
                           [&](const DrainageInterval& d) { return d.contains(ts); });
    });
}

void write_dataset_csv(std::ostream& out, const Dataset& ds) {
    out << "timestamp";
    for (const auto& n : ds.feature_names()) out << ',' << n;
    out << ",target_c\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out << format_timestamp(ds.timestamp(i));
        for (double v : ds.row(i)) out << ',' << csv::format_double(v);
        out << ',' << csv::format_double(ds.target(i)) << '\n';
    }
}

Dataset read_dataset_csv(std::istream& in, std::string source, TargetKind kind) {
    csv::Reader reader(in, source);
    constexpr std::array<std::string_view, 2> required{"timestamp", "target_c"};
    reader.read_header(required);

    std::vector<std::string> names;
    std::vector<std::size_t> feature_cols;
    std::size_t ts_col = 0;
    std::size_t target_col = 0;
    for (std::size_t c = 0; c < reader.header().size(); ++c) {
        const auto& h = reader.header()[c];
        if (h == "timestamp") {
            ts_col = c;
        } else if (h == "target_c") {
            target_col = c;
        } else {
            names.push_back(h);
            feature_cols.push_back(c);
        }
    }

    Dataset ds(kind, names);
    std::vector<double> row(names.size());
    while (reader.next()) {
        const auto& f = reader.fields();
        auto fail = [&](std::string_view what) {
            return ParseError(fmt::format("{}:{}: {}", source, reader.line_number(), what));
        };
        if (f.size() != reader.column_count()) throw fail("wrong field count");
        auto ts = parse_timestamp(f[ts_col]);
        if (!ts) throw fail("bad timestamp");
        for (std::size_t j = 0; j < feature_cols.size(); ++j) {
            auto v = csv::parse_double(f[feature_cols[j]]);
            if (!v || !std::isfinite(*v)) throw fail(fmt::format("bad value for {}", names[j]));
            row[j] = *v;
        }
        auto target = csv::parse_double(f[target_col]);
        if (!target || !std::isfinite(*target)) throw fail("bad target_c");
        ds.add_row(ts->utc, row, *target);
    }
    return ds;
}

Dataset read_dataset_csv(const std::filesystem::path& path, TargetKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    return read_dataset_csv(in, path.string(), kind);
}

// --- split ---------------------------------------------------------------------

SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw InvalidParameterError(
            fmt::format("train fraction {} outside (0, 1)", spec.train_fraction));
    }
    if (n < 10) throw TooFewRowsError(fmt::format("split needs at least 10 rows, got {}", n));
    const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train == n) {
        throw InvalidParameterError(
            fmt::format("train fraction {} leaves an empty side for {} rows", spec.train_fraction, n));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (spec.mode == SplitMode::random) {
        Rng rng(derive_seed(spec.seed, "split"));
        shuffle(std::span<std::size_t>(order), rng);
    }
    SplitIndices out;
    out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

Split split(const Dataset& ds, const SplitSpec& spec) {
    if (ds.empty()) throw EmptyDatasetError("cannot split an empty dataset");
    const auto idx = split_indices(ds.size(), spec);
    return {ds.subset(idx.train), ds.subset(idx.test)};
}

// --- standardization -----------------------------------------------------------

Moments moments(std::span<const double> values) {
    if (values.empty()) throw InsufficientDataError("moments of an empty column");
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

Standardizer::Standardizer(std::vector<std::string> names, std::vector<double> mean,
                           std::vector<double> stddev)
    : names_(std::move(names)), mean_(std::move(mean)), stddev_(std::move(stddev)) {
    if (names_.size() != mean_.size() || mean_.size() != stddev_.size()) {
        throw ShapeError("standardizer parameter lengths differ");
    }
    for (std::size_t j = 0; j < stddev_.size(); ++j) {
        if (!(stddev_[j] > 0.0)) throw DegenerateFeatureError(names_[j]);
    }
}

Standardizer Standardizer::fit(const Dataset& train) {
    if (train.empty()) throw EmptyDatasetError("cannot standardize an empty dataset");
    std::vector<double> mean(train.n_features());
    std::vector<double> sd(train.n_features());
    for (std::size_t j = 0; j < train.n_features(); ++j) {
        const auto m = moments(train.column(j));
        mean[j] = m.mean;
        sd[j] = m.stddev;
    }
    return Standardizer(train.feature_names(), std::move(mean), std::move(sd));
}

std::vector<double> Standardizer::transform(std::span<const double> row) const {
    if (row.size() != mean_.size()) throw ShapeError("row width differs from standardizer");
    std::vector<double> z(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) z[j] = (row[j] - mean_[j]) / stddev_[j];
    return z;
}

std::vector<double> Standardizer::inverse(std::span<const double> z) const {
    if (z.size() != mean_.size()) throw ShapeError("row width differs from standardizer");
    std::vector<double> row(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) row[j] = z[j] * stddev_[j] + mean_[j];
    return row;
}

Dataset Standardizer::transform(const Dataset& ds) const {
    if (ds.n_features() != mean_.size()) throw ShapeError("dataset width differs from standardizer");
    Dataset out = ds;
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t j = 0; j < mean_.size(); ++j) {
            out.feature(i, j) = (ds.feature(i, j) - mean_[j]) / stddev_[j];
        }
    }
    return out;
}

}  // namespace satthermo
