#include "satthermo/pipeline.hpp"

#include "satthermo/csv.hpp"
#include "satthermo/errors.hpp"
#include "satthermo/random.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>
#include <array>
#include <cmath>
#include <functional>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#ifndef SATTHERMO_VERSION
#define SATTHERMO_VERSION "0.0.0"
#endif

namespace satthermo {

namespace fs = std::filesystem;

std::string_view tool_version() noexcept { return SATTHERMO_VERSION; }

// --- output handling ---------------------------------------------------------------

OutputSet::OutputSet(fs::path dir) : dir_(std::move(dir)) {}

void OutputSet::add(std::string name, std::string content) {
    files_.emplace_back(std::move(name), std::move(content));
}

std::vector<fs::path> OutputSet::commit() {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError(fmt::format("cannot create output directory '{}': {}", dir_.string(), ec.message()));

    std::vector<fs::path> temps;
    std::vector<fs::path> finals;
    auto cleanup = [&] {
        std::error_code ignore;
        for (const auto& p : temps) fs::remove(p, ignore);
        for (const auto& p : finals) fs::remove(p, ignore);
    };
    try {
        for (const auto& [name, content] : files_) {
            const auto tmp = dir_ / ("." + name + ".tmp");
            temps.push_back(tmp);
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw IoError(fmt::format("cannot write '{}'", tmp.string()));
            out << content;
            out.flush();
            if (!out) throw IoError(fmt::format("write failure on '{}'", tmp.string()));
        }
        for (std::size_t i = 0; i < files_.size(); ++i) {
            const auto dest = dir_ / files_[i].first;
            fs::rename(temps[i], dest);
            finals.push_back(dest);
        }
    } catch (const fs::filesystem_error& e) {
        cleanup();
        throw IoError(e.what());
    } catch (...) {
        cleanup();
        throw;
    }
    return finals;
}

std::string provenance_line(std::string_view command, std::uint64_t seed,
                            const std::vector<std::pair<std::string, std::string>>& extras,
                            const std::vector<fs::path>& inputs) {
    std::string line = fmt::format("# satthermo {} command={} seed={}", tool_version(), command, seed);
    for (const auto& [k, v] : extras) line += fmt::format(" {}={}", k, v);
    if (!inputs.empty()) {
        line += " inputs=";
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            if (i) line += ';';
            line += fmt::format("{}@fnv1a64:{:016x}", inputs[i].filename().string(),
                                fnv1a64(csv::read_file(inputs[i])));
        }
    }
    return line + "\n";
}

namespace {

template <class Writer>
std::string render(Writer&& w) {
    std::ostringstream ss;
    w(ss);
    return ss.str();
}

std::string with_provenance(const CommonOptions& common, std::string_view command,
                            const std::vector<std::pair<std::string, std::string>>& extras,
                            const std::vector<fs::path>& inputs, std::string body) {
    if (!common.provenance) return body;
    return provenance_line(command, common.seed, extras, inputs) + body;
}

std::vector<Timestamp> timestamps_of(std::span<const MeteoRecord> meteo) {
    std::vector<Timestamp> ts;
    ts.reserve(meteo.size());
    for (const auto& m : meteo) ts.push_back(m.ts);
    return ts;
}

/// Meteorology on the 30-minute model grid.
FeatureSeries meteo_on_model_grid(std::span<const MeteoRecord> meteo, Minutes* step_out,
                                  const std::function<void(FeatureSeries&)>& screen = {}) {
    const auto ts = timestamps_of(meteo);
    const Minutes step = infer_step(ts).value_or(kModelStep);
    if (kModelStep % step != Minutes{0}) {
        throw StepMismatchError(
            fmt::format("meteorological step {} min does not divide 30 min", step.count()));
    }
    if (step_out) *step_out = step;
    auto raw = meteo_series(meteo, step);
    if (screen) screen(raw);
    FeatureSeries out;
    out.names = raw.names;
    for (const auto& s : raw.series) out.series.push_back(resample_mean(s, kModelStep));
    return out;
}

}  // namespace

// --- synth -------------------------------------------------------------------------

SynthData cmd_synth(const SynthCommand& cmd, std::ostream& log) {
    SynthConfig cfg = cmd.synth;
    cfg.seed = cmd.common.seed;
    auto data = synthesize(cfg);

    const std::vector<std::pair<std::string, std::string>> extras{
        {"days", std::to_string(cfg.days)},
        {"noise_sigma", csv::format_double(cfg.noise_sigma)},
        {"target_r2", cfg.target_r2 ? csv::format_double(*cfg.target_r2) : "none"}};
    OutputSet out(cmd.common.out_dir);
    out.add("meteo.csv", with_provenance(cmd.common, "synth", extras, {},
                                         render([&](std::ostream& o) { write_meteo_csv(o, data.meteo); })));
    if (cfg.with_probes) {
        out.add("probes.csv", with_provenance(cmd.common, "synth", extras, {},
                                              render([&](std::ostream& o) { write_probe_csv(o, data.probes); })));
    }
    if (cfg.with_ops) {
        out.add("ops.csv", with_provenance(cmd.common, "synth", extras, {},
                                           render([&](std::ostream& o) { write_ops_csv(o, data.ops); })));
    }
    const auto report = fmt::format(
        "seed = {}\ndays = {}\nmeteo_rows = {}\nprobe_rows = {}\nops_rows = {}\n"
        "noise_sigma_c = {}\nsignal_variance = {}\ntheoretical_r2 = {}\n",
        cfg.seed, cfg.days, data.meteo.size(), data.probes.size(), data.ops.size(),
        csv::format_double(cfg.noise_sigma), csv::format_double(data.signal_variance),
        csv::format_double(data.theoretical_r2));
    out.add("synth_report.txt", report);
    for (const auto& p : out.commit()) log << "wrote " << p.string() << '\n';
    log << report;
    return data;
}

// --- ingest --------------------------------------------------------------------------

IngestResult run_ingest(const IngestCommand& cmd) {
    if (!(cmd.iqr_k > 0.0)) throw ConfigError("IQR multiplier must be positive");
    if (!(cmd.level_floor_cm >= 0.0)) throw ConfigError("drainage level floor must be non-negative");
    for (const auto* p : {&cmd.meteo, &cmd.probes, &cmd.ops}) {
        if (!fs::exists(*p)) throw ConfigError(fmt::format("input '{}' does not exist", p->string()));
    }
    const ParseOptions popts{cmd.common.strict};
    auto meteo = parse_meteo_csv(cmd.meteo, popts);
    auto probes = parse_probe_csv(cmd.probes, popts);
    auto ops = parse_ops_csv(cmd.ops, popts);

    IngestResult r;
    r.meteo_report = std::move(meteo.report);
    r.probe_report = std::move(probes.report);
    r.ops_report = std::move(ops.report);

    // P, WS and WD are screened over the whole record, per feature.
    auto screen = [&](FeatureSeries& raw) {
        for (auto name : {kFeaturePrecip, kFeatureWindSpeed, kFeatureWindDir}) {
            auto& s = raw.get(name);
            if (s.count_present() < 4) {
                r.outliers_removed[std::string(name)] = 0;
                continue;
            }
            const auto bounds = iqr_bounds(s, cmd.iqr_k);
            auto filtered = filter_outliers(s, bounds);
            r.outliers_removed[std::string(name)] = filtered.removed;
            r.outlier_bounds.emplace(std::string(name), bounds);
            s = std::move(filtered.series);
        }
    };
    const auto features = meteo_on_model_grid(meteo.records, &r.meteo_step, screen);
    {
        const auto& t = features.get(kFeatureTemperature);
        const auto& rh = features.get(kFeatureHumidity);
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i] && rh.at(t.time_at(i))) ++r.meteo_slots_30min;
        }
    }

    const auto targets = build_targets(probes.records, cmd.floors);
    r.topsoil_slots = targets.topsoil.count_present();
    r.profile_slots = targets.profile.count_present();
    r.phases = identify_drainage_phases(ops.records, cmd.level_floor_cm);

    const auto names = cmd.all_features ? all_features() : default_features();
    r.topsoil = assemble_dataset(features, targets, r.phases, TargetKind::topsoil, names);
    r.profile = assemble_dataset(features, targets, r.phases, TargetKind::profile, names);
    return r;
}

std::string IngestResult::report_text() const {
    std::string s;
    s += "[parse]\n";
    s += meteo_report.summary();
    s += probe_report.summary();
    s += ops_report.summary();
    s += "[resample]\n";
    s += fmt::format("  meteorological step = {} min\n", meteo_step.count());
    s += fmt::format("  30-min slots with T and RH = {}\n", meteo_slots_30min);
    for (const auto& [name, n] : outliers_removed) {
        s += fmt::format("  iqr_removed[{}] = {}\n", name, n);
    }
    s += fmt::format("  topsoil target slots = {}\n", topsoil_slots);
    s += fmt::format("  profile target slots = {}\n", profile_slots);
    s += "[drainage]\n";
    s += fmt::format("  intervals = {}\n", phases.size());
    s += "[join]\n";
    for (const auto* b : {&topsoil, &profile}) {
        s += fmt::format("  {}: slots = {}, outside_drainage = {}, missing_feature = {}, "
                         "missing_target = {}, rows = {}\n",
                         to_string(b->dataset.target_kind()), b->report.candidates,
                         b->report.outside_drainage, b->report.missing_feature,
                         b->report.missing_target, b->report.rows);
    }
    s += "[notes]\n";
    s += "  precip_mm holds precipitation; the pressure named in some feature lists is not in the\n"
         "  meteorological record and is not substituted.\n";
    return s;
}

std::string IngestResult::report_json() const {
    using nlohmann::json;
    auto parse = [](const IngestReport& r) {
        return json{{"source", r.source},
                    {"rows_read", r.rows_read},
                    {"rows_kept", r.rows_kept},
                    {"rows_skipped", r.rows_skipped()},
                    {"skipped_by_reason", r.skipped_by_reason()}};
    };
    auto join = [](const BuildResult& b) {
        return json{{"slots", b.report.candidates},
                    {"outside_drainage", b.report.outside_drainage},
                    {"missing_feature", b.report.missing_feature},
                    {"missing_target", b.report.missing_target},
                    {"rows", b.report.rows}};
    };
    json doc = {
        {"parse", {{"meteo", parse(meteo_report)}, {"probes", parse(probe_report)}, {"ops", parse(ops_report)}}},
        {"resample",
         {{"meteo_step_min", meteo_step.count()},
          {"slots_30min", meteo_slots_30min},
          {"iqr_removed", outliers_removed},
          {"topsoil_slots", topsoil_slots},
          {"profile_slots", profile_slots}}},
        {"drainage", {{"intervals", phases.size()}}},
        {"join", {{"topsoil", join(topsoil)}, {"profile", join(profile)}}},
    };
    return doc.dump(2) + "\n";
}

IngestResult cmd_ingest(const IngestCommand& cmd, std::ostream& log) {
    auto r = run_ingest(cmd);
    const auto report = r.report_text();
    if (r.topsoil.dataset.empty() || r.profile.dataset.empty()) {
        throw EmptyDatasetError("ingest produced an empty dataset\n" + report);
    }
    const std::vector<fs::path> inputs{cmd.meteo, cmd.probes, cmd.ops};
    const std::vector<std::pair<std::string, std::string>> extras{
        {"level_floor_cm", csv::format_double(cmd.level_floor_cm)},
        {"iqr_k", csv::format_double(cmd.iqr_k)}};
    OutputSet out(cmd.common.out_dir);
    for (const auto* b : {&r.topsoil, &r.profile}) {
        out.add(fmt::format("dataset_{}.csv", to_string(b->dataset.target_kind())),
                with_provenance(cmd.common, "ingest", extras, inputs,
                                render([&](std::ostream& o) { write_dataset_csv(o, b->dataset); })));
    }
    out.add("ingest_report.txt", report);
    out.add("ingest_report.json", r.report_json());
    for (const auto& p : out.commit()) log << "wrote " << p.string() << '\n';
    log << report;
    return r;
}

// --- train ---------------------------------------------------------------------------

TrainResult train_model(const TrainCommand& cmd, const Dataset& data) {
    if (!(cmd.split_fraction > 0.0 && cmd.split_fraction < 1.0)) {
        throw ConfigError(fmt::format("--split {} outside (0, 1)", cmd.split_fraction));
    }
    const SplitSpec spec{cmd.split_fraction, cmd.common.seed, cmd.split_mode};
    const auto parts = split(data, spec);

    ModelMetadata meta;
    meta.target_kind = data.target_kind();
    meta.seed = cmd.common.seed;
    meta.split = spec;
    meta.data_fingerprint = data.fingerprint();
    meta.n_train = parts.train.size();

    auto fit = [&]() -> TrainedModel::Params {
        switch (cmd.model) {
            case ModelKind::mlr: return fit_mlr(parts.train);
            case ModelKind::nn: return fit_nn(parts.train, cmd.common.seed, cmd.nn);
            case ModelKind::rf: return fit_rf(parts.train, cmd.common.seed, cmd.rf, cmd.workers);
        }
        throw ConfigError("unknown model kind");
    };
    TrainedModel model(fit(), meta);
    const auto metrics = evaluate(model, parts.train, parts.test);

    std::string summary = fmt::format("model {} / target {} / seed {} / n_train {} / n_test {}\n",
                                      to_string(cmd.model), to_string(data.target_kind()),
                                      cmd.common.seed, metrics.n_train, metrics.n_test);
    if (const auto* m = std::get_if<MlrModel>(&model.params())) {
        summary += fmt::format("  T_{} =", to_string(data.target_kind()));
        for (std::size_t j = 0; j < m->coefficients.size(); ++j) {
            summary += fmt::format(" {:+.17g}*{}", m->coefficients[j], m->feature_names[j]);
        }
        summary += fmt::format(" {:+.17g}\n", m->intercept);
    }
    summary += fmt::format("  train: R2 = {:.6f}, RMSE = {:.6f}\n", metrics.r2_train, metrics.rmse_train);
    summary += fmt::format("  test:  R2 = {:.6f}, RMSE = {:.6f}\n", metrics.r2_test, metrics.rmse_test);
    return {std::move(model), metrics, {}, std::move(summary)};
}

TrainResult cmd_train(const TrainCommand& cmd, std::ostream& log) {
    if (!(cmd.split_fraction > 0.0 && cmd.split_fraction < 1.0)) {
        throw ConfigError(fmt::format("--split {} outside (0, 1)", cmd.split_fraction));
    }
    const fs::path data_path =
        cmd.data.value_or(cmd.common.out_dir / fmt::format("dataset_{}.csv", to_string(cmd.target)));
    if (!fs::exists(data_path)) throw ConfigError(fmt::format("dataset '{}' does not exist", data_path.string()));
    const auto data = read_dataset_csv(data_path, cmd.target);
    auto result = train_model(cmd, data);

    const auto stem = fmt::format("{}_{}", to_string(cmd.model), to_string(cmd.target));
    OutputSet out(cmd.common.out_dir);
    out.add(fmt::format("model_{}.json", stem), model_to_json(result.model));
    out.add(fmt::format("metrics_{}.csv", stem),
            with_provenance(cmd.common, "train", {{"model", std::string(to_string(cmd.model))},
                                                  {"target", std::string(to_string(cmd.target))},
                                                  {"split", csv::format_double(cmd.split_fraction)}},
                            {data_path}, render([&](std::ostream& o) { write_metrics_csv(o, result.metrics); })));
    const auto paths = out.commit();
    result.model_path = paths.front();
    for (const auto& p : paths) log << "wrote " << p.string() << '\n';
    log << result.summary;
    return result;
}

// --- importance ------------------------------------------------------------------------

ImportanceReport cmd_importance(const ImportanceCommand& cmd, std::ostream& log) {
    if (cmd.repeats == 0) throw InvalidParameterError("--repeats must be at least 1");
    const fs::path model_path = cmd.model_file.value_or(
        cmd.common.out_dir / fmt::format("model_{}_{}.json", to_string(cmd.model), to_string(cmd.target)));
    if (!fs::exists(model_path)) throw ConfigError(fmt::format("model '{}' does not exist", model_path.string()));
    const auto model = load_model(model_path);
    const auto& meta = model.metadata();
    const fs::path data_path = cmd.data.value_or(
        cmd.common.out_dir / fmt::format("dataset_{}.csv", to_string(meta.target_kind)));
    if (!fs::exists(data_path)) throw ConfigError(fmt::format("dataset '{}' does not exist", data_path.string()));
    const auto data = read_dataset_csv(data_path, meta.target_kind);
    if (data.fingerprint() != meta.data_fingerprint) {
        log << "warning: dataset differs from the one the model was trained on\n";
    }
    const auto parts = split(data, meta.split);
    const auto& subset = cmd.on == ImportanceOn::test ? parts.test : parts.train;

    const auto report = permutation_importance(model, subset, {cmd.repeats, cmd.common.seed, cmd.workers});

    const auto stem = fmt::format("{}_{}", to_string(model.kind()), to_string(meta.target_kind));
    const std::vector<std::pair<std::string, std::string>> extras{
        {"repeats", std::to_string(cmd.repeats)},
        {"on", cmd.on == ImportanceOn::test ? "test" : "train"},
        {"baseline_r2", csv::format_double(report.baseline_r2)}};
    OutputSet out(cmd.common.out_dir);
    out.add(fmt::format("importance_{}_raw.csv", stem),
            with_provenance(cmd.common, "importance", extras, {model_path, data_path},
                            render([&](std::ostream& o) { write_importance_raw_csv(o, report); })));
    out.add(fmt::format("importance_{}_summary.csv", stem),
            with_provenance(cmd.common, "importance", extras, {model_path, data_path},
                            render([&](std::ostream& o) { write_importance_summary_csv(o, report); })));
    for (const auto& p : out.commit()) log << "wrote " << p.string() << '\n';
    log << fmt::format("repeats = {}, seed = {}, baseline R2 = {:.6f}\n", report.repeats, report.seed,
                       report.baseline_r2);
    for (const auto& f : report.features) {
        log << fmt::format("  {}: mean dR2 = {:.6f}, std = {:.6f}\n", f.feature, f.mean, f.stddev);
    }
    return report;
}

// --- predict -----------------------------------------------------------------------------

PredictResult predict_from_meteo(std::span<const MeteoRecord> meteo, const TrainedModel& topsoil,
                                 const TrainedModel& profile, const ViscosityParams& params,
                                 bool daily) {
    PredictResult r;
    if (meteo.empty()) return r;
    const auto features = meteo_on_model_grid(meteo, nullptr);
    auto columns = [&](const TrainedModel& m) {
        std::vector<const RegularSeries*> cols;
        for (const auto& name : m.feature_names()) cols.push_back(&features.get(name));
        return cols;
    };
    const auto top_cols = columns(topsoil);
    const auto prof_cols = columns(profile);
    auto gather = [](const std::vector<const RegularSeries*>& cols, std::size_t i, std::vector<double>& row) {
        row.resize(cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const auto& v = (*cols[j])[i];
            if (!v) return false;
            row[j] = *v;
        }
        return true;
    };

    const auto& grid = features.series.front();
    RegularSeries top_series(grid.start(), kModelStep, std::vector<std::optional<double>>(grid.size()));
    RegularSeries prof_series = top_series;
    RegularSeries visc_series = top_series;
    std::vector<double> row_top;
    std::vector<double> row_prof;
    r.rows.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!gather(top_cols, i, row_top) || !gather(prof_cols, i, row_prof)) continue;
        PredictionRow p{grid.time_at(i), topsoil.predict(row_top), profile.predict(row_prof), 0.0};
        p.viscosity = viscosity(p.t_profile, params);
        top_series[i] = p.t_topsoil;
        prof_series[i] = p.t_profile;
        visc_series[i] = p.viscosity;
        r.rows.push_back(p);
    }
    if (daily) {
        r.daily_topsoil = daily_mean(top_series);
        r.daily_profile = daily_mean(prof_series);
        r.daily_viscosity = daily_mean(visc_series);
    }
    return r;
}

void write_predictions_csv(std::ostream& out, std::span<const PredictionRow> rows) {
    out << "timestamp,t_topsoil_pred_c,t_profile_pred_c,viscosity_pa_s\n";
    for (const auto& p : rows) {
        out << format_timestamp(p.ts) << ',' << csv::format_double(p.t_topsoil) << ','
            << csv::format_double(p.t_profile) << ',' << csv::format_double(p.viscosity) << '\n';
    }
}

void write_daily_csv(std::ostream& out, const PredictResult& r) {
    out << "date,t_topsoil_daily_c,t_profile_daily_c,viscosity_daily_pa_s\n";
    if (!r.daily_topsoil) return;
    auto cell = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };
    for (std::size_t i = 0; i < r.daily_topsoil->size(); ++i) {
        out << format_date(r.daily_topsoil->time_at(i)) << ',' << cell((*r.daily_topsoil)[i]) << ','
            << cell((*r.daily_profile)[i]) << ',' << cell((*r.daily_viscosity)[i]) << '\n';
    }
}

PredictResult cmd_predict(const PredictCommand& cmd, std::ostream& log) {
    if (!fs::exists(cmd.meteo)) throw ConfigError(fmt::format("input '{}' does not exist", cmd.meteo.string()));
    std::vector<fs::path> inputs{cmd.meteo};
    auto load = [&](const std::optional<fs::path>& path, TargetKind kind) {
        if (cmd.paper_equations) {
            ModelMetadata meta;
            meta.target_kind = kind;
            return TrainedModel(kind == TargetKind::topsoil ? MlrModel::topsoil_equation()
                                                            : MlrModel::profile_equation(),
                                meta);
        }
        if (!path) {
            throw ConfigError("predict needs --topsoil-model and --profile-model, or --paper-equations");
        }
        if (!fs::exists(*path)) throw ConfigError(fmt::format("model '{}' does not exist", path->string()));
        inputs.push_back(*path);
        return load_model(*path);
    };
    const auto topsoil = load(cmd.topsoil_model, TargetKind::topsoil);
    const auto profile = load(cmd.profile_model, TargetKind::profile);

    const auto meteo = parse_meteo_csv(cmd.meteo, ParseOptions{cmd.common.strict});
    auto result = predict_from_meteo(meteo.records, topsoil, profile, cmd.viscosity, cmd.daily);

    const std::vector<std::pair<std::string, std::string>> extras{
        {"models", cmd.paper_equations ? "paper-equations" : "files"},
        {"viscosity_a", csv::format_double(cmd.viscosity.a)},
        {"viscosity_b", csv::format_double(cmd.viscosity.b)}};
    OutputSet out(cmd.common.out_dir);
    out.add("predictions.csv", with_provenance(cmd.common, "predict", extras, inputs, render([&](std::ostream& o) {
                                                   write_predictions_csv(o, result.rows);
                                               })));
    if (cmd.daily) {
        out.add("predictions_daily.csv",
                with_provenance(cmd.common, "predict", extras, inputs,
                                render([&](std::ostream& o) { write_daily_csv(o, result); })));
    }
    log << meteo.report.summary();
    for (const auto& p : out.commit()) log << "wrote " << p.string() << '\n';
    log << fmt::format("{} prediction rows", result.rows.size());
    if (result.daily_topsoil) log << fmt::format(", {} days", result.daily_topsoil->size());
    log << '\n';
    return result;
}

// --- viscosity -------------------------------------------------------------------------------

void cmd_viscosity(const ViscosityCommand& cmd, std::ostream& log) {
    if (cmd.temp.has_value() == cmd.csv.has_value()) {
        throw ConfigError("viscosity needs exactly one of --temp or --csv");
    }
    if (cmd.temp) {
        log << csv::format_double(viscosity(*cmd.temp, cmd.params)) << '\n';
        return;
    }
    std::ifstream in(*cmd.csv, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", cmd.csv->string()));
    csv::Reader reader(in, cmd.csv->string());
    const std::array<std::string_view, 1> required{cmd.column};
    reader.read_header(required);
    std::string body = "temp_c,viscosity_pa_s\n";
    std::size_t rows = 0;
    while (reader.next()) {
        if (reader.fields().size() != reader.column_count()) {
            throw ParseError(fmt::format("{}:{}: wrong field count", reader.source(), reader.line_number()));
        }
        const auto t = csv::parse_double(reader.field(cmd.column));
        if (!t || !std::isfinite(*t)) {
            throw ParseError(fmt::format("{}:{}: bad temperature '{}'", reader.source(),
                                         reader.line_number(), reader.field(cmd.column)));
        }
        body += csv::format_double(*t) + ',' + csv::format_double(viscosity(*t, cmd.params)) + '\n';
        ++rows;
    }
    OutputSet out(cmd.common.out_dir);
    out.add("viscosity.csv", with_provenance(cmd.common, "viscosity",
                                             {{"a", csv::format_double(cmd.params.a)},
                                              {"b", csv::format_double(cmd.params.b)}},
                                             {*cmd.csv}, std::move(body)));
    for (const auto& p : out.commit()) log << "wrote " << p.string() << '\n';
    log << rows << " rows\n";
}

}  // namespace satthermo
