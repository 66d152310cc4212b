#include "satthermo/csv.hpp"
#include "satthermo/errors.hpp"
#include "satthermo/pipeline.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace satthermo;
using testing_support::t0;
using testing_support::TempDir;

namespace fs = std::filesystem;

namespace {

std::ostringstream sink;

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

std::size_t data_lines(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') ++n;
    }
    return n - 1;  // header
}

// Two days of meteo and probe data; drainage from day 1 06:00 to day 1 18:00.
struct Fixture {
    fs::path meteo, probes, ops;
};

Fixture two_day_fixture(const TempDir& dir, bool valve_always_open = false, bool meteo_gap = false) {
    std::vector<MeteoRecord> m;
    for (int i = 0; i < 2 * 144; ++i) {
        const auto ts = t0() + Minutes{10 * i};
        if (meteo_gap && ts >= t0() + std::chrono::hours{8} && ts < t0() + std::chrono::hours{11}) continue;
        m.push_back({ts, 15.0 + 0.01 * i, 60.0 - 0.02 * i, 0.0, 2.0, 180.0});
    }
    std::vector<ProbeRecord> p;
    for (int s = 0; s < 96; ++s) {
        for (int id = 1; id <= 3; ++id) {
            for (int d = 5; d <= 115; d += 10) p.push_back({t0() + kModelStep * s, id, d, 20.0 + 0.01 * s + 0.001 * d});
        }
    }
    std::vector<OpsRecord> o;
    for (int s = 0; s < 96; ++s) {
        const auto ts = t0() + kModelStep * s;
        const bool drain = !valve_always_open && s >= 12 && s < 36;
        o.push_back({ts, drain ? ValveState::closed : ValveState::open, drain ? 40.0 - s * 0.5 : 10.0});
    }
    Fixture f{dir / "meteo.csv", dir / "probes.csv", dir / "ops.csv"};
    std::ofstream mo(f.meteo), po(f.probes), oo(f.ops);
    write_meteo_csv(mo, m);
    write_probe_csv(po, p);
    write_ops_csv(oo, o);
    return f;
}

IngestCommand ingest_for(const Fixture& f, const fs::path& out) {
    IngestCommand c;
    c.common.out_dir = out;
    c.meteo = f.meteo;
    c.probes = f.probes;
    c.ops = f.ops;
    return c;
}

fs::path synth_into(const fs::path& dir, std::uint64_t seed, double sigma, int days = 60) {
    SynthCommand s;
    s.common.out_dir = dir;
    s.common.seed = seed;
    s.synth.days = days;
    s.synth.noise_sigma = sigma;
    cmd_synth(s, sink);
    IngestCommand c;
    c.common.out_dir = dir;
    c.meteo = dir / "meteo.csv";
    c.probes = dir / "probes.csv";
    c.ops = dir / "ops.csv";
    cmd_ingest(c, sink);
    return dir;
}

}  // namespace

TEST(Ingest, RowsOnlyInsideTheDrainageInterval) {
    TempDir dir;
    const auto f = two_day_fixture(dir);
    const auto r = cmd_ingest(ingest_for(f, dir.path()), sink);
    ASSERT_EQ(r.phases.size(), 1u);
    EXPECT_EQ(r.phases[0], (DrainageInterval{t0() + std::chrono::hours{6}, t0() + std::chrono::hours{18}}));
    EXPECT_EQ(r.topsoil.dataset.size(), 24u);
    EXPECT_TRUE(rows_within(r.topsoil.dataset, r.phases));
    EXPECT_TRUE(rows_within(r.profile.dataset, r.phases));
    for (auto name : {"dataset_topsoil.csv", "dataset_profile.csv", "ingest_report.txt", "ingest_report.json"}) {
        EXPECT_TRUE(fs::exists(dir / name)) << name;
    }
    EXPECT_EQ(data_lines(dir / "dataset_topsoil.csv"), 24u);
    EXPECT_EQ(read_dataset_csv(dir / "dataset_profile.csv", TargetKind::profile), r.profile.dataset);
}

TEST(Ingest, ValveAlwaysOpenFailsWithoutOutputs) {
    TempDir dir;
    const auto f = two_day_fixture(dir, true);
    const auto out = dir / "out";
    try {
        cmd_ingest(ingest_for(f, out), sink);
        FAIL();
    } catch (const EmptyDatasetError& e) {
        EXPECT_NE(std::string(e.what()).find("outside_drainage = 96"), std::string::npos);
    }
    EXPECT_FALSE(fs::exists(out / "dataset_topsoil.csv"));
    EXPECT_FALSE(fs::exists(out / "ingest_report.txt"));
}

TEST(Ingest, MeteoGapDropsRowsAndIsReported) {
    TempDir dir;
    const auto f = two_day_fixture(dir, false, true);
    const auto r = cmd_ingest(ingest_for(f, dir.path()), sink);
    EXPECT_EQ(r.topsoil.report.missing_feature, 6u);
    EXPECT_EQ(r.topsoil.dataset.size(), 18u);
    EXPECT_NE(r.report_text().find("missing_feature = 6"), std::string::npos);
}

TEST(Ingest, MatchesManualComposition) {
    TempDir dir;
    const auto f = two_day_fixture(dir);
    const auto r = run_ingest(ingest_for(f, dir.path()));

    const auto meteo = parse_meteo_csv(f.meteo).records;
    auto raw = meteo_series(meteo, Minutes{10});
    for (auto name : {kFeaturePrecip, kFeatureWindSpeed, kFeatureWindDir}) {
        auto& s = raw.get(name);
        s = filter_outliers(s, iqr_bounds(s, 1.5)).series;
    }
    FeatureSeries fs30;
    fs30.names = raw.names;
    for (const auto& s : raw.series) fs30.series.push_back(resample_mean(s, kModelStep));
    const auto targets = build_targets(parse_probe_csv(f.probes).records);
    const auto phases = identify_drainage_phases(parse_ops_csv(f.ops).records);
    const auto manual = build_dataset(fs30, targets, phases, TargetKind::topsoil);
    EXPECT_EQ(manual.dataset, r.topsoil.dataset);
}

TEST(Train, RecoversEquationFromNoiseFreeSynth) {
    TempDir dir;
    synth_into(dir.path(), 42, 0.0);
    TrainCommand t;
    t.common.out_dir = dir.path();
    const auto r = cmd_train(t, sink);
    const auto& m = std::get<MlrModel>(r.model.params());
    EXPECT_NEAR(m.coefficient("rh_pct"), 0.19, 1e-6);
    EXPECT_NEAR(m.coefficient("t_ambient_c"), 0.88, 1e-6);
    EXPECT_NEAR(m.intercept, -8.05, 1e-6);
    EXPECT_NE(r.summary.find("0.1899999"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "model_mlr_topsoil.json"));
    EXPECT_EQ(data_lines(dir / "metrics_mlr_topsoil.csv"), 2u);

    // Same result as fitting the library directly on the same split.
    const auto data = read_dataset_csv(dir / "dataset_topsoil.csv", TargetKind::topsoil);
    EXPECT_EQ(fit_mlr(split(data, {0.8, 42}).train), m);
}

TEST(Train, ForestFilesAreByteIdentical) {
    TempDir dir;
    synth_into(dir.path(), 7, 1.7, 20);
    TrainCommand t;
    t.common.out_dir = dir.path();
    t.model = ModelKind::rf;
    t.rf.n_trees = 10;
    cmd_train(t, sink);
    const auto first = csv::read_file(dir / "model_rf_topsoil.json");
    t.workers = 3;
    cmd_train(t, sink);
    EXPECT_EQ(csv::read_file(dir / "model_rf_topsoil.json"), first);
}

TEST(Train, SplitOutOfRange) {
    TempDir dir;
    TrainCommand t;
    t.common.out_dir = dir.path();
    t.split_fraction = 1.5;
    EXPECT_THROW(cmd_train(t, sink), ConfigError);
    t.split_fraction = 0.8;
    EXPECT_THROW(cmd_train(t, sink), ConfigError);  // no dataset there
}

TEST(Importance, DefaultsRecordedAndOrdering) {
    TempDir dir;
    synth_into(dir.path(), 42, 1.7);
    TrainCommand t;
    t.common.out_dir = dir.path();
    cmd_train(t, sink);
    ImportanceCommand c;
    c.common.out_dir = dir.path();
    const auto rep = cmd_importance(c, sink);
    EXPECT_GT(rep.features[0].mean, rep.features[1].mean);
    const auto text = csv::read_file(dir / "importance_mlr_topsoil_summary.csv");
    EXPECT_NE(text.find("seed=42"), std::string::npos);
    EXPECT_NE(text.find("repeats=10"), std::string::npos);
    EXPECT_EQ(data_lines(dir / "importance_mlr_topsoil_raw.csv"), 20u);

    c.repeats = 0;
    EXPECT_THROW(cmd_importance(c, sink), InvalidParameterError);
}

TEST(Predict, PaperEquationsMatchModelsBitForBit) {
    TempDir dir;
    write(dir / "m.csv", "timestamp,t_ambient_c,rh_pct,precip_mm,wind_speed_ms,wind_dir_deg\n"
                         "2023-01-01T00:00:00Z,30,70,0,1,0\n");
    PredictCommand p;
    p.common.out_dir = dir.path();
    p.meteo = dir / "m.csv";
    p.paper_equations = true;
    const auto r = cmd_predict(p, sink);
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_NEAR(r.rows[0].t_topsoil, 31.65, 1e-12);
    EXPECT_NEAR(r.rows[0].t_profile, 31.38, 1e-12);
    EXPECT_EQ(r.rows[0].t_topsoil, predict_mlr(MlrModel::topsoil_equation(), 30, 70));
    EXPECT_EQ(r.rows[0].t_profile, predict_mlr(MlrModel::profile_equation(), 30, 70));
    EXPECT_EQ(r.rows[0].viscosity, viscosity(r.rows[0].t_profile));
    const auto text = csv::read_file(dir / "predictions.csv");
    EXPECT_NE(text.find("timestamp,t_topsoil_pred_c,t_profile_pred_c,viscosity_pa_s\n"), std::string::npos);
}

TEST(Predict, NeedsModelsOrPaperEquations) {
    TempDir dir;
    write(dir / "m.csv", "timestamp,t_ambient_c,rh_pct,precip_mm,wind_speed_ms,wind_dir_deg\n");
    PredictCommand p;
    p.common.out_dir = dir.path();
    p.meteo = dir / "m.csv";
    EXPECT_THROW(cmd_predict(p, sink), ConfigError);
}

TEST(Predict, SeasonalCycleSurvivesAndSummerIsLessViscous) {
    std::vector<MeteoRecord> m;
    const int days = 730;
    for (int i = 0; i < days * 48; ++i) {
        const double phase = 2.0 * std::numbers::pi * (i / 48.0) / 365.0;
        m.push_back({t0() + kModelStep * i, 20.0 - 8.0 * std::cos(phase), 60.0, 0.0, 1.0, 90.0});
    }
    const TrainedModel top(MlrModel::topsoil_equation(), {});
    ModelMetadata profile_meta;
    profile_meta.target_kind = TargetKind::profile;
    const TrainedModel prof(MlrModel::profile_equation(), profile_meta);
    const auto r = predict_from_meteo(m, top, prof, {}, true);
    ASSERT_EQ(r.rows.size(), m.size());
    ASSERT_EQ(r.daily_profile->size(), static_cast<std::size_t>(days));
    // Coldest on day 0 and day 365, warmest half a year in.
    const auto& d = *r.daily_profile;
    std::size_t argmax = 0;
    for (std::size_t i = 0; i < 365; ++i) {
        if (*d[i] > *d[argmax]) argmax = i;
    }
    EXPECT_NEAR(static_cast<double>(argmax), 182.5, 1.0);
    EXPECT_NEAR(*d[0], *d[365], 0.01);
    EXPECT_LT(*(*r.daily_viscosity)[182], *(*r.daily_viscosity)[0]);
}

TEST(Viscosity, CsvModeAndDomain) {
    TempDir dir;
    write(dir / "t.csv", "temp_c\n10\n20\n30\n");
    ViscosityCommand v;
    v.common.out_dir = dir.path();
    v.csv = dir / "t.csv";
    cmd_viscosity(v, sink);
    const auto text = csv::read_file(dir / "viscosity.csv");
    EXPECT_NE(text.find("temp_c,viscosity_pa_s\n"), std::string::npos);
    EXPECT_EQ(data_lines(dir / "viscosity.csv"), 3u);

    write(dir / "bad.csv", "temp_c\n10\n-300\n");
    v.csv = dir / "bad.csv";
    v.common.out_dir = dir / "bad";
    EXPECT_THROW(cmd_viscosity(v, sink), DomainError);
    EXPECT_FALSE(fs::exists(dir / "bad" / "viscosity.csv"));

    ViscosityCommand single;
    single.temp = 20.0;
    std::ostringstream out;
    cmd_viscosity(single, out);
    EXPECT_EQ(out.str(), csv::format_double(viscosity(20.0)) + "\n");
}

TEST(Synth, SameSeedSameFilesAndProvenanceSwitch) {
    TempDir a, b;
    SynthCommand s;
    s.synth.days = 5;
    s.common.out_dir = a.path();
    cmd_synth(s, sink);
    s.common.out_dir = b.path();
    cmd_synth(s, sink);
    for (auto name : {"meteo.csv", "probes.csv", "ops.csv", "synth_report.txt"}) {
        EXPECT_EQ(csv::read_file(a / name), csv::read_file(b / name)) << name;
    }
    EXPECT_EQ(csv::read_file(a / "meteo.csv").rfind("# satthermo ", 0), 0u);
    s.common.provenance = false;
    cmd_synth(s, sink);
    EXPECT_EQ(csv::read_file(b / "meteo.csv").rfind("timestamp,", 0), 0u);
}

TEST(OutputSet, FailureRemovesEverything) {
    TempDir dir;
    fs::create_directories(dir / "blocker" / "inside");  // a non-empty directory cannot be replaced by a file
    OutputSet out(dir.path());
    out.add("first.csv", "a\n");
    out.add("blocker", "b\n");
    EXPECT_THROW(out.commit(), IoError);
    EXPECT_FALSE(fs::exists(dir / "first.csv"));
    EXPECT_FALSE(fs::exists(dir / ".first.csv.tmp"));
    EXPECT_FALSE(fs::exists(dir / ".blocker.tmp"));
}

TEST(Provenance, NamesInputsWithFingerprints) {
    TempDir dir;
    write(dir / "in.csv", "x\n");
    const auto line = provenance_line("predict", 7, {{"k", "v"}}, {dir / "in.csv"});
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64("x\n")));
    EXPECT_EQ(line, "# satthermo " + std::string(tool_version()) + " command=predict seed=7 k=v inputs=in.csv@fnv1a64:" +
                        hex + "\n");
}
