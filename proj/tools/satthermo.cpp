// satthermo: command-line front end for the effluent-temperature pipeline.
//
// Exit codes: 0 success, 1 runtime failure (bad data, fitting errors, I/O),
// 2 usage or configuration error.
#include "satthermo/errors.hpp"
#include "satthermo/pipeline.hpp"

#ifdef SATTHERMO_CLI11_PACKAGE
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include <iostream>
#include <string>

namespace {

using namespace satthermo;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void add_common(CLI::App& cmd, CommonOptions& common) {
    cmd.add_option("--seed", common.seed, "Master seed for every random stream")->capture_default_str();
    cmd.add_option("--out", common.out_dir, "Output directory")->capture_default_str();
    cmd.add_flag("--strict", common.strict, "Reject the whole input on the first malformed row");
    cmd.add_flag("!--no-provenance", common.provenance, "Omit the '#' provenance line from output CSVs");
}

Timestamp parse_start(const std::string& text) {
    auto parsed = parse_timestamp(text.size() == 10 ? text + "T00:00:00Z" : text);
    if (!parsed) throw ConfigError("--start: expected YYYY-MM-DD or an ISO 8601 timestamp, got '" + text + "'");
    return parsed->utc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Effluent temperature modelling for recharge basins"};
    app.set_version_flag("--version", std::string(tool_version()));
    app.require_subcommand(1);

    // synth
    SynthCommand synth;
    std::string synth_start = "2022-06-03";
    int synth_step = 10;
    auto* c_synth = app.add_subcommand("synth", "Generate synthetic meteo/probe/ops fixtures");
    add_common(*c_synth, synth.common);
    c_synth->add_option("--days", synth.synth.days, "Length of the record in days")
        ->check(CLI::PositiveNumber)->capture_default_str();
    c_synth->add_option("--start", synth_start, "First day (UTC)")->capture_default_str();
    c_synth->add_option("--meteo-step", synth_step, "Meteorological sampling step in minutes (must divide 30)")
        ->check(CLI::IsMember({1, 2, 3, 5, 6, 10, 15, 30}))->capture_default_str();
    c_synth->add_option("--noise-sigma", synth.synth.noise_sigma, "Std of the target noise, degC")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    c_synth->add_option("--target-r2", synth.synth.target_r2, "Rescale ambient variability for this theoretical R2")
        ->check(CLI::Range(0.0, 1.0));
    c_synth->add_option("--max-level", synth.synth.max_level_cm, "Peak ponding depth, cm")
        ->check(CLI::PositiveNumber)->capture_default_str();

    // ingest
    IngestCommand ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Build the drainage-phase datasets");
    add_common(*c_ingest, ingest.common);
    c_ingest->add_option("--meteo", ingest.meteo, "Meteorological CSV")->required()->check(CLI::ExistingFile);
    c_ingest->add_option("--probes", ingest.probes, "Soil-probe CSV")->required()->check(CLI::ExistingFile);
    c_ingest->add_option("--ops", ingest.ops, "Basin operations CSV")->required()->check(CLI::ExistingFile);
    c_ingest->add_option("--level-floor", ingest.level_floor_cm, "Water level (cm) at which drainage ends")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    c_ingest->add_option("--iqr-k", ingest.iqr_k, "IQR multiplier for outlier screening")
        ->check(CLI::PositiveNumber)->capture_default_str();
    c_ingest->add_flag("--all-features", ingest.all_features, "Keep P, WS and WD as features as well as T and RH");
    c_ingest->add_option("--min-topsoil-sensors", ingest.floors.topsoil_min_probes, "Sensors needed for a topsoil value")
        ->check(CLI::Range(1, 3))->capture_default_str();
    c_ingest->add_option("--min-profile-sensors", ingest.floors.profile_min_sensors, "Sensors needed for a profile value")
        ->check(CLI::Range(1, 36))->capture_default_str();

    // train
    TrainCommand train;
    std::string train_model_kind = "mlr";
    std::string train_target = "topsoil";
    bool temporal = false;
    auto* c_train = app.add_subcommand("train", "Fit a model on the training split");
    add_common(*c_train, train.common);
    c_train->add_option("--model", train_model_kind, "mlr | nn | rf")
        ->check(CLI::IsMember({"mlr", "nn", "rf"}))->capture_default_str();
    c_train->add_option("--target", train_target, "topsoil | profile")
        ->check(CLI::IsMember({"topsoil", "profile"}))->capture_default_str();
    c_train->add_option("--data", train.data, "Dataset CSV (default <out>/dataset_<target>.csv)");
    c_train->add_option("--split", train.split_fraction, "Training fraction")
        ->check(CLI::Validator(
            [](const std::string& s) -> std::string {
                double v = 0.0;
                if (!CLI::detail::lexical_cast(s, v) || !(v > 0.0 && v < 1.0)) return "must lie in (0, 1)";
                return {};
            },
            "(0,1)"))
        ->capture_default_str();
    c_train->add_flag("--temporal-split", temporal, "Train on the earliest rows instead of a random subset");
    c_train->add_option("--workers", train.workers, "Threads for forest training")
        ->check(CLI::Range(1, 256))->capture_default_str();
    c_train->add_option("--epochs", train.nn.epochs, "NN: maximum epochs")->check(CLI::PositiveNumber)->capture_default_str();
    c_train->add_option("--learning-rate", train.nn.learning_rate, "NN: Adam step size")
        ->check(CLI::PositiveNumber)->capture_default_str();
    c_train->add_option("--trees", train.rf.n_trees, "RF: number of trees")->check(CLI::PositiveNumber)->capture_default_str();
    c_train->add_option("--min-samples-leaf", train.rf.min_samples_leaf, "RF: minimum rows per leaf")
        ->check(CLI::PositiveNumber)->capture_default_str();
    c_train->add_option("--max-depth", train.rf.max_depth, "RF: depth cap (0 = none)")->capture_default_str();

    // importance
    ImportanceCommand imp;
    std::string imp_model_kind = "mlr";
    std::string imp_target = "topsoil";
    std::string imp_on = "test";
    auto* c_imp = app.add_subcommand("importance", "Permutation importance of a trained model");
    add_common(*c_imp, imp.common);
    c_imp->add_option("--model", imp_model_kind, "mlr | nn | rf")
        ->check(CLI::IsMember({"mlr", "nn", "rf"}))->capture_default_str();
    c_imp->add_option("--target", imp_target, "topsoil | profile")
        ->check(CLI::IsMember({"topsoil", "profile"}))->capture_default_str();
    c_imp->add_option("--model-file", imp.model_file, "Model JSON (default <out>/model_<model>_<target>.json)");
    c_imp->add_option("--data", imp.data, "Dataset CSV (default <out>/dataset_<target>.csv)");
    c_imp->add_option("--repeats", imp.repeats, "Shuffles per feature")->capture_default_str();
    c_imp->add_option("--on", imp_on, "train | test")->check(CLI::IsMember({"train", "test"}))->capture_default_str();
    c_imp->add_option("--workers", imp.workers, "Threads")->check(CLI::Range(1, 256))->capture_default_str();

    // predict
    PredictCommand predict;
    auto* c_predict = app.add_subcommand("predict", "Apply topsoil and profile models to a meteorological record");
    add_common(*c_predict, predict.common);
    c_predict->add_option("--meteo", predict.meteo, "Meteorological CSV")->required()->check(CLI::ExistingFile);
    c_predict->add_flag("--paper-equations", predict.paper_equations, "Use the built-in published regressions");
    c_predict->add_option("--topsoil-model", predict.topsoil_model, "Topsoil model JSON");
    c_predict->add_option("--profile-model", predict.profile_model, "Profile model JSON");
    c_predict->add_flag("--daily", predict.daily, "Also write daily means");

    // viscosity
    ViscosityCommand visc;
    auto* c_visc = app.add_subcommand("viscosity", "Dynamic viscosity of water from temperature");
    add_common(*c_visc, visc.common);
    auto* o_temp = c_visc->add_option("--temp", visc.temp, "Temperature, degC");
    auto* o_csv = c_visc->add_option("--csv", visc.csv, "CSV with a temperature column")->check(CLI::ExistingFile);
    o_temp->excludes(o_csv);
    c_visc->add_option("--column", visc.column, "Temperature column in --csv")->capture_default_str();
    c_visc->add_option("--a", visc.params.a, "Pre-exponential constant, Pa s")->capture_default_str();
    c_visc->add_option("--b", visc.params.b, "Exponential constant, K")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (*c_synth) {
            synth.synth.start = parse_start(synth_start);
            synth.synth.meteo_step = Minutes{synth_step};
            cmd_synth(synth, std::cout);
        } else if (*c_ingest) {
            cmd_ingest(ingest, std::cout);
        } else if (*c_train) {
            train.model = *parse_model_kind(train_model_kind);
            train.target = *parse_target_kind(train_target);
            train.split_mode = temporal ? SplitMode::temporal : SplitMode::random;
            cmd_train(train, std::cout);
        } else if (*c_imp) {
            imp.model = *parse_model_kind(imp_model_kind);
            imp.target = *parse_target_kind(imp_target);
            imp.on = imp_on == "train" ? ImportanceOn::train : ImportanceOn::test;
            cmd_importance(imp, std::cout);
        } else if (*c_predict) {
            cmd_predict(predict, std::cout);
        } else if (*c_visc) {
            cmd_viscosity(visc, std::cout);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
