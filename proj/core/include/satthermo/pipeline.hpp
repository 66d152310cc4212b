#pragma once

// The workflows behind the `satthermo` subcommands. Each cmd_* validates its
// configuration, computes everything in memory, and only then writes its files;
// if anything fails no output file is left behind.

#include "satthermo/dataset.hpp"
#include "satthermo/evaluation.hpp"
#include "satthermo/ingestion.hpp"
#include "satthermo/nn.hpp"
#include "satthermo/physics.hpp"
#include "satthermo/rf.hpp"
#include "satthermo/synth.hpp"
#include "satthermo/trained_model.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace satthermo {

std::string_view tool_version() noexcept;

/// Options shared by every command.
struct CommonOptions {
    std::uint64_t seed = 42;
    std::filesystem::path out_dir = ".";
    bool strict = false;
    /// Prefix output CSVs with a `#` line naming the tool version, seed and input fingerprints.
    bool provenance = true;
};

/// Files staged in memory and written together. commit() writes each to a
/// temporary name and renames; on failure every file of the set is removed.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir);
    void add(std::string name, std::string content);
    /// Returns the final paths.
    std::vector<std::filesystem::path> commit();

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

/// `# satthermo <version> command=<cmd> seed=<seed> [key=value...] inputs=<file>@fnv1a64:<hex>;...`
std::string provenance_line(std::string_view command, std::uint64_t seed,
                            const std::vector<std::pair<std::string, std::string>>& extras,
                            const std::vector<std::filesystem::path>& inputs);

// --- synth -------------------------------------------------------------------

struct SynthCommand {
    CommonOptions common;
    SynthConfig synth;
};

/// Writes meteo.csv, probes.csv, ops.csv and synth_report.txt.
SynthData cmd_synth(const SynthCommand& cmd, std::ostream& log);

// --- ingest ------------------------------------------------------------------

struct IngestCommand {
    CommonOptions common;
    std::filesystem::path meteo;
    std::filesystem::path probes;
    std::filesystem::path ops;
    double level_floor_cm = kDefaultLevelFloorCm;
    double iqr_k = 1.5;
    bool all_features = false;
    CoverageFloors floors;
};

struct IngestResult {
    IngestReport meteo_report;
    IngestReport probe_report;
    IngestReport ops_report;
    Minutes meteo_step{0};
    std::size_t meteo_slots_30min = 0;
    /// Values removed by the IQR screen per screened feature.
    std::map<std::string, std::size_t> outliers_removed;
    std::map<std::string, IqrBounds> outlier_bounds;
    std::size_t topsoil_slots = 0;
    std::size_t profile_slots = 0;
    std::vector<DrainageInterval> phases;
    BuildResult topsoil;
    BuildResult profile;

    /// Stage-by-stage counts (parsed, resampled, drainage-filtered, joined).
    std::string report_text() const;
    std::string report_json() const;
};

/// Parse, resample, screen, segment and join, without writing anything.
IngestResult run_ingest(const IngestCommand& cmd);

/// Writes dataset_topsoil.csv, dataset_profile.csv, ingest_report.txt and
/// ingest_report.json. Throws EmptyDatasetError (carrying the stage report)
/// when either dataset is empty.
IngestResult cmd_ingest(const IngestCommand& cmd, std::ostream& log);

// --- train -------------------------------------------------------------------

struct TrainCommand {
    CommonOptions common;
    /// Defaults to <out>/dataset_<target>.csv.
    std::optional<std::filesystem::path> data;
    ModelKind model = ModelKind::mlr;
    TargetKind target = TargetKind::topsoil;
    double split_fraction = 0.8;
    SplitMode split_mode = SplitMode::random;
    NnHyperparams nn;
    RfHyperparams rf;
    std::size_t workers = 1;
};

struct TrainResult {
    TrainedModel model;
    MetricReport metrics;
    std::filesystem::path model_path;
    std::string summary;
};

/// Fits on the training split of the dataset, writes model_<kind>_<target>.json
/// and metrics_<kind>_<target>.csv. The split seed is derived from the common
/// seed; the model seed is the common seed itself.
TrainResult train_model(const TrainCommand& cmd, const Dataset& data);
TrainResult cmd_train(const TrainCommand& cmd, std::ostream& log);

// --- importance --------------------------------------------------------------

enum class ImportanceOn { train, test };

struct ImportanceCommand {
    CommonOptions common;
    /// Defaults to <out>/model_<kind>_<target>.json.
    std::optional<std::filesystem::path> model_file;
    ModelKind model = ModelKind::mlr;
    TargetKind target = TargetKind::topsoil;
    /// Defaults to <out>/dataset_<target of the model>.csv.
    std::optional<std::filesystem::path> data;
    std::size_t repeats = 10;
    ImportanceOn on = ImportanceOn::test;
    std::size_t workers = 1;
};

/// Re-creates the model's recorded split, then writes
/// importance_<kind>_<target>_raw.csv and importance_<kind>_<target>_summary.csv.
ImportanceReport cmd_importance(const ImportanceCommand& cmd, std::ostream& log);

// --- predict -----------------------------------------------------------------

struct PredictCommand {
    CommonOptions common;
    std::filesystem::path meteo;
    bool paper_equations = false;
    std::optional<std::filesystem::path> topsoil_model;
    std::optional<std::filesystem::path> profile_model;
    bool daily = false;
    ViscosityParams viscosity;
};

struct PredictionRow {
    Timestamp ts;
    double t_topsoil;
    double t_profile;
    double viscosity;
};

struct PredictResult {
    std::vector<PredictionRow> rows;
    /// Daily means of the three columns (empty unless requested).
    std::optional<RegularSeries> daily_topsoil;
    std::optional<RegularSeries> daily_profile;
    std::optional<RegularSeries> daily_viscosity;
};

/// Resamples the meteorology to 30 minutes and applies both models; a row is
/// produced for every slot where the models' features are all present.
PredictResult predict_from_meteo(std::span<const MeteoRecord> meteo, const TrainedModel& topsoil,
                                 const TrainedModel& profile, const ViscosityParams& params,
                                 bool daily);

/// Writes predictions.csv and, with `daily`, predictions_daily.csv.
PredictResult cmd_predict(const PredictCommand& cmd, std::ostream& log);

void write_predictions_csv(std::ostream& out, std::span<const PredictionRow> rows);
void write_daily_csv(std::ostream& out, const PredictResult& r);

// --- viscosity ---------------------------------------------------------------

struct ViscosityCommand {
    CommonOptions common;
    std::optional<double> temp;
    std::optional<std::filesystem::path> csv;
    std::string column = "temp_c";
    ViscosityParams params;
};

/// Single-value mode prints eta(T); CSV mode writes viscosity.csv with header
/// `temp_c,viscosity_pa_s`.
void cmd_viscosity(const ViscosityCommand& cmd, std::ostream& log);

}  // namespace satthermo
