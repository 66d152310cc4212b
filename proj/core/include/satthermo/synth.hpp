#pragma once

#include "satthermo/ingestion.hpp"
#include "satthermo/timeseries.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace satthermo {

/// Synthetic meteorology, probe and basin-operation records whose targets follow
/// the two published MLR equations plus Gaussian noise.
struct SynthConfig {
    std::uint64_t seed = 42;
    Timestamp start = std::chrono::sys_days{std::chrono::year{2022} / 6 / 3};
    int days = 120;
    Minutes meteo_step{10};
    /// Standard deviation of the noise added to each target, °C.
    double noise_sigma = 1.7;
    /// When set, ambient deviations are rescaled so that the topsoil signal
    /// variance over drainage slots equals r2 / (1 - r2) * noise_sigma^2.
    std::optional<double> target_r2;

    // Basin cycle: flooding (valve open, level rising), drainage (valve closed,
    // level falling to zero), drying (valve closed, empty).
    Minutes flood{12 * 60};
    Minutes drain{48 * 60};
    Minutes dry{36 * 60};
    double max_level_cm = 40.0;

    bool with_probes = true;
    bool with_ops = true;
};

struct SynthData {
    std::vector<MeteoRecord> meteo;
    std::vector<ProbeRecord> probes;
    std::vector<OpsRecord> ops;
    /// Variance of the noise-free topsoil signal over drainage slots.
    double signal_variance = 0.0;
    /// signal_variance / (signal_variance + noise_sigma^2).
    double theoretical_r2 = 0.0;
};

/// Deterministic in the seed. Throws InvalidParameterError for inconsistent
/// settings, including a requested R^2 that would push T or RH out of range.
SynthData synthesize(const SynthConfig& cfg);

}  // namespace satthermo
