#include "satthermo/synth.hpp"

#include "satthermo/dataset.hpp"
#include "satthermo/errors.hpp"
#include "satthermo/mlr.hpp"
#include "satthermo/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace satthermo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Stationary AR(1) with the given standard deviation and correlation time.
class Ar1 {
public:
    Ar1(double sigma, double step_minutes, double tau_minutes)
        : phi_(std::exp(-step_minutes / tau_minutes)), sigma_(sigma) {}

    double next(Rng& rng) {
        x_ = phi_ * x_ + sigma_ * std::sqrt(1.0 - phi_ * phi_) * standard_normal(rng);
        return x_;
    }

private:
    double phi_;
    double sigma_;
    double x_ = 0.0;
};

double variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    return std::pow(moments(v).stddev, 2);
}

struct Slot30 {
    Timestamp ts;
    double t;
    double rh;
};

std::vector<Slot30> half_hour_means(const std::vector<MeteoRecord>& meteo, Minutes step) {
    const auto fs = meteo_series(meteo, step);
    const auto t = resample_mean(fs.get(kFeatureTemperature), kModelStep);
    const auto rh = resample_mean(fs.get(kFeatureHumidity), kModelStep);
    std::vector<Slot30> out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        auto r = rh.at(t.time_at(i));
        if (t[i] && r) out.push_back({t.time_at(i), *t[i], *r});
    }
    return out;
}

}  // namespace

SynthData synthesize(const SynthConfig& cfg) {
    if (cfg.days <= 0) throw InvalidParameterError("synthetic duration must be positive");
    if (cfg.meteo_step.count() <= 0 || kModelStep % cfg.meteo_step != Minutes{0}) {
        throw InvalidParameterError(fmt::format("meteo step {} min must divide 30 min", cfg.meteo_step.count()));
    }
    if (cfg.noise_sigma < 0.0) throw InvalidParameterError("noise sigma must be non-negative");
    if (cfg.target_r2 && !(*cfg.target_r2 > 0.0 && *cfg.target_r2 < 1.0 && cfg.noise_sigma > 0.0)) {
        throw InvalidParameterError("target R^2 must lie in (0, 1) and needs a positive noise sigma");
    }
    if (cfg.flood.count() <= 0 || cfg.drain.count() <= 0 || cfg.dry.count() < 0 || !(cfg.max_level_cm > 1.0)) {
        throw InvalidParameterError("basin cycle durations and level must be positive");
    }

    SynthData out;
    const Timestamp start = floor_to(cfg.start, kModelStep);
    const Timestamp end = start + std::chrono::days{cfg.days};
    const double step_min = static_cast<double>(cfg.meteo_step.count());

    // --- meteorology -----------------------------------------------------------
    {
        Rng rng(derive_seed(cfg.seed, "synth-meteo"));
        Ar1 t_noise(1.5, step_min, 6 * 60.0);
        Ar1 rh_noise(4.0, step_min, 4 * 60.0);
        Ar1 ws_noise(1.0, step_min, 2 * 60.0);
        double wind_dir = 270.0;
        double rain_left = 0.0;
        for (Timestamp ts = start; ts < end; ts += cfg.meteo_step) {
            const double days = std::chrono::duration<double, std::ratio<86400>>(ts.time_since_epoch()).count();
            const double season = -std::cos(kTwoPi * (std::fmod(days, 365.2425) - 20.0) / 365.2425);
            const double hour = std::fmod(days, 1.0) * 24.0;
            const double diurnal = std::sin(kTwoPi * (hour - 9.0) / 24.0);
            MeteoRecord m{};
            m.ts = ts;
            m.t_ambient = 20.0 + 7.0 * season + 4.0 * diurnal + t_noise.next(rng);
            m.rh = 65.0 - 10.0 * diurnal - 5.0 * season + rh_noise.next(rng);
            // Rain events, mostly in the cool season.
            if (rain_left <= 0.0 && uniform01(rng) < 0.002 * (1.0 - season) * step_min / 10.0) {
                rain_left = 6.0 * 60.0 * uniform01(rng);
            }
            if (rain_left > 0.0) {
                m.precip = -std::log(1.0 - uniform01(rng)) * 0.4;
                rain_left -= step_min;
            }
            m.wind_speed = std::max(0.0, 3.0 + 1.5 * diurnal + ws_noise.next(rng));
            wind_dir = std::fmod(wind_dir + 8.0 * standard_normal(rng) + 360.0, 360.0);
            m.wind_dir = wind_dir;
            out.meteo.push_back(m);
        }
    }

    // --- operations log --------------------------------------------------------
    std::vector<DrainageInterval> phases;
    if (cfg.with_ops || cfg.target_r2) {
        const auto cycle = cfg.flood + cfg.drain + cfg.dry;
        std::vector<OpsRecord> ops;
        for (Timestamp ts = start; ts < end; ts += kModelStep) {
            const auto into = (ts - start) % cycle;
            OpsRecord o{ts, ValveState::closed, 0.0};
            if (into < cfg.flood) {
                o.valve = ValveState::open;
                o.water_level = cfg.max_level_cm * static_cast<double>(into.count()) /
                                static_cast<double>(cfg.flood.count());
            } else if (into < cfg.flood + cfg.drain) {
                const auto k = into - cfg.flood;
                o.water_level = cfg.max_level_cm * (1.0 - static_cast<double>(k.count()) /
                                                              static_cast<double>(cfg.drain.count()));
            }
            ops.push_back(o);
        }
        phases = identify_drainage_phases(ops);
        if (cfg.with_ops) out.ops = std::move(ops);
    }

    // --- signal variance and optional rescaling ----------------------------------
    const auto topsoil_eq = MlrModel::topsoil_equation();
    auto signal_variance = [&](const std::vector<Slot30>& slots) {
        std::vector<double> s;
        for (const auto& x : slots) {
            if (phases.empty() || within_any(phases, x.ts)) s.push_back(predict_mlr(topsoil_eq, x.t, x.rh));
        }
        return variance(s);
    };

    auto slots = half_hour_means(out.meteo, cfg.meteo_step);
    if (cfg.target_r2) {
        const double wanted = *cfg.target_r2 / (1.0 - *cfg.target_r2) * cfg.noise_sigma * cfg.noise_sigma;
        const double have = signal_variance(slots);
        if (!(have > 0.0)) throw InvalidParameterError("synthetic signal has zero variance");
        const double c = std::sqrt(wanted / have);
        std::vector<double> t;
        std::vector<double> rh;
        for (const auto& m : out.meteo) {
            t.push_back(m.t_ambient);
            rh.push_back(m.rh);
        }
        const double t_mean = moments(t).mean;
        const double rh_mean = moments(rh).mean;
        for (auto& m : out.meteo) {
            m.t_ambient = t_mean + c * (m.t_ambient - t_mean);
            m.rh = rh_mean + c * (m.rh - rh_mean);
        }
    }
    // Plausibility bands enforced by the parser.
    for (auto& m : out.meteo) {
        m.t_ambient = std::clamp(m.t_ambient, -19.5, 59.5);
        m.rh = std::clamp(m.rh, 1.0, 99.0);
    }
    slots = half_hour_means(out.meteo, cfg.meteo_step);
    out.signal_variance = signal_variance(slots);
    const double noise_var = cfg.noise_sigma * cfg.noise_sigma;
    out.theoretical_r2 = out.signal_variance + noise_var > 0.0
                             ? out.signal_variance / (out.signal_variance + noise_var)
                             : 1.0;

    // --- probes --------------------------------------------------------------------
    if (cfg.with_probes) {
        const auto profile_eq = MlrModel::profile_equation();
        Rng rng(derive_seed(cfg.seed, "synth-probes"));
        out.probes.reserve(slots.size() * kSensorCount);
        for (const auto& x : slots) {
            const double top = predict_mlr(topsoil_eq, x.t, x.rh) + cfg.noise_sigma * standard_normal(rng);
            const double prof = predict_mlr(profile_eq, x.t, x.rh) + cfg.noise_sigma * standard_normal(rng);
            // The 33 deeper sensors share the remainder; depth offsets cancel per probe.
            const double deep = (kSensorCount * prof - kProbeCount * top) / (kSensorCount - kProbeCount);
            for (int probe = 1; probe <= kProbeCount; ++probe) {
                for (int j = 0; j < kDepthCount; ++j) {
                    const int depth = 5 + 10 * j;
                    const double temp = depth == 5 ? top : deep - 0.01 * (depth - 65);
                    out.probes.push_back({x.ts, probe, depth, std::clamp(temp, -4.9, 59.9)});
                }
            }
        }
    }
    return out;
}

}  // namespace satthermo
