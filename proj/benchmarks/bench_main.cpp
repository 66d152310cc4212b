#include "satthermo/pipeline.hpp"
#include "satthermo/random.hpp"

#include <benchmark/benchmark.h>

#include <sstream>

using namespace satthermo;

namespace {

Timestamp day0() { return std::chrono::sys_days{std::chrono::year{2015} / 1 / 1}; }

Dataset noisy_eq2(std::size_t n) {
    Rng rng(1);
    Dataset ds(TargetKind::topsoil, default_features());
    for (std::size_t i = 0; i < n; ++i) {
        std::array<double, 2> x{20 + 6 * standard_normal(rng), 60 + 15 * standard_normal(rng)};
        ds.add_row(day0() + kModelStep * static_cast<long>(i), x, 0.88 * x[0] + 0.19 * x[1] - 8.05 + 1.7 * standard_normal(rng));
    }
    return ds;
}

void BM_FitRf(benchmark::State& state) {
    const auto ds = noisy_eq2(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(fit_rf(ds, 42, {}, 1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitRf)->Arg(3000)->Arg(30000)->Unit(benchmark::kMillisecond);

void BM_FitNn100Epochs(benchmark::State& state) {
    const auto ds = noisy_eq2(static_cast<std::size_t>(state.range(0)));
    NnHyperparams hp;
    hp.epochs = 100;
    hp.patience = 1000;
    for (auto _ : state) benchmark::DoNotOptimize(fit_nn(ds, 42, hp));
}
BENCHMARK(BM_FitNn100Epochs)->Arg(3000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_FitMlr(benchmark::State& state) {
    const auto ds = noisy_eq2(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(fit_mlr(ds));
}
BENCHMARK(BM_FitMlr)->Arg(30000)->Unit(benchmark::kMicrosecond);

void BM_Resample10To30(benchmark::State& state) {
    Rng rng(2);
    std::vector<std::optional<double>> v(static_cast<std::size_t>(state.range(0)));
    for (auto& x : v) x = standard_normal(rng);
    const RegularSeries s(day0(), Minutes{10}, std::move(v));
    for (auto _ : state) benchmark::DoNotOptimize(resample_mean(s, kModelStep));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Resample10To30)->Arg(525600)->Unit(benchmark::kMillisecond);

void BM_PredictDecade(benchmark::State& state) {
    SynthConfig cfg;
    cfg.start = day0();
    cfg.days = 3652;
    cfg.meteo_step = kModelStep;
    cfg.with_probes = false;
    cfg.with_ops = false;
    const auto meteo = synthesize(cfg).meteo;
    const TrainedModel top(MlrModel::topsoil_equation(), {});
    const TrainedModel prof(MlrModel::profile_equation(), {});
    for (auto _ : state) benchmark::DoNotOptimize(predict_from_meteo(meteo, top, prof, {}, true));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(meteo.size()));
}
BENCHMARK(BM_PredictDecade)->Unit(benchmark::kMillisecond);

void BM_ParseMeteo(benchmark::State& state) {
    SynthConfig cfg;
    cfg.days = 365;
    cfg.with_probes = false;
    cfg.with_ops = false;
    std::ostringstream out;
    write_meteo_csv(out, synthesize(cfg).meteo);
    const auto text = out.str();
    for (auto _ : state) {
        std::istringstream in(text);
        benchmark::DoNotOptimize(parse_meteo_csv(in, "bench"));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<long>(text.size()));
}
BENCHMARK(BM_ParseMeteo)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
