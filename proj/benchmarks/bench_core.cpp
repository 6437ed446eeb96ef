#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "mpp/engine.hpp"
#include "mpp/fixtures.hpp"
#include "mpp/precision.hpp"
#include "mpp/simulate.hpp"

using namespace mpp;

namespace {

const Point3 kShoulder{0.0, 1.4, 0.0};

std::vector<HandSample> wander(std::size_t n) {
    std::vector<HandSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / 30.0;
        out.push_back({t, kShoulder + Point3{0.2 * std::sin(0.7 * t), 0.1 * std::sin(1.3 * t), 0.4 + 0.15 * std::sin(0.5 * t)},
                       kShoulder});
    }
    return out;
}

void BM_EngineStep(benchmark::State& state, const char* code) {
    const auto samples = wander(4096);
    Engine engine(fixtures::technique(code));
    std::size_t i = 0;
    double t0 = 0.0;
    for (auto _ : state) {
        HandSample s = samples[i % samples.size()];
        s.t += t0;
        benchmark::DoNotOptimize(engine.step(s));
        if (++i % samples.size() == 0) t0 += samples.back().t + 1.0;
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK_CAPTURE(BM_EngineStep, VA, "VA");
BENCHMARK_CAPTURE(BM_EngineStep, VR, "VR");
BENCHMARK_CAPTURE(BM_EngineStep, HA, "HA");
BENCHMARK_CAPTURE(BM_EngineStep, HR, "HR");

void BM_PchipEval(benchmark::State& state) {
    const auto scheme = PrecisionScheme::nonlinear({{0.0, 1.0}, {0.2, 1.5}, {0.5, 2.0}, {0.8, 9.0}, {1.0, 16.0}});
    double h = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(scheme.eval(h));
        h += 0.0001;
        if (h > 1.0) h = 0.0;
    }
}
BENCHMARK(BM_PchipEval);

void BM_ClutchDetect(benchmark::State& state) {
    const auto samples = wander(64);
    ClutchParams params;
    params.window_n = static_cast<int>(state.range(0));
    const std::span<const HandSample> window(samples.data(), static_cast<std::size_t>(params.window_n) + 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(detect_clutch(window, params, Adjustment::Horizontal, false));
    }
}
BENCHMARK(BM_ClutchDetect)->Arg(5)->Arg(15)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
