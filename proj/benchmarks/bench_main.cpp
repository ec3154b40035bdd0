#include "matprod/analysis.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using namespace matprod;

const MatrixEnsemble& mix_ensemble() {
    static const MatrixEnsemble e({Matrix2{2, 2, 0, 1}, Matrix2{1, 1, 0, 2}}, {0.5, 0.5});
    return e;
}

const MatrixEnsemble& positive_ensemble() {
    static const MatrixEnsemble e({Matrix2{1, 1, 1, 2}, Matrix2{2, 1, 1, 1}}, {0.5, 0.5});
    return e;
}

void BM_Step(benchmark::State& state) {
    const Matrix2 m{1, 1, 1, 2};
    ScaledProduct product = ScaledProduct::identity();
    for (auto _ : state) {
        product = step(product, m);
        benchmark::DoNotOptimize(product.log_scale);
    }
}
BENCHMARK(BM_Step);

void BM_SingularValues(benchmark::State& state) {
    const Matrix2 m{0.31, 0.22, 0.17, 0.30};
    for (auto _ : state) {
        const SingularPair sv = singular_values(m);
        benchmark::DoNotOptimize(sv.sigma1);
    }
}
BENCHMARK(BM_SingularValues);

void BM_Run10k(benchmark::State& state) {
    for (auto _ : state) {
        const auto records =
            run(positive_ensemble(), SymbolSource::iid(1), std::nullopt, 10'000, 10);
        benchmark::DoNotOptimize(records.size());
    }
}
BENCHMARK(BM_Run10k)->Unit(benchmark::kMillisecond);

void BM_Classify(benchmark::State& state) {
    for (auto _ : state) {
        const RegimeReport report = classify(mix_ensemble());
        benchmark::DoNotOptimize(report.regime);
    }
}
BENCHMARK(BM_Classify);

void BM_ClassifyRate(benchmark::State& state) {
    std::vector<RatePoint> series;
    series.reserve(10'000);
    for (std::int64_t n = 1; n <= 10'000; ++n) {
        series.push_back({n, 1.0 / static_cast<double>(n)});
    }
    for (auto _ : state) {
        const RateVerdict verdict = classify_rate(RateQuantity::ColumnDistance, series);
        benchmark::DoNotOptimize(verdict.classification);
    }
}
BENCHMARK(BM_ClassifyRate);

void BM_EstimateLyapunov32(benchmark::State& state) {
    const auto trajectories =
        run_trajectories(mix_ensemble(), 1, std::nullopt, 10'000, 10, 32, 0);
    for (auto _ : state) {
        const LyapunovEstimate est = estimate_lyapunov(trajectories);
        benchmark::DoNotOptimize(est.lambda1_hat);
    }
}
BENCHMARK(BM_EstimateLyapunov32);

}  // namespace

BENCHMARK_MAIN();
