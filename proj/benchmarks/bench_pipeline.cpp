#include <random>

#include <benchmark/benchmark.h>

#include "semgeo/baselines.hpp"
#include "semgeo/metrics.hpp"
#include "semgeo/phate.hpp"

using namespace semgeo;

namespace {

AlignedData random_data(std::size_t n, std::size_t d) {
    std::mt19937_64 rng(n * 131 + d);
    std::normal_distribution<double> g;
    Dataset ds;
    ds.id = "bench";
    for (std::size_t i = 0; i < n; ++i) {
        LexicalItem it;
        it.label = "w" + std::to_string(i);
        it.category = "c" + std::to_string(i % 8);
        it.language = "zxx";
        if (i % 8 == 0) it.sequence_index = i / 8;
        ds.items.push_back(it);
        ds.declared_domains.insert(it.category);
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    return align_matrix(ds, x);
}

void BM_Phate(benchmark::State& state) {
    const auto data = random_data(static_cast<std::size_t>(state.range(0)), 64);
    for (auto _ : state) benchmark::DoNotOptimize(phate_project(data, PhateParams{}).coords.data());
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Phate)->Arg(100)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_Pca(benchmark::State& state) {
    const auto data = random_data(static_cast<std::size_t>(state.range(0)), 384);
    for (auto _ : state) benchmark::DoNotOptimize(pca_project(data, 2).coords.data());
}
BENCHMARK(BM_Pca)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Spectral(benchmark::State& state) {
    const auto data = random_data(static_cast<std::size_t>(state.range(0)), 64);
    for (auto _ : state) benchmark::DoNotOptimize(spectral_project(data, 10, 2).coords.data());
}
BENCHMARK(BM_Spectral)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_FullReport(benchmark::State& state) {
    const auto data = random_data(static_cast<std::size_t>(state.range(0)), 32);
    const Projection p = pca_project(data, 2);
    for (auto _ : state) benchmark::DoNotOptimize(full_report(data, p).silhouette);
}
BENCHMARK(BM_FullReport)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_VoidAnalysis(benchmark::State& state) {
    const auto data = random_data(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(void_analysis(data.matrix).void_count);
}
BENCHMARK(BM_VoidAnalysis)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
