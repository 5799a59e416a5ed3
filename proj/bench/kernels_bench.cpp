// Serial reference vs OpenMP kernels on a synthetic clustering workload.

#include <benchmark/benchmark.h>

#include <random>

#include "pbc/clustering.hpp"
#include "pbc/datagen.hpp"
#include "pbc/kernels.hpp"

namespace {

struct Workload {
    pbc::Dataset data;
    std::vector<pbc::TrainedModel> models;
};

Workload make_workload(std::size_t n, pbc::RegressorKind kind) {
    pbc::SyntheticConfig syn;
    syn.n_points = n;
    syn.seed = 1;
    Workload w{pbc::generate_synthetic(syn).dataset, {}};
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    pbc::RegressorSpec spec;
    spec.kind = kind;
    spec.hidden_sizes = {32};
    for (int k = 0; k < 5; ++k) {
        std::vector<double> p(pbc::parameter_count(spec, 3));
        for (double& v : p) v = g(rng);
        w.models.emplace_back(spec, 3, p);
    }
    return w;
}

template <bool Parallel>
void BM_CostMatrix(benchmark::State& state) {
    const auto kind = state.range(1) ? pbc::RegressorKind::Mlp : pbc::RegressorKind::RidgeLinear;
    const auto w = make_workload(static_cast<std::size_t>(state.range(0)), kind);
    std::vector<double> out(w.data.size() * w.models.size());
    for (auto _ : state) {
        if constexpr (Parallel) {
            pbc::kernels::parallel::cost_matrix(w.data, w.models, pbc::LossKind::SquaredError, out);
        } else {
            pbc::kernels::serial::cost_matrix(w.data, w.models, pbc::LossKind::SquaredError, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(out.size()));
}

template <bool Parallel>
void BM_NearestCentroid(benchmark::State& state) {
    const auto w = make_workload(static_cast<std::size_t>(state.range(0)), pbc::RegressorKind::RidgeLinear);
    std::vector<double> centroids(8 * 3, 0.5);
    for (std::size_t i = 0; i < centroids.size(); ++i) centroids[i] = static_cast<double>(i % 7) - 3.0;
    std::vector<std::size_t> labels(w.data.size());
    std::vector<double> dist(w.data.size());
    for (auto _ : state) {
        if constexpr (Parallel) {
            pbc::kernels::parallel::nearest_centroid(w.data.feature_data(), 3, centroids, labels, dist);
        } else {
            pbc::kernels::serial::nearest_centroid(w.data.feature_data(), 3, centroids, labels, dist);
        }
        benchmark::DoNotOptimize(dist.data());
    }
}

void BM_RunPbc(benchmark::State& state) {
    pbc::SyntheticConfig syn;
    syn.n_points = static_cast<std::size_t>(state.range(0));
    syn.seed = 3;
    const auto data = pbc::generate_synthetic(syn);
    pbc::PbcConfig config;
    config.k_hat = 3;
    config.seed = 3;
    for (auto _ : state) benchmark::DoNotOptimize(pbc::run_pbc(data.dataset, config).iterations);
}

}  // namespace

BENCHMARK(BM_CostMatrix<false>)->Args({5000, 0})->Args({50000, 0})->Args({5000, 1});
BENCHMARK(BM_CostMatrix<true>)->Args({5000, 0})->Args({50000, 0})->Args({5000, 1});
BENCHMARK(BM_NearestCentroid<false>)->Arg(5000)->Arg(100000);
BENCHMARK(BM_NearestCentroid<true>)->Arg(5000)->Arg(100000);
BENCHMARK(BM_RunPbc)->Arg(5000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
