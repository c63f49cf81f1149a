#include <trivine/io.hpp>
#include <trivine/simulation.hpp>

#include <benchmark/benchmark.h>

using namespace trivine;

namespace {

const std::vector<StudyData>& sample_data() {
    static const std::vector<StudyData> data = [] {
        std::mt19937_64 rng = replicate_stream(42, 0);
        return simulate_dataset(preset_truth("normal"), Scenario{}, 30, rng);
    }();
    return data;
}

void BM_DatasetLogLik(benchmark::State& state) {
    const ModelSpec m = preset_truth("normal");
    const QuadratureRule q = gauss_legendre_01(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(dataset_log_lik(sample_data(), m, q));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DatasetLogLik)->Arg(7)->Arg(15)->Arg(25)->Arg(35)->Unit(benchmark::kMillisecond);

void BM_LikelihoodGridOnly(benchmark::State& state) {
    const ModelSpec m = preset_truth("beta");
    const QuadratureRule q = gauss_legendre_01(15);
    for (auto _ : state) {
        LikelihoodGrid g(m, q);
        benchmark::DoNotOptimize(g.nodes());
    }
}
BENCHMARK(BM_LikelihoodGridOnly)->Unit(benchmark::kMillisecond);

void BM_Fit(benchmark::State& state) {
    const ModelTemplate t = template_of(preset_truth("normal"));
    FitConfig cfg;
    cfg.n_q = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit(sample_data(), t, cfg).log_lik);
    }
}
BENCHMARK(BM_Fit)->Arg(9)->Arg(15)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_Hinv(benchmark::State& state) {
    const BivariateCopula c{parse_family("cln90"), 2.0};
    double u = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(hinv(c, 0.37, u));
        u = u > 0.9 ? 0.1 : u + 0.01;
    }
}
BENCHMARK(BM_Hinv);

}  // namespace

BENCHMARK_MAIN();
