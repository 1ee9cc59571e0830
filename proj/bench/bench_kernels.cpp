// OpenMP kernels against their serial references.
//
//   ./build/bench/bench_kernels --benchmark_filter=Surface

#include <random>
#include <vector>

#include <benchmark/benchmark.h>
#include <omp.h>

#include "rdpc/oracle/grid_search.hpp"
#include "rdpc/oracle/rdpc.hpp"
#include "rdpc/oracle/surface.hpp"
#include "rdpc/quantizer.hpp"
#include "rdpc/quantizer_kernels.hpp"

using namespace rdpc;

namespace {

struct Buffers {
    std::vector<double> y, u, out;

    explicit Buffers(std::size_t n, int levels) : y(n), u(n), out(n) {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        const double h = quant::half_step(levels);
        for (std::size_t i = 0; i < n; ++i) y[i] = d(rng), u[i] = h * d(rng);
    }
};

DiscreteSource noisy_label() {
    DiscreteSource s;
    s.nx = s.nxhat = 2;
    s.px = {0.7, 0.3};
    Matrix l(2, 2);
    l(0, 0) = 0.9, l(0, 1) = 0.1, l(1, 0) = 0.2, l(1, 1) = 0.8;
    s.label_channels = {l};
    s.delta = Matrix::hamming(2, 2);
    return s;
}

template <bool Parallel>
void BM_DitherRoundtrip(benchmark::State& state) {
    Buffers b(static_cast<std::size_t>(state.range(0)), 4);
    for (auto _ : state) {
        if constexpr (Parallel) quant::dither_roundtrip(b.y, b.u, 4, b.out);
        else quant::dither_roundtrip_serial(b.y, b.u, 4, b.out);
        benchmark::DoNotOptimize(b.out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_SoftQuantize(benchmark::State& state) {
    Buffers b(static_cast<std::size_t>(state.range(0)), 4);
    for (auto _ : state) {
        if constexpr (Parallel) quant::soft_quantize_batch(b.y, 4, 0.5, b.out);
        else quant::soft_quantize_batch_serial(b.y, 4, 0.5, b.out);
        benchmark::DoNotOptimize(b.out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_MultiStart(benchmark::State& state) {
    const auto s = noisy_label();
    oracle::SolverOptions o;
    o.starts = static_cast<int>(state.range(0));
    o.parallel = Parallel;
    for (auto _ : state) benchmark::DoNotOptimize(oracle::solve_rdc(s, 0.1, {0.7}, o).rate);
}

template <bool Parallel>
void BM_GridSearch(benchmark::State& state) {
    const auto s = noisy_label();
    const ConstraintPoint p{0.1, kInf, {0.7}};
    for (auto _ : state) {
        const auto r = Parallel ? oracle::grid_search_rdpc(s, p, 0.005) : oracle::grid_search_rdpc_serial(s, p, 0.005);
        benchmark::DoNotOptimize(r.rate);
    }
}

template <bool Parallel>
void BM_Surface(benchmark::State& state) {
    const auto s = noisy_label();
    const std::vector<double> d = {0.02, 0.1, 0.18, 0.26}, c = {0.56, 0.67, 0.78, 0.89};
    oracle::SolverOptions o;
    o.starts = 8;
    for (auto _ : state) {
        const auto surf = Parallel ? oracle::compute_surface(s, d, c, oracle::SecondAxis::kClassification, o)
                                   : oracle::compute_surface_serial(s, d, c, oracle::SecondAxis::kClassification, o);
        benchmark::DoNotOptimize(surf.cells.data());
    }
}

}  // namespace

BENCHMARK(BM_DitherRoundtrip<true>)->Name("DitherRoundtrip/omp")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_DitherRoundtrip<false>)->Name("DitherRoundtrip/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_SoftQuantize<true>)->Name("SoftQuantize/omp")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_SoftQuantize<false>)->Name("SoftQuantize/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_MultiStart<true>)->Name("MultiStart/omp")->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MultiStart<false>)->Name("MultiStart/serial")->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridSearch<true>)->Name("GridSearch/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridSearch<false>)->Name("GridSearch/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Surface<true>)->Name("Surface4x4/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Surface<false>)->Name("Surface4x4/serial")->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    benchmark::AddCustomContext("omp_max_threads", std::to_string(omp_get_max_threads()));
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
}
