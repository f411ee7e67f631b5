#include <benchmark/benchmark.h>

#include <random>

#include "polarkit/align.hpp"
#include "polarkit/metrics.hpp"
#include "polarkit/mosaic.hpp"
#include "polarkit/optics.hpp"
#include "polarkit/separate.hpp"
#include "polarkit/stokes.hpp"

namespace {

using namespace polarkit;

Image noise(int size, int channels, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    Image img(size, size, channels);
    for (double& v : img.data()) v = u(rng);
    return img;
}

// Vertical-stripe transmission and a smooth ramp reflection.
Image stripes(int size) {
    Image img(size, size, 1);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) img.at(x, y) = 0.2 + 0.6 * ((x / 3 + y / 5) % 2);
    }
    return img;
}

Synthesis scene(int size) {
    SceneSpec spec;
    spec.transmission = noise(size, 3, 1);
    spec.reflection = noise(size, 3, 2);
    spec.interface = {1.0, 1.5, brewster_angle(1.0, 1.5)};
    spec.phi_perp = 0.3;
    return synthesize(spec);
}

void BM_ComputeStokes(benchmark::State& state) {
    const PolarFrame frame = scene(int(state.range(0))).frame;
    for (auto _ : state) benchmark::DoNotOptimize(compute_stokes(frame));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_ComputeStokes)->Arg(256)->Arg(512);

void BM_DecodeFrame(benchmark::State& state) {
    const MosaicLayout layout = default_layout();
    const RawMosaic raw = render_frame(scene(int(state.range(0))).frame, layout, 0).mosaic;
    for (auto _ : state) benchmark::DoNotOptimize(decode_frame(raw, layout));
    state.SetItemsProcessed(state.iterations() * raw.width * raw.height);
}
BENCHMARK(BM_DecodeFrame)->Arg(256)->Arg(512);

void BM_PhaseLoss(benchmark::State& state) {
    const Image a = noise(int(state.range(0)), 3, 3);
    const Image b = noise(int(state.range(0)), 3, 4);
    for (auto _ : state) benchmark::DoNotOptimize(phase_loss(a, b));
}
BENCHMARK(BM_PhaseLoss)->Arg(128)->Arg(256);

void BM_Ssim(benchmark::State& state) {
    const Image a = noise(int(state.range(0)), 3, 5);
    const Image b = noise(int(state.range(0)), 3, 6);
    for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}
BENCHMARK(BM_Ssim)->Arg(128)->Arg(256);

void BM_PhaseCorrelate(benchmark::State& state) {
    const Image a = noise(int(state.range(0)), 1, 7);
    const Image b = warp(a, AffineTransform::translation(5, -3));
    for (auto _ : state) benchmark::DoNotOptimize(phase_correlate(a, b));
}
BENCHMARK(BM_PhaseCorrelate)->Arg(128)->Arg(256);

void BM_EdgeSearch(benchmark::State& state) {
    const int size = int(state.range(0));
    const Image t = stripes(size);
    Image r(size, size, 1);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) r.at(x, y) = 0.1 + 0.8 * double(x + y) / double(2 * size);
    }
    const Image m = mix(t, r, 0.7, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(search_alpha_edge(m, t));
}
BENCHMARK(BM_EdgeSearch)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
