#include <numbers>

#include <benchmark/benchmark.h>

#include "strainsim/crystal_frames.hpp"
#include "strainsim/photon_streams.hpp"
#include "strainsim/photonics.hpp"
#include "strainsim/snv_hamiltonian.hpp"
#include "strainsim/spectroscopy.hpp"

using namespace strainsim;

static void BM_Diagonalize(benchmark::State& state) {
  const snv::SnVParams p;
  const auto eps = crystal::StrainTensor::from_voigt({1e-5, -2e-5, 3e-5, 1e-6, 0, 2e-6}, crystal::Frame::snv_axial);
  const auto h = snv::build_manifold_hamiltonian(p, snv::Manifold::ground, eps, Eigen::Vector3d(0.1, 0, 0.2));
  for (auto _ : state) benchmark::DoNotOptimize(snv::diagonalize(h));
}
BENCHMARK(BM_Diagonalize);

static void BM_SidebandFit(benchmark::State& state) {
  const auto grid = spectroscopy::linspace(-6.0, 6.0, static_cast<std::size_t>(state.range(0)));
  const auto spec = spectroscopy::synth_sidebands(0.0, 0.12, 1.3, 1.0, std::nullopt, grid);
  for (auto _ : state) benchmark::DoNotOptimize(spectroscopy::fit_sideband_comb(spec, 1.0));
}
BENCHMARK(BM_SidebandFit)->Arg(801)->Arg(2401);

static void BM_SwitchTransfer(benchmark::State& state) {
  auto net = photonics::four_by_one_switch({0.45, 0.55, 0.48, 0.52}, {0.53, 0.47, 0.55, 0.46});
  double t = 0.0;
  for (auto _ : state) {
    net.phases["f.theta"] = t;
    t += 1e-3;
    benchmark::DoNotOptimize(net.transfer());
  }
}
BENCHMARK(BM_SwitchTransfer);

static void BM_G2Histogram(benchmark::State& state) {
  auto net = photonics::four_by_one_switch();
  net.phases["f.theta"] = std::numbers::pi / 2;
  const auto rec = photonics::simulate_photon_streams({{"ch1", 5.0, 4e5, 1e5}}, net, 0.2, 7);
  const auto a = net.output_index("A");
  const auto b = net.output_index("B");
  for (auto _ : state) benchmark::DoNotOptimize(photonics::g2_histogram(rec[a], rec[b]));
}
BENCHMARK(BM_G2Histogram);
BENCHMARK_MAIN();
