#include <benchmark/benchmark.h>

#include "kmsperturb/hastings.hpp"
#include "kmsperturb/kernel.hpp"
#include "kmsperturb/random.hpp"

using namespace kmsperturb;

namespace {

struct Fixture {
  gns::GibbsSystem sys;
  linalg::HermMatrix v;
  linalg::CMatrix a;
};

Fixture make(linalg::Index d) {
  Rng rng(17);
  const auto h = random_hermitian(d, 1.0, rng);
  const auto v = random_hermitian(d, 1.5, rng);
  return {gns::build_gibbs(h, 1.0), v, random_matrix(d, rng)};
}

void BM_PhiSpectral(benchmark::State& state) {
  const Fixture f = make(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hastings::phi_spectral(f.sys, f.v, 0.5));
}
BENCHMARK(BM_PhiSpectral)->Arg(4)->Arg(16)->Arg(64);

void BM_PhiQuadrature(benchmark::State& state) {
  const Fixture f = make(state.range(0));
  const auto spec = kernel::QuadratureSpec::for_tolerance(1e-8);
  for (auto _ : state) benchmark::DoNotOptimize(hastings::phi_quadrature(f.sys, f.v, 0.5, spec));
}
BENCHMARK(BM_PhiQuadrature)->Arg(4)->Arg(16);

void BM_ThetaOde(benchmark::State& state) {
  const Fixture f = make(state.range(0));
  hastings::FlowSpec flow;
  for (auto _ : state) benchmark::DoNotOptimize(hastings::theta_ode(f.sys, f.v, 1.0, flow));
}
BENCHMARK(BM_ThetaOde)->Arg(4)->Arg(16)->Arg(32);

void BM_MainTheorem(benchmark::State& state) {
  const Fixture f = make(state.range(0));
  hastings::FlowSpec flow;
  for (auto _ : state) {
    const auto got = hastings::hastings_state(f.sys, f.v, f.a, flow);
    const auto want = hastings::gibbs_expectation(f.sys, f.v, f.a);
    benchmark::DoNotOptimize(std::abs(got - want));
  }
}
BENCHMARK(BM_MainTheorem)->Arg(4)->Arg(16);

void BM_FourierTransform(benchmark::State& state) {
  const auto spec = kernel::QuadratureSpec::for_tolerance(1e-9, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernel::fourier_transform(3.0, spec));
}
BENCHMARK(BM_FourierTransform)->Arg(16)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
