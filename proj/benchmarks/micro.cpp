#include "pantr/bench/mpc.hpp"
#include "pantr/trsub.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace pantr;
using namespace pantr::bench;

namespace {

mat random_spd(index_t n, std::mt19937_64& rng) {
  std::normal_distribution<real_t> nd;
  mat A(n, n);
  for (auto& e : A.reshaped()) e = nd(rng);
  return A * A.transpose() / static_cast<real_t>(n) + mat::Identity(n, n);
}

void BM_SteihaugCg(benchmark::State& state) {
  const auto n = static_cast<index_t>(state.range(0));
  std::mt19937_64 rng(1);
  const mat H = random_spd(n, rng);
  TrProblem tp;
  tp.hvp_reduced = [&H](crvec v) { return vec(H * v); };
  tp.grad_reduced = vec::Ones(n);
  tp.radius = 1e3;
  tp.cg_tol = 1e-8;
  for (auto _ : state) benchmark::DoNotOptimize(steihaug_cg(tp));
}
BENCHMARK(BM_SteihaugCg)->Arg(16)->Arg(64)->Arg(256);

void BM_ShootAdjoint(benchmark::State& state) {
  OcpSpec spec;
  spec.horizon = state.range(0);
  const vec x0 = default_initial_state();
  const vec u = hover_input(spec).replicate(spec.horizon, 1);
  for (auto _ : state) benchmark::DoNotOptimize(shoot_adjoint(spec, x0, u));
}
BENCHMARK(BM_ShootAdjoint)->Arg(12)->Arg(30)->Arg(60);

void BM_QuadcopterOcp(benchmark::State& state) {
  OcpSpec spec;
  spec.horizon = state.range(0);
  const vec x0 = default_initial_state();
  const ConstrainedNlp nlp = ocp_as_nlp(spec, x0);
  MpcOptions opt;
  opt.horizon = spec.horizon;
  const AlmParams params = mpc_alm_params(opt);
  const vec u0 = hover_input(spec).replicate(spec.horizon, 1);
  for (auto _ : state) benchmark::DoNotOptimize(alm_solve(nlp, u0, params));
}
BENCHMARK(BM_QuadcopterOcp)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
