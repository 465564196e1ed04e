// Serial reference loops vs the production kernels (serial and OpenMP) on a
// DGP panel, plus one alternating half-step in each execution mode.

#include <benchmark/benchmark.h>

#include <map>

#include "bife/estimator.hpp"
#include "bife/likelihood.hpp"
#include "bife/reference.hpp"
#include "bife/simulation.hpp"

using namespace bife;

namespace {

struct Problem {
  SimulatedPanel sim;
  LinkFamily link = LinkFamily::probit();
};

const Problem& problem(int n) {
  static std::map<int, Problem> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    DgpSpec spec;
    spec.n_units = n;
    spec.n_periods = n;
    spec.seed = 11;
    it = cache.emplace(n, Problem{gen_dgp(spec)}).first;
  }
  return it->second;
}

LikelihoodOptions options(Exec exec) {
  LikelihoodOptions opt;
  opt.exec = exec;
  return opt;
}

void BM_LoglikReference(benchmark::State& state) {
  const Problem& p = problem(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::loglik(p.sim.data.y(), p.sim.data, p.sim.truth, p.link));
}

void BM_Loglik(benchmark::State& state, Exec exec) {
  const Problem& p = problem(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(loglik(p.sim.data, p.sim.truth, p.link, options(exec)));
}

void BM_HessianThetaReference(benchmark::State& state) {
  const Problem& p = problem(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::hessian_theta(p.sim.data.y(), p.sim.data, p.sim.truth, p.link));
}

void BM_HessianTheta(benchmark::State& state, Exec exec) {
  const Problem& p = problem(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hessian_theta(p.sim.data, p.sim.truth, p.link, options(exec)));
}

void BM_UnitHalfStep(benchmark::State& state, Exec exec) {
  const Problem& p = problem(static_cast<int>(state.range(0)));
  FitConfig cfg;
  cfg.d_f = p.sim.truth.d_f();
  for (auto _ : state) {
    ParameterSet params = p.sim.truth;
    benchmark::DoNotOptimize(unit_half_step(p.sim.data, params, p.link, cfg, exec));
  }
}

void BM_TimeHalfStep(benchmark::State& state, Exec exec) {
  const Problem& p = problem(static_cast<int>(state.range(0)));
  FitConfig cfg;
  cfg.d_f = p.sim.truth.d_f();
  for (auto _ : state) {
    ParameterSet params = p.sim.truth;
    benchmark::DoNotOptimize(time_half_step(p.sim.data, params, p.link, cfg, exec));
  }
}

}  // namespace

BENCHMARK(BM_LoglikReference)->Arg(100)->Arg(400);
BENCHMARK_CAPTURE(BM_Loglik, serial, Exec::Serial)->Arg(100)->Arg(400);
BENCHMARK_CAPTURE(BM_Loglik, parallel, Exec::Parallel)->Arg(100)->Arg(400)->UseRealTime();
BENCHMARK(BM_HessianThetaReference)->Arg(100)->Arg(400);
BENCHMARK_CAPTURE(BM_HessianTheta, serial, Exec::Serial)->Arg(100)->Arg(400);
BENCHMARK_CAPTURE(BM_HessianTheta, parallel, Exec::Parallel)->Arg(100)->Arg(400)->UseRealTime();
BENCHMARK_CAPTURE(BM_UnitHalfStep, serial, Exec::Serial)->Arg(100)->Arg(200);
BENCHMARK_CAPTURE(BM_UnitHalfStep, parallel, Exec::Parallel)->Arg(100)->Arg(200)->UseRealTime();
BENCHMARK_CAPTURE(BM_TimeHalfStep, serial, Exec::Serial)->Arg(100)->Arg(200);
BENCHMARK_CAPTURE(BM_TimeHalfStep, parallel, Exec::Parallel)->Arg(100)->Arg(200)->UseRealTime();

BENCHMARK_MAIN();
