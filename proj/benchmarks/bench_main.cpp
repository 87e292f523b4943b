#include <benchmark/benchmark.h>

#include "asymdag/simnet.hpp"
#include "asymdag/trace_check.hpp"

using namespace asymdag;

namespace {

void BM_CheckB3_Counterexample30(benchmark::State& state) {
    auto fps = counterexample30().fps;
    for (auto _ : state) {
        bool ok = check_b3(fps);
        benchmark::DoNotOptimize(ok);
    }
}
BENCHMARK(BM_CheckB3_Counterexample30);

void BM_CheckB3_Threshold12f3(benchmark::State& state) {
    auto fps = FailProneSystem::threshold(12, 3);
    for (auto _ : state) {
        bool ok = check_b3(fps);
        benchmark::DoNotOptimize(ok);
    }
}
BENCHMARK(BM_CheckB3_Threshold12f3);

void BM_CanonicalAndVerify(benchmark::State& state) {
    auto fps = FailProneSystem::threshold(static_cast<uint32_t>(state.range(0)), 2);
    for (auto _ : state) {
        auto qs = canonical_quorums(fps);
        auto report = verify_quorum_system(qs, fps);
        benchmark::DoNotOptimize(report.consistency);
    }
}
BENCHMARK(BM_CanonicalAndVerify)->Arg(7)->Arg(10);

void BM_KernelEnumeration(benchmark::State& state) {
    auto trust = threshold_trust(static_cast<uint32_t>(state.range(0)), 2);
    for (auto _ : state) {
        auto ks = kernels(trust.qs, 0);
        benchmark::DoNotOptimize(ks.size());
    }
}
BENCHMARK(BM_KernelEnumeration)->Arg(7)->Arg(10);

void BM_GatherCounterexampleNaive(benchmark::State& state) {
    auto scenario = Scenario::counterexample(GatherVariant::Naive, 3);
    for (auto _ : state) {
        auto result = run(scenario, TraceLevel::Summary);
        benchmark::DoNotOptimize(result.steps);
    }
}
BENCHMARK(BM_GatherCounterexampleNaive)->Unit(benchmark::kMillisecond);

void BM_GatherCounterexampleAsymmetric(benchmark::State& state) {
    auto scenario = Scenario::counterexample(GatherVariant::Asymmetric, 3);
    for (auto _ : state) {
        auto result = run(scenario, TraceLevel::Summary);
        benchmark::DoNotOptimize(result.steps);
    }
}
BENCHMARK(BM_GatherCounterexampleAsymmetric)->Unit(benchmark::kMillisecond);

void BM_DagRiderThreshold4(benchmark::State& state) {
    Scenario s;
    s.protocol = Scenario::Protocol::DagRider;
    s.trust = "threshold:4:1";
    s.schedule = Scenario::Schedule::Random;
    s.workload = static_cast<uint32_t>(state.range(0));
    s.seed = 12;
    for (auto _ : state) {
        auto result = run(s, TraceLevel::Summary);
        benchmark::DoNotOptimize(result.steps);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 3);
}
BENCHMARK(BM_DagRiderThreshold4)->Arg(20)->Arg(120)->Unit(benchmark::kMillisecond);

void BM_DagRiderCounterexample30Wave(benchmark::State& state) {
    Scenario s;
    s.protocol = Scenario::Protocol::DagRider;
    s.trust = "counterexample30";
    s.schedule = Scenario::Schedule::Random;
    s.workload = 1;
    s.seed = 12;
    s.max_steps = 4000000;
    for (auto _ : state) {
        auto result = run(s, TraceLevel::Summary);
        benchmark::DoNotOptimize(result.steps);
    }
}
BENCHMARK(BM_DagRiderCounterexample30Wave)->Unit(benchmark::kMillisecond);

void BM_ArbBroadcast30(benchmark::State& state) {
    Scenario s;
    s.protocol = Scenario::Protocol::Arb;
    s.trust = "counterexample30";
    s.schedule = Scenario::Schedule::Random;
    s.seed = 7;
    for (auto _ : state) {
        auto result = run(s, TraceLevel::Summary);
        benchmark::DoNotOptimize(result.steps);
    }
    state.SetItemsProcessed(state.iterations() * 30);
}
BENCHMARK(BM_ArbBroadcast30)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
