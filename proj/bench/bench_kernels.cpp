// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <cmath>

#include "photonlink/analysis.hpp"
#include "photonlink/ccr_response.hpp"
#include "photonlink/channel_sim.hpp"
#include "photonlink/scenario.hpp"

using namespace photonlink;

namespace
{

const double kNineDeg = 9.0 * std::acos(-1.0) / 180.0;

const Scenario& scenario()
{
    static const Scenario sc = baseline_scenario();
    return sc;
}

const TagStream& stream()
{
    static const TagStream s = simulate_pass(scenario(), 60.0, 1);
    return s;
}

template <bool Parallel>
void BM_ImpulseResponse(benchmark::State& state)
{
    const auto disk = disk_geometry(0.6, 0.2, 0.026);
    const GaussianPulse pulse(100.0);
    for (auto _ : state)
    {
        auto p = Parallel ? array_impulse_response(disk, kNineDeg, 0.3, pulse, 1.0)
                          : serial::array_impulse_response(disk, kNineDeg, 0.3, pulse, 1.0);
        benchmark::DoNotOptimize(p.densities.data());
    }
    state.counters["ccrs"] = static_cast<double>(disk.positions.size());
}

template <bool Parallel>
void BM_SimulatePass(benchmark::State& state)
{
    const double duration = static_cast<double>(state.range(0));
    std::int64_t events = 0;
    for (auto _ : state)
    {
        auto s = Parallel ? simulate_pass(scenario(), duration, 7) : serial::simulate_pass(scenario(), duration, 7);
        events += static_cast<std::int64_t>(s.events.size());
        benchmark::DoNotOptimize(s.events.data());
    }
    state.SetItemsProcessed(events);
}

template <bool Parallel>
void BM_Residuals(benchmark::State& state)
{
    const ExpectedArrivals refs(scenario().schedule, scenario().range);
    for (auto _ : state)
    {
        auto r = Parallel ? residuals(stream().events, refs, 0) : serial::residuals(stream().events, refs, 0);
        benchmark::DoNotOptimize(r.items.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stream().events.size()));
}

template <bool Parallel>
void BM_IntervalStats(benchmark::State& state)
{
    const ExpectedArrivals refs(scenario().schedule, scenario().range);
    const auto rs = residuals(stream().events, refs, 0);
    AnalysisParams p = scenario().analysis;
    p.interval_s = 0.2; // many short intervals to give the loop some width
    for (auto _ : state)
    {
        auto s = Parallel ? interval_stats(rs, 60.0, p) : serial::interval_stats(rs, 60.0, p);
        benchmark::DoNotOptimize(s.data());
    }
}

} // namespace

BENCHMARK(BM_ImpulseResponse<false>)->Name("impulse_response/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ImpulseResponse<true>)->Name("impulse_response/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulatePass<false>)->Name("simulate_pass/serial")->Arg(30)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulatePass<true>)->Name("simulate_pass/omp")->Arg(30)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Residuals<false>)->Name("residuals/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Residuals<true>)->Name("residuals/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IntervalStats<false>)->Name("interval_stats/serial")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_IntervalStats<true>)->Name("interval_stats/omp")->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
